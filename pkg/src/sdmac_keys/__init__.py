"""Secret-key agreement over a state-dependent multiple-access channel with an eavesdropper.

Exact information measures, channel builders, bound evaluators and optimizers,
and finite-blocklength simulators for the common-key and private-key rounds.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .bounds import (
    MarkovChainError,
    RatePoint,
    common_key_lb_objective,
    corollary2_point,
    degraded_common_key_capacity,
    modadd_lb_closed_form,
    private_key_inner_point,
    private_key_outer_point,
    stuck_at_lb_closed_form,
    upper_bound_value,
)
from .channels import (
    AuxiliaryScheme,
    Round2Scheme,
    SdMacSpec,
    build_modulo_additive,
    build_parallel,
    build_stuck_at,
    full_joint_round1,
    full_joint_round2,
    random_sdmac,
)
from .probability import (
    ConditionalPmf,
    JointPmf,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    mutual_information,
)
from .search import SearchConfig, common_key_ub, optimize_common_key_lb, optimize_private_key_inner
from .specio import load_spec, save_spec

__all__ = [
    "__version__",
    "AuxiliaryScheme",
    "ConditionalPmf",
    "JointPmf",
    "MarkovChainError",
    "RatePoint",
    "Round2Scheme",
    "SdMacSpec",
    "SearchConfig",
    "build_modulo_additive",
    "build_parallel",
    "build_stuck_at",
    "common_key_lb_objective",
    "common_key_ub",
    "conditional_entropy",
    "conditional_mutual_information",
    "corollary2_point",
    "degraded_common_key_capacity",
    "entropy",
    "full_joint_round1",
    "full_joint_round2",
    "load_spec",
    "modadd_lb_closed_form",
    "mutual_information",
    "optimize_common_key_lb",
    "optimize_private_key_inner",
    "private_key_inner_point",
    "private_key_outer_point",
    "random_sdmac",
    "save_spec",
    "stuck_at_lb_closed_form",
    "upper_bound_value",
]
