"""Single-letter key-rate bounds for the SD-MAC with an eavesdropper.

Round 1 (common key):
    lower bound   [I(V;Y,T|U) - I(V;Z|U)]^+ under three side constraints
    upper bound   I(X1,X2,S;Y,T|Z)
    degraded case I(V;Y,T|U,Z) when (U,V) -> Y -> Z
Round 2 (private keys), for each transmitter i:
    inner  [min{I(Ti;Xi,S|T) - I(Ti;Xj,S|T), I(Ti;Xi,S|T) - I(Ti;Z)}]^+
    outer  min{I(Ti;Xi,S|Z), I(Ti;Xi|Xj,S)}
    special chain case  I(Ti;Xi|S,Xj)

Values are exact functions of the tabular joint law; nothing here samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .channels import (
    S, T, U, V, X1, X2, Y, Z, T1, T2,
    AuxiliaryScheme,
    Round2Scheme,
    SdMacSpec,
    full_joint_round1,
    full_joint_round2,
)
from .probability import (
    ConditionalPmf,
    compose,
    binary_convolution,
    binary_entropy,
    conditional_entropy,
    conditional_mutual_information as cmi,
)

DEFAULT_TOL = 1e-9


class MarkovChainError(ValueError):
    """A bound was requested whose Markov-chain hypothesis fails."""


@dataclass(frozen=True)
class Constraint:
    name: str
    lhs: float
    rhs: float
    satisfied: bool

    @classmethod
    def check(cls, name: str, lhs: float, rhs: float, tol: float = DEFAULT_TOL) -> Constraint:
        return cls(name, lhs, rhs, lhs <= rhs + tol)

    @property
    def violation(self) -> float:
        return max(0.0, self.lhs - self.rhs)


@dataclass(frozen=True)
class RatePoint:
    """Evaluated bound: clamped rates, signed raw values, constraint report.

    ``raw`` keeps the objective before the [.]^+ clamp plus any diagnostic
    terms (individual mutual informations, Markov gaps).
    """

    r0: float | None = None
    r1: float | None = None
    r2: float | None = None
    raw: dict = field(default_factory=dict)
    constraints: tuple[Constraint, ...] = ()
    scheme: object = None

    @property
    def feasible(self) -> bool:
        return all(c.satisfied for c in self.constraints)


def _clamp(x: float) -> float:
    return max(0.0, x)


def round1_constraints(joint, r_c: float, proof_consistent: bool = False, tol: float = DEFAULT_TOL):
    """Side constraints of the common-key lower bound.

    The printed form requires I(U;Y|T) <= I(U;S) and I(V;Y,T|U) <= I(V;S|U);
    ``proof_consistent=True`` flips both, which is what the covering and
    packing steps of the achievability argument need.
    """
    i_uy_t = cmi(joint, U, Y, T)
    i_us = cmi(joint, U, S)
    i_vyt_u = cmi(joint, V, (Y, T), U)
    i_vs_u = cmi(joint, V, S, U)
    h_uv_s = conditional_entropy(joint, (U, V), S)
    if proof_consistent:
        cs = [
            Constraint.check("I(U;S) <= I(U;Y|T)", i_us, i_uy_t, tol),
            Constraint.check("I(V;S|U) <= I(V;Y,T|U)", i_vs_u, i_vyt_u, tol),
        ]
    else:
        cs = [
            Constraint.check("I(U;Y|T) <= I(U;S)", i_uy_t, i_us, tol),
            Constraint.check("I(V;Y,T|U) <= I(V;S|U)", i_vyt_u, i_vs_u, tol),
        ]
    cs.append(Constraint.check("H(U,V|S) <= R_C", h_uv_s, r_c, tol))
    return tuple(cs)


def common_key_lb_objective(
    spec: SdMacSpec,
    aux: AuxiliaryScheme,
    r_c: float = math.inf,
    proof_consistent: bool = False,
    tol: float = DEFAULT_TOL,
) -> RatePoint:
    """Common-key lower bound [I(V;Y,T|U) - I(V;Z|U)]^+ for one auxiliary scheme."""
    joint = full_joint_round1(spec, aux)
    main = cmi(joint, V, (Y, T), U)
    leak = cmi(joint, V, Z, U)
    raw = main - leak
    return RatePoint(
        r0=_clamp(raw),
        raw={"r0": raw, "I(V;Y,T|U)": main, "I(V;Z|U)": leak},
        constraints=round1_constraints(joint, r_c, proof_consistent, tol),
        scheme=aux,
    )


def upper_bound_value(spec: SdMacSpec, input_law) -> float:
    """I(X1,X2,S;Y,T|Z) for an input law p(x1,x2|s), a ConditionalPmf or array [s,x1,x2]."""
    if not isinstance(input_law, ConditionalPmf):
        input_law = ConditionalPmf([spec.var(S)], [spec.var(X1), spec.var(X2)], input_law)
    joint = compose(compose(compose(spec.state_pmf, spec.degrade_kernel), input_law), spec.channel_kernel)
    return cmi(joint, (X1, X2, S), (Y, T), Z)


def check_degraded(joint, tol: float = 1e-10) -> dict:
    """Measured Markov gaps for (U,V) -> Y -> Z and the T-augmented form the identity uses."""
    gaps = {
        "I(U,V;Z|Y)": cmi(joint, (U, V), Z, Y),
        "I(V;Z|U,Y,T)": cmi(joint, V, Z, (U, Y, T)),
    }
    if any(g > tol for g in gaps.values()):
        detail = ", ".join(f"{k} = {v:.3e}" for k, v in gaps.items())
        raise MarkovChainError(f"eavesdropper output is not degraded with respect to Y: {detail}")
    return gaps


def degraded_common_key_capacity(
    spec: SdMacSpec,
    aux: AuxiliaryScheme,
    r_c: float = math.inf,
    proof_consistent: bool = False,
    markov_tol: float = 1e-10,
    tol: float = DEFAULT_TOL,
) -> RatePoint:
    """I(V;Y,T|U,Z) under the degraded-eavesdropper chain, with the lower-bound constraints."""
    joint = full_joint_round1(spec, aux)
    gaps = check_degraded(joint, markov_tol)
    value = cmi(joint, V, (Y, T), (U, Z))
    lb_raw = cmi(joint, V, (Y, T), U) - cmi(joint, V, Z, U)
    return RatePoint(
        r0=value,
        raw={"r0": value, "lower_bound_raw": lb_raw, **gaps},
        constraints=round1_constraints(joint, r_c, proof_consistent, tol),
        scheme=aux,
    )


def _private_terms(joint, i: int) -> dict:
    ti, xi, xj = (T1, X1, X2) if i == 1 else (T2, X2, X1)
    return {
        "own": cmi(joint, ti, (xi, S), T),
        "cross": cmi(joint, ti, (xj, S), T),
        "eve": cmi(joint, ti, Z),
        "receiver": cmi(joint, ti, Y, T),
    }


def _round2_constraints(terms1, terms2, tol):
    return (
        Constraint.check("I(T1;X1,S|T) <= I(T1;Y|T)", terms1["own"], terms1["receiver"], tol),
        Constraint.check("I(T2;X2,S|T) <= I(T2;Y|T)", terms2["own"], terms2["receiver"], tol),
    )


def private_key_inner_point(spec: SdMacSpec, scheme: Round2Scheme, tol: float = DEFAULT_TOL) -> RatePoint:
    joint = full_joint_round2(spec, scheme)
    t1, t2 = _private_terms(joint, 1), _private_terms(joint, 2)
    raw = {}
    for i, t in ((1, t1), (2, t2)):
        raw[f"r{i}"] = min(t["own"] - t["cross"], t["own"] - t["eve"])
        for k in ("own", "cross", "eve", "receiver"):
            raw[f"{k}{i}"] = t[k]
    return RatePoint(
        r1=_clamp(raw["r1"]),
        r2=_clamp(raw["r2"]),
        raw=raw,
        constraints=_round2_constraints(t1, t2, tol),
        scheme=scheme,
    )


def private_key_outer_point(spec: SdMacSpec, scheme: Round2Scheme) -> RatePoint:
    joint = full_joint_round2(spec, scheme)
    raw = {
        "eve_term1": cmi(joint, T1, (X1, S), Z),
        "cond_term1": cmi(joint, T1, X1, (X2, S)),
        "eve_term2": cmi(joint, T2, (X2, S), Z),
        "cond_term2": cmi(joint, T2, X2, (X1, S)),
    }
    raw["r1"] = min(raw["eve_term1"], raw["cond_term1"])
    raw["r2"] = min(raw["eve_term2"], raw["cond_term2"])
    return RatePoint(r1=raw["r1"], r2=raw["r2"], raw=raw, scheme=scheme)


def corollary2_point(spec: SdMacSpec, scheme: Round2Scheme, markov_tol: float = 1e-10, tol: float = DEFAULT_TOL) -> RatePoint:
    """I(Ti;Xi|S,Xj) when (X1,T1) -> (S,T) -> (X2,T2) -> Z holds."""
    joint = full_joint_round2(spec, scheme)
    gaps = {
        "I(X1,T1;X2,T2|S,T)": cmi(joint, (X1, T1), (X2, T2), (S, T)),
        "I(S,T;Z|X2,T2)": cmi(joint, (S, T), Z, (X2, T2)),
    }
    if any(g > markov_tol for g in gaps.values()):
        detail = ", ".join(f"{k} = {v:.3e}" for k, v in gaps.items())
        raise MarkovChainError(f"(X1,T1) -> (S,T) -> (X2,T2) -> Z fails: {detail}")
    t1, t2 = _private_terms(joint, 1), _private_terms(joint, 2)
    r1 = cmi(joint, T1, X1, (S, X2))
    r2 = cmi(joint, T2, X2, (S, X1))
    return RatePoint(
        r1=r1,
        r2=r2,
        raw={"r1": r1, "r2": r2, **gaps},
        constraints=_round2_constraints(t1, t2, tol),
        scheme=scheme,
    )


@dataclass(frozen=True)
class ClosedFormBound:
    rate: float
    raw_rate: float
    constraint: float


def stuck_at_lb_closed_form(p: float) -> ClosedFormBound:
    """Stuck-at memory: rate p bits with H(V|S) <= 1 - p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    return ClosedFormBound(rate=p, raw_rate=p, constraint=1.0 - p)


def modadd_lb_closed_form(alpha: float, p_s: float, p_1: float, p_2: float, r_c: float = math.inf) -> ClosedFormBound:
    """Modulo-additive channel with U = T = const and effective input V ~ Bern(alpha).

    ``constraint`` is the right-hand side of the H(V|S) condition,
    min{H_b(a) + H_b(a*p_1) - H_b((a*p_S)*p_1), R_C}.
    """
    conv, hb = binary_convolution, binary_entropy
    a_s = conv(alpha, p_s)
    raw = hb(conv(a_s, p_1)) + hb(conv(p_s, p_2)) - hb(conv(a_s, p_2)) - hb(conv(p_s, p_1))
    limit = hb(alpha) + hb(conv(alpha, p_1)) - hb(conv(a_s, p_1))
    return ClosedFormBound(rate=_clamp(raw), raw_rate=raw, constraint=min(limit, r_c))
