"""Command-line experiment driver: seeded bound evaluations, simulations and sweeps.

Every task writes the same long-format CSV::

    # sdmac-keys <version> <config echo as JSON>
    axis,value,metric,kind,estimate,lo,hi

``axis``/``value`` are ``-`` outside sweeps, ``kind`` is ``exact`` or
``estimated`` and ``lo``/``hi`` carry a 95% Wilson interval for estimated
proportions (empty otherwise). Floats use 12 significant digits. The output
depends only on the configuration and seed, never on ``--jobs``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    common_key_lb_objective,
    corollary2_point,
    degraded_common_key_capacity,
    modadd_lb_closed_form,
    private_key_inner_point,
    private_key_outer_point,
    stuck_at_lb_closed_form,
)
from .channels import (
    AuxiliaryScheme,
    Round2Scheme,
    SdMacSpec,
    build_modulo_additive,
    build_parallel,
    build_stuck_at,
    modadd_scheme,
    parallel_scheme,
    random_aux_scheme,
    random_round2_scheme,
    random_sdmac,
    state_copy_scheme,
)
from .report import EXACT, Metric, SimulationReport
from .round1 import (
    EnumerationBudgetError,
    Round1Config,
    exact_round1_metrics,
    generate_codebook,
    monte_carlo_round1,
    reference_round1_config,
)
from .round1 import _rng as _stream
from .round2 import Round2Config, exact_round2_metrics, generate_t_codebooks, monte_carlo_round2
from .search import SearchConfig, common_key_ub, optimize_common_key_lb, optimize_private_key_inner
from .specio import _parser, format_spec, load_spec, save_spec

TASKS = (
    "common-lb", "common-ub", "degraded", "private-inner", "private-outer", "corollary2",
    "closed-form-stuck", "closed-form-modadd", "sim-round1", "sim-round2",
)
BOUND_TASKS = TASKS[:8]
CSV_HEADER = ("axis", "value", "metric", "kind", "estimate", "lo", "hi")
NO_AXIS = "-"


class UsageError(ValueError):
    """Invalid configuration; the message names the offending field."""


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _float(text) -> float:
    return float(text)


def _int(text) -> int:
    val = float(text)
    if val != int(val):
        raise ValueError(f"not an integer: {text!r}")
    return int(val)


# builder name -> (factory, parameter converters)
BUILDERS = {
    "stuck_at": (build_stuck_at, {"p": _float, "eve_mode": str}),
    "modadd": (build_modulo_additive, {"p_s": _float, "p_1": _float, "p_2": _float, "cascade": _bool}),
    "parallel": (build_parallel, {"p_s": _float, "p_1": _float, "p_2": _float, "p_e": _float, "eve": str}),
    "random": (None, {"seed": _int, "cascade": _bool, "concentration": _float}),
}

ROUND1, ROUND2 = "round1", "round2"
SCHEMES = {
    "modadd": (ROUND1, {"alpha": _float}),
    "state_copy": (ROUND1, {"x1_symbol": _int, "x2_symbol": _int}),
    "random": (ROUND1, {"seed": _int, "u_size": _int, "v_size": _int}),
    "parallel": (ROUND2, {"q": _float}),
    "random2": (ROUND2, {"seed": _int, "t1_size": _int, "t2_size": _int}),
}

# task parameter -> (converter, default)
PARAMS = {
    "rc": (_float, math.inf),
    "proof_consistent": (_bool, False),
    "restarts": (_int, 8),
    "iterations": (_int, 40),
    "n": (_int, 6),
    "trials": (_int, 1000),
    "exact": (_bool, False),
    "codebooks": (_int, 1),
    "decoder": (str, "typicality"),
    "eps": (_float, 0.2),
    "tie_break": (str, "random"),
    "batch": (_int, 100),
    "fraction": (_float, 0.6),
    "rate_u": (_float, None),
    "rate_v_total": (_float, None),
    "rate_v_bins": (_float, None),
    "rate_t": (_float, 0.6),
    "rate_bins": (_float, 0.4),
    "rate_subbins": (_float, 0.2),
}


@dataclass(frozen=True)
class NamedSpec:
    """``name:k=v,...`` reference to a builder or scheme, with converted values."""

    name: str
    args: tuple[tuple[str, object], ...] = ()

    @classmethod
    def parse(cls, text: str, registry: dict, what: str) -> NamedSpec:
        name, _, rest = str(text).strip().partition(":")
        if name not in registry:
            raise UsageError(f"{what}: unknown name {name!r}; choose from {sorted(registry)}")
        conv = registry[name][1]
        args = {}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, eq, val = item.partition("=")
            key = key.strip()
            if not eq or key not in conv:
                raise UsageError(f"{what}: bad parameter {item!r} for {name!r}; known: {sorted(conv)}")
            try:
                args[key] = conv[key](val.strip())
            except ValueError as exc:
                raise UsageError(f"{what}.{key}: {exc}") from None
        return cls(name, tuple(sorted(args.items())))

    def with_arg(self, key: str, value) -> NamedSpec:
        args = dict(self.args)
        args[key] = value
        return NamedSpec(self.name, tuple(sorted(args.items())))

    def kwargs(self) -> dict:
        return dict(self.args)

    def text(self) -> str:
        body = ",".join(f"{k}={_fmt(v) if isinstance(v, float) else v}" for k, v in self.args)
        return f"{self.name}:{body}" if body else self.name


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: channel source, task, task parameters and optional sweep axis.

    Exactly one of ``builder`` and ``channel`` (a spec-file path) is set.
    ``jobs`` and ``out`` affect only execution and are left out of the echo.
    """

    task: str
    builder: NamedSpec | None = None
    channel: str | None = None
    scheme: NamedSpec | None = None
    params: dict = field(default_factory=dict)
    axis: str | None = None
    values: tuple = ()
    seed: int = 0
    jobs: int = 1
    out: str | None = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise UsageError(f"task: unknown task {self.task!r}; choose from {list(TASKS)}")
        if (self.builder is None) == (self.channel is None):
            raise UsageError("channel: give exactly one of --builder and --channel")
        unknown = set(self.params) - set(PARAMS)
        if unknown:
            raise UsageError(f"params: unknown parameter(s) {sorted(unknown)}")
        resolved = {k: default for k, (_, default) in PARAMS.items()}
        for k, v in self.params.items():
            try:
                resolved[k] = PARAMS[k][0](v) if v is not None else None
            except ValueError as exc:
                raise UsageError(f"{k}: {exc}") from None
        object.__setattr__(self, "params", resolved)
        if self.seed < 0:
            raise UsageError("seed: must be nonnegative")
        if self.jobs < 1:
            raise UsageError("jobs: must be >= 1")
        if self.task.startswith("sim-") and resolved["trials"] < 1:
            raise UsageError(f"trials: must be >= 1 for {self.task}, got {resolved['trials']}")
        if self.axis is not None:
            if not self.values:
                raise UsageError("values: a sweep needs at least one value")
            object.__setattr__(self, "values", tuple(self._axis_converter()(v) for v in self.values))
        elif self.values:
            raise UsageError("axis: sweep values given without an axis")

    def _axis_target(self) -> tuple[str, str]:
        """Resolve the sweep axis to (where, key) with where in params|builder|scheme."""
        where, dot, key = self.axis.partition(".")
        if not dot:
            where, key = "", self.axis
        candidates = []
        if where in ("", "params") and key in PARAMS:
            candidates.append(("params", key))
        if where in ("", "builder") and self.builder is not None and key in BUILDERS[self.builder.name][1]:
            candidates.append(("builder", key))
        if where in ("", "scheme") and self.scheme is not None and key in SCHEMES[self.scheme.name][1]:
            candidates.append(("scheme", key))
        if not candidates:
            raise UsageError(f"axis: {self.axis!r} names no parameter of this task, builder or scheme")
        if len(candidates) > 1:
            raise UsageError(f"axis: {self.axis!r} is ambiguous; prefix it with params., builder. or scheme.")
        return candidates[0]

    def _axis_converter(self):
        where, key = self._axis_target()
        if where == "params":
            return PARAMS[key][0]
        registry = BUILDERS if where == "builder" else SCHEMES
        spec = self.builder if where == "builder" else self.scheme
        return registry[spec.name][1][key]

    def at(self, value, index: int) -> ExperimentConfig:
        """Single-point config for one sweep value, with a seed derived from the index."""
        where, key = self._axis_target()
        changes = {"axis": None, "values": (), "seed": _point_seed(self.seed, index)}
        if where == "params":
            changes["params"] = {**self.params, key: value}
        elif where == "builder":
            changes["builder"] = self.builder.with_arg(key, value)
        else:
            changes["scheme"] = self.scheme.with_arg(key, value)
        return replace(self, **changes)

    def echo(self) -> dict:
        out = {
            "task": self.task,
            "builder": self.builder.text() if self.builder else None,
            "channel": self.channel,
            "scheme": self.scheme.text() if self.scheme else None,
            "params": {k: _echo_value(v) for k, v in self.params.items()},
            "seed": self.seed,
        }
        if self.axis is not None:
            out["axis"] = self.axis
            out["values"] = [_echo_value(v) for v in self.values]
        return out


@dataclass
class RunResult:
    """Per-point reports in axis order plus the rendered CSV text."""

    config: ExperimentConfig
    points: list[tuple[object, SimulationReport]]
    csv: str

    @property
    def report(self) -> SimulationReport:
        return self.points[0][1]


def _point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _echo_value(v):
    if isinstance(v, float):
        return "inf" if math.isinf(v) else _fmt(v)
    return v


# channel and scheme construction


def make_channel(config: ExperimentConfig) -> SdMacSpec:
    if config.channel is not None:
        return load_spec(config.channel)
    name, kwargs = config.builder.name, config.builder.kwargs()
    if name == "random":
        seed = kwargs.pop("seed", 0)
        return random_sdmac(np.random.default_rng(seed), **kwargs)
    try:
        return BUILDERS[name][0](**kwargs)
    except TypeError as exc:
        raise UsageError(f"builder: {exc}") from None


def make_scheme(config: ExperimentConfig, spec: SdMacSpec, kind: str, required: bool):
    if config.scheme is None:
        if required:
            raise UsageError(f"scheme: task {config.task} needs a {kind} scheme (--scheme)")
        return None
    name = config.scheme.name
    if SCHEMES[name][0] != kind:
        raise UsageError(f"scheme: {name!r} is a {SCHEMES[name][0]} scheme but {config.task} needs {kind}")
    kwargs = config.scheme.kwargs()
    try:
        if name == "modadd":
            return modadd_scheme(spec, **kwargs)
        if name == "state_copy":
            return state_copy_scheme(spec, **kwargs)
        if name == "parallel":
            return parallel_scheme(spec, **kwargs)
        rng = np.random.default_rng(kwargs.pop("seed", 0))
        if name == "random":
            return random_aux_scheme(spec, rng, **kwargs)
        return random_round2_scheme(spec, rng, **kwargs)
    except TypeError as exc:
        raise UsageError(f"scheme: {exc}") from None


def _search_config(config: ExperimentConfig) -> SearchConfig:
    p = config.params
    return SearchConfig(restarts=p["restarts"], iterations=p["iterations"], seed=config.seed,
                        proof_consistent=p["proof_consistent"], workers=config.jobs)


# task bodies; each returns a list of metrics


def _point_metrics(point, rate_names) -> list[Metric]:
    out = [Metric(name, float(getattr(point, name))) for name in rate_names]
    out += [Metric(k, float(v)) for k, v in point.raw.items() if k not in rate_names]
    for c in point.constraints:
        out.append(Metric(f"{c.name} [lhs]", float(c.lhs)))
        out.append(Metric(f"{c.name} [rhs]", float(c.rhs)))
    if point.constraints:
        out.append(Metric("feasible", float(point.feasible)))
    return out


def _common_lb(config, spec):
    aux = make_scheme(config, spec, ROUND1, required=False)
    p = config.params
    if aux is None:
        point = optimize_common_key_lb(spec, p["rc"], _search_config(config))
    else:
        point = common_key_lb_objective(spec, aux, p["rc"], p["proof_consistent"])
    return _point_metrics(point, ("r0",))


def _common_ub(config, spec):
    aux = make_scheme(config, spec, ROUND1, required=False)
    point = common_key_ub(spec, _search_config(config), candidates=() if aux is None else (aux,))
    return _point_metrics(point, ("r0",))


def _degraded(config, spec):
    aux = make_scheme(config, spec, ROUND1, required=False)
    p = config.params
    if aux is None:
        aux = optimize_common_key_lb(spec, p["rc"], _search_config(config)).scheme
    point = degraded_common_key_capacity(spec, aux, p["rc"], p["proof_consistent"])
    return _point_metrics(point, ("r0",))


def _private_inner(config, spec):
    scheme = make_scheme(config, spec, ROUND2, required=False)
    if scheme is None:
        point = optimize_private_key_inner(spec, _search_config(config))
    else:
        point = private_key_inner_point(spec, scheme)
    return _point_metrics(point, ("r1", "r2"))


def _private_outer(config, spec):
    scheme = make_scheme(config, spec, ROUND2, required=True)
    return _point_metrics(private_key_outer_point(spec, scheme), ("r1", "r2"))


def _corollary2(config, spec):
    scheme = make_scheme(config, spec, ROUND2, required=True)
    return _point_metrics(corollary2_point(spec, scheme), ("r1", "r2"))


def _closed_form_stuck(config, spec):
    if config.builder is None or config.builder.name != "stuck_at":
        raise UsageError("builder: closed-form-stuck needs --builder stuck_at:p=...")
    b = stuck_at_lb_closed_form(config.builder.kwargs()["p"])
    return [Metric("r0", b.rate), Metric("r0_raw", b.raw_rate), Metric("H(V|S) limit", b.constraint)]


def _closed_form_modadd(config, spec):
    if config.builder is None or config.builder.name != "modadd":
        raise UsageError("builder: closed-form-modadd needs --builder modadd:p_s=...,p_1=...,p_2=...")
    if config.scheme is None or config.scheme.name != "modadd":
        raise UsageError("scheme: closed-form-modadd needs --scheme modadd:alpha=...")
    kw = config.builder.kwargs()
    b = modadd_lb_closed_form(config.scheme.kwargs()["alpha"], kw["p_s"], kw["p_1"], kw["p_2"], config.params["rc"])
    return [Metric("r0", b.rate), Metric("r0_raw", b.raw_rate), Metric("H(V|S) limit", b.constraint)]


def _round1_config(config, spec, aux) -> Round1Config:
    p = config.params
    overrides = dict(r_c=p["rc"], typicality_eps=p["eps"], decoder=p["decoder"], seed=config.seed,
                     tie_break=p["tie_break"], batch=p["batch"])
    for name in ("rate_u", "rate_v_total", "rate_v_bins"):
        if p[name] is not None:
            overrides[name] = p[name]
    return reference_round1_config(spec, aux, p["n"], p["fraction"], **overrides)


def _sim_round1(config, spec):
    aux = make_scheme(config, spec, ROUND1, required=True)
    cfg = _round1_config(config, spec, aux)
    p = config.params
    metrics = list(monte_carlo_round1(spec, aux, cfg, p["trials"]).metrics)
    if p["exact"]:
        rows = []
        for b in range(p["codebooks"]):
            cb = generate_codebook(spec, aux, cfg, _stream(cfg.seed, 1, b))
            m = exact_round1_metrics(spec, aux, cb, cfg)
            rows.append([getattr(m, f.name) for f in fields(m)])
        mean = np.mean(rows, axis=0)
        metrics += [Metric(f"exact_{f.name}", float(v)) for f, v in zip(fields(m), mean)]
    return metrics


def _round2_config(config) -> Round2Config:
    p = config.params
    return Round2Config(n=p["n"], rate_t=p["rate_t"], rate_bins=p["rate_bins"], rate_subbins=p["rate_subbins"],
                        typicality_eps=p["eps"], seed=config.seed, tie_break=p["tie_break"], batch=p["batch"])


def _sim_round2(config, spec):
    scheme = make_scheme(config, spec, ROUND2, required=True)
    cfg = _round2_config(config)
    p = config.params
    metrics = list(monte_carlo_round2(spec, scheme, cfg, p["trials"]).metrics)
    if p["exact"]:
        rows = []
        for b in range(p["codebooks"]):
            cbs = generate_t_codebooks(spec, scheme, cfg, _stream(cfg.seed, 1, b))
            m = exact_round2_metrics(spec, scheme, cbs, cfg)
            rows.append([m.p_err[0], m.p_err[1], m.leak_eve[0], m.leak_eve[1], m.leak_cross[0], m.leak_cross[1],
                         m.key_entropy[0], m.key_entropy[1], m.key_dependence])
        names = ("p_err_1", "p_err_2", "leak_eve_1", "leak_eve_2", "leak_cross_1", "leak_cross_2",
                 "key_entropy_1", "key_entropy_2", "key_dependence")
        metrics += [Metric(f"exact_{k}", float(v)) for k, v in zip(names, np.mean(rows, axis=0))]
    return metrics


_TASK_BODIES = {
    "common-lb": _common_lb,
    "common-ub": _common_ub,
    "degraded": _degraded,
    "private-inner": _private_inner,
    "private-outer": _private_outer,
    "corollary2": _corollary2,
    "closed-form-stuck": _closed_form_stuck,
    "closed-form-modadd": _closed_form_modadd,
    "sim-round1": _sim_round1,
    "sim-round2": _sim_round2,
}


def evaluate(config: ExperimentConfig) -> SimulationReport:
    """Run one non-sweep task."""
    start = time.perf_counter()
    spec = make_channel(config)
    metrics = _TASK_BODIES[config.task](config, spec)
    return SimulationReport(config.echo(), metrics, config.seed, __version__, time.perf_counter() - start)


def sweep(config: ExperimentConfig) -> list[tuple[object, SimulationReport]]:
    """Evaluate every axis value; points may run in parallel but come back in axis order."""
    if config.axis is None:
        raise UsageError("axis: sweep needs an axis and values")
    points = [config.at(v, i) for i, v in enumerate(config.values)]
    # a sweep spends its workers on points, not inside them
    points = [replace(p, jobs=1) for p in points]
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            reports = list(pool.map(evaluate, points))
    else:
        reports = [evaluate(p) for p in points]
    return list(zip(config.values, reports))


def render_csv(config: ExperimentConfig, points) -> str:
    buf = io.StringIO()
    buf.write(f"# sdmac-keys {__version__} {json.dumps(config.echo(), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for value, report in points:
        axis = NO_AXIS if config.axis is None else config.axis
        val = NO_AXIS if config.axis is None else (_fmt(value) if isinstance(value, float) else value)
        for m in report.metrics:
            lo = "" if m.lo is None else _fmt(m.lo)
            hi = "" if m.hi is None else _fmt(m.hi)
            w.writerow((axis, val, m.name, m.kind, _fmt(m.value), lo, hi))
    return buf.getvalue()


def run(config: ExperimentConfig) -> RunResult:
    """Dispatch, render the CSV and write it to ``config.out`` when set."""
    points = sweep(config) if config.axis is not None else [(None, evaluate(config))]
    text = render_csv(config, points)
    if config.out:
        Path(config.out).write_text(text)
    return RunResult(config, points, text)


# argument handling


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI file with an [experiment] section; flags override it")
    p.add_argument("--channel", help="channel-spec file")
    p.add_argument("--builder", help="built-in channel, name:k=v,... (" + ", ".join(BUILDERS) + ")")
    p.add_argument("--scheme", help="built-in scheme, name:k=v,... (" + ", ".join(SCHEMES) + ")")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="write the CSV here instead of stdout")
    p.add_argument("--jobs", type=int, help="worker threads (never changes the output)")
    p.add_argument("--rc", help="conferencing rate, inf for unlimited")
    p.add_argument("--n", help="blocklength")
    p.add_argument("--trials", help="Monte-Carlo trials")
    p.add_argument("--exact", action="store_const", const="true", help="add exact enumeration metrics")
    p.add_argument("--codebooks", help="codebooks averaged by --exact")
    p.add_argument("--decoder", choices=("typicality", "max_likelihood"))
    p.add_argument("--proof-consistent", dest="proof_consistent", action="store_const", const="true",
                   help="use the covering direction for the lower-bound constraints")
    p.add_argument("--eps", help="typicality tolerance")
    p.add_argument("--tie-break", dest="tie_break", choices=("random", "lowest"))
    p.add_argument("--batch", help="Monte-Carlo trials per codebook")
    p.add_argument("--fraction", help="round-1 rates as this fraction of the bound terms")
    p.add_argument("--restarts")
    p.add_argument("--iterations")
    for name in ("rate_u", "rate_v_total", "rate_v_bins", "rate_t", "rate_bins", "rate_subbins"):
        p.add_argument("--" + name.replace("_", "-"), dest=name)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sdmac-keys", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    b = sub.add_parser("bounds", help="evaluate or optimize a bound")
    b.add_argument("task", choices=BOUND_TASKS)
    _add_run_options(b)
    s = sub.add_parser("sim", help="simulate a protocol round")
    s.add_argument("round", choices=("round1", "round2"))
    _add_run_options(s)
    w = sub.add_parser("sweep", help="repeat a task over a list of parameter values")
    w.add_argument("--task", choices=TASKS)
    w.add_argument("--axis", help="parameter name, optionally prefixed params., builder. or scheme.")
    w.add_argument("--values", help="comma-separated axis values")
    _add_run_options(w)
    c = sub.add_parser("channel", help="write or check channel-spec files")
    csub = c.add_subparsers(dest="action", required=True)
    make = csub.add_parser("make")
    make.add_argument("--builder", required=True)
    make.add_argument("--out")
    val = csub.add_parser("validate")
    val.add_argument("path")
    return parser


_NOT_PARAMS = {"command", "task", "round", "axis", "values", "config", "channel", "builder", "scheme",
               "seed", "out", "jobs"}


def _read_ini(path: str) -> dict:
    cp = _parser()
    if not cp.read(path):
        raise UsageError(f"config: cannot read {path}")
    if not cp.has_section("experiment"):
        raise UsageError(f"config: {path} has no [experiment] section")
    return {k.replace("-", "_"): v for k, v in cp.items("experiment")}


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    given = {k: v for k, v in vars(args).items() if v is not None}
    merged = _read_ini(given["config"]) if "config" in given else {}
    merged.update(given)
    if args.command == "bounds":
        merged["task"] = args.task
    elif args.command == "sim":
        merged["task"] = "sim-" + args.round
    if "task" not in merged:
        raise UsageError("task: sweep needs --task")
    params = {k: v for k, v in merged.items() if k not in _NOT_PARAMS}
    builder = merged.get("builder")
    scheme = merged.get("scheme")
    values = merged.get("values")
    try:
        seed, jobs = int(merged.get("seed", 0)), int(merged.get("jobs", 1))
    except ValueError as exc:
        raise UsageError(f"seed/jobs: {exc}") from None
    if args.command == "sweep" and not merged.get("axis"):
        raise UsageError("axis: sweep needs --axis and --values")
    return ExperimentConfig(
        task=merged["task"],
        builder=NamedSpec.parse(builder, BUILDERS, "builder") if builder else None,
        channel=merged.get("channel"),
        scheme=NamedSpec.parse(scheme, SCHEMES, "scheme") if scheme else None,
        params=params,
        axis=merged.get("axis") if args.command == "sweep" else None,
        values=tuple(v.strip() for v in values.split(",")) if values and args.command == "sweep" else (),
        seed=seed,
        jobs=jobs,
        out=merged.get("out"),
    )


def _channel_command(args) -> int:
    if args.action == "make":
        cfg = ExperimentConfig(task="common-lb", builder=NamedSpec.parse(args.builder, BUILDERS, "builder"))
        spec = make_channel(cfg)
        if args.out:
            save_spec(spec, args.out)
        else:
            sys.stdout.write(format_spec(spec))
        return 0
    spec = load_spec(args.path)
    sizes = " ".join(f"{name}={a.size}" for name, a in spec.alphabets.items())
    print(f"ok {spec.name} {sizes}")
    return 0


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "channel":
            return _channel_command(args)
        result = run(config_from_args(args))
        if not result.config.out:
            sys.stdout.write(result.csv)
        wall = sum(r.wall_time for _, r in result.points)
        print(f"wall time {wall:.3f} s", file=sys.stderr)
        return 0
    except EnumerationBudgetError as exc:
        print(f"error: budget exceeded: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
