"""Numerical search over auxiliary laws: random restarts plus coordinate moves.

Every candidate is scored by a key that ranks any feasible point above any
infeasible one, feasible points by objective value and infeasible points by
total constraint violation. Infeasible points only steer the search toward
the feasible set; they are never reported as achieving a rate.

Restart seeds come from ``SeedSequence(seed).spawn``, so the outcome does not
depend on how restarts are scheduled across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from itertools import permutations
from typing import Callable, Sequence

import numpy as np

from .bounds import (
    DEFAULT_TOL,
    RatePoint,
    common_key_lb_objective,
    private_key_inner_point,
    upper_bound_value,
)
from .channels import S, T, X1, X2, Y, AuxiliaryScheme, Round2Scheme, SdMacSpec
from .probability import ConditionalPmf

_IMPROVE_EPS = 1e-12


@dataclass(frozen=True)
class SearchConfig:
    """Search budget and cardinality caps.

    ``u_cap`` and ``v_cap`` default to |S| + 1 and |S| + 2 when left as None.
    """

    u_cap: int | None = None
    v_cap: int | None = None
    t1_cap: int = 2
    t2_cap: int = 2
    restarts: int = 8
    iterations: int = 40
    step_init: float = 0.25
    step_shrink: float = 0.5
    step_min: float = 1e-3
    seed: int = 0
    tol: float = DEFAULT_TOL
    proof_consistent: bool = False
    workers: int = 1

    def __post_init__(self):
        for name in ("u_cap", "v_cap"):
            val = getattr(self, name)
            if val is not None and val < 1:
                raise ValueError(f"{name} must be >= 1, got {val}")
        if self.t1_cap < 1 or self.t2_cap < 1:
            raise ValueError("t1_cap and t2_cap must be >= 1")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if not 0.0 < self.step_min <= self.step_init <= 1.0:
            raise ValueError("need 0 < step_min <= step_init <= 1")
        if not 0.0 < self.step_shrink < 1.0:
            raise ValueError("step_shrink must lie in (0, 1)")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def caps(self, spec: SdMacSpec) -> tuple[int, int]:
        ns = spec.size(S)
        return (self.u_cap or ns + 1, self.v_cap or ns + 2)


# scoring


@dataclass(frozen=True)
class Score:
    feasible: bool
    value: float
    violation: float

    def key(self) -> tuple[int, float]:
        return (1, self.value) if self.feasible else (0, -self.violation)

    def beats(self, other: Score) -> bool:
        a, b = self.key(), other.key()
        return a[0] > b[0] or (a[0] == b[0] and a[1] > b[1] + _IMPROVE_EPS)


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


class Round1Evaluator:
    """Vectorized lower-bound objective and constraints for deterministic input maps.

    Parameters are the raw arrays pu[s,u], pv[u,s,v] and integer maps
    x1[u,v,s], x2[u,v,s]. Agrees with ``common_key_lb_objective`` to rounding.
    """

    def __init__(self, spec: SdMacSpec, r_c: float, proof_consistent: bool = False, tol: float = DEFAULT_TOL):
        self.p_s = spec.p_s
        self.p_t = spec.p_t_given_s
        self.w_y = spec.w.sum(axis=4)
        self.w_z = spec.w.sum(axis=3)
        self.r_c = r_c
        self.proof_consistent = proof_consistent
        self.tol = tol
        self._s_idx = np.arange(spec.size(S))[None, None, :]
        self.h_s = _entropy(self.p_s)

    def terms(self, pu, pv, x1, x2) -> dict:
        q = self.p_s[:, None, None] * pu[:, :, None] * pv.transpose(1, 0, 2)  # [s,u,v]
        wy = self.w_y[x1, x2, self._s_idx]  # [u,v,s,y]
        wz = self.w_z[x1, x2, self._s_idx]
        p_uvyt = np.einsum("suv,st,uvsy->uvyt", q, self.p_t, wy)
        p_uvz = np.einsum("suv,uvsz->uvz", q, wz)
        p_uv = q.sum(axis=0)
        p_u = p_uv.sum(axis=1)
        p_su = q.sum(axis=2)
        p_uyt = p_uvyt.sum(axis=1)
        p_ut = p_uyt.sum(axis=1)
        p_yt = p_uyt.sum(axis=0)
        p_t = p_yt.sum(axis=0)
        h_uv, h_u, h_suv, h_su = _entropy(p_uv), _entropy(p_u), _entropy(q), _entropy(p_su)
        h_uyt = _entropy(p_uyt)
        return {
            "main": h_uv + h_uyt - _entropy(p_uvyt) - h_u,
            "leak": h_uv + _entropy(p_uvz.sum(axis=1)) - _entropy(p_uvz) - h_u,
            "i_uy_t": _entropy(p_ut) + _entropy(p_yt) - h_uyt - _entropy(p_t),
            "i_us": h_u + self.h_s - h_su,
            "i_vs_u": h_su + h_uv - h_suv - h_u,
            "h_uv_s": h_suv - self.h_s,
        }

    def score(self, state) -> Score:
        t = self.terms(*state)
        if self.proof_consistent:
            pairs = [(t["i_us"], t["i_uy_t"]), (t["i_vs_u"], t["main"])]
        else:
            pairs = [(t["i_uy_t"], t["i_us"]), (t["main"], t["i_vs_u"])]
        pairs.append((t["h_uv_s"], self.r_c))
        feasible = all(lhs <= rhs + self.tol for lhs, rhs in pairs)
        violation = sum(max(0.0, lhs - rhs) for lhs, rhs in pairs)
        return Score(feasible, t["main"] - t["leak"], violation)


class UpperBoundEvaluator:
    """I(X1,X2,S;Y,T|Z) for an input law given as rows r[s, x1*x2]."""

    def __init__(self, spec: SdMacSpec):
        self.base = spec.p_s[:, None] * spec.p_t_given_s  # [s,t]
        self.w = spec.w
        self.shape = (spec.size(S), spec.size(X1), spec.size(X2))

    def value(self, law_rows: np.ndarray) -> float:
        r = law_rows.reshape(self.shape)
        joint = np.einsum("st,sab,absyz->stabyz", self.base, r, self.w)
        p_az = joint.sum(axis=(1, 4))
        p_ytz = joint.sum(axis=(0, 2, 3))
        p_z = p_ytz.sum(axis=(0, 1))
        return _entropy(p_az) + _entropy(p_ytz) - _entropy(joint) - _entropy(p_z)

    def score(self, state) -> Score:
        return Score(True, self.value(state[0]), 0.0)


# generic local search


ROWS = "rows"


def local_refine(
    state: list[np.ndarray],
    kinds: Sequence[str | int],
    score_fn: Callable[[list[np.ndarray]], Score],
    cfg: SearchConfig,
) -> tuple[list[np.ndarray], Score]:
    """Greedy coordinate ascent.

    ``kinds[i]`` is ``"rows"`` for an array whose last axis is a probability
    row, or an integer cardinality for an integer map whose cells may take any
    value below it. Moves shift ``step`` mass between two entries of a row or
    reassign one map cell. The step shrinks when a full sweep finds nothing.
    """
    state = [a.copy() for a in state]
    current = score_fn(state)
    step = cfg.step_init
    for _ in range(cfg.iterations):
        improved = False
        for idx, kind in enumerate(kinds):
            arr = state[idx]
            if kind == ROWS:
                k = arr.shape[-1]
                n_rows = arr.size // k
                for r in range(n_rows):
                    for i, j in permutations(range(k), 2):
                        flat = state[idx].reshape(n_rows, k)
                        d = min(step, flat[r, j])
                        if d <= 0.0:
                            continue
                        cand = state[idx].copy()
                        cf = cand.reshape(n_rows, k)
                        cf[r, i] += d
                        cf[r, j] -= d
                        trial = state[:idx] + [cand] + state[idx + 1:]
                        sc = score_fn(trial)
                        if sc.beats(current):
                            state, current, improved = trial, sc, True
            else:
                for cell in range(arr.size):
                    for val in range(int(kind)):
                        if state[idx].flat[cell] == val:
                            continue
                        cand = state[idx].copy()
                        cand.flat[cell] = val
                        trial = state[:idx] + [cand] + state[idx + 1:]
                        sc = score_fn(trial)
                        if sc.beats(current):
                            state, current, improved = trial, sc, True
        if not improved:
            step *= cfg.step_shrink
            if step < cfg.step_min:
                break
    return state, current


def _run_restarts(starts: list[list[np.ndarray]], kinds, score_fn, cfg: SearchConfig, tie_key):
    def one(start):
        return local_refine(start, kinds, score_fn, cfg)

    if cfg.workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(one, starts))
    else:
        results = [one(s) for s in starts]
    best = None
    for state, sc in results:
        if best is None or sc.beats(best[1]):
            best = (state, sc)
        elif not best[1].beats(sc) and tie_key(state) < tie_key(best[0]):
            best = (state, sc)
    return best


def _restart_rngs(cfg: SearchConfig, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(child) for child in np.random.SeedSequence(cfg.seed).spawn(n)]


def _state_key(state) -> str:
    return "|".join(np.asarray(a).round(12).tobytes().hex() for a in state)


# common key, lower bound


def _round1_starts(spec: SdMacSpec, cfg: SearchConfig) -> list[list[np.ndarray]]:
    ns, nx1, nx2 = spec.size(S), spec.size(X1), spec.size(X2)
    nu, nv = cfg.caps(spec)
    v_grid = np.broadcast_to(np.arange(nv)[None, :, None], (nu, nv, ns))
    x1_mod = (v_grid % nx1).astype(np.int64)
    x2_mod = ((v_grid // nx1) % nx2).astype(np.int64)
    pu_point = np.zeros((ns, nu))
    pu_point[:, 0] = 1.0

    starts = [[pu_point.copy(), np.full((nu, ns, nv), 1.0 / nv), x1_mod.copy(), x2_mod.copy()]]
    if nv >= ns:
        copy = np.zeros((nu, ns, nv))
        copy[:, np.arange(ns), np.arange(ns)] = 1.0
        starts.append([pu_point.copy(), copy, x1_mod.copy(), x2_mod.copy()])
    rngs = _restart_rngs(cfg, cfg.restarts)
    starts = starts[: cfg.restarts]
    for rng in rngs[len(starts):]:
        conc = 1.0 if rng.random() < 0.5 else 0.3
        starts.append([
            rng.dirichlet(np.full(nu, conc), size=ns),
            rng.dirichlet(np.full(nv, conc), size=(nu, ns)),
            rng.integers(nx1, size=(nu, nv, ns)),
            rng.integers(nx2, size=(nu, nv, ns)),
        ])
    return starts


def optimize_common_key_lb(spec: SdMacSpec, r_c: float = math.inf, cfg: SearchConfig | None = None) -> RatePoint:
    """Search auxiliary schemes for the largest feasible common-key lower bound.

    The returned point is re-evaluated on the full joint table. If no
    restart reaches the feasible set, the least-violating scheme is returned
    with ``r0 = 0`` and its constraint report.
    """
    cfg = cfg or SearchConfig()
    evaluator = Round1Evaluator(spec, r_c, cfg.proof_consistent, cfg.tol)
    kinds = [ROWS, ROWS, spec.size(X1), spec.size(X2)]
    state, score = _run_restarts(_round1_starts(spec, cfg), kinds, evaluator.score, cfg, _state_key)
    aux = AuxiliaryScheme.from_arrays(spec, *state)
    point = common_key_lb_objective(spec, aux, r_c, cfg.proof_consistent, cfg.tol)
    if not score.feasible:
        return replace(point, r0=0.0)
    return point


# common key, upper bound


def induced_input_law(aux: AuxiliaryScheme) -> np.ndarray:
    """p(x1, x2 | s) implied by an auxiliary scheme, as an array [s, x1, x2]."""
    return np.einsum(
        "su,usv,uvsa,uvsb->sab",
        aux.u_kernel.table, aux.v_kernel.table, aux.x1_kernel.table, aux.x2_kernel.table,
    )


def common_key_ub(spec: SdMacSpec, cfg: SearchConfig | None = None, candidates: Sequence = ()) -> RatePoint:
    """Largest I(X1,X2,S;Y,T|Z) found over input laws p(x1,x2|s).

    ``candidates`` (arrays [s,x1,x2]) are refined as additional restarts.
    """
    cfg = cfg or SearchConfig()
    ns, nx = spec.size(S), spec.size(X1) * spec.size(X2)
    evaluator = UpperBoundEvaluator(spec)
    starts = [[np.full((ns, nx), 1.0 / nx)]]
    for rng in _restart_rngs(cfg, cfg.restarts)[1:]:
        conc = 1.0 if rng.random() < 0.5 else 0.3
        starts.append([rng.dirichlet(np.full(nx, conc), size=ns)])
    for cand in candidates:
        table = cand.table if isinstance(cand, ConditionalPmf) else np.asarray(cand, dtype=float)
        starts.append([table.reshape(ns, nx).copy()])
    state, _ = _run_restarts(starts, [ROWS], evaluator.score, cfg, _state_key)
    law = ConditionalPmf([spec.var(S)], [spec.var(X1), spec.var(X2)], state[0].reshape(ns, spec.size(X1), spec.size(X2)))
    value = upper_bound_value(spec, law)
    return RatePoint(r0=value, raw={"r0": value}, scheme=law)


# private keys, inner bound


def optimize_private_key_inner(spec: SdMacSpec, cfg: SearchConfig | None = None, weight: float = 0.5) -> RatePoint:
    """Maximize weight*r1 + (1-weight)*r2 of the private-key inner bound.

    Uses the exact joint-table evaluator throughout, so budgets should be
    modest. The raw (unclamped) rates drive the objective.
    """
    cfg = cfg or SearchConfig()
    if not 0.0 <= weight <= 1.0:
        raise ValueError("weight must lie in [0, 1]")
    ns, nx1, nx2 = spec.size(S), spec.size(X1), spec.size(X2)
    yt = (spec.size(Y), spec.size(T))

    def build(state):
        law, k1, k2 = state
        return Round2Scheme.from_arrays(spec, law.reshape(ns, nx1, nx2), k1, k2)

    def score(state):
        point = private_key_inner_point(spec, build(state), cfg.tol)
        viol = sum(c.violation for c in point.constraints)
        value = weight * point.raw["r1"] + (1.0 - weight) * point.raw["r2"]
        return Score(point.feasible, value, viol)

    starts = []
    for rng in _restart_rngs(cfg, cfg.restarts):
        starts.append([
            rng.dirichlet(np.ones(nx1 * nx2), size=ns),
            rng.dirichlet(np.ones(cfg.t1_cap), size=yt),
            rng.dirichlet(np.ones(cfg.t2_cap), size=yt),
        ])
    state, sc = _run_restarts(starts, [ROWS, ROWS, ROWS], score, cfg, _state_key)
    point = private_key_inner_point(spec, build(state), cfg.tol)
    if not sc.feasible:
        return replace(point, r1=0.0, r2=0.0)
    return point
