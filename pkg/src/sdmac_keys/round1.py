"""Common-key round: superposition codebook, random binning, conferencing,
typicality or maximum-likelihood decoding, and exact/Monte-Carlo metrics.

Index conventions are 0-based: the fallback pair is (0, 0) and bins are
numbered 0 .. n_bins-1.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .bounds import common_key_lb_objective
from .channels import S, T, U, V, Y, Z, AuxiliaryScheme, SdMacSpec, full_joint_round1
from .probability import conditional_mutual_information as cmi
from .probability import entropy_bits, marginalize, mutual_information_table
from .report import ESTIMATED, EXACT, Metric, SimulationReport, plugin_entropy
from .typicality import all_sequences, joint_codes, sequence_law, typical_mask

DECODERS = ("typicality", "max_likelihood")
BINNINGS = ("balanced", "uniform")
TIE_BREAKS = ("random", "lowest")


class CodebookSizeError(ValueError):
    """Requested codebook does not fit the configured memory budget."""


class EnumerationBudgetError(RuntimeError):
    """Exact enumeration would exceed the configured work budget."""


def codebook_size(n: int, rate: float) -> int:
    """floor(2^(n*rate)) clamped to at least 1; a tiny slack absorbs rounding in n*rate."""
    return max(1, int(math.floor(2.0 ** (n * rate) + 1e-9)))


def conference_size(n: int, r_c: float) -> float:
    """Number of distinct conferencing messages, inf for an unlimited link."""
    if math.isinf(r_c):
        return math.inf
    return float(codebook_size(n, r_c))


@dataclass(frozen=True)
class Round1Config:
    """Blocklength, rates (bits/use) and execution options for the common-key round.

    ``tie_break`` fixes how exact enumeration treats the encoder's choice among
    several typical pairs: ``"random"`` averages exactly over a uniform choice,
    ``"lowest"`` always takes the first. Simulation always draws uniformly.
    ``batch`` is the number of Monte-Carlo trials sharing one codebook.
    """

    n: int
    rate_u: float = 0.0
    rate_v_total: float = 0.5
    rate_v_bins: float = 0.25
    r_c: float = math.inf
    typicality_eps: float = 0.2
    decoder: str = "typicality"
    seed: int = 0
    binning: str = "balanced"
    tie_break: str = "random"
    batch: int = 100
    max_codebook_symbols: int = 2**24
    enum_budget: int = 2**27

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        for name in ("rate_u", "rate_v_total", "rate_v_bins", "r_c"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.rate_v_bins > self.rate_v_total:
            raise ValueError(f"rate_v_bins ({self.rate_v_bins}) exceeds rate_v_total ({self.rate_v_total})")
        if self.typicality_eps <= 0:
            raise ValueError("typicality_eps must be positive")
        if self.decoder not in DECODERS:
            raise ValueError(f"decoder must be one of {DECODERS}, got {self.decoder!r}")
        if self.binning not in BINNINGS:
            raise ValueError(f"binning must be one of {BINNINGS}, got {self.binning!r}")
        if self.tie_break not in TIE_BREAKS:
            raise ValueError(f"tie_break must be one of {TIE_BREAKS}, got {self.tie_break!r}")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")

    @property
    def m_u(self) -> int:
        return codebook_size(self.n, self.rate_u)

    @property
    def m_v(self) -> int:
        return codebook_size(self.n, self.rate_v_total)

    @property
    def m_bins(self) -> int:
        return min(codebook_size(self.n, self.rate_v_bins), self.m_v)

    @property
    def m_conf(self) -> float:
        return conference_size(self.n, self.r_c)


@dataclass(frozen=True)
class Round1Laws:
    """Single-letter laws the protocol steps need, taken from the full joint.

    Attributes
    ----------
    p_su, p_suv : arrays [s,u] and [s,u,v] for the encoder's typicality tests
    p_u_yt, p_uv_yt : arrays [u,yt] and [u,v,yt]; yt = y*|T| + t
    p_u, p_v_given_u : codebook generation laws
    h_uv_given_s : asymptotic conferencing rate H(U,V|S)
    """

    p_su: np.ndarray
    p_suv: np.ndarray
    p_u_yt: np.ndarray
    p_uv_yt: np.ndarray
    p_u: np.ndarray
    p_v_given_u: np.ndarray
    h_uv_given_s: float
    n_t: int

    @classmethod
    def from_scheme(cls, spec: SdMacSpec, aux: AuxiliaryScheme) -> Round1Laws:
        joint = full_joint_round1(spec, aux)
        nu, nv = aux.u_size, aux.v_size
        nyt = spec.size(Y) * spec.size(T)
        p_suv = marginalize(joint, (S, U, V)).table
        p_uv = p_suv.sum(axis=0)
        p_u = p_uv.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            p_v_u = np.where(p_u[:, None] > 0, p_uv / p_u[:, None], 1.0 / nv)
        p_uv_yt = marginalize(joint, (U, V, Y, T)).table.reshape(nu, nv, nyt)
        h = entropy_bits(p_suv.ravel()) - entropy_bits(p_suv.sum(axis=(1, 2)))
        return cls(p_suv.sum(axis=2), p_suv, p_uv_yt.sum(axis=1), p_uv_yt, p_u, p_v_u, h, spec.size(T))


@dataclass(frozen=True)
class SuperpositionCodebook:
    """Cloud words u_words[m_u], satellites v_words[m_u, m_v] and the bin map bin_of[m_v]."""

    u_words: np.ndarray
    v_words: np.ndarray
    bin_of: np.ndarray
    n_bins: int
    x1_map: np.ndarray
    x2_map: np.ndarray
    laws: Round1Laws

    @property
    def n(self) -> int:
        return self.u_words.shape[1]

    @property
    def m_u(self) -> int:
        return self.u_words.shape[0]

    @property
    def m_v(self) -> int:
        return self.v_words.shape[1]

    def inputs(self, pair, s_seq) -> tuple[np.ndarray, np.ndarray]:
        """Channel inputs x1, x2 for a chosen (m_u, m_v) and state sequence."""
        mu, mv = pair
        u, v = self.u_words[mu], self.v_words[mu, mv]
        return self.x1_map[u, v, s_seq], self.x2_map[u, v, s_seq]


@dataclass(frozen=True)
class Round1Transcript:
    s_seq: np.ndarray
    t_seq: np.ndarray
    chosen: tuple[int, int]
    chosen_enc2: tuple[int, int]
    conference_bits_used: float
    x1_seq: np.ndarray
    x2_seq: np.ndarray
    y_seq: np.ndarray
    z_seq: np.ndarray
    k0: int
    k0_enc2: int
    k0_hat: int
    decode_ok: bool


def assign_bins(m: int, n_bins: int, rng: np.random.Generator, binning: str = "balanced") -> np.ndarray:
    """Random bin labels for m items.

    ``"balanced"`` deals a random permutation round-robin, so bin sizes differ
    by at most one; ``"uniform"`` draws each label independently.
    """
    if binning == "balanced":
        out = np.empty(m, dtype=np.int64)
        out[rng.permutation(m)] = np.arange(m) % n_bins
        return out
    if binning == "uniform":
        return rng.integers(n_bins, size=m)
    raise ValueError(f"unknown binning {binning!r}")


def _draw_rows(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One categorical draw per row of ``probs`` (last axis)."""
    cdf = np.cumsum(probs, axis=-1)
    u = rng.random(probs.shape[:-1])
    idx = (cdf < u[..., None] * cdf[..., -1:]).sum(axis=-1)
    return np.minimum(idx, probs.shape[-1] - 1)


def generate_codebook(spec: SdMacSpec, aux: AuxiliaryScheme, cfg: Round1Config, rng: np.random.Generator) -> SuperpositionCodebook:
    """Draw u-words i.i.d. from p(u), v-words from p(v|u) per cloud, and bin the v-indices."""
    m_u, m_v, n = cfg.m_u, cfg.m_v, cfg.n
    symbols = m_u * (m_v + 1) * n
    if symbols > cfg.max_codebook_symbols:
        raise CodebookSizeError(
            f"codebook needs {symbols} symbols (~{symbols * 8 / 2**20:.1f} MiB); "
            f"budget is {cfg.max_codebook_symbols}. Lower n or the rates."
        )
    laws = Round1Laws.from_scheme(spec, aux)
    x1_map, x2_map = aux.x_maps()
    u_words = _draw_rows(np.broadcast_to(laws.p_u, (m_u, n, laws.p_u.size)), rng)
    v_probs = laws.p_v_given_u[u_words]  # [m_u, n, v]
    v_words = _draw_rows(np.broadcast_to(v_probs[:, None], (m_u, m_v) + v_probs.shape[1:]), rng)
    bin_of = assign_bins(m_v, cfg.m_bins, rng, cfg.binning)
    return SuperpositionCodebook(u_words, v_words, bin_of, cfg.m_bins, x1_map, x2_map, laws)


def draw_state(spec: SdMacSpec, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """State sequence i.i.d. from p(s) and the receiver's view t through p(t|s)."""
    s = _draw_rows(np.broadcast_to(spec.p_s, (n, spec.size(S))), rng)
    t = _draw_rows(spec.p_t_given_s[s], rng)
    return s, t


def channel_transmit(spec: SdMacSpec, x1_seq, x2_seq, s_seq, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Memoryless use of p(y,z|x1,x2,s) along the sequences."""
    x1, x2, s = (np.asarray(a, dtype=np.int64) for a in (x1_seq, x2_seq, s_seq))
    if not x1.shape == x2.shape == s.shape:
        raise ValueError("x1, x2 and s sequences must have equal length")
    nz = spec.size(Z)
    rows = spec.w[x1, x2, s].reshape(x1.shape + (-1,))
    yz = _draw_rows(rows, rng)
    return yz // nz, yz % nz


# encoding and conferencing


def typical_pairs(codebook: SuperpositionCodebook, s_seq, eps: float) -> np.ndarray:
    """All (m_u, m_v) with (s,u) and (s,u,v) strongly typical, sorted, shape (K, 2)."""
    s = np.asarray(s_seq, dtype=np.int64)
    laws = codebook.laws
    ns, nu, nv = laws.p_suv.shape
    u_ok = typical_mask(joint_codes([s, codebook.u_words], [ns, nu]), laws.p_su, eps)
    out = []
    for mu in np.flatnonzero(u_ok):
        codes = joint_codes([s, codebook.u_words[mu], codebook.v_words[mu]], [ns, nu, nv])
        for mv in np.flatnonzero(typical_mask(codes, laws.p_suv, eps)):
            out.append((mu, mv))
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def encode_conference(codebook: SuperpositionCodebook, s_seq, eps: float, rng: np.random.Generator | None = None) -> tuple[int, int]:
    """Encoder 1's choice: a uniform draw among typical pairs, or the first when ``rng`` is None.

    Falls back to (0, 0) when no pair is typical.
    """
    cands = typical_pairs(codebook, s_seq, eps)
    if len(cands) == 0:
        return (0, 0)
    j = 0 if rng is None else int(rng.integers(len(cands)))
    return tuple(int(a) for a in cands[j])


def conference_transfer(codebook: SuperpositionCodebook, s_seq, eps: float, pair, m_conf: float) -> tuple[int, int]:
    """Encoder 2's reconstruction of encoder 1's pair over an m_conf-message link.

    Encoder 1 sends the pair's rank in the shared candidate list modulo
    m_conf; encoder 2 rebuilds the list from s^n and takes that position.
    The transfer is exact whenever the list has at most m_conf entries.
    """
    cands = typical_pairs(codebook, s_seq, eps)
    if len(cands) == 0:
        return (0, 0)
    hits = np.flatnonzero((cands[:, 0] == pair[0]) & (cands[:, 1] == pair[1]))
    if len(hits) == 0:
        raise ValueError(f"pair {tuple(pair)} is not a typical candidate for this state sequence")
    rank = int(hits[0])
    if not math.isinf(m_conf):
        rank %= int(m_conf)
    return tuple(int(a) for a in cands[rank])


@dataclass(frozen=True)
class ConferenceBudget:
    """Bits needed to agree on the pair at this blocklength, and H(U,V|S) per symbol."""

    bits: float
    u_candidates: int
    max_v_candidates: int
    asymptotic_rate: float


def conferencing_budget(codebook: SuperpositionCodebook, s_seq, eps: float) -> ConferenceBudget:
    """log2(#typical u-words) + max over typical clouds of log2(#typical v-words)."""
    s = np.asarray(s_seq, dtype=np.int64)
    laws = codebook.laws
    ns, nu, nv = laws.p_suv.shape
    u_ok = np.flatnonzero(typical_mask(joint_codes([s, codebook.u_words], [ns, nu]), laws.p_su, eps))
    v_max = 0
    for mu in u_ok:
        codes = joint_codes([s, codebook.u_words[mu], codebook.v_words[mu]], [ns, nu, nv])
        v_max = max(v_max, int(typical_mask(codes, laws.p_suv, eps).sum()))
    bits = math.log2(max(1, len(u_ok))) + math.log2(max(1, v_max))
    return ConferenceBudget(bits, len(u_ok), v_max, laws.h_uv_given_s)


# decoding


def _yt_codes(y_seq, t_seq, nt: int) -> np.ndarray:
    return np.asarray(y_seq, dtype=np.int64) * nt + np.asarray(t_seq, dtype=np.int64)


def decode_pairs(codebook: SuperpositionCodebook, yt: np.ndarray, eps: float, mode: str, chunk: int = 2048):
    """Decode a batch of combined (y,t) sequences, shape (B, n).

    Returns arrays (m_u, m_v, ok) of length B.
    """
    yt = np.atleast_2d(np.asarray(yt, dtype=np.int64))
    if mode not in DECODERS:
        raise ValueError(f"decoder must be one of {DECODERS}, got {mode!r}")
    out_u, out_v, out_ok = [], [], []
    for start in range(0, len(yt), chunk):
        block = yt[start:start + chunk]
        fn = _decode_typical if mode == "typicality" else _decode_ml
        mu, mv, ok = fn(codebook, block, eps)
        out_u.append(mu)
        out_v.append(mv)
        out_ok.append(ok)
    return np.concatenate(out_u), np.concatenate(out_v), np.concatenate(out_ok)


def _decode_typical(cb: SuperpositionCodebook, yt: np.ndarray, eps: float):
    laws = cb.laws
    nu, nv, nyt = laws.p_uv_yt.shape
    b = len(yt)
    codes_u = joint_codes([cb.u_words[:, None, :], yt[None]], [nu, nyt])  # [m_u, b, n]
    u_typ = typical_mask(codes_u, laws.p_u_yt, eps)
    unique_u = u_typ.sum(axis=0) == 1
    mu = np.where(unique_u, u_typ.argmax(axis=0), 0)
    words_u = cb.u_words[mu]  # [b, n]
    words_v = cb.v_words[mu]  # [b, m_v, n]
    codes_v = joint_codes([words_u[:, None, :], words_v, yt[:, None, :]], [nu, nv, nyt])
    v_typ = typical_mask(codes_v, laws.p_uv_yt, eps)  # [b, m_v]
    unique_v = v_typ.sum(axis=1) == 1
    ok = unique_u & unique_v
    mv = np.where(ok, v_typ.argmax(axis=1), 0)
    mu = np.where(ok, mu, 0)
    return mu, mv, ok


def _decode_ml(cb: SuperpositionCodebook, yt: np.ndarray, eps: float):
    laws = cb.laws
    nu, nv, nyt = laws.p_uv_yt.shape
    p_uv = laws.p_uv_yt.sum(axis=2, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(p_uv > 0, laws.p_uv_yt / p_uv, 0.0)
        log_w = np.log(cond)
    m_u, m_v, n = cb.v_words.shape
    u_c = np.repeat(cb.u_words, m_v, axis=0)  # [c, n]
    v_c = cb.v_words.reshape(m_u * m_v, n)
    table = log_w[u_c, v_c]  # [c, n, yt]
    pos = np.arange(n)
    scores = table[:, pos[None, :], yt].sum(axis=2)  # [c, b]
    best = scores.argmax(axis=0)
    ok = np.isfinite(scores[best, np.arange(len(yt))])
    return best // m_v, best % m_v, ok


def decode_common_key(codebook: SuperpositionCodebook, y_seq, t_seq, eps: float, mode: str = "typicality") -> tuple[int, bool]:
    """Receiver's key estimate: the bin of the decoded v-word, and whether decoding succeeded."""
    yt = _yt_codes(y_seq, t_seq, codebook.laws.n_t)[None]
    _, mv, ok = decode_pairs(codebook, yt, eps, mode)
    return int(codebook.bin_of[mv[0]]), bool(ok[0])


def run_round1(spec: SdMacSpec, codebook: SuperpositionCodebook, cfg: Round1Config, rng: np.random.Generator) -> Round1Transcript:
    """One complete round: state draw, conferencing, transmission, decoding."""
    eps = cfg.typicality_eps
    s, t = draw_state(spec, cfg.n, rng)
    pair = encode_conference(codebook, s, eps, rng)
    pair2 = conference_transfer(codebook, s, eps, pair, cfg.m_conf)
    x1, _ = codebook.inputs(pair, s)
    _, x2 = codebook.inputs(pair2, s)
    y, z = channel_transmit(spec, x1, x2, s, rng)
    k_hat, ok = decode_common_key(codebook, y, t, eps, cfg.decoder)
    return Round1Transcript(
        s, t, pair, pair2, conferencing_budget(codebook, s, eps).bits, x1, x2, y, z,
        int(codebook.bin_of[pair[1]]), int(codebook.bin_of[pair2[1]]), k_hat, ok,
    )


# exact metrics


@dataclass(frozen=True)
class Round1Metrics:
    """Exact quantities for one fixed codebook.

    ``leakage_per_symbol`` is I(K0; Z^n)/n with K0 the key of encoder 1.
    """

    p_err: float
    leakage_per_symbol: float
    key_entropy: float
    log2_bins: float
    conference_agreement: float
    encoder_fallback: float


def enumeration_cost(spec: SdMacSpec, n: int) -> int:
    """Work units for exact enumeration: state sequences times output sequences."""
    nyt = spec.size(Y) * spec.size(T)
    return spec.size(S) ** n * (nyt**n + spec.size(Z) ** n)


def _check_budget(cost: int, budget: int, n: int):
    if cost > budget:
        raise EnumerationBudgetError(
            f"exact enumeration at n={n} needs ~{cost:.3g} work units, budget is {budget:.3g}; "
            "use the Monte-Carlo estimator instead"
        )


def _encoder_choices(codebook, s_seq, eps, tie_break):
    cands = typical_pairs(codebook, s_seq, eps)
    if len(cands) == 0:
        return [((0, 0), 1.0)], True
    if tie_break == "lowest":
        return [(tuple(cands[0]), 1.0)], False
    w = 1.0 / len(cands)
    return [(tuple(c), w) for c in cands], False


def exact_round1_metrics(spec: SdMacSpec, aux: AuxiliaryScheme, codebook: SuperpositionCodebook, cfg: Round1Config) -> Round1Metrics:
    """Sum over every state sequence, encoder choice and channel output for the fixed codebook.

    The receiver's decision is tabulated once per (y,t) sequence; the channel
    law of each (x1, x2, s) triple is the Kronecker product of per-symbol rows.
    """
    del aux  # laws are carried by the codebook
    n, eps = codebook.n, cfg.typicality_eps
    _check_budget(enumeration_cost(spec, n), cfg.enum_budget, n)
    nt, nz = spec.size(T), spec.size(Z)
    nyt = spec.size(Y) * nt
    # p(y,t | x1,x2,s) per symbol, yt = y*|T| + t
    p_yt = np.einsum("abcy,ct->abcyt", spec.w.sum(axis=4), spec.p_t_given_s).reshape(spec.w.shape[:3] + (nyt,))
    p_z = spec.w.sum(axis=3)
    _, mv_hat, _ = decode_pairs(codebook, all_sequences(nyt, n), eps, cfg.decoder)
    k_hat = codebook.bin_of[mv_hat]

    s_all = all_sequences(spec.size(S), n)
    p_s_seq = sequence_law(np.tile(spec.p_s, (n, 1)))
    joint_kz = np.zeros((codebook.n_bins, nz**n))
    p_err = agree = fallback = 0.0
    for idx in np.flatnonzero(p_s_seq > 0):
        s, ps = s_all[idx], p_s_seq[idx]
        choices, fell_back = _encoder_choices(codebook, s, eps, cfg.tie_break)
        fallback += ps * fell_back
        for pair, w in choices:
            pair2 = conference_transfer(codebook, s, eps, pair, cfg.m_conf)
            x1, _ = codebook.inputs(pair, s)
            _, x2 = codebook.inputs(pair2, s)
            k = codebook.bin_of[pair[1]]
            mass = ps * w
            p_err += mass * sequence_law(p_yt[x1, x2, s])[k_hat != k].sum()
            joint_kz[k] += mass * sequence_law(p_z[x1, x2, s])
            agree += mass * (codebook.bin_of[pair2[1]] == k)
    p_k = joint_kz.sum(axis=1)
    return Round1Metrics(
        p_err=float(p_err),
        leakage_per_symbol=mutual_information_table(joint_kz) / n,
        key_entropy=entropy_bits(p_k / p_k.sum()),
        log2_bins=math.log2(codebook.n_bins),
        conference_agreement=float(agree),
        encoder_fallback=float(fallback),
    )


# Monte-Carlo


def _rng(seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *path]))


def monte_carlo_round1(
    spec: SdMacSpec,
    aux: AuxiliaryScheme,
    cfg: Round1Config,
    trials: int,
    codebook: SuperpositionCodebook | None = None,
) -> SimulationReport:
    """Estimate error, conferencing and key statistics over ``trials`` runs.

    A fresh codebook is drawn every ``cfg.batch`` trials unless one is given.
    Trial t uses a stream derived from (seed, t), so results do not depend on
    batching of the work.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    start = time.perf_counter()
    eps = cfg.typicality_eps
    errors = mismatch = enc_fallback = dec_fail = over_budget = 0
    key_counts = np.zeros(cfg.m_bins, dtype=np.int64)
    n_batches = math.ceil(trials / cfg.batch)
    for b in range(n_batches):
        cb = codebook if codebook is not None else generate_codebook(spec, aux, cfg, _rng(cfg.seed, 1, b))
        lo, hi = b * cfg.batch, min(trials, (b + 1) * cfg.batch)
        yts, keys = [], []
        for trial in range(lo, hi):
            rng = _rng(cfg.seed, 2, trial)
            s, t = draw_state(spec, cfg.n, rng)
            cands = typical_pairs(cb, s, eps)
            if len(cands) == 0:
                pair = pair2 = (0, 0)
                enc_fallback += 1
            else:
                rank = int(rng.integers(len(cands)))
                pair = tuple(cands[rank])
                if not math.isinf(cfg.m_conf):
                    rank %= int(cfg.m_conf)
                pair2 = tuple(cands[rank])
            over_budget += conferencing_budget(cb, s, eps).bits > cfg.n * cfg.r_c + 1e-9
            x1, _ = cb.inputs(pair, s)
            _, x2 = cb.inputs(pair2, s)
            y, _ = channel_transmit(spec, x1, x2, s, rng)
            yts.append(_yt_codes(y, t, cb.laws.n_t))
            k = int(cb.bin_of[pair[1]])
            keys.append(k)
            mismatch += k != int(cb.bin_of[pair2[1]])
            key_counts[k] += 1
        _, mv_hat, ok = decode_pairs(cb, np.array(yts), eps, cfg.decoder)
        errors += int(np.sum(cb.bin_of[mv_hat] != np.array(keys)))
        dec_fail += int(np.sum(~ok))
    report = SimulationReport(config={"round": 1, "trials": trials, **_config_echo(cfg)}, seed=cfg.seed)
    report.add(Metric.proportion("p_err", errors, trials))
    report.add(Metric.proportion("conference_mismatch", mismatch, trials))
    report.add(Metric.proportion("encoder_fallback", enc_fallback, trials))
    report.add(Metric.proportion("decoder_failure", dec_fail, trials))
    report.add(Metric.proportion("conference_over_budget", over_budget, trials))
    report.add(Metric("key_entropy_plugin", plugin_entropy(key_counts), ESTIMATED))
    report.add(Metric("log2_bins", math.log2(cfg.m_bins), EXACT))
    report.wall_time = time.perf_counter() - start
    return report


def _config_echo(cfg) -> dict:
    out = {}
    for k, v in asdict(cfg).items():
        out[k] = "inf" if isinstance(v, float) and math.isinf(v) else v
    return out


def reference_round1_config(spec: SdMacSpec, aux: AuxiliaryScheme, n: int, fraction: float = 0.6, **overrides) -> Round1Config:
    """Rates at ``fraction`` of the scheme's single-letter quantities.

    Bin rate fraction*[I(V;Y,T|U) - I(V;Z|U)]^+ and total satellite rate
    fraction*I(V;Y,T|U) + (1 - fraction)*I(V;Z|U), which leaves I(V;Z|U) per
    bin; cloud rate fraction*I(U;Y|T).
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    point = common_key_lb_objective(spec, aux)
    main, leak = point.raw["I(V;Y,T|U)"], point.raw["I(V;Z|U)"]
    joint = full_joint_round1(spec, aux)
    params = dict(
        n=n,
        rate_u=fraction * cmi(joint, U, Y, T),
        rate_v_total=fraction * main + (1.0 - fraction) * leak,
        rate_v_bins=fraction * max(0.0, main - leak),
    )
    params.update(overrides)
    return Round1Config(**params)
