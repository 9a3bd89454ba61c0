"""Private-key round: receiver-side key generation from (Y^n, T^n) with
double random binning, public bin-index messages, and reconstruction at
each transmitter from its own input and the state.

The receiver picks a word t_i^n jointly typical with (y^n, t^n). The bin
index psi_i is announced; the sub-bin index is the private key K_i.
Transmitter i searches bin psi_i for the word typical with (x_i^n, s^n).
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from functools import cached_property

import numpy as np

from .channels import S, T, X1, X2, Y, Z, T1, T2, Round2Scheme, SdMacSpec, full_joint_round2
from .probability import entropy_bits, marginalize, mutual_information_table
from .report import ESTIMATED, Metric, SimulationReport, plugin_entropy
from .round1 import (
    BINNINGS,
    TIE_BREAKS,
    CodebookSizeError,
    EnumerationBudgetError,
    _draw_rows,
    _rng,
    channel_transmit,
    codebook_size,
    draw_state,
)
from .typicality import all_sequences, apply_per_symbol, joint_codes, sequence_law, typical_mask


def _pair(value, name: str) -> tuple[float, float]:
    if isinstance(value, (int, float)):
        return (float(value), float(value))
    out = tuple(float(v) for v in value)
    if len(out) != 2:
        raise ValueError(f"{name} needs one value per transmitter, got {value!r}")
    return out


@dataclass(frozen=True)
class Round2Config:
    """Blocklength and per-transmitter rates (bits/use); scalars apply to both.

    ``rate_bins`` sets the public message size, ``rate_subbins`` the key size.
    """

    n: int
    rate_t: tuple[float, float] = (0.6, 0.6)
    rate_bins: tuple[float, float] = (0.4, 0.4)
    rate_subbins: tuple[float, float] = (0.2, 0.2)
    typicality_eps: float = 0.2
    seed: int = 0
    binning: str = "balanced"
    tie_break: str = "random"
    batch: int = 100
    max_codebook_symbols: int = 2**24
    enum_budget: int = 2**27

    def __post_init__(self):
        for name in ("rate_t", "rate_bins", "rate_subbins"):
            object.__setattr__(self, name, _pair(getattr(self, name), name))
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        for i in range(2):
            rt, rb, rs = self.rate_t[i], self.rate_bins[i], self.rate_subbins[i]
            if min(rt, rb, rs) < 0:
                raise ValueError("rates must be nonnegative")
            if rb + rs > rt + 1e-12:
                raise ValueError(f"transmitter {i + 1}: rate_bins + rate_subbins ({rb + rs}) exceeds rate_t ({rt})")
        if self.typicality_eps <= 0:
            raise ValueError("typicality_eps must be positive")
        if self.binning not in BINNINGS:
            raise ValueError(f"binning must be one of {BINNINGS}, got {self.binning!r}")
        if self.tie_break not in TIE_BREAKS:
            raise ValueError(f"tie_break must be one of {TIE_BREAKS}, got {self.tie_break!r}")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")

    def m_t(self, i: int) -> int:
        return codebook_size(self.n, self.rate_t[i - 1])

    def m_bins(self, i: int) -> int:
        return codebook_size(self.n, self.rate_bins[i - 1])

    def m_subbins(self, i: int) -> int:
        return codebook_size(self.n, self.rate_subbins[i - 1])


@dataclass(frozen=True)
class Round2Laws:
    """Per-transmitter single-letter laws.

    p_t_yt[t_i, yt] drives the receiver's test (yt = y*|T| + t);
    p_xs_t[xs, t_i] the transmitter's (xs = x_i*|S| + s); p_t the codebook.
    """

    p_t: np.ndarray
    p_t_yt: np.ndarray
    p_xs_t: np.ndarray
    n_t: int
    n_s: int

    @classmethod
    def from_scheme(cls, spec: SdMacSpec, scheme: Round2Scheme, i: int) -> Round2Laws:
        joint = full_joint_round2(spec, scheme)
        ti, xi = (T1, X1) if i == 1 else (T2, X2)
        k = joint.alphabet(ti).size
        p_t_yt = marginalize(joint, (ti, Y, T)).table.reshape(k, -1)
        p_xs_t = marginalize(joint, (xi, S, ti)).table.reshape(-1, k)
        return cls(p_t_yt.sum(axis=1), p_t_yt, p_xs_t, spec.size(T), spec.size(S))


@dataclass(frozen=True)
class DoubleBinnedCodebook:
    """Words t_words[m] with bin (public) and sub-bin (key) labels."""

    index: int
    t_words: np.ndarray
    bin_of: np.ndarray
    subbin_of: np.ndarray
    n_bins: int
    n_subbins: int
    laws: Round2Laws

    @property
    def n(self) -> int:
        return self.t_words.shape[1]

    @property
    def size(self) -> int:
        return self.t_words.shape[0]

    @cached_property
    def bin_members(self) -> list[np.ndarray]:
        """Word indices of each bin, ascending."""
        order = np.argsort(self.bin_of, kind="stable")
        cuts = np.searchsorted(self.bin_of[order], np.arange(1, self.n_bins))
        return np.split(order, cuts)


@dataclass(frozen=True)
class KeyChoice:
    """Receiver's selection for one transmitter."""

    word: int
    psi: int
    key: int
    ok: bool


@dataclass(frozen=True)
class Round2Transcript:
    s_seq: np.ndarray
    t_seq: np.ndarray
    x1_seq: np.ndarray
    x2_seq: np.ndarray
    y_seq: np.ndarray
    z_seq: np.ndarray
    choices: tuple[KeyChoice, KeyChoice]
    reconstructed: tuple[int, int]
    reconstruct_ok: tuple[bool, bool]


def assign_double_bins(m: int, n_bins: int, n_subbins: int, rng: np.random.Generator, binning: str = "balanced"):
    """Bin and sub-bin labels for m words.

    ``"balanced"`` deals a random permutation round-robin over the
    n_bins * n_subbins cells; ``"uniform"`` draws both labels independently.
    """
    if binning == "balanced":
        pos = np.empty(m, dtype=np.int64)
        pos[rng.permutation(m)] = np.arange(m)
        return pos % n_bins, (pos // n_bins) % n_subbins
    if binning == "uniform":
        return rng.integers(n_bins, size=m), rng.integers(n_subbins, size=m)
    raise ValueError(f"unknown binning {binning!r}")


def generate_t_codebooks(spec: SdMacSpec, scheme: Round2Scheme, cfg: Round2Config, rng: np.random.Generator):
    """Two codebooks with words i.i.d. from the T_i marginal and double binning."""
    books = []
    for i in (1, 2):
        m = cfg.m_t(i)
        if m * cfg.n > cfg.max_codebook_symbols:
            raise CodebookSizeError(
                f"codebook {i} needs {m * cfg.n} symbols (~{m * cfg.n * 8 / 2**20:.1f} MiB); "
                f"budget is {cfg.max_codebook_symbols}"
            )
        laws = Round2Laws.from_scheme(spec, scheme, i)
        words = _draw_rows(np.broadcast_to(laws.p_t, (m, cfg.n, laws.p_t.size)), rng)
        nb, ns = cfg.m_bins(i), cfg.m_subbins(i)
        bins, subs = assign_double_bins(m, nb, ns, rng, cfg.binning)
        books.append(DoubleBinnedCodebook(i, words, bins, subs, nb, ns, laws))
    return tuple(books)


def _yt(y_seq, t_seq, n_t: int) -> np.ndarray:
    return np.asarray(y_seq, dtype=np.int64) * n_t + np.asarray(t_seq, dtype=np.int64)


def receiver_candidates(codebook: DoubleBinnedCodebook, yt: np.ndarray, eps: float) -> np.ndarray:
    """Mask [m, b]: word m typical with the b-th combined (y,t) sequence."""
    yt = np.atleast_2d(yt)
    k, nyt = codebook.laws.p_t_yt.shape
    codes = joint_codes([codebook.t_words[:, None, :], yt[None]], [k, nyt])
    return typical_mask(codes, codebook.laws.p_t_yt, eps)


def receiver_key_gen(y_seq, t_seq, codebooks, cfg: Round2Config, rng: np.random.Generator | None = None) -> tuple[KeyChoice, KeyChoice]:
    """Pick a typical word per codebook (uniform with ``rng``, else lowest index).

    Falls back to word 0, flagged, when nothing is typical.
    """
    out = []
    for cb in codebooks:
        mask = receiver_candidates(cb, _yt(y_seq, t_seq, cb.laws.n_t)[None], cfg.typicality_eps)[:, 0]
        cands = np.flatnonzero(mask)
        if len(cands) == 0:
            word, ok = 0, False
        else:
            word = int(cands[0] if rng is None else cands[rng.integers(len(cands))])
            ok = True
        out.append(KeyChoice(word, int(cb.bin_of[word]), int(cb.subbin_of[word]), ok))
    return tuple(out)


def _reconstruct_table(codebook: DoubleBinnedCodebook, xs: np.ndarray, eps: float):
    """Key estimate and ok flag for every xs sequence (rows) and announced bin (columns)."""
    xs = np.atleast_2d(xs)
    nxs, k = codebook.laws.p_xs_t.shape
    codes = joint_codes([xs[None], codebook.t_words[:, None, :]], [nxs, k])
    typ = typical_mask(codes, codebook.laws.p_xs_t, eps)  # [m, b]
    keys = np.zeros((xs.shape[0], codebook.n_bins), dtype=np.int64)
    oks = np.zeros((xs.shape[0], codebook.n_bins), dtype=bool)
    for b in range(codebook.n_bins):
        members = np.flatnonzero(codebook.bin_of == b)
        if len(members) == 0:
            continue
        hits = typ[members]  # [members, rows]
        count = hits.sum(axis=0)
        first = np.where(count > 0, hits.argmax(axis=0), 0)
        keys[:, b] = codebook.subbin_of[members[first]]
        oks[:, b] = count == 1
    return keys, oks


def _search_bin(codebook: DoubleBinnedCodebook, xs: np.ndarray, psi: int, eps: float) -> tuple[int, bool]:
    members = codebook.bin_members[psi]
    if len(members) == 0:
        return 0, False
    nxs, k = codebook.laws.p_xs_t.shape
    codes = joint_codes([xs[None], codebook.t_words[members]], [nxs, k])
    hits = np.flatnonzero(typical_mask(codes, codebook.laws.p_xs_t, eps))
    word = members[hits[0]] if len(hits) else members[0]
    return int(codebook.subbin_of[word]), len(hits) == 1


def transmitter_reconstruct(i: int, x_seq, s_seq, psi: int, codebook: DoubleBinnedCodebook, cfg: Round2Config) -> tuple[int, bool]:
    """Transmitter i's key estimate from its input, the state and the announced bin.

    ok is False when the bin holds zero or several typical words; the lowest
    such word (or the bin's first word) still supplies an estimate.
    """
    if codebook.index != i:
        raise ValueError(f"codebook belongs to transmitter {codebook.index}, not {i}")
    xs = np.asarray(x_seq, dtype=np.int64) * codebook.laws.n_s + np.asarray(s_seq, dtype=np.int64)
    return _search_bin(codebook, xs, psi, cfg.typicality_eps)


def draw_inputs(spec: SdMacSpec, scheme: Round2Scheme, s_seq, rng: np.random.Generator):
    nx2 = spec.size(X2)
    law = scheme.input_law.table.reshape(spec.size(S), -1)
    idx = _draw_rows(law[np.asarray(s_seq)], rng)
    return idx // nx2, idx % nx2


def run_round2(spec: SdMacSpec, scheme: Round2Scheme, codebooks, cfg: Round2Config, rng: np.random.Generator) -> Round2Transcript:
    """One complete round with uniform receiver choices."""
    s, t = draw_state(spec, cfg.n, rng)
    x1, x2 = draw_inputs(spec, scheme, s, rng)
    y, z = channel_transmit(spec, x1, x2, s, rng)
    choices = receiver_key_gen(y, t, codebooks, cfg, rng)
    rec = [transmitter_reconstruct(i, x, s, c.psi, cb, cfg) for i, x, c, cb in zip((1, 2), (x1, x2), choices, codebooks)]
    return Round2Transcript(s, t, x1, x2, y, z, choices, (rec[0][0], rec[1][0]), (rec[0][1], rec[1][1]))


# exact metrics


@dataclass(frozen=True)
class Round2Metrics:
    """Exact per-transmitter quantities for fixed codebooks (index 0 is transmitter 1).

    leak_eve[i] = I(K_i; Z^n, psi_1, psi_2)/n and
    leak_cross[i] = I(K_i; X_j^n, K_j, S^n, psi_1, psi_2)/n.
    """

    p_err: tuple[float, float]
    leak_eve: tuple[float, float]
    leak_cross: tuple[float, float]
    key_entropy: tuple[float, float]
    log2_subbins: tuple[float, float]
    key_dependence: float


def _choice_matrix(cb: DoubleBinnedCodebook, yt_all: np.ndarray, eps: float, tie_break: str) -> np.ndarray:
    """pi[m, b]: probability the receiver picks word m given the b-th (y,t) sequence."""
    mask = receiver_candidates(cb, yt_all, eps).astype(float)
    count = mask.sum(axis=0)
    if tie_break == "lowest":
        pi = np.zeros_like(mask)
        pi[mask.argmax(axis=0), np.arange(mask.shape[1])] = 1.0
    else:
        pi = mask / np.where(count > 0, count, 1.0)
    pi[0, count == 0] = 1.0
    return pi


def _label_matrix(cb: DoubleBinnedCodebook, pi: np.ndarray) -> np.ndarray:
    """G[k*n_bins + b, yt]: probability of key k and bin b given the (y,t) sequence."""
    onehot = np.zeros((cb.n_subbins * cb.n_bins, cb.size))
    onehot[cb.subbin_of * cb.n_bins + cb.bin_of, np.arange(cb.size)] = 1.0
    return onehot @ pi


def _per_symbol(joint, rows, cols) -> np.ndarray:
    """2-D per-symbol joint table with the listed variables flattened on each side."""
    t = marginalize(joint, tuple(rows) + tuple(cols)).table
    r = math.prod(joint.alphabet(v).size for v in rows)
    return t.reshape(r, -1)


def round2_enumeration_cost(spec: SdMacSpec, cfg: Round2Config) -> int:
    n = cfg.n
    nyt = spec.size(Y) * spec.size(T)
    widest = max(nyt, spec.size(X1) * spec.size(S), spec.size(X2) * spec.size(S), spec.size(Z))
    labels = math.prod(cfg.m_bins(i) * cfg.m_subbins(i) for i in (1, 2))
    return widest**n * (labels + cfg.m_t(1) + cfg.m_t(2)) * n


def exact_round2_metrics(spec: SdMacSpec, scheme: Round2Scheme, codebooks, cfg: Round2Config) -> Round2Metrics:
    """Exact error, leakage and key entropy by mode-wise contraction over n symbols.

    The receiver's (randomized) choice is tabulated per (y,t) sequence and the
    transmitters' estimates per (x_i, s) sequence; every joint law of
    sequences is a Kronecker power of a single-letter table and is applied
    axis by axis instead of being formed.
    """
    n, eps = cfg.n, cfg.typicality_eps
    cost = round2_enumeration_cost(spec, cfg)
    if cost > cfg.enum_budget:
        raise EnumerationBudgetError(
            f"exact round-2 enumeration at n={n} needs ~{cost:.3g} work units, budget is {cfg.enum_budget:.3g}; "
            "use the Monte-Carlo estimator instead"
        )
    joint = full_joint_round2(spec, scheme)
    nyt = spec.size(Y) * spec.size(T)
    yt_all = all_sequences(nyt, n)
    p_yt_seq = sequence_law(np.tile(_per_symbol(joint, (Y, T), ()).ravel(), (n, 1)))
    x_of = {1: X1, 2: X2}
    pis = [_choice_matrix(cb, yt_all, eps, cfg.tie_break) for cb in codebooks]
    gs = [_label_matrix(cb, pi) for cb, pi in zip(codebooks, pis)]

    p_err, leak_eve, leak_cross, h_k = [], [], [], []
    for i, j in ((1, 2), (2, 1)):
        cb_i, cb_j = codebooks[i - 1], codebooks[j - 1]
        g_i, g_j = gs[i - 1], gs[j - 1]
        nk_i, nb_i, nb_j, nk_j = cb_i.n_subbins, cb_i.n_bins, cb_j.n_bins, cb_j.n_subbins

        # reliability: sum_m sum_yt pi(m|yt) sum_xs p(xs, yt) [estimate(xs, bin m) != key m]
        nxs = spec.size(x_of[i]) * spec.size(S)
        keys, _ = _reconstruct_table(cb_i, all_sequences(nxs, n), eps)
        wrong = (keys[:, cb_i.bin_of] != cb_i.subbin_of[None, :]).T.astype(float)  # [m, xs]
        moved = apply_per_symbol(wrong, _per_symbol(joint, (x_of[i], S), (Y, T)), n)  # [m, yt]
        p_err.append(float(np.sum(pis[i - 1] * moved)))

        # eavesdropper: joint of (k_i, b_i, b_j, z^n)
        h_j = g_j.reshape(nk_j, nb_j, -1).sum(axis=0)
        f = (g_i[:, None, :] * h_j[None, :, :]).reshape(-1, g_i.shape[1])
        kz = apply_per_symbol(f, _per_symbol(joint, (Y, T), (Z,)), n)
        leak_eve.append(mutual_information_table(kz.reshape(nk_i, -1)) / n)

        # other transmitter: joint of (k_i, b_i, k_j, b_j, x_j^n s^n)
        f = (g_i[:, None, :] * g_j[None, :, :]).reshape(-1, g_i.shape[1])
        kx = apply_per_symbol(f, _per_symbol(joint, (Y, T), (x_of[j], S)), n)
        leak_cross.append(mutual_information_table(kx.reshape(nk_i, -1)) / n)

        p_k = (g_i @ p_yt_seq).reshape(nk_i, nb_i).sum(axis=1)
        h_k.append(entropy_bits(p_k / p_k.sum()))

    k1 = gs[0].reshape(codebooks[0].n_subbins, codebooks[0].n_bins, -1).sum(axis=1)
    k2 = gs[1].reshape(codebooks[1].n_subbins, codebooks[1].n_bins, -1).sum(axis=1)
    dependence = mutual_information_table((k1 * p_yt_seq) @ k2.T) / n
    return Round2Metrics(
        tuple(p_err), tuple(leak_eve), tuple(leak_cross), tuple(h_k),
        (math.log2(codebooks[0].n_subbins), math.log2(codebooks[1].n_subbins)), dependence,
    )


# Monte-Carlo


def monte_carlo_round2(spec: SdMacSpec, scheme: Round2Scheme, cfg: Round2Config, trials: int, codebooks=None) -> SimulationReport:
    """Estimate key agreement and fallback rates; fresh codebooks every ``cfg.batch`` trials."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    start = time.perf_counter()
    eps = cfg.typicality_eps
    agree = np.zeros(2, dtype=np.int64)
    both = 0
    recv_fallback = np.zeros(2, dtype=np.int64)
    ambiguous = np.zeros(2, dtype=np.int64)
    key_counts = [np.zeros(cfg.m_subbins(i), dtype=np.int64) for i in (1, 2)]
    for b in range(math.ceil(trials / cfg.batch)):
        cbs = codebooks if codebooks is not None else generate_t_codebooks(spec, scheme, cfg, _rng(cfg.seed, 1, b))
        lo, hi = b * cfg.batch, min(trials, (b + 1) * cfg.batch)
        rows = []
        for trial in range(lo, hi):
            rng = _rng(cfg.seed, 2, trial)
            s, t = draw_state(spec, cfg.n, rng)
            x1, x2 = draw_inputs(spec, scheme, s, rng)
            y, _ = channel_transmit(spec, x1, x2, s, rng)
            rows.append((s, x1, x2, _yt(y, t, spec.size(T)), rng))
        yt = np.array([r[3] for r in rows])
        ok_pair = np.ones(len(rows), dtype=bool)
        for i, cb in zip((1, 2), cbs):
            mask = receiver_candidates(cb, yt, eps)  # [m, trials]
            for col, r in enumerate(rows):
                cands = np.flatnonzero(mask[:, col])
                if len(cands) == 0:
                    word = 0
                    recv_fallback[i - 1] += 1
                else:
                    word = int(cands[r[4].integers(len(cands))])
                psi, key = cb.bin_of[word], cb.subbin_of[word]
                k_hat, ok = _search_bin(cb, r[i] * spec.size(S) + r[0], psi, eps)
                hit = k_hat == key
                agree[i - 1] += hit
                ok_pair[col] &= hit
                ambiguous[i - 1] += not ok
                key_counts[i - 1][key] += 1
        both += int(ok_pair.sum())
    report = SimulationReport(config={"round": 2, "trials": trials, **_config_echo(cfg)}, seed=cfg.seed)
    for i in (1, 2):
        report.add(Metric.proportion(f"agree_{i}", int(agree[i - 1]), trials))
    report.add(Metric.proportion("agree_both", both, trials))
    for i in (1, 2):
        report.add(Metric.proportion(f"receiver_fallback_{i}", int(recv_fallback[i - 1]), trials))
        report.add(Metric.proportion(f"reconstruct_not_unique_{i}", int(ambiguous[i - 1]), trials))
        report.add(Metric(f"key_entropy_plugin_{i}", plugin_entropy(key_counts[i - 1]), ESTIMATED))
    report.wall_time = time.perf_counter() - start
    return report


def _config_echo(cfg: Round2Config) -> dict:
    return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(cfg).items()}
