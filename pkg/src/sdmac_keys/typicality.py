"""Empirical joint types and strong-typicality tests on integer-coded sequences.

A tuple of sequences is typical for a joint law p when every cell's
empirical frequency lies within ``eps`` of p and no zero-probability cell
occurs. All functions broadcast over leading batch axes; the last axis is time.
"""

from __future__ import annotations

from itertools import product

import numpy as np

_SLACK = 1e-12


def joint_codes(seqs, sizes) -> np.ndarray:
    """Combine per-variable symbol arrays into one row-major cell index.

    ``seqs`` are integer arrays that broadcast together; ``sizes`` their
    alphabet sizes. The first variable is the most significant digit.
    """
    seqs = [np.asarray(s, dtype=np.int64) for s in seqs]
    if len(seqs) != len(sizes):
        raise ValueError("need one alphabet size per sequence")
    code = np.zeros(np.broadcast_shapes(*(s.shape for s in seqs)), dtype=np.int64)
    for s, k in zip(seqs, sizes):
        code = code * int(k) + s
    return code


def type_counts(codes, n_cells: int) -> np.ndarray:
    """Cell counts along the last axis; result shape is codes.shape[:-1] + (n_cells,)."""
    codes = np.asarray(codes, dtype=np.int64)
    lead, n = codes.shape[:-1], codes.shape[-1]
    flat = codes.reshape(-1, n)
    b = flat.shape[0]
    offset = flat + n_cells * np.arange(b, dtype=np.int64)[:, None]
    counts = np.bincount(offset.ravel(), minlength=b * n_cells)
    return counts.reshape(lead + (n_cells,))


def typical_mask(codes, pmf, eps: float) -> np.ndarray:
    """Boolean mask over leading axes: is the coded tuple strongly eps-typical for ``pmf``?"""
    p = np.asarray(pmf, dtype=float).ravel()
    codes = np.asarray(codes, dtype=np.int64)
    n = codes.shape[-1]
    if n == 0:
        raise ValueError("typicality needs at least one symbol")
    freq = type_counts(codes, p.size) / n
    close = np.all(np.abs(freq - p) <= eps + _SLACK, axis=-1)
    support = np.all((p > 0) | (freq == 0), axis=-1)
    return close & support


def is_typical(seqs, sizes, pmf, eps: float) -> bool:
    """Single-tuple convenience wrapper around ``typical_mask``."""
    return bool(typical_mask(joint_codes(seqs, sizes), pmf, eps))


def all_sequences(k: int, n: int) -> np.ndarray:
    """Every length-n sequence over range(k) in lexicographic order, shape (k**n, n)."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(product(range(k), repeat=n)), dtype=np.int64).reshape(-1, n)


def sequence_law(rows) -> np.ndarray:
    """Kronecker product of per-symbol distributions rows[i] (shape (n, k)).

    Entry j is the probability of the j-th sequence of ``all_sequences(k, n)``.
    """
    out = np.ones(1)
    for r in np.asarray(rows, dtype=float):
        out = np.multiply.outer(out, r).ravel()
    return out


def apply_per_symbol(tensor, matrix, n: int) -> np.ndarray:
    """Contract each of the last n axes of ``tensor`` with ``matrix`` (k_in, k_out).

    ``tensor`` has shape (A, k_in**n); the result (A, k_out**n) equals
    tensor @ kron(matrix, ..., matrix) without forming the Kronecker product.
    """
    m = np.asarray(matrix, dtype=float)
    k_in, k_out = m.shape
    t = np.asarray(tensor, dtype=float)
    a = t.shape[0]
    t = t.reshape((a,) + (k_in,) * n)
    for axis in range(1, n + 1):
        t = np.moveaxis(np.tensordot(t, m, axes=([axis], [0])), -1, axis)
    return t.reshape(a, k_out**n)
