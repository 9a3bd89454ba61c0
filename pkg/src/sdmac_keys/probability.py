"""Exact finite-alphabet probability tables and information measures.

Every quantity downstream (bounds, codebook laws, leakage oracles) is built
from the two table types defined here:

- ``JointPmf``: one numpy axis per named variable.
- ``ConditionalPmf``: axes for the conditioning variables followed by axes
  for the target variables; every row sums to one.

All logarithms are base 2 and ``0 log 0 = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

NORMALIZATION_TOL = 1e-9
# rows already this close to one are left untouched so serialized tables round-trip bit-exactly
_ROUNDING_SLACK = 1e-14


def _as_names(names: str | Iterable[str] | None) -> tuple[str, ...]:
    if names is None:
        return ()
    if isinstance(names, str):
        return (names,)
    return tuple(names)


@dataclass(frozen=True)
class Alphabet:
    """Finite ordered set of symbol labels.

    A single-symbol alphabet stands for an absent or constant variable.
    """

    name: str
    symbols: tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        if not symbols:
            raise ValueError(f"alphabet {self.name!r} is empty")
        if len(set(symbols)) != len(symbols):
            raise ValueError(f"alphabet {self.name!r} has repeated symbols: {symbols}")
        object.__setattr__(self, "symbols", symbols)

    @classmethod
    def binary(cls, name: str) -> Alphabet:
        return cls(name, ("0", "1"))

    @classmethod
    def constant(cls, name: str) -> Alphabet:
        return cls(name, ("-",))

    @classmethod
    def of_size(cls, name: str, size: int) -> Alphabet:
        return cls(name, tuple(str(i) for i in range(size)))

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol) -> int:
        try:
            return self.symbols.index(str(symbol))
        except ValueError:
            raise ValueError(f"symbol {symbol!r} not in alphabet {self.name!r}") from None

    def renamed(self, name: str) -> Alphabet:
        return Alphabet(name, self.symbols)


def _checked_table(table, shape, what: str) -> np.ndarray:
    arr = np.array(table, dtype=float)
    if arr.shape != tuple(shape):
        raise ValueError(f"{what}: table shape {arr.shape} does not match alphabets {tuple(shape)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what}: table contains non-finite entries")
    if np.any(arr < 0):
        raise ValueError(f"{what}: negative probability {arr.min():.3g}")
    return arr


class JointPmf:
    """Joint probability mass function over named finite variables.

    Parameters
    ----------
    variables : sequence of (name, Alphabet)
        Variable names in axis order.
    table : array_like
        Probabilities with one axis per variable. Totals within 1e-9 of one
        are renormalized; larger drift is an error.
    """

    __slots__ = ("_names", "_alphabets", "_table")

    def __init__(self, variables: Sequence[tuple[str, Alphabet]], table):
        names = tuple(str(v[0]) for v in variables)
        alphabets = tuple(v[1] for v in variables)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names: {names}")
        arr = _checked_table(table, [a.size for a in alphabets], f"pmf over {names}")
        total = arr.sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"pmf over {names} sums to {total!r}, not 1")
        if abs(total - 1.0) > _ROUNDING_SLACK:
            arr = arr / total
        arr.setflags(write=False)
        self._names = names
        self._alphabets = alphabets
        self._table = arr

    # construction helpers
    @classmethod
    def from_dict(cls, variables: Sequence[tuple[str, Alphabet]], probs: Mapping[tuple, float]) -> JointPmf:
        alphabets = [v[1] for v in variables]
        arr = np.zeros([a.size for a in alphabets])
        for key, p in probs.items():
            key = key if isinstance(key, tuple) else (key,)
            if len(key) != len(alphabets):
                raise ValueError(f"key {key!r} has wrong length for {len(alphabets)} variables")
            arr[tuple(a.index(s) for a, s in zip(alphabets, key))] += p
        return cls(variables, arr)

    @classmethod
    def uniform(cls, variables: Sequence[tuple[str, Alphabet]]) -> JointPmf:
        shape = [v[1].size for v in variables]
        return cls(variables, np.full(shape, 1.0 / math.prod(shape)))

    @classmethod
    def point_mass(cls, variables: Sequence[tuple[str, Alphabet]], symbols: Sequence) -> JointPmf:
        shape = [v[1].size for v in variables]
        arr = np.zeros(shape)
        arr[tuple(v[1].index(s) for v, s in zip(variables, symbols))] = 1.0
        return cls(variables, arr)

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    @property
    def alphabets(self) -> tuple[Alphabet, ...]:
        return self._alphabets

    @property
    def variables(self) -> tuple[tuple[str, Alphabet], ...]:
        return tuple(zip(self._names, self._alphabets))

    @property
    def table(self) -> np.ndarray:
        return self._table

    @property
    def shape(self) -> tuple[int, ...]:
        return self._table.shape

    def alphabet(self, name: str) -> Alphabet:
        return self._alphabets[self.axis(name)]

    def axis(self, name: str) -> int:
        try:
            return self._names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}; pmf has {self._names}") from None

    def prob(self, *symbols) -> float:
        """Probability of one full symbol tuple (labels in variable order)."""
        if len(symbols) != len(self._names):
            raise ValueError(f"expected {len(self._names)} symbols, got {len(symbols)}")
        return float(self._table[tuple(a.index(s) for a, s in zip(self._alphabets, symbols))])

    def as_dict(self) -> dict[tuple[str, ...], float]:
        out = {}
        for idx in product(*(range(a.size) for a in self._alphabets)):
            out[tuple(a.symbols[i] for a, i in zip(self._alphabets, idx))] = float(self._table[idx])
        return out

    def __eq__(self, other):
        if not isinstance(other, JointPmf):
            return NotImplemented
        return (
            self._names == other._names
            and self._alphabets == other._alphabets
            and np.array_equal(self._table, other._table)
        )

    def __repr__(self):
        dims = ", ".join(f"{n}:{a.size}" for n, a in zip(self._names, self._alphabets))
        return f"JointPmf({dims})"


class ConditionalPmf:
    """Conditional law p(target | given) stored as a dense table.

    ``table`` has the axes of ``given`` followed by the axes of ``target``.
    Rows within 1e-9 of unit mass are renormalized; anything else raises,
    naming the offending row.
    """

    __slots__ = ("_given", "_target", "_table")

    def __init__(self, given: Sequence[tuple[str, Alphabet]], target: Sequence[tuple[str, Alphabet]], table):
        given = tuple((str(n), a) for n, a in given)
        target = tuple((str(n), a) for n, a in target)
        names = [n for n, _ in given] + [n for n, _ in target]
        if len(set(names)) != len(names):
            raise ValueError(f"given and target variables overlap or repeat: {names}")
        if not target:
            raise ValueError("conditional pmf needs at least one target variable")
        gshape = [a.size for _, a in given]
        tshape = [a.size for _, a in target]
        what = f"kernel p({','.join(n for n, _ in target)}|{','.join(n for n, _ in given)})"
        arr = _checked_table(table, gshape + tshape, what)
        flat = arr.reshape(math.prod(gshape), math.prod(tshape))
        sums = flat.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > NORMALIZATION_TOL)
        if bad.size:
            row = np.unravel_index(bad[0], gshape) if gshape else ()
            labels = tuple(a.symbols[i] for (_, a), i in zip(given, row))
            raise ValueError(f"{what}: row {labels} sums to {sums[bad[0]]!r}, not 1")
        drift = np.abs(sums - 1.0) > _ROUNDING_SLACK
        if np.any(drift):
            flat = flat.copy()
            flat[drift] /= sums[drift, None]
            arr = flat.reshape(arr.shape)
        arr.setflags(write=False)
        self._given = given
        self._target = target
        self._table = arr

    @classmethod
    def deterministic(cls, given, target_name: str, target_alphabet: Alphabet, mapping) -> ConditionalPmf:
        """Kernel putting unit mass on ``mapping(*given_indices)``.

        ``mapping`` may be a callable on index tuples or an integer array
        shaped like the given alphabets.
        """
        gshape = [a.size for _, a in given]
        arr = np.zeros(gshape + [target_alphabet.size])
        for idx in product(*(range(s) for s in gshape)):
            j = mapping(*idx) if callable(mapping) else int(np.asarray(mapping)[idx])
            arr[idx + (j,)] = 1.0
        return cls(given, [(target_name, target_alphabet)], arr)

    @classmethod
    def independent(cls, given, marginal: JointPmf) -> ConditionalPmf:
        gshape = [a.size for _, a in given]
        arr = np.broadcast_to(marginal.table, tuple(gshape) + marginal.shape)
        return cls(given, marginal.variables, arr)

    @property
    def given(self) -> tuple[tuple[str, Alphabet], ...]:
        return self._given

    @property
    def target(self) -> tuple[tuple[str, Alphabet], ...]:
        return self._target

    @property
    def given_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self._given)

    @property
    def target_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self._target)

    @property
    def table(self) -> np.ndarray:
        return self._table

    def rows(self) -> np.ndarray:
        """Table reshaped to (number of given tuples, number of target tuples)."""
        g = math.prod(a.size for _, a in self._given)
        return self._table.reshape(g, -1)

    def is_deterministic(self) -> bool:
        return bool(np.all((self._table == 0.0) | (self._table == 1.0)))

    def as_map(self) -> np.ndarray:
        """Integer array of the target index per given tuple (single-target deterministic kernels)."""
        if len(self._target) != 1 or not self.is_deterministic():
            raise ValueError("as_map needs a deterministic kernel with one target variable")
        return np.argmax(self._table, axis=-1)

    def __eq__(self, other):
        if not isinstance(other, ConditionalPmf):
            return NotImplemented
        return (
            self._given == other._given
            and self._target == other._target
            and np.array_equal(self._table, other._table)
        )

    def __repr__(self):
        return f"ConditionalPmf({','.join(self.target_names)}|{','.join(self.given_names)})"


def _check_known(pmf: JointPmf, names: Sequence[str]):
    unknown = [n for n in names if n not in pmf.names]
    if unknown:
        raise KeyError(f"unknown variable(s) {unknown}; pmf has {pmf.names}")


def marginalize(pmf: JointPmf, keep) -> JointPmf:
    """Marginal of ``pmf`` on ``keep``, axes in the order given by ``keep``."""
    keep = _as_names(keep)
    _check_known(pmf, keep)
    if len(set(keep)) != len(keep):
        raise ValueError(f"repeated variable in {keep}")
    axes = [pmf.axis(n) for n in keep]
    dropped = tuple(i for i in range(len(pmf.names)) if i not in axes)
    arr = pmf.table.sum(axis=dropped) if dropped else pmf.table
    remaining = sorted(axes)
    arr = np.transpose(arr, [remaining.index(a) for a in axes])
    return JointPmf([(n, pmf.alphabet(n)) for n in keep], arr)


def compose(base: JointPmf, kernel: ConditionalPmf) -> JointPmf:
    """Joint law base(a) * kernel(b | a restricted to the kernel's given variables)."""
    for name, alph in kernel.given:
        if name not in base.names:
            raise KeyError(f"kernel conditions on {name!r}, which base pmf {base.names} lacks")
        if base.alphabet(name) != alph:
            raise ValueError(f"alphabet of {name!r} differs between base pmf and kernel")
    clash = [n for n in kernel.target_names if n in base.names]
    if clash:
        raise ValueError(f"kernel target {clash} already present in base pmf")
    letters = {n: chr(ord("a") + i) for i, n in enumerate(base.names + kernel.target_names)}
    sub_base = "".join(letters[n] for n in base.names)
    sub_kernel = "".join(letters[n] for n in kernel.given_names + kernel.target_names)
    sub_out = sub_base + "".join(letters[n] for n in kernel.target_names)
    arr = np.einsum(f"{sub_base},{sub_kernel}->{sub_out}", base.table, kernel.table)
    return JointPmf(base.variables + kernel.target, arr)


def conditional(pmf: JointPmf, target, given) -> ConditionalPmf:
    """Conditional law p(target | given) read off a joint table.

    Given tuples with zero mass receive a uniform row.
    """
    target, given = _as_names(target), _as_names(given)
    m = marginalize(pmf, given + target).table
    gshape = m.shape[: len(given)]
    flat = m.reshape(math.prod(gshape), -1)
    mass = flat.sum(axis=1, keepdims=True)
    rows = np.where(mass > 0, flat / np.where(mass > 0, mass, 1.0), 1.0 / flat.shape[1])
    return ConditionalPmf(
        [(n, pmf.alphabet(n)) for n in given],
        [(n, pmf.alphabet(n)) for n in target],
        rows.reshape(m.shape),
    )


def _entropy_of(arr: np.ndarray) -> float:
    p = arr[arr > 0]
    return float(-np.sum(p * np.log2(p))) + 0.0


def entropy(pmf: JointPmf, names) -> float:
    """Shannon entropy in bits of the marginal on ``names``."""
    names = _as_names(names)
    if not names:
        return 0.0
    return _entropy_of(marginalize(pmf, names).table)


def conditional_entropy(pmf: JointPmf, a, given=()) -> float:
    a, given = _as_names(a), _as_names(given)
    return entropy(pmf, a + given) - entropy(pmf, given)


def conditional_mutual_information(pmf: JointPmf, a, b, c=()) -> float:
    """I(A;B|C) in bits, summed directly from the marginal on A, B, C.

    ``c`` may be empty, giving plain mutual information.
    """
    a, b, c = _as_names(a), _as_names(b), _as_names(c)
    if not a or not b:
        raise ValueError("mutual information needs nonempty A and B")
    seen = a + b + c
    if len(set(seen)) != len(seen):
        raise ValueError(f"variable lists overlap: A={a}, B={b}, C={c}")
    m = marginalize(pmf, seen).table
    sa = math.prod(m.shape[: len(a)])
    sb = math.prod(m.shape[len(a) : len(a) + len(b)])
    p_abc = m.reshape(sa, sb, -1)
    p_ac = p_abc.sum(axis=1, keepdims=True)
    p_bc = p_abc.sum(axis=0, keepdims=True)
    p_c = p_abc.sum(axis=(0, 1), keepdims=True)
    mask = p_abc > 0
    num = (p_abc * p_c)[mask]
    den = (p_ac * p_bc)[mask]
    return float(np.sum(p_abc[mask] * np.log2(num / den)))


def mutual_information(pmf: JointPmf, a, b) -> float:
    return conditional_mutual_information(pmf, a, b)


def is_markov_chain(pmf: JointPmf, a, b, c, tol: float = 1e-10) -> bool:
    """True iff A -> B -> C, i.e. I(A;C|B) <= tol."""
    return conditional_mutual_information(pmf, a, c, b) <= tol


def _check_probability(x: float, what: str) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"{what} must lie in [0, 1], got {x!r}")
    return x


def binary_entropy(x: float) -> float:
    """H_b(x) in bits, with H_b(0) = H_b(1) = 0."""
    x = _check_probability(x, "binary_entropy argument")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def binary_convolution(a: float, b: float) -> float:
    """Crossover probability of two cascaded binary flips: a(1-b) + (1-a)b."""
    a = _check_probability(a, "binary_convolution argument")
    b = _check_probability(b, "binary_convolution argument")
    return a * (1.0 - b) + (1.0 - a) * b


def entropy_bits(probs) -> float:
    """Entropy of a raw probability vector (any shape, summed over all cells)."""
    return _entropy_of(np.asarray(probs, dtype=float))


def mutual_information_table(joint) -> float:
    """I(row; column) for a 2-D array of joint probabilities."""
    p = np.asarray(joint, dtype=float)
    pr = p.sum(axis=1, keepdims=True)
    pc = p.sum(axis=0, keepdims=True)
    total = pc.sum()
    mask = p > 0
    # ratio of conditionals is exactly 1 when either side has a single symbol
    ratio = (p / np.where(pr > 0, pr, 1.0)) / (np.where(pc > 0, pc, 1.0) / total)
    return float(np.sum(p[mask] * np.log2(ratio[mask])) / total)
