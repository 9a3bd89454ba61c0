"""Channel-spec files: INI-style structured text with dense decimal tables.

Layout::

    [meta]
    format = 1
    name = modulo-additive(...)

    [alphabets]
    S = 0, 1
    T = -
    ...

    [state_pmf]
    p = 0.8, 0.2

    [degrade_kernel]
    0 = 1.0               # key: given S symbol; row over T

    [channel_kernel]
    0,0,0 = 0.63, 0.27, 0.07, 0.03   # key: x1,x2,s; row over (y,z), z fastest

Probabilities are written with ``repr`` so a save/load round trip is exact.
"""

from __future__ import annotations

import configparser
import math
import re
from itertools import product
from pathlib import Path

import numpy as np

from .channels import CHANNEL_GIVEN, S, T, X1, X2, Y, Z, SdMacSpec
from .probability import NORMALIZATION_TOL, Alphabet

FORMAT_VERSION = 1
ALPHABET_ORDER = (S, T, X1, X2, Y, Z)
_BAD_LABEL = re.compile(r"[,=:\[\]#;\s]")


class SpecFormatError(ValueError):
    """Malformed or inconsistent channel-spec file."""


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"),
                                   inline_comment_prefixes=("#",))
    cp.optionxform = str
    return cp


def _line_index(text: str) -> dict[tuple[str, str], int]:
    where, section = {}, None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
        elif section and "=" in line and not line.startswith(("#", ";")):
            where[(section, line.split("=", 1)[0].strip())] = lineno
    return where


def format_spec(spec: SdMacSpec) -> str:
    """Serialize ``spec`` to the structured-text format."""
    alph = spec.alphabets
    for a in alph.values():
        for sym in a.symbols:
            if _BAD_LABEL.search(sym):
                raise SpecFormatError(f"symbol {sym!r} of {a.name} cannot be written (no , = : [ ] # ; or spaces)")
    name = re.sub(r"[#;\n]", "_", spec.name)
    row = lambda values: ", ".join(repr(float(v)) for v in values)  # noqa: E731
    lines = ["# state-dependent MAC channel spec", "[meta]", f"format = {FORMAT_VERSION}", f"name = {name}", ""]
    lines.append("[alphabets]")
    lines += [f"{k} = {', '.join(alph[k].symbols)}" for k in ALPHABET_ORDER]
    lines += ["", "[state_pmf]", f"p = {row(spec.p_s)}", "", "[degrade_kernel]", "# S -> row over T"]
    for s_idx, s_sym in enumerate(alph[S].symbols):
        lines.append(f"{s_sym} = {row(spec.p_t_given_s[s_idx])}")
    lines += ["", "[channel_kernel]", "# X1,X2,S -> row over (Y,Z), Z varies fastest"]
    w = spec.w
    for i, j, k in product(range(alph[X1].size), range(alph[X2].size), range(alph[S].size)):
        key = ",".join((alph[X1].symbols[i], alph[X2].symbols[j], alph[S].symbols[k]))
        lines.append(f"{key} = {row(w[i, j, k].ravel())}")
    return "\n".join(lines) + "\n"


def save_spec(spec: SdMacSpec, path) -> None:
    Path(path).write_text(format_spec(spec))


def _floats(text: str, where: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",")]
    except ValueError:
        raise SpecFormatError(f"{where}: expected comma-separated decimals, got {text!r}") from None


def parse_spec(text: str, source: str = "<string>") -> SdMacSpec:
    """Parse a channel spec from text. Errors name the section, key and line."""
    cp = _parser()
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise SpecFormatError(f"{source}: {exc}") from None
    lines = _line_index(text)

    def loc(section, key=None):
        if key is None:
            return f"{source}: section [{section}]"
        line = lines.get((section, key))
        return f"{source}:{line}: [{section}] {key}" if line else f"{source}: [{section}] {key}"

    for section in ("meta", "alphabets", "state_pmf", "degrade_kernel", "channel_kernel"):
        if not cp.has_section(section):
            raise SpecFormatError(f"{source}: missing section [{section}]")
    version = cp.get("meta", "format", fallback=None)
    if version is None or version.strip() != str(FORMAT_VERSION):
        raise SpecFormatError(f"{loc('meta', 'format')}: unsupported format {version!r}, expected {FORMAT_VERSION}")
    name = cp.get("meta", "name", fallback="custom").strip()

    alph = {}
    for key in ALPHABET_ORDER:
        if not cp.has_option("alphabets", key):
            raise SpecFormatError(f"{loc('alphabets')}: missing alphabet {key}")
        symbols = [s.strip() for s in cp.get("alphabets", key).split(",")]
        try:
            alph[key] = Alphabet(key, tuple(symbols))
        except ValueError as exc:
            raise SpecFormatError(f"{loc('alphabets', key)}: {exc}") from None
    extra = set(cp.options("alphabets")) - set(ALPHABET_ORDER)
    if extra:
        raise SpecFormatError(f"{loc('alphabets')}: unknown variables {sorted(extra)}")

    def check_row(values, expected_len, section, key):
        if len(values) != expected_len:
            raise SpecFormatError(f"{loc(section, key)}: row has {len(values)} entries, alphabet product has {expected_len}")
        if any(v < 0 or not math.isfinite(v) for v in values):
            raise SpecFormatError(f"{loc(section, key)}: probabilities must be finite and nonnegative")
        total = math.fsum(values)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise SpecFormatError(f"{loc(section, key)}: row sums to {total!r}, not 1")
        return values

    if cp.options("state_pmf") != ["p"]:
        raise SpecFormatError(f"{loc('state_pmf')}: expected a single key 'p'")
    p_s = check_row(_floats(cp.get("state_pmf", "p"), loc("state_pmf", "p")), alph[S].size, "state_pmf", "p")

    def read_kernel(section, given, target_size):
        givens = [alph[g] for g in given]
        expected = {",".join(a.symbols[i] for a, i in zip(givens, idx)): idx
                    for idx in product(*(range(a.size) for a in givens))}
        table = np.zeros([a.size for a in givens] + [target_size])
        seen = set()
        for key in cp.options(section):
            norm = ",".join(part.strip() for part in key.split(","))
            if norm not in expected:
                raise SpecFormatError(f"{loc(section, key)}: {norm!r} is not a ({','.join(given)}) symbol tuple")
            if norm in seen:
                raise SpecFormatError(f"{loc(section, key)}: duplicate row {norm!r}")
            seen.add(norm)
            values = _floats(cp.get(section, key), loc(section, key))
            table[expected[norm]] = check_row(values, target_size, section, key)
        missing = sorted(set(expected) - seen)
        if missing:
            raise SpecFormatError(f"{loc(section)}: missing rows {missing}")
        return table

    p_t = read_kernel("degrade_kernel", (S,), alph[T].size)
    w = read_kernel("channel_kernel", CHANNEL_GIVEN, alph[Y].size * alph[Z].size)
    w = w.reshape(alph[X1].size, alph[X2].size, alph[S].size, alph[Y].size, alph[Z].size)
    return SdMacSpec.from_arrays(p_s, p_t, w, alphabets=alph, name=name)


def load_spec(path) -> SdMacSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecFormatError(f"cannot read channel spec {path}: {exc}") from None
    return parse_spec(text, source=str(path))
