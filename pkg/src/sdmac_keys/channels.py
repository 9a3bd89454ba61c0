"""State-dependent MAC channel models and the auxiliary schemes that drive
the bounds and the two protocol rounds.

Variable names used throughout the package::

    S   channel state (known non-causally at both transmitters)
    T   receiver's degraded view of the state
    X1  input of transmitter 1       X2  input of transmitter 2
    Y   legitimate output            Z   eavesdropper output
    U   cloud (state description)    V   satellite carrying the common key
    T1  receiver-side key source for transmitter 1, T2 likewise
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .probability import (
    Alphabet,
    ConditionalPmf,
    JointPmf,
    binary_convolution,
    compose,
    conditional,
    marginalize,
)

S, T, U, V, X1, X2, Y, Z, T1, T2 = "S", "T", "U", "V", "X1", "X2", "Y", "Z", "T1", "T2"
CHANNEL_GIVEN = (X1, X2, S)
CHANNEL_TARGET = (Y, Z)


@dataclass(frozen=True)
class SdMacSpec:
    """A discrete memoryless state-dependent MAC with an eavesdropper.

    Attributes
    ----------
    state_pmf : JointPmf
        p(s) over the single variable ``S``.
    degrade_kernel : ConditionalPmf
        p(t | s); a one-symbol ``T`` alphabet means the receiver sees no state.
    channel_kernel : ConditionalPmf
        p(y, z | x1, x2, s).
    name : str
        Free-form label carried into files and reports.
    """

    state_pmf: JointPmf
    degrade_kernel: ConditionalPmf
    channel_kernel: ConditionalPmf
    name: str = "custom"

    def __post_init__(self):
        if self.state_pmf.names != (S,):
            raise ValueError(f"state pmf must be over ('S',), got {self.state_pmf.names}")
        if self.degrade_kernel.given_names != (S,) or self.degrade_kernel.target_names != (T,):
            raise ValueError("degrade kernel must be p(T|S)")
        if self.channel_kernel.given_names != CHANNEL_GIVEN or self.channel_kernel.target_names != CHANNEL_TARGET:
            raise ValueError("channel kernel must be p(Y,Z|X1,X2,S)")
        s_alph = self.state_pmf.alphabet(S)
        if self.degrade_kernel.given[0][1] != s_alph or self.channel_kernel.given[2][1] != s_alph:
            raise ValueError("state alphabet differs between state pmf and kernels")

    @classmethod
    def from_arrays(
        cls,
        p_s,
        p_t_given_s,
        p_yz_given_x1x2s,
        alphabets: dict[str, Alphabet] | None = None,
        name: str = "custom",
    ) -> SdMacSpec:
        """Build a spec from dense arrays; alphabets default to ``0..k-1`` labels.

        ``p_yz_given_x1x2s`` has shape (|X1|, |X2|, |S|, |Y|, |Z|).
        """
        w = np.asarray(p_yz_given_x1x2s, dtype=float)
        p_t = np.asarray(p_t_given_s, dtype=float)
        sizes = {X1: w.shape[0], X2: w.shape[1], S: w.shape[2], Y: w.shape[3], Z: w.shape[4], T: p_t.shape[1]}
        alph = {k: Alphabet.of_size(k, v) for k, v in sizes.items()}
        if alphabets:
            alph.update(alphabets)
        return cls(
            JointPmf([(S, alph[S])], p_s),
            ConditionalPmf([(S, alph[S])], [(T, alph[T])], p_t),
            ConditionalPmf([(X1, alph[X1]), (X2, alph[X2]), (S, alph[S])], [(Y, alph[Y]), (Z, alph[Z])], w),
            name=name,
        )

    @property
    def alphabets(self) -> dict[str, Alphabet]:
        (_, ax1), (_, ax2), (_, as_) = self.channel_kernel.given
        (_, ay), (_, az) = self.channel_kernel.target
        return {S: as_, T: self.degrade_kernel.target[0][1], X1: ax1, X2: ax2, Y: ay, Z: az}

    def size(self, name: str) -> int:
        return self.alphabets[name].size

    @property
    def p_s(self) -> np.ndarray:
        return self.state_pmf.table

    @property
    def p_t_given_s(self) -> np.ndarray:
        return self.degrade_kernel.table

    @property
    def w(self) -> np.ndarray:
        """Channel array indexed [x1, x2, s, y, z]."""
        return self.channel_kernel.table

    def var(self, name: str) -> tuple[str, Alphabet]:
        return (name, self.alphabets[name])


@dataclass(frozen=True)
class AuxiliaryScheme:
    """Auxiliary laws p(u|s), p(v|u,s) and the input kernels p(x_j|u,v,s).

    Deterministic input kernels (0/1 rows) are what the round-1 protocol
    executes; the bound evaluators accept any kernels.
    """

    u_kernel: ConditionalPmf
    v_kernel: ConditionalPmf
    x1_kernel: ConditionalPmf
    x2_kernel: ConditionalPmf

    def __post_init__(self):
        expect = [
            (self.u_kernel, (S,), (U,)),
            (self.v_kernel, (U, S), (V,)),
            (self.x1_kernel, (U, V, S), (X1,)),
            (self.x2_kernel, (U, V, S), (X2,)),
        ]
        for kernel, given, target in expect:
            if kernel.given_names != given or kernel.target_names != target:
                raise ValueError(f"expected kernel p({target[0]}|{','.join(given)}), got {kernel!r}")

    @classmethod
    def from_arrays(cls, spec: SdMacSpec, p_u_given_s, p_v_given_us, x1, x2) -> AuxiliaryScheme:
        """Build from arrays.

        ``x1`` and ``x2`` are either integer maps of shape (|U|, |V|, |S|)
        or stochastic kernels of shape (|U|, |V|, |S|, |X_j|).
        """
        pu = np.asarray(p_u_given_s, dtype=float)
        pv = np.asarray(p_v_given_us, dtype=float)
        u_alph = Alphabet.of_size(U, pu.shape[1])
        v_alph = Alphabet.of_size(V, pv.shape[2])
        sv, uv = spec.var(S), (U, u_alph)
        given_x = [uv, (V, v_alph), sv]

        def x_kernel(x, name):
            x = np.asarray(x)
            alph = spec.alphabets[name]
            if np.issubdtype(x.dtype, np.integer):
                return ConditionalPmf.deterministic(given_x, name, alph, x)
            return ConditionalPmf(given_x, [(name, alph)], x)

        return cls(
            ConditionalPmf([sv], [uv], pu),
            ConditionalPmf([uv, sv], [(V, v_alph)], pv),
            x_kernel(x1, X1),
            x_kernel(x2, X2),
        )

    @property
    def u_size(self) -> int:
        return self.u_kernel.target[0][1].size

    @property
    def v_size(self) -> int:
        return self.v_kernel.target[0][1].size

    def x_maps(self) -> tuple[np.ndarray, np.ndarray]:
        """Symbol-wise encoder tables x_j[u, v, s]; both kernels must be deterministic."""
        if not (self.x1_kernel.is_deterministic() and self.x2_kernel.is_deterministic()):
            raise ValueError("protocol execution needs deterministic input maps x_j(u, v, s)")
        return self.x1_kernel.as_map(), self.x2_kernel.as_map()

    def fingerprint(self) -> str:
        parts = [k.table.round(12).tobytes().hex() for k in (self.u_kernel, self.v_kernel, self.x1_kernel, self.x2_kernel)]
        return "|".join(parts)


@dataclass(frozen=True)
class Round2Scheme:
    """Input law p(x1,x2|s) and receiver-side kernels p(t1|y,t), p(t2|y,t).

    The joint law multiplies the two kernels, so T1 and T2 are conditionally
    independent given (Y, T).
    """

    input_law: ConditionalPmf
    t1_kernel: ConditionalPmf
    t2_kernel: ConditionalPmf

    def __post_init__(self):
        if self.input_law.given_names != (S,) or self.input_law.target_names != (X1, X2):
            raise ValueError("input law must be p(X1,X2|S)")
        for kernel, name in ((self.t1_kernel, T1), (self.t2_kernel, T2)):
            if kernel.given_names != (Y, T) or kernel.target_names != (name,):
                raise ValueError(f"expected kernel p({name}|Y,T), got {kernel!r}")

    @classmethod
    def from_arrays(cls, spec: SdMacSpec, p_x1x2_given_s, p_t1_given_yt, p_t2_given_yt) -> Round2Scheme:
        k1 = np.asarray(p_t1_given_yt, dtype=float)
        k2 = np.asarray(p_t2_given_yt, dtype=float)
        yt = [spec.var(Y), spec.var(T)]
        return cls(
            ConditionalPmf([spec.var(S)], [spec.var(X1), spec.var(X2)], p_x1x2_given_s),
            ConditionalPmf(yt, [(T1, Alphabet.of_size(T1, k1.shape[-1]))], k1),
            ConditionalPmf(yt, [(T2, Alphabet.of_size(T2, k2.shape[-1]))], k2),
        )

    def t_kernel(self, i: int) -> ConditionalPmf:
        return {1: self.t1_kernel, 2: self.t2_kernel}[i]


def _state_joint(spec: SdMacSpec) -> JointPmf:
    return compose(spec.state_pmf, spec.degrade_kernel)


def full_joint_round1(spec: SdMacSpec, aux: AuxiliaryScheme) -> JointPmf:
    """p(s)p(t|s)p(u|s)p(v|u,s)p(x1|u,v,s)p(x2|u,v,s)p(y,z|x1,x2,s).

    Axes: S, T, U, V, X1, X2, Y, Z.
    """
    joint = _state_joint(spec)
    for kernel in (aux.u_kernel, aux.v_kernel, aux.x1_kernel, aux.x2_kernel, spec.channel_kernel):
        joint = compose(joint, kernel)
    return joint


def full_joint_round2(spec: SdMacSpec, scheme: Round2Scheme) -> JointPmf:
    """p(s)p(t|s)p(x1,x2|s)p(y,z|x1,x2,s)p(t1|y,t)p(t2|y,t).

    Axes: S, T, X1, X2, Y, Z, T1, T2.
    """
    joint = _state_joint(spec)
    for kernel in (scheme.input_law, spec.channel_kernel, scheme.t1_kernel, scheme.t2_kernel):
        joint = compose(joint, kernel)
    return joint


def check_full_joint(joint: JointPmf, spec: SdMacSpec, tol: float = 1e-10) -> None:
    """Raise if the joint's state marginal or channel conditional drifts from ``spec``."""
    ps = marginalize(joint, S).table
    if np.max(np.abs(ps - spec.p_s)) > tol:
        raise ValueError("state marginal of joint differs from spec")
    mass = marginalize(joint, CHANNEL_GIVEN).table
    recovered = conditional(joint, CHANNEL_TARGET, CHANNEL_GIVEN).table
    live = mass > 0
    if np.max(np.abs(recovered[live] - spec.w[live]), initial=0.0) > tol:
        raise ValueError("channel conditional of joint differs from spec")


# built-in channels


def build_stuck_at(p: float, eve_mode: str = "uninformative") -> SdMacSpec:
    """Binary memory with stuck-at faults.

    Each cell sticks at 0 or 1 with probability p/2 each and is clean
    otherwise. Only transmitter 1 writes (``X2`` is a constant), the receiver
    sees no state, and the eavesdropper either reads the memory
    (``eve_mode="reads_memory"``) or sees a constant.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"fault probability must lie in [0, 1], got {p!r}")
    if eve_mode not in ("uninformative", "reads_memory"):
        raise ValueError(f"eve_mode must be 'uninformative' or 'reads_memory', got {eve_mode!r}")
    s_alph = Alphabet(S, ("stuck0", "stuck1", "clean"))
    z_alph = Alphabet.binary(Z) if eve_mode == "reads_memory" else Alphabet.constant(Z)
    w = np.zeros((2, 1, 3, 2, z_alph.size))
    for x in range(2):
        for s, y in ((0, 0), (1, 1), (2, x)):
            w[x, 0, s, y, y if eve_mode == "reads_memory" else 0] = 1.0
    return SdMacSpec.from_arrays(
        [p / 2, p / 2, 1.0 - p],
        np.ones((3, 1)),
        w,
        alphabets={S: s_alph, T: Alphabet.constant(T), X2: Alphabet.constant(X2), Z: z_alph},
        name=f"stuck-at(p={p!r},{eve_mode})",
    )


def build_modulo_additive(p_s: float, p_1: float, p_2: float, cascade: bool = False) -> SdMacSpec:
    """Binary modulo-additive SD-MAC: Y = X1^X2^S^N1 and Z = X1^X2^S^N2.

    By default N1 and N2 are independent. With ``cascade=True`` the
    eavesdropper sees Y through a further BSC((p_2 - p_1)/(1 - 2 p_1)), which
    gives Z the same marginal noise level p_2 and makes it degraded.
    """
    for name, val in (("p_s", p_s), ("p_1", p_1), ("p_2", p_2)):
        if not 0.0 <= val <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {val!r}")
    if not p_1 <= p_2 <= 0.5:
        warnings.warn(f"noise levels outside 0 <= p_1 <= p_2 <= 1/2 (p_1={p_1}, p_2={p_2})", stacklevel=2)
    if cascade:
        if p_1 == 0.5:
            if p_2 != 0.5:
                raise ValueError("cascade needs p_2 = 1/2 when p_1 = 1/2")
            extra = 0.0
        else:
            extra = (p_2 - p_1) / (1.0 - 2.0 * p_1)
        if not 0.0 <= extra <= 1.0:
            raise ValueError(f"no cascade BSC reaches p_2={p_2} from p_1={p_1}")
        # joint law of (N1, N2) with N2 = N1 ^ extra flip
        pair = np.zeros((2, 2))
        for n1 in range(2):
            for e in range(2):
                pair[n1, n1 ^ e] += (p_1 if n1 else 1 - p_1) * (extra if e else 1 - extra)
    else:
        pair = np.outer([1 - p_1, p_1], [1 - p_2, p_2])
    w = np.zeros((2, 2, 2, 2, 2))
    for x1 in range(2):
        for x2 in range(2):
            for s in range(2):
                b = x1 ^ x2 ^ s
                for n1 in range(2):
                    for n2 in range(2):
                        w[x1, x2, s, b ^ n1, b ^ n2] += pair[n1, n2]
    alph = {k: Alphabet.binary(k) for k in (S, X1, X2, Y, Z)}
    alph[T] = Alphabet.constant(T)
    tag = ",cascade" if cascade else ""
    return SdMacSpec.from_arrays(
        [1 - p_s, p_s], np.ones((2, 1)), w, alphabets=alph,
        name=f"modulo-additive(p_s={p_s!r},p_1={p_1!r},p_2={p_2!r}{tag})",
    )


def build_parallel(p_s: float, p_1: float, p_2: float, p_e: float, eve: str = "sum") -> SdMacSpec:
    """Two-component receiver: Y = (X1^S^N1, X2^S^N2) with a four-symbol alphabet.

    The eavesdropper sees ``X1^X2^Ne`` (``eve="sum"``) or ``X2^Ne``
    (``eve="x2"``, degraded from transmitter 2's side). This channel gives
    each transmitter its own view at the receiver, which the private-key
    round needs.
    """
    for name, val in (("p_s", p_s), ("p_1", p_1), ("p_2", p_2), ("p_e", p_e)):
        if not 0.0 <= val <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {val!r}")
    if eve not in ("sum", "x2"):
        raise ValueError(f"eve must be 'sum' or 'x2', got {eve!r}")
    bern = lambda q, b: q if b else 1.0 - q  # noqa: E731
    w = np.zeros((2, 2, 2, 4, 2))
    for x1 in range(2):
        for x2 in range(2):
            for s in range(2):
                for n1 in range(2):
                    for n2 in range(2):
                        for ne in range(2):
                            y = 2 * (x1 ^ s ^ n1) + (x2 ^ s ^ n2)
                            z = (x1 ^ x2 ^ ne) if eve == "sum" else (x2 ^ ne)
                            w[x1, x2, s, y, z] += bern(p_1, n1) * bern(p_2, n2) * bern(p_e, ne)
    alph = {k: Alphabet.binary(k) for k in (S, X1, X2, Z)}
    alph[Y] = Alphabet(Y, ("00", "01", "10", "11"))
    alph[T] = Alphabet.constant(T)
    return SdMacSpec.from_arrays(
        [1 - p_s, p_s], np.ones((2, 1)), w, alphabets=alph,
        name=f"parallel(p_s={p_s!r},p_1={p_1!r},p_2={p_2!r},p_e={p_e!r},{eve})",
    )


def random_sdmac(
    rng: np.random.Generator,
    sizes: dict[str, int] | None = None,
    cascade: bool = False,
    concentration: float = 1.0,
) -> SdMacSpec:
    """Random SD-MAC with Dirichlet rows; binary alphabets and constant T by default.

    With ``cascade=True`` the eavesdropper observes Y through a random
    kernel, so (anything) -> Y -> Z holds.
    """
    sz = {S: 2, T: 1, X1: 2, X2: 2, Y: 2, Z: 2}
    sz.update(sizes or {})
    dir_ = lambda shape, k: rng.dirichlet(np.full(k, concentration), size=shape)  # noqa: E731
    p_s = rng.dirichlet(np.full(sz[S], concentration))
    p_t = dir_((sz[S],), sz[T])
    if cascade:
        p_y = dir_((sz[X1], sz[X2], sz[S]), sz[Y])
        p_z_y = dir_((sz[Y],), sz[Z])
        w = p_y[..., :, None] * p_z_y[None, None, None, :, :]
    else:
        w = dir_((sz[X1], sz[X2], sz[S]), sz[Y] * sz[Z]).reshape(sz[X1], sz[X2], sz[S], sz[Y], sz[Z])
    return SdMacSpec.from_arrays(p_s, p_t, w, name="random-cascade" if cascade else "random")


# built-in schemes


def modadd_scheme(spec: SdMacSpec, alpha: float) -> AuxiliaryScheme:
    """U constant, V ~ Bern(alpha) independent of S, X1 = V and X2 = 0.

    The sum X1^X2 then equals V, which is the effective input the closed-form
    modulo-additive bound assumes.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    ns = spec.size(S)
    x1 = np.zeros((1, 2, ns), dtype=int)
    x1[:, 1, :] = 1
    return AuxiliaryScheme.from_arrays(
        spec,
        np.ones((ns, 1)),
        np.tile([1 - alpha, alpha], (1, ns, 1)),
        x1,
        np.zeros((1, 2, ns), dtype=int),
    )


def state_copy_scheme(spec: SdMacSpec, x1_symbol: int = 0, x2_symbol: int = 0) -> AuxiliaryScheme:
    """U constant, V = S, both inputs fixed symbols."""
    ns = spec.size(S)
    pv = np.eye(ns)[None, :, :]
    return AuxiliaryScheme.from_arrays(
        spec,
        np.ones((ns, 1)),
        pv,
        np.full((1, ns, ns), x1_symbol, dtype=int),
        np.full((1, ns, ns), x2_symbol, dtype=int),
    )


def random_aux_scheme(
    spec: SdMacSpec,
    rng: np.random.Generator,
    u_size: int = 2,
    v_size: int = 2,
    deterministic_inputs: bool = True,
) -> AuxiliaryScheme:
    ns = spec.size(S)
    pu = rng.dirichlet(np.ones(u_size), size=ns)
    pv = rng.dirichlet(np.ones(v_size), size=(u_size, ns))
    shape = (u_size, v_size, ns)
    if deterministic_inputs:
        x1 = rng.integers(spec.size(X1), size=shape)
        x2 = rng.integers(spec.size(X2), size=shape)
    else:
        x1 = rng.dirichlet(np.ones(spec.size(X1)), size=shape)
        x2 = rng.dirichlet(np.ones(spec.size(X2)), size=shape)
    return AuxiliaryScheme.from_arrays(spec, pu, pv, x1, x2)


def random_round2_scheme(spec: SdMacSpec, rng: np.random.Generator, t1_size: int = 2, t2_size: int = 2) -> Round2Scheme:
    ns, nx1, nx2 = spec.size(S), spec.size(X1), spec.size(X2)
    law = rng.dirichlet(np.ones(nx1 * nx2), size=ns).reshape(ns, nx1, nx2)
    yt = (spec.size(Y), spec.size(T))
    return Round2Scheme.from_arrays(
        spec, law, rng.dirichlet(np.ones(t1_size), size=yt), rng.dirichlet(np.ones(t2_size), size=yt)
    )


def parallel_scheme(spec: SdMacSpec, q: float, input_law=None) -> Round2Scheme:
    """For ``build_parallel`` channels: T_i is component i of Y seen through BSC(q).

    Inputs default to independent uniform bits, independent of the state.
    """
    if spec.size(Y) != 4:
        raise ValueError("parallel_scheme needs the four-symbol output of build_parallel")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q!r}")
    ns, nt = spec.size(S), spec.size(T)
    law = np.full((ns, 2, 2), 0.25) if input_law is None else np.asarray(input_law, dtype=float)
    k1 = np.zeros((4, nt, 2))
    k2 = np.zeros((4, nt, 2))
    for y in range(4):
        for i, k in ((0, k1), (1, k2)):
            bit = (y >> (1 - i)) & 1
            k[y, :, bit] = 1.0 - q
            k[y, :, 1 - bit] = q
    return Round2Scheme.from_arrays(spec, law, k1, k2)


def modadd_effective_flip(p_s: float, alpha: float, p_noise: float) -> float:
    """P(output = 1) for input V ~ Bern(alpha) through state and noise flips."""
    return binary_convolution(binary_convolution(alpha, p_s), p_noise)
