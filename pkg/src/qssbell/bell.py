"""CHSH and Mermin-Klyshko Bell operators and their maximization.

Settings are always addressed by qubit index: ``settings.pairs[k]`` holds the
two directions ``(a_k, a'_k)`` measured on qubit ``k`` of the state, and qubit
``k`` is tensor factor ``k`` of every operator built here.

Two routes evaluate ``<B_M>``:

* :func:`mk_operator` builds the ``2^M x 2^M`` matrix by the MK recursion;
* :func:`mk_value` contracts the state's Pauli correlation tensor with the
  settings and the expansion coefficients of the recursion.

The see-saw optimizer uses the second route, the tests check it against the
first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import (
    DEFAULT_POLICY,
    PAULIS,
    DensityMatrix,
    NumericalError,
    NumericPolicy,
    StateVector,
    BlochVector,
    jacobi_eigh3,
    kron,
    partial_trace,
    pauli_op,
    random_unit_vectors,
)

__all__ = [
    "MeasurementSettings",
    "BellResult",
    "SeesawOptions",
    "ViolationClass",
    "chsh_operator",
    "mk_operator",
    "mk_factor_map",
    "mk_coefficients",
    "correlation_tensor",
    "mk_value",
    "horodecki_S",
    "mk_maximize",
    "mk_cap",
    "genuine_threshold",
    "classify_violation",
    "monogamy_pair",
    "v_operator",
    "v_operator_identity",
]

MAX_MK_QUBITS = 6
CAP_SLACK = 1e-6


@dataclass(frozen=True)
class MeasurementSettings:
    """Per-qubit pairs of measurement directions ``(a_k, a'_k)``."""

    pairs: tuple[tuple[BlochVector, BlochVector], ...]

    def __post_init__(self):
        pairs = tuple((p[0], p[1]) for p in self.pairs)
        if len(pairs) < 2:
            raise ValueError("Bell settings need at least two qubits")
        for a, ap in pairs:
            if not (isinstance(a, BlochVector) and isinstance(ap, BlochVector)):
                raise TypeError("settings must be BlochVector pairs")
        object.__setattr__(self, "pairs", pairs)

    @property
    def M(self) -> int:
        return len(self.pairs)

    @classmethod
    def from_array(cls, arr) -> "MeasurementSettings":
        """From an array of shape ``(M, 2, 3)``; rows are normalized."""
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 3 or arr.shape[1:] != (2, 3):
            raise ValueError(f"expected shape (M, 2, 3), got {arr.shape}")
        return cls(tuple((BlochVector.from_array(p[0]), BlochVector.from_array(p[1])) for p in arr))

    def as_array(self) -> np.ndarray:
        return np.array([[a.as_array(), ap.as_array()] for a, ap in self.pairs])

    def swapped(self) -> "MeasurementSettings":
        """Every ``a_k`` exchanged with ``a'_k``."""
        return MeasurementSettings(tuple((ap, a) for a, ap in self.pairs))


@dataclass(frozen=True)
class SeesawOptions:
    restarts: int = 50
    max_iters: int = 500
    tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("restarts and max_iters must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class BellResult:
    value: float
    settings: MeasurementSettings
    restarts_used: int
    iterations: int
    converged: bool
    history: tuple[float, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class ViolationClass:
    value: float
    M: int
    lhv_bound: float
    genuine_bound: float
    classification: str

    @property
    def genuine(self) -> bool:
        return self.classification == "genuine-violation"


def chsh_operator(s: MeasurementSettings) -> np.ndarray:
    """``(s_a1 + s_a1') x s_a2 + (s_a1 - s_a1') x s_a2'``."""
    if s.M != 2:
        raise ValueError(f"CHSH operator needs M=2 settings, got M={s.M}")
    (a1, a1p), (a2, a2p) = s.pairs
    A, Ap = pauli_op(a1), pauli_op(a1p)
    return kron(A + Ap, pauli_op(a2)) + kron(A - Ap, pauli_op(a2p))


def mk_factor_map(M: int) -> dict[int, int]:
    """Map from the recursion's vector label ``j`` (1..M) to the qubit it acts on.

    The recursion starts from CHSH on labels 1, 2 and puts each new label
    ``j >= 3`` in front as the new leftmost factor.
    """
    if not 2 <= M <= MAX_MK_QUBITS:
        raise ValueError(f"M={M} outside [2, {MAX_MK_QUBITS}]")
    out = {1: M - 2, 2: M - 1}
    out.update({j: M - j for j in range(3, M + 1)})
    return out


def mk_operator(s: MeasurementSettings) -> np.ndarray:
    """MK Bell operator built literally from the recursion.

    ``B_M = (s_aM + s_aM')/2 x B_{M-1} + (s_aM - s_aM')/2 x B'_{M-1}``
    where the primed operator uses all settings with ``a`` and ``a'`` swapped.
    """
    M = s.M
    if not 2 <= M <= MAX_MK_QUBITS:
        raise ValueError(f"M={M} outside [2, {MAX_MK_QUBITS}]")
    if M == 2:
        return chsh_operator(s)
    head = MeasurementSettings(s.pairs[1:])
    b = mk_operator(head)
    bp = mk_operator(head.swapped())
    a, ap = (pauli_op(v) for v in s.pairs[0])
    return kron((a + ap) / 2, b) + kron((a - ap) / 2, bp)


def mk_coefficients(M: int) -> np.ndarray:
    """Expansion of ``B_M`` over products of the chosen observables.

    Returns ``c`` of shape ``(2,)*M`` with
    ``B_M = sum_s c[s] (x)_k sigma(a_k if s_k == 0 else a'_k)``.
    """
    if not 2 <= M <= MAX_MK_QUBITS:
        raise ValueError(f"M={M} outside [2, {MAX_MK_QUBITS}]")
    c = np.array([[1.0, 1.0], [1.0, -1.0]])
    for _ in range(M - 2):
        swapped = np.flip(c)
        c = np.stack([(c + swapped) / 2, (c - swapped) / 2])
    return c


def _letters(k: int, offset: int = 0) -> str:
    return "".join(chr(ord("a") + offset + i) for i in range(k))


def correlation_tensor(rho) -> np.ndarray:
    """``T[i1..iM] = Tr(rho sigma_i1 x ... x sigma_iM)`` for ``i`` in x, y, z."""
    M = rho.num_qubits
    if isinstance(rho, StateVector):
        rho = rho.density()
    t = rho.matrix.reshape((2,) * (2 * M))
    rows, cols, out = _letters(M), _letters(M, M), _letters(M, 2 * M)
    ops = ",".join(f"{out[k]}{cols[k]}{rows[k]}" for k in range(M))
    res = np.einsum(f"{rows}{cols},{ops}->{out}", t, *([PAULIS] * M), optimize=True)
    return np.ascontiguousarray(res.real)


def _value(T: np.ndarray, C: np.ndarray, V: np.ndarray) -> float:
    """Contract correlation tensor ``T`` with settings ``V`` (M, 2, 3) and coefficients ``C``."""
    Y = T
    for j in range(V.shape[0]):
        Y = np.tensordot(Y, V[j], axes=([0], [1]))
    # each contraction consumes the leading axis and appends a setting axis
    return float(np.sum(Y * C))


def mk_value(rho, s: MeasurementSettings) -> float:
    """``Tr(rho B_M(s))`` evaluated through the correlation tensor."""
    if rho.num_qubits != s.M:
        raise ValueError(f"state has {rho.num_qubits} qubits, settings {s.M}")
    return _value(correlation_tensor(rho), mk_coefficients(s.M), s.as_array())


def _local_gradient(T: np.ndarray, C: np.ndarray, V: np.ndarray, k: int) -> np.ndarray:
    """Coefficients ``G`` (2, 3) with ``<B> = G[0].a_k + G[1].a'_k`` when all other settings are fixed."""
    M = V.shape[0]
    Y = T
    for j in range(M):
        if j == k:
            Y = np.moveaxis(Y, 0, -1)
        else:
            Y = np.tensordot(Y, V[j], axes=([0], [1]))
    # axes are now: settings of j < k, Pauli axis of k, settings of j > k
    Y = np.moveaxis(Y, k, -1)
    Cm = np.moveaxis(C, k, 0)
    return np.tensordot(Cm, Y, axes=(list(range(1, M)), list(range(M - 1))))


def horodecki_S(rho: DensityMatrix) -> float:
    """Maximal CHSH value of a two-qubit state from its correlation matrix.

    ``2 sqrt(t1 + t2)`` with ``t1 >= t2`` the two largest eigenvalues of ``T^T T``.
    """
    if isinstance(rho, StateVector):
        rho = rho.density()
    if rho.num_qubits != 2:
        raise ValueError(f"Horodecki evaluation needs a two-qubit state, got {rho.num_qubits}")
    T = correlation_tensor(rho)
    t1, t2, _ = jacobi_eigh3(T.T @ T)[0]
    return 2.0 * math.sqrt(max(t1 + t2, 0.0))


def mk_cap(M: int) -> float:
    """Largest quantum value of the M-qubit MK expression, ``2^((M+1)/2)``."""
    return 2.0 ** ((M + 1) / 2)


def genuine_threshold(M: int) -> float:
    """Values above ``2^(M/2)`` need all M qubits entangled."""
    return 2.0 ** (M / 2)


def _seesaw_run(T, C, V, opts: SeesawOptions):
    M = V.shape[0]
    history = []
    prev = -np.inf
    converged = False
    sweeps = 0
    for sweeps in range(1, opts.max_iters + 1):
        for k in range(M):
            G = _local_gradient(T, C, V, k)
            for r in range(2):
                norm = np.linalg.norm(G[r])
                if norm > 1e-14:
                    V[k, r] = G[r] / norm
        val = float(G[0] @ V[M - 1, 0] + G[1] @ V[M - 1, 1])
        history.append(val)
        if val - prev < opts.tol:
            converged = True
            break
        prev = val
    return history[-1], sweeps, converged, history


def _restart(T: np.ndarray, C: np.ndarray, opts: SeesawOptions, r: int):
    """One see-saw run from the random start belonging to restart ``r``."""
    M = C.ndim
    rng = np.random.default_rng([opts.seed, r])
    V = random_unit_vectors(rng, 2 * M).reshape(M, 2, 3)
    value, sweeps, conv, hist = _seesaw_run(T, C, V, opts)
    return value, V, sweeps, conv, hist


def mk_maximize(rho, opts: SeesawOptions | None = None, **kwargs) -> BellResult:
    """Maximize ``Tr(rho B_M)`` over all ``2M`` unit vectors by see-saw ascent.

    Each sweep visits the qubits in order; with the other settings fixed the
    expectation is linear in ``a_k`` and in ``a'_k``, so both are set to their
    normalized coefficient vectors (kept unchanged when that vector is zero).
    Restart ``r`` starts from directions drawn with seed ``(opts.seed, r)``.
    """
    if opts is None:
        opts = SeesawOptions(**kwargs)
    elif kwargs:
        raise TypeError("pass either opts or keyword options, not both")
    if isinstance(rho, StateVector):
        rho = rho.density()
    M = rho.num_qubits
    if not 2 <= M <= MAX_MK_QUBITS:
        raise ValueError(f"MK maximization supports 2..{MAX_MK_QUBITS} qubits, got {M}")
    T = correlation_tensor(rho)
    C = mk_coefficients(M)
    best = None
    for r in range(opts.restarts):
        run = _restart(T, C, opts, r)
        if best is None or run[0] > best[0]:
            best = run
    value, V, sweeps, conv, hist = best
    if value > mk_cap(M) + CAP_SLACK:
        raise NumericalError(f"MK value {value} exceeds the quantum maximum {mk_cap(M)}")
    return BellResult(
        value=value,
        settings=MeasurementSettings.from_array(V),
        restarts_used=opts.restarts,
        iterations=sweeps,
        converged=conv,
        history=tuple(hist),
    )


def classify_violation(value: float, M: int) -> ViolationClass:
    """Compare an MK value with the local bound 2 and the genuine bound ``2^(M/2)``."""
    if M < 2:
        raise ValueError("M must be at least 2")
    genuine = genuine_threshold(M)
    if value > genuine:
        label = "genuine-violation"
    elif value > 2.0:
        label = "lhv-violation"
    else:
        label = "no-violation"
    return ViolationClass(float(value), M, 2.0, genuine, label)


def monogamy_pair(rho) -> tuple[float, float]:
    """Horodecki values of the pairs (0, 1) and (0, 2) of a three-qubit state."""
    if rho.num_qubits != 3:
        raise ValueError(f"monogamy_pair needs three qubits, got {rho.num_qubits}")
    return horodecki_S(partial_trace(rho, (0, 1))), horodecki_S(partial_trace(rho, (0, 2)))


def v_operator(vectors: Sequence) -> np.ndarray:
    """``B_AB(a, a', b, b') x 1_C + B_AC(A, A', c, c')`` on three qubits ordered A, B, C."""
    if len(vectors) != 8:
        raise ValueError("V needs exactly eight unit vectors")
    vs = [v if isinstance(v, BlochVector) else BlochVector.from_array(v) for v in vectors]
    a, ap, b, bp, A, Ap, c, cp = vs
    bab = chsh_operator(MeasurementSettings(((a, ap), (b, bp))))
    bac = chsh_operator(MeasurementSettings(((A, Ap), (c, cp))))
    eye2 = np.eye(2)
    bac3 = np.einsum("acAC,bB->abcABC", bac.reshape(2, 2, 2, 2), eye2).reshape(8, 8)
    return np.kron(bab, eye2) + bac3


def v_operator_identity(vectors: Sequence, policy: NumericPolicy = DEFAULT_POLICY) -> float:
    """Return ``f`` in ``(V^2/4 - 2)^2 = f 1``.

    Raises :class:`NumericalError` if the left side is not proportional to the
    identity, which can only mean a bug in the operator construction.
    """
    V = v_operator(vectors)
    eye = np.eye(8)
    W = V @ V / 4 - 2 * eye
    W = W @ W
    f = float(np.trace(W).real / 8)
    resid = np.abs(W - f * eye).max()
    if resid > policy.pauli_unit_tol:
        raise NumericalError(f"(V^2/4 - 2)^2 is not scalar: residual {resid:.3g}")
    return f
