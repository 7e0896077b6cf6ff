"""Dense complex linear algebra for small multiqubit systems.

Index convention used everywhere in the package: in a state of ``n`` qubits the
amplitude index ``b`` stores qubit ``k`` in bit ``n - 1 - k``, so qubit 0 is the
leftmost symbol of a ket and the leftmost factor of a tensor product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "NumericPolicy",
    "DEFAULT_POLICY",
    "NumericalError",
    "SIGMA_I",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "PAULIS",
    "BlochVector",
    "StateVector",
    "DensityMatrix",
    "kron",
    "partial_trace",
    "expectation",
    "pauli_op",
    "pauli_eigenbasis",
    "sym3_eigenvalues",
    "jacobi_eigh3",
]


class NumericalError(RuntimeError):
    """A computation produced a result that violates a mathematical guarantee."""


@dataclass(frozen=True)
class NumericPolicy:
    """Tolerances shared by all validation and convergence checks."""

    norm_tol: float = 1e-12
    hermitian_tol: float = 1e-12
    trace_tol: float = 1e-12
    psd_tol: float = 1e-10
    operator_hermitian_tol: float = 1e-10
    imag_tol: float = 1e-10
    bloch_tol: float = 1e-12
    pauli_unit_tol: float = 1e-9
    symmetric_tol: float = 1e-10
    jacobi_tol: float = 1e-14
    max_qubits: int = 7


DEFAULT_POLICY = NumericPolicy()

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])

for _m in (SIGMA_I, SIGMA_X, SIGMA_Y, SIGMA_Z, PAULIS):
    _m.setflags(write=False)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _qubit_count(dim: int) -> int:
    n = int(round(math.log2(dim))) if dim > 0 else -1
    if n < 1 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two >= 2")
    return n


@dataclass(frozen=True)
class BlochVector:
    """Unit vector selecting the observable ``a . sigma``."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        n2 = self.x * self.x + self.y * self.y + self.z * self.z
        if not abs(n2 - 1.0) <= DEFAULT_POLICY.bloch_tol:
            raise ValueError(f"Bloch vector not unit: |a|^2 = {n2!r}")

    @classmethod
    def from_array(cls, v: Iterable[float], normalize: bool = True) -> "BlochVector":
        a = np.asarray(list(v), dtype=float)
        if a.shape != (3,):
            raise ValueError("Bloch vector needs exactly three components")
        if normalize:
            norm = np.linalg.norm(a)
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            a = a / norm
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def __neg__(self) -> "BlochVector":
        return BlochVector(-self.x, -self.y, -self.z)


X_AXIS = BlochVector(1.0, 0.0, 0.0)
Y_AXIS = BlochVector(0.0, 1.0, 0.0)
Z_AXIS = BlochVector(0.0, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state of ``num_qubits`` qubits."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        n = _qubit_count(amps.size)
        if n > DEFAULT_POLICY.max_qubits:
            raise ValueError(f"{n} qubits exceeds the supported maximum {DEFAULT_POLICY.max_qubits}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > DEFAULT_POLICY.norm_tol:
            raise ValueError(f"state not normalized: <psi|psi> = {norm2!r}")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def normalized(cls, amplitudes) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(amps / np.linalg.norm(amps))

    @property
    def num_qubits(self) -> int:
        return _qubit_count(self.amplitudes.size)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one length-2 axis per qubit."""
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite ``2^n x 2^n`` matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        n = _qubit_count(m.shape[0])
        if n > DEFAULT_POLICY.max_qubits:
            raise ValueError(f"{n} qubits exceeds the supported maximum {DEFAULT_POLICY.max_qubits}")
        pol = DEFAULT_POLICY
        herm = np.abs(m - m.conj().T).max()
        if herm > pol.hermitian_tol:
            raise ValueError(f"density matrix not Hermitian (max deviation {herm:.3g})")
        tr = np.trace(m)
        if abs(tr - 1.0) > pol.trace_tol:
            raise ValueError(f"density matrix trace {tr!r} != 1")
        m = (m + m.conj().T) / 2
        lo = np.linalg.eigvalsh(m)[0]
        if lo < -pol.psd_tol:
            raise ValueError(f"density matrix not positive semidefinite (min eigenvalue {lo:.3g})")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def num_qubits(self) -> int:
        return _qubit_count(self.matrix.shape[0])

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> "DensityMatrix":
        d = 2**num_qubits
        return cls(np.eye(d, dtype=complex) / d)

    def __repr__(self):
        return f"DensityMatrix(num_qubits={self.num_qubits})"


State = Union[StateVector, DensityMatrix]


def kron(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of the operands, leftmost operand = most significant index."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    return reduce(np.kron, (np.asarray(o) for o in ops))


def _check_keep(keep: Iterable[int], n: int) -> list[int]:
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep set must be nonempty")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep indices {keep} out of range for {n} qubits")
    return keep


def partial_trace(rho: State, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on ``keep`` (listed in ascending original order).

    Pure states are reduced without forming the full density matrix.
    """
    n = rho.num_qubits
    keep = _check_keep(keep, n)
    traced = [k for k in range(n) if k not in keep]
    dk = 2 ** len(keep)
    if isinstance(rho, StateVector):
        t = rho.tensor()
        red = np.tensordot(t, t.conj(), axes=(traced, traced))
        return DensityMatrix(red.reshape(dk, dk))
    t = rho.matrix.reshape((2,) * (2 * n))
    perm = keep + traced + [n + k for k in keep] + [n + k for k in traced]
    dt = 2 ** len(traced)
    t = t.transpose(perm).reshape(dk, dt, dk, dt)
    return DensityMatrix(np.trace(t, axis1=1, axis2=3))


def expectation(rho: State, obs: np.ndarray, policy: NumericPolicy = DEFAULT_POLICY) -> float:
    """Real expectation value ``Tr(rho obs)`` of a Hermitian observable."""
    obs = np.asarray(obs)
    if obs.shape != (rho.dim, rho.dim):
        raise ValueError(f"observable shape {obs.shape} does not match state dimension {rho.dim}")
    if np.abs(obs - obs.conj().T).max() > policy.operator_hermitian_tol:
        raise ValueError("observable is not Hermitian")
    if isinstance(rho, StateVector):
        val = np.vdot(rho.amplitudes, obs @ rho.amplitudes)
    else:
        val = np.sum(rho.matrix * obs.T)
    if abs(val.imag) > policy.imag_tol:
        raise NumericalError(f"expectation has imaginary part {val.imag:.3g}")
    return float(val.real)


def _as_vector(a) -> np.ndarray:
    if isinstance(a, BlochVector):
        return a.as_array()
    v = np.asarray(a, dtype=float)
    if v.shape != (3,):
        raise ValueError("expected a 3-vector")
    return v


def pauli_op(a, policy: NumericPolicy = DEFAULT_POLICY) -> np.ndarray:
    """The observable ``a . sigma`` for a unit vector ``a``."""
    v = _as_vector(a)
    if abs(np.dot(v, v) - 1.0) > policy.pauli_unit_tol:
        raise ValueError(f"pauli_op needs a unit vector, |a|^2 = {np.dot(v, v)!r}")
    return np.tensordot(v, PAULIS, axes=1)


def pauli_eigenbasis(a) -> np.ndarray:
    """Unitary whose columns are the +1 and -1 eigenvectors of ``a . sigma``."""
    x, y, z = _as_vector(a)
    if 1.0 + z < 1e-12:
        return np.array([[0, 1], [1, 0]], dtype=complex)
    plus = np.array([1.0 + z, x + 1j * y])
    minus = np.array([-(x - 1j * y), 1.0 + z])
    norm = math.sqrt(2.0 * (1.0 + z))
    return np.column_stack([plus, minus]) / norm


def jacobi_eigh3(m, policy: NumericPolicy = DEFAULT_POLICY) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a real symmetric 3x3 matrix.

    Returns ``(values, vectors)`` with values in descending order and the
    matching eigenvectors as columns.
    """
    a = np.array(m, dtype=float)
    if a.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got {a.shape}")
    if np.abs(a - a.T).max() > policy.symmetric_tol:
        raise ValueError("matrix is not symmetric")
    a = (a + a.T) / 2
    v = np.eye(3)
    scale = max(1.0, np.abs(a).max())
    for _ in range(100):
        off = math.sqrt(a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2)
        if off <= policy.jacobi_tol * scale:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[p, q]
            if apq == 0.0:
                continue
            tau = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
            c = 1.0 / math.sqrt(1.0 + t * t)
            s = t * c
            rot = np.eye(3)
            rot[p, p] = rot[q, q] = c
            rot[p, q] = s
            rot[q, p] = -s
            a = rot.T @ a @ rot
            a[p, q] = a[q, p] = 0.0
            v = v @ rot
    else:
        raise NumericalError("Jacobi iteration did not converge")
    vals = np.diag(a).copy()
    order = np.argsort(vals)[::-1]
    return vals[order], v[:, order]


def sym3_eigenvalues(m, policy: NumericPolicy = DEFAULT_POLICY) -> tuple[float, float, float]:
    """Eigenvalues of a real symmetric 3x3 matrix, descending."""
    vals, _ = jacobi_eigh3(m, policy)
    return float(vals[0]), float(vals[1]), float(vals[2])


def random_unit_vectors(rng: np.random.Generator, count: int) -> np.ndarray:
    """``count`` isotropically distributed unit 3-vectors, shape ``(count, 3)``."""
    v = rng.normal(size=(count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def reorder_qubits(state: StateVector, order: Sequence[int]) -> StateVector:
    """Relabel qubits so that new qubit ``k`` is old qubit ``order[k]``."""
    n = state.num_qubits
    if sorted(order) != list(range(n)):
        raise ValueError(f"{order} is not a permutation of range({n})")
    return StateVector(state.tensor().transpose(list(order)).reshape(-1))
