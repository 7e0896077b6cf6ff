"""Exact Born-rule outcome tables, Shannon entropies and mutual informations.

A :class:`JointDistribution` stores one probability per combination of
measured-qubit outcomes, together with a ``basis`` axis that enumerates the
basis choices kept after sifting. Parties own one or more qubit axes, so a
grouped party such as ``BC`` keeps its full outcome tuple.

Basis choices are announced publicly in every protocol considered here, so
entropies and informations are conditioned on the ``basis`` party by default.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .linalg import DensityMatrix, StateVector, pauli_eigenbasis

__all__ = [
    "MeasurementPlan",
    "JointDistribution",
    "joint_distribution",
    "shannon_entropy",
    "binary_entropy",
    "mutual_information",
    "conditional_entropy",
    "sample_counts",
]

BASIS = "basis"

# Outcome index 0 is the +1 eigenvalue, index 1 the -1 eigenvalue.
OUTCOME_VALUES = (1, -1)


@dataclass(frozen=True)
class MeasurementPlan:
    """Who measures which qubits, and in which bases.

    ``choices[q]`` lists the candidate directions for qubit ``q``, one of which
    is picked uniformly at random each round; a basis-choice tuple holds the
    picked index for every key of ``choices`` in ascending qubit order.
    ``adaptive[q]`` gives the direction of a qubit whose owner measures after
    the announcement, as a function of that tuple. ``sift`` decides which
    basis tuples are kept.
    """

    parties: Mapping[str, Sequence[int]]
    choices: Mapping[int, Sequence] = None
    adaptive: Mapping[int, Callable[[tuple[int, ...]], object]] = None
    sift: Callable[[tuple[int, ...]], bool] | None = None

    def __post_init__(self):
        parties = {str(k): tuple(int(q) for q in v) for k, v in self.parties.items()}
        if BASIS in parties:
            raise ValueError(f"party name {BASIS!r} is reserved")
        choices = {int(k): tuple(v) for k, v in (self.choices or {}).items()}
        adaptive = {int(k): v for k, v in (self.adaptive or {}).items()}
        object.__setattr__(self, "parties", parties)
        object.__setattr__(self, "choices", choices)
        object.__setattr__(self, "adaptive", adaptive)
        owned = [q for qs in parties.values() for q in qs]
        if len(owned) != len(set(owned)):
            raise ValueError("a qubit belongs to more than one party")
        if any(not qs for qs in parties.values()):
            raise ValueError("every party needs at least one qubit")
        measured = set(choices) | set(adaptive)
        if set(choices) & set(adaptive):
            raise ValueError("a qubit cannot be both chosen and adaptive")
        if measured != set(owned):
            raise ValueError("every party qubit needs exactly one basis source")
        if any(len(v) == 0 for v in choices.values()):
            raise ValueError("empty basis choice list")

    @property
    def measured(self) -> tuple[int, ...]:
        return tuple(sorted(q for qs in self.parties.values() for q in qs))


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Probability table with named parties.

    ``probs`` has one leading axis for the kept basis tuples (listed in
    ``bases``) followed by one length-2 axis per measured qubit, in ascending
    qubit order. ``axes[party]`` lists the table axes a party owns.
    """

    parties: tuple[str, ...]
    axes: Mapping[str, tuple[int, ...]]
    probs: np.ndarray
    bases: tuple[tuple[int, ...], ...]
    sift_probability: float = 1.0
    public: tuple[str, ...] = (BASIS,)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if (p < -1e-15).any():
            raise ValueError("negative probability")
        total = p.sum()
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total!r}")
        p = np.clip(p, 0.0, None)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        if BASIS not in self.axes:
            object.__setattr__(self, "axes", {BASIS: (0,), **self.axes})

    @property
    def labels(self) -> tuple[str, ...]:
        """Party names including the public basis party."""
        return (BASIS,) + tuple(self.parties)

    def _axes_of(self, group: Iterable[str]) -> list[int]:
        out = []
        for g in group:
            if g not in self.axes:
                raise ValueError(f"unknown party {g!r}; known: {self.labels}")
            out.extend(self.axes[g])
        return sorted(set(out))

    def marginal(self, group: Iterable[str]) -> np.ndarray:
        keep = self._axes_of(group)
        drop = tuple(i for i in range(self.probs.ndim) if i not in keep)
        return self.probs.sum(axis=drop)

    def entropy(self, group: Iterable[str]) -> float:
        """Shannon entropy (bits) of the joint outcome of ``group``."""
        group = list(group)
        if not group:
            return 0.0
        return shannon_entropy(self.marginal(group).ravel())

    def merged(self, name: str, group: Sequence[str]) -> "JointDistribution":
        """Copy where the parties in ``group`` are treated as a single party ``name``."""
        axes = {k: v for k, v in self.axes.items() if k not in group and k != BASIS}
        axes[name] = tuple(self._axes_of(group))
        parties = tuple(p for p in self.parties if p not in group) + (name,)
        return JointDistribution(parties, axes, self.probs, self.bases, self.sift_probability, self.public)

    def table(self):
        """Yield ``(outcome, p)`` with one entry per party (basis first)."""
        for idx in zip(*np.nonzero(self.probs)):
            outcome = [list(self.bases[idx[0]])]
            for party in self.parties:
                outcome.append([OUTCOME_VALUES[idx[a]] for a in self.axes[party]])
            yield outcome, float(self.probs[idx])

    def to_json_dict(self) -> dict:
        return {
            "parties": list(self.labels),
            "sift_probability": float(self.sift_probability),
            "table": [{"outcome": o, "p": p} for o, p in self.table()],
        }


def shannon_entropy(d) -> float:
    """``-sum p log2 p`` of a probability vector, with ``0 log 0 = 0``."""
    if isinstance(d, Mapping):
        d = list(d.values())
    p = np.asarray(d, dtype=float).ravel()
    if (p < -1e-12).any() or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("not a probability distribution")
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def binary_entropy(p: float) -> float:
    return shannon_entropy([p, 1.0 - p])


def _given(d: JointDistribution, given) -> list[str]:
    return list(d.public if given is None else given)


def conditional_entropy(d: JointDistribution, target: Iterable[str], given: Iterable[str] | None = None) -> float:
    """``H(target | given) = H(target, given) - H(given)``; public parties are always included in ``given``."""
    g = _given(d, None) + [x for x in (given or []) if x not in d.public]
    t = [x for x in target if x not in g]
    return d.entropy(t + g) - d.entropy(g)


def mutual_information(
    d: JointDistribution,
    group_x: Iterable[str],
    group_y: Iterable[str],
    given: Iterable[str] | None = None,
) -> float:
    """``I(X : Y | given)`` in bits.

    ``given`` defaults to the distribution's public parties (the announced
    bases); pass ``()`` for the unconditioned information.
    """
    x, y = list(group_x), list(group_y)
    if set(x) & set(y):
        raise ValueError(f"groups overlap: {sorted(set(x) & set(y))}")
    if not x or not y:
        raise ValueError("both groups must be nonempty")
    g = [p for p in _given(d, given) if p not in x and p not in y]
    val = d.entropy(x + g) + d.entropy(y + g) - d.entropy(x + y + g) - d.entropy(g)
    return max(val, 0.0) if val > -1e-12 else val


def _basis_tuples(plan: MeasurementPlan):
    qubits = sorted(plan.choices)
    ranges = [range(len(plan.choices[q])) for q in qubits]
    weight_each = 1.0 / np.prod([len(r) for r in ranges]) if ranges else 1.0
    for tup in itertools.product(*ranges):
        if plan.sift is None or plan.sift(tup):
            dirs = {q: plan.choices[q][i] for q, i in zip(qubits, tup)}
            dirs.update({q: f(tup) for q, f in plan.adaptive.items()})
            yield tup, weight_each, dirs


def _rotate(t: np.ndarray, q: int, direction) -> np.ndarray:
    u = pauli_eigenbasis(direction)
    return np.moveaxis(np.tensordot(u.conj().T, t, axes=([1], [q])), 0, q)


def _outcome_probs(state, dirs: Mapping[int, object], measured: Sequence[int]) -> np.ndarray:
    n = state.num_qubits
    unmeasured = tuple(q for q in range(n) if q not in dirs)
    if isinstance(state, StateVector):
        t = state.tensor()
        for q in measured:
            t = _rotate(t, q, dirs[q])
        return (np.abs(t) ** 2).sum(axis=unmeasured)
    rho = state.matrix.reshape((2,) * (2 * n))
    for q in measured:
        u = pauli_eigenbasis(dirs[q])
        rho = np.moveaxis(np.tensordot(u.conj().T, rho, axes=([1], [q])), 0, q)
        rho = np.moveaxis(np.tensordot(rho, u, axes=([n + q], [0])), -1, n + q)
    diag = np.einsum(rho.reshape(2**n, 2**n), [0, 0], [0]).real.reshape((2,) * n)
    return diag.sum(axis=unmeasured)


def _sequential_probs(state: StateVector, dirs, measured, plan: MeasurementPlan, order: Sequence[str]) -> np.ndarray:
    """Outcome table built by letting parties measure one after another.

    Each party's measurement prepares the conditional state seen by the next
    one; probabilities are chained as ``P(o1) P(o2|o1) ...``.
    """
    n = state.num_qubits
    out = np.zeros((2,) * len(measured))

    def branch(t: np.ndarray, remaining: Sequence[str], prob: float, idx: dict) -> None:
        if not remaining:
            out[tuple(idx[q] for q in measured)] = prob
            return
        party, rest = remaining[0], remaining[1:]
        qubits = plan.parties[party]
        for q in qubits:
            t = _rotate(t, q, dirs[q])
        for outcome in itertools.product((0, 1), repeat=len(qubits)):
            sl = [slice(None)] * n
            for q, o in zip(qubits, outcome):
                # length-1 slices keep every qubit at its original axis
                sl[q] = slice(o, o + 1)
            sub = t[tuple(sl)]
            p = float(np.vdot(sub, sub).real)
            child = {**idx, **dict(zip(qubits, outcome))}
            if p > 0.0:
                branch(sub / np.sqrt(p), rest, prob * p, child)
            # outcomes below a zero-probability branch keep their zero entries

    branch(state.tensor(), list(order), 1.0, {})
    return out


def joint_distribution(state, plan: MeasurementPlan, order: Sequence[str] | None = None) -> JointDistribution:
    """Exact outcome probabilities of ``plan`` on ``state``, conditioned on sifting.

    With ``order`` the table is computed by sequential projection in that
    party order (pure states only) instead of directly.
    """
    if not isinstance(state, (StateVector, DensityMatrix)):
        raise TypeError("state must be a StateVector or DensityMatrix")
    n = state.num_qubits
    measured = plan.measured
    if measured and measured[-1] >= n:
        raise ValueError(f"plan addresses qubit {measured[-1]} of a {n}-qubit state")
    if order is not None:
        if not isinstance(state, StateVector):
            raise TypeError("sequential evaluation needs a pure state")
        if sorted(order) != sorted(plan.parties):
            raise ValueError("order must list every party exactly once")

    tables, bases, weights = [], [], []
    for tup, w, dirs in _basis_tuples(plan):
        if order is None:
            tables.append(_outcome_probs(state, dirs, measured))
        else:
            tables.append(_sequential_probs(state, dirs, measured, plan, order))
        bases.append(tup)
        weights.append(w)
    sift_p = float(sum(weights))
    if not tables or sift_p <= 0.0:
        raise ValueError("sifting keeps no basis choice")
    probs = np.stack([w / sift_p * t for w, t in zip(weights, tables)])
    pos = {q: i + 1 for i, q in enumerate(measured)}
    axes = {name: tuple(pos[q] for q in qs) for name, qs in plan.parties.items()}
    return JointDistribution(tuple(plan.parties), axes, probs, tuple(bases), sift_p)


def sample_counts(d: JointDistribution, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial sample of ``shots`` rounds from the table; same shape as ``d.probs``."""
    flat = d.probs.ravel()
    return rng.multinomial(shots, flat / flat.sum()).reshape(d.probs.shape)
