"""Constructors for the states that appear in the secret-sharing analysis.

Besides the named states this module parses the small state mini-language used
by the command line::

    epr
    ghz:M
    attack:N=<int>,h=<int>,phi=<float>
    counterexample:alpha=<float>
    file:<path>      JSON {"num_qubits": n, "amplitudes": [[re, im], ...]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .linalg import DEFAULT_POLICY, DensityMatrix, StateVector, partial_trace

__all__ = [
    "AttackParams",
    "QubitLayout",
    "epr_phi_plus",
    "ghz",
    "attack_two_party",
    "attack_qss",
    "counterexample_state",
    "basis_state",
    "random_pure_state",
    "random_density_matrix",
    "parse_state_spec",
    "load_state_file",
    "save_state_file",
]

_PHI_SLACK = 1e-12
MAX_GHZ = DEFAULT_POLICY.max_qubits


def _check_phi(phi: float) -> float:
    phi = float(phi)
    if not (-_PHI_SLACK <= phi <= math.pi / 2 + _PHI_SLACK):
        raise ValueError(f"attack strength phi={phi!r} outside [0, pi/2]")
    return phi


@dataclass(frozen=True)
class QubitLayout:
    """Role of every qubit of the eavesdropped state, in index order.

    The order is ``A, C1..Cn, B1..Bh, E``: Alice, the dishonest partners,
    the honest (spied) partners and Eve's probe.
    """

    roles: tuple[str, ...]

    def __post_init__(self):
        r = self.roles
        if len(r) < 3 or r[0] != "A" or r[-1] != "E":
            raise ValueError(f"invalid layout {r}")
        middle = r[1:-1]
        n_c = sum(1 for x in middle if x.startswith("C"))
        expected = tuple(f"C{i + 1}" for i in range(n_c)) + tuple(
            f"B{i + 1}" for i in range(len(middle) - n_c)
        )
        if middle != expected or len(middle) == n_c:
            raise ValueError(f"invalid layout {r}")

    @classmethod
    def for_partners(cls, N: int, h: int) -> "QubitLayout":
        n = N - 1 - h
        return cls(("A",) + tuple(f"C{i + 1}" for i in range(n)) + tuple(f"B{i + 1}" for i in range(h)) + ("E",))

    @property
    def num_qubits(self) -> int:
        return len(self.roles)

    @property
    def N(self) -> int:
        return len(self.roles) - 1

    @property
    def alice(self) -> int:
        return 0

    @property
    def eve(self) -> int:
        return len(self.roles) - 1

    @property
    def charlies(self) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.roles) if r.startswith("C"))

    @property
    def bobs(self) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.roles) if r.startswith("B"))

    @property
    def partners(self) -> tuple[int, ...]:
        """Everybody except Alice and Eve."""
        return tuple(range(1, len(self.roles) - 1))

    @property
    def authorized(self) -> tuple[int, ...]:
        return tuple(range(len(self.roles) - 1))

    @property
    def unauthorized(self) -> tuple[int, ...]:
        return (0,) + self.charlies + (self.eve,)


@dataclass(frozen=True)
class AttackParams:
    """Partner count ``N``, honest-partner count ``h`` and attack strength ``phi``."""

    N: int
    h: int
    phi: float

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N!r}")
        if self.N + 1 > MAX_GHZ:
            raise ValueError(f"N={self.N} needs {self.N + 1} qubits; at most {MAX_GHZ} supported")
        if not isinstance(self.h, (int, np.integer)) or not 1 <= self.h <= self.N - 1:
            raise ValueError(f"h must satisfy 1 <= h <= N-1, got h={self.h!r}, N={self.N}")
        object.__setattr__(self, "phi", _check_phi(self.phi))

    @property
    def n(self) -> int:
        """Number of dishonest partners."""
        return self.N - 1 - self.h

    @property
    def layout(self) -> QubitLayout:
        return QubitLayout.for_partners(self.N, self.h)


def basis_state(bits: str) -> StateVector:
    """Computational basis state from a ket label such as ``"010"``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return StateVector(v)


def epr_phi_plus() -> StateVector:
    """(|00> + |11>)/sqrt(2)."""
    return ghz(2)


def ghz(m: int) -> StateVector:
    """(|0...0> + |1...1>)/sqrt(2) on ``m`` qubits, 2 <= m <= 7."""
    if not isinstance(m, (int, np.integer)) or not 2 <= m <= MAX_GHZ:
        raise ValueError(f"GHZ size must be an integer in [2, {MAX_GHZ}], got {m!r}")
    v = np.zeros(2**m, dtype=complex)
    v[0] = v[-1] = 1 / math.sqrt(2)
    return StateVector(v)


def attack_qss(p: AttackParams) -> StateVector:
    """Post-attack state of the ``N + 1`` qubits, ordered as ``p.layout``.

    Eve's single probe couples coherently to the ``h`` honest qubits:
    ``|0^N>|0> + cos(phi)|1^N>|0> + sin(phi)|1^(N-h) 0^h>|1>``, all over sqrt(2).
    """
    N, h = p.N, p.h
    v = np.zeros(2 ** (N + 1), dtype=complex)
    s = 1 / math.sqrt(2)
    v[0] = s
    v[int("1" * N + "0", 2)] += s * math.cos(p.phi)
    v[int("1" * (N - h) + "0" * h + "1", 2)] += s * math.sin(p.phi)
    # cos and sin terms coincide only if h == 0, which AttackParams forbids
    return StateVector(v)


def attack_two_party(phi: float) -> StateVector:
    """Alice-Bob-Eve state after Eve's probe acts on Bob's half of an EPR pair."""
    return attack_qss(AttackParams(2, 1, phi))


def counterexample_state(alpha: float) -> StateVector:
    """Four-qubit state with two overlapping three-qubit MK violations near alpha = 0.955."""
    c, s = math.cos(alpha), math.sin(alpha)
    v = np.zeros(16, dtype=complex)
    for ket, amp in (("0011", 1), ("1100", 1), ("0101", 1j), ("1010", 1j)):
        v[int(ket, 2)] += c * amp / 2
    for ket, amp in (("1001", 1j), ("1111", 1)):
        v[int(ket, 2)] += s * amp / math.sqrt(2)
    return StateVector(v)


def random_pure_state(num_qubits: int, rng: np.random.Generator) -> StateVector:
    """Unitarily invariant random pure state (normalized complex Gaussian)."""
    d = 2**num_qubits
    return StateVector.normalized(rng.normal(size=d) + 1j * rng.normal(size=d))


def random_density_matrix(num_qubits: int, rng: np.random.Generator, env_qubits: int | None = None) -> DensityMatrix:
    """Random mixed state: reduction of a random pure state on system + environment.

    The environment defaults to as many qubits as the system, capped so the
    purification stays within the supported size.
    """
    if env_qubits is None:
        env_qubits = min(num_qubits, MAX_GHZ - num_qubits)
    if env_qubits == 0:
        return random_pure_state(num_qubits, rng).density()
    psi = random_pure_state(num_qubits + env_qubits, rng)
    return partial_trace(psi, range(num_qubits))


def save_state_file(state: StateVector, path) -> None:
    payload = {
        "num_qubits": state.num_qubits,
        "amplitudes": [[float(a.real), float(a.imag)] for a in state.amplitudes],
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def load_state_file(path) -> StateVector:
    data = json.loads(Path(path).read_text())
    try:
        n = int(data["num_qubits"])
        amps = np.array([complex(re, im) for re, im in data["amplitudes"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed state file {path}: {exc}") from exc
    if amps.size != 2**n:
        raise ValueError(f"state file {path}: {amps.size} amplitudes for {n} qubits")
    return StateVector(amps)


def _parse_kv(body: str, keys: dict[str, type]) -> dict:
    out = {}
    for item in body.split(","):
        if "=" not in item:
            raise ValueError(f"expected key=value, got {item!r}")
        k, v = (s.strip() for s in item.split("=", 1))
        if k not in keys:
            raise ValueError(f"unknown parameter {k!r}")
        out[k] = keys[k](v)
    missing = set(keys) - set(out)
    if missing:
        raise ValueError(f"missing parameters: {sorted(missing)}")
    return out


def parse_state_spec(spec: str) -> StateVector:
    """Build a state from its mini-language description (see module docstring)."""
    spec = spec.strip()
    kind, _, body = spec.partition(":")
    if kind == "epr" and not body:
        return epr_phi_plus()
    if kind == "ghz":
        try:
            m = int(body)
        except ValueError:
            raise ValueError(f"bad GHZ size in {spec!r}") from None
        return ghz(m)
    if kind == "attack":
        kv = _parse_kv(body, {"N": int, "h": int, "phi": float})
        return attack_qss(AttackParams(kv["N"], kv["h"], kv["phi"]))
    if kind == "counterexample":
        kv = _parse_kv(body, {"alpha": float})
        return counterexample_state(kv["alpha"])
    if kind == "file" and body:
        return load_state_file(body)
    raise ValueError(f"unrecognized state spec {spec!r}")
