"""N-partner GHZ secret sharing under Eve's single-probe individual attack.

Every partner (Alice included) measures sigma_x or sigma_y at random; rounds
are kept when the number of sigma_y choices is even. Eve keeps her probe until
the bases are announced and then measures it. Dishonest partners (Charlies)
pool their outcomes with Eve.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .bell import SeesawOptions, classify_violation, mk_cap, mk_maximize
from .infotheory import (
    JointDistribution,
    MeasurementPlan,
    joint_distribution,
    mutual_information,
)
from .linalg import (
    X_AXIS,
    Y_AXIS,
    BlochVector,
    NumericalError,
    StateVector,
    expectation,
    kron,
    partial_trace,
    pauli_eigenbasis,
    pauli_op,
)
from .states import AttackParams, QubitLayout, attack_qss, counterexample_state, ghz

__all__ = [
    "Scenario",
    "SiftRule",
    "SecurityReport",
    "CounterexampleRow",
    "sift_rule",
    "protocol_plan",
    "announced_eve_direction",
    "eve_measurement",
    "run_protocol",
    "find_threshold",
    "security_bell_table",
    "counterexample_scan",
]

BASIS_NAMES = "xy"
MAX_PARTIES = 6


@dataclass(frozen=True)
class Scenario:
    """Who Eve works with: nobody (``external``) or ``n_charlies`` dishonest partners."""

    kind: str
    n_charlies: int = 0

    def __post_init__(self):
        if self.kind == "external":
            if self.n_charlies != 0:
                raise ValueError("an external Eve has no dishonest partners")
        elif self.kind == "dishonest":
            if self.n_charlies < 1:
                raise ValueError("the dishonest scenario needs at least one Charlie")
        else:
            raise ValueError(f"unknown scenario kind {self.kind!r}")

    @classmethod
    def external(cls) -> "Scenario":
        return cls("external", 0)

    @classmethod
    def dishonest(cls, n: int) -> "Scenario":
        return cls("dishonest", n)

    @classmethod
    def from_counts(cls, N: int, h: int) -> "Scenario":
        n = N - 1 - h
        return cls.external() if n == 0 else cls.dishonest(n)

    def honest(self, N: int) -> int:
        """Number of honest partners ``h`` for ``N`` parties; must be at least 1."""
        h = N - 1 - self.n_charlies
        if h < 1:
            raise ValueError(f"{self.n_charlies} Charlies leave no honest partner among N={N}")
        return h


@dataclass(frozen=True)
class SiftRule:
    """Kept basis tuples (as strings such as ``"xyy"``) and the sign of their GHZ correlation."""

    n_parties: int
    signs: dict

    def keeps(self, bases) -> bool:
        return _label(bases) in self.signs

    def sign(self, bases) -> int:
        return self.signs[_label(bases)]

    @property
    def kept(self) -> tuple[str, ...]:
        return tuple(self.signs)


def _label(bases) -> str:
    if isinstance(bases, str):
        return bases
    return "".join(BASIS_NAMES[int(b)] for b in bases)


def sift_rule(n_parties: int) -> SiftRule:
    """Keep tuples with an even number of sigma_y; sign is ``(-1)^(#y/2)``.

    The rule is checked against the GHZ state before it is returned: kept
    tuples must have correlation exactly equal to their sign, discarded tuples
    correlation zero.
    """
    if not 2 <= n_parties <= MAX_PARTIES:
        raise ValueError(f"n_parties must be in [2, {MAX_PARTIES}], got {n_parties}")
    state = ghz(n_parties)
    signs = {}
    for tup in itertools.product((0, 1), repeat=n_parties):
        ny = sum(tup)
        corr = expectation(state, kron(*(pauli_op(X_AXIS if b == 0 else Y_AXIS) for b in tup)))
        if ny % 2 == 0:
            sign = (-1) ** (ny // 2)
            if abs(corr - sign) > 1e-12:
                raise NumericalError(f"GHZ correlation {corr} for {_label(tup)} != {sign}")
            signs[_label(tup)] = sign
        elif abs(corr) > 1e-12:
            raise NumericalError(f"GHZ correlation for discarded {_label(tup)} is {corr}")
    return SiftRule(n_parties, signs)


_EQUATOR = (
    BlochVector(1.0, 0.0, 0.0),
    BlochVector(0.0, 1.0, 0.0),
    BlochVector(-1.0, 0.0, 0.0),
    BlochVector(0.0, -1.0, 0.0),
)


def announced_eve_direction(layout: QubitLayout, bases) -> BlochVector:
    """Eve's default measurement after the announcement.

    Her probe stands in for the whole block of honest qubits, whose joint
    sigma_x/sigma_y product acts on the block like an equatorial observable
    at angle ``(pi/2) * (#y among the Bobs)``.
    """
    tup = [BASIS_NAMES.index(b) if isinstance(b, str) else int(b) for b in bases]
    ny = sum(tup[q] for q in layout.bobs)
    return _EQUATOR[ny % 4]


def protocol_plan(layout: QubitLayout, eve=None) -> MeasurementPlan:
    """Measurement plan with one party per qubit, named after its role.

    ``eve`` maps a basis tuple to Eve's direction; defaults to
    :func:`announced_eve_direction`.
    """
    N = layout.N
    rule = sift_rule(N)
    if eve is None:
        eve = lambda tup: announced_eve_direction(layout, tup)  # noqa: E731
    return MeasurementPlan(
        parties={role: (q,) for q, role in enumerate(layout.roles)},
        choices={q: (X_AXIS, Y_AXIS) for q in range(N)},
        adaptive={layout.eve: eve},
        sift=rule.keeps,
    )


def _layout_for(state: StateVector, scenario: Scenario) -> QubitLayout:
    N = state.num_qubits - 1
    return QubitLayout.for_partners(N, scenario.honest(N))


def _eve_conditionals(state: StateVector, layout: QubitLayout, tup) -> tuple[np.ndarray, np.ndarray]:
    """Eve's unnormalized conditional states given Alice's and the Charlies' outcomes.

    Returns weights ``p[a, c]`` and Bloch vectors ``r[a, c, :]`` (scaled by the weight).
    """
    t = state.tensor()
    holders = (layout.alice,) + layout.charlies
    for q in holders:
        u = pauli_eigenbasis(X_AXIS if tup[q] == 0 else Y_AXIS)
        t = np.moveaxis(np.tensordot(u.conj().T, t, axes=([1], [q])), 0, q)
    # axes: holders..., bobs..., eve; trace out bobs
    bobs = list(layout.bobs)
    rho_e = np.tensordot(t, t.conj(), axes=(bobs, bobs))
    k = len(holders)
    # rho_e axes: holders, eve, holders', eve'; keep diagonal in the holders
    rho_e = rho_e.reshape(2**k, 2, 2**k, 2)
    rho_e = np.einsum("iaib->iab", rho_e)
    p = np.einsum("iaa->i", rho_e).real
    r = np.einsum("iab,kba->ik", rho_e, np.stack([pauli_op(X_AXIS), pauli_op(Y_AXIS), pauli_op((0, 0, 1))])).real
    return p.reshape(2, -1), r.reshape(2, -1, 3)


def _entropy_rows(p: np.ndarray) -> np.ndarray:
    """Shannon entropies (bits) along all but the first axis."""
    flat = p.reshape(p.shape[0], -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(flat > 0, -flat * np.log2(np.where(flat > 0, flat, 1.0)), 0.0)
    return terms.sum(axis=1)


def _eve_information(p: np.ndarray, r: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """``I(A : C, E)`` for each row of ``dirs`` (shape (K, 3))."""
    proj = np.einsum("ack,dk->dac", r, dirs)
    joint = np.stack([(p + proj) / 2, (p - proj) / 2], axis=-1)  # (K, a, c, e)
    joint = np.clip(joint, 0.0, None)
    h_a = _entropy_rows(joint.sum(axis=(2, 3)))
    h_ce = _entropy_rows(joint.sum(axis=1))
    h_ace = _entropy_rows(joint)
    return h_a + h_ce - h_ace


def _sphere(theta_deg: np.ndarray, phi_deg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors on a (polar, azimuth) grid in degrees, plus their angles in radians."""
    th, ph = np.meshgrid(np.radians(theta_deg), np.radians(phi_deg), indexing="ij")
    dirs = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)
    return dirs.reshape(-1, 3), np.stack([th, ph], axis=-1).reshape(-1, 2)


def eve_measurement(state: StateVector, scenario: Scenario, announced_bases) -> tuple[BlochVector, float]:
    """Brute-force Eve's best projective measurement direction for one announced basis tuple.

    The objective is the unauthorized information ``I(A : Charlies, E)``
    (``I(A : E)`` for an external Eve). A 1-degree spherical grid is refined
    twice locally, down to 0.01 degree.
    """
    layout = _layout_for(state, scenario)
    tup = [BASIS_NAMES.index(b) if isinstance(b, str) else int(b) for b in announced_bases]
    if len(tup) != layout.N:
        raise ValueError(f"expected {layout.N} announced bases, got {len(tup)}")
    p, r = _eve_conditionals(state, layout, tup)

    dirs, angles = _sphere(np.arange(0.0, 180.5, 1.0), np.arange(0.0, 360.0, 1.0))
    vals = _eve_information(p, r, dirs)
    best = int(np.argmax(vals))
    center = np.degrees(angles[best])
    for half, step in ((1.0, 0.1), (0.1, 0.01)):
        offs = np.linspace(-half, half, int(round(2 * half / step)) + 1)
        d2, a2 = _sphere(center[0] + offs, center[1] + offs)
        v2 = _eve_information(p, r, d2)
        i = int(np.argmax(v2))
        if v2[i] > vals[best]:
            dirs, vals, angles, best = d2, v2, a2, i
            center = np.degrees(a2[i])
    return BlochVector.from_array(dirs[best]), float(max(vals[best], 0.0))


@dataclass(frozen=True)
class SecurityReport:
    phi: float
    N: int
    h: int
    I_a: float
    I_u: float
    sift_probability: float
    I_a_parity: float
    S_auth: float | None = None
    S_unauth: float | None = None
    genuine_auth: bool | None = None
    genuine_unauth: bool | None = None

    @property
    def M_auth(self) -> int:
        return self.N

    @property
    def M_unauth(self) -> int:
        return self.N - self.h + 1

    @property
    def secure(self) -> bool:
        return self.I_a > self.I_u

    def row(self) -> dict:
        return {
            "phi": self.phi,
            "I_a": self.I_a,
            "I_u": self.I_u,
            "S_auth": self.S_auth,
            "S_unauth": self.S_unauth,
            "sift_p": self.sift_probability,
            "genuine_auth": self.genuine_auth,
            "genuine_unauth": self.genuine_unauth,
        }


def _parity_information(d: JointDistribution, rule: SiftRule, layout: QubitLayout) -> float:
    """``I(A : decoded bit)`` where the partners decode the signed product of their outcomes."""
    partner_axes = [d.axes[layout.roles[q]][0] for q in layout.partners]
    a_axis = d.axes["A"][0]
    table = np.zeros((len(d.bases), 2, 2))
    for idx in np.ndindex(*d.probs.shape):
        p = d.probs[idx]
        if p == 0.0:
            continue
        sign = rule.sign(d.bases[idx[0]])
        flips = sum(idx[ax] for ax in partner_axes) % 2
        decoded = flips if sign > 0 else 1 - flips
        table[idx[0], idx[a_axis], decoded] += p
    dec = JointDistribution(("A", "decoded"), {"A": (1,), "decoded": (2,)}, table, d.bases, d.sift_probability)
    return mutual_information(dec, ["A"], ["decoded"])


def run_protocol(p: AttackParams, s: Scenario | None = None, eve_policy: str = "announced") -> SecurityReport:
    """Authorized and unauthorized informations about Alice's bit.

    ``I_a = I(A : all partners)`` and ``I_u = I(A : Charlies, Eve)``, both per
    sifted round and conditioned on the announced bases. ``eve_policy`` is
    ``"announced"`` (equatorial measurement matched to the bases) or
    ``"optimized"`` (grid search per basis tuple).
    """
    if s is None:
        s = Scenario.from_counts(p.N, p.h)
    if s.honest(p.N) != p.h:
        raise ValueError(f"scenario with {s.n_charlies} Charlies inconsistent with N={p.N}, h={p.h}")
    layout = p.layout
    state = attack_qss(p)
    if eve_policy == "announced":
        eve = None
    elif eve_policy == "optimized":
        cache: dict = {}

        def eve(tup):
            if tup not in cache:
                cache[tup] = eve_measurement(state, s, tup)[0]
            return cache[tup]

    else:
        raise ValueError(f"unknown eve_policy {eve_policy!r}")
    d = joint_distribution(state, protocol_plan(layout, eve))
    roles = layout.roles
    partners = [roles[q] for q in layout.partners]
    unauth = [roles[q] for q in layout.charlies] + ["E"]
    i_a = mutual_information(d, ["A"], partners)
    i_u = mutual_information(d, ["A"], unauth)
    i_par = _parity_information(d, sift_rule(p.N), layout)
    return SecurityReport(p.phi, p.N, p.h, i_a, i_u, d.sift_probability, i_par)


def find_threshold(N: int, scenario: Scenario, tol: float = 1e-6, eve_policy: str = "announced") -> float:
    """Attack strength where ``I_a - I_u`` changes sign, by bisection on [0, pi/2]."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    h = scenario.honest(N)

    def gap(phi: float) -> float:
        rep = run_protocol(AttackParams(N, h, phi), scenario, eve_policy)
        return rep.I_a - rep.I_u

    lo, hi = 0.0, math.pi / 2
    g_lo, g_hi = gap(lo), gap(hi)
    if not (g_lo > 0 > g_hi):
        raise NumericalError(f"I_a - I_u does not change sign on [0, pi/2]: {g_lo}, {g_hi}")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        g = gap(mid)
        if g == 0.0:
            return mid
        if g > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def security_bell_table(
    N: int,
    scenario: Scenario,
    phi_grid: Iterable[float],
    opts: SeesawOptions | None = None,
) -> list[SecurityReport]:
    """Information and MK values for both groups along a grid of attack strengths.

    The authorized group is everyone but Eve (``N`` qubits); the unauthorized
    group is Alice, the Charlies and Eve (``N - h + 1`` qubits).
    """
    opts = opts or SeesawOptions()
    h = scenario.honest(N)
    layout = QubitLayout.for_partners(N, h)
    rows = []
    for phi in phi_grid:
        p = AttackParams(N, h, float(phi))
        rep = run_protocol(p, scenario)
        state = attack_qss(p)
        s_auth = mk_maximize(partial_trace(state, layout.authorized), opts).value
        s_unauth = mk_maximize(partial_trace(state, layout.unauthorized), opts).value
        rows.append(
            SecurityReport(
                rep.phi,
                N,
                h,
                rep.I_a,
                rep.I_u,
                rep.sift_probability,
                rep.I_a_parity,
                s_auth,
                s_unauth,
                classify_violation(s_auth, rep.M_auth).genuine,
                classify_violation(s_unauth, rep.M_unauth).genuine,
            )
        )
    return rows


@dataclass(frozen=True)
class CounterexampleRow:
    alpha: float
    S_ABC: float
    S_BCD: float

    def row(self) -> dict:
        cap = mk_cap(2)
        return {
            "alpha": self.alpha,
            "S_ABC": self.S_ABC,
            "S_BCD": self.S_BCD,
            "both_exceed_2sqrt2": self.S_ABC > cap and self.S_BCD > cap,
        }


def counterexample_scan(alpha_grid: Sequence[float], opts: SeesawOptions | None = None) -> list[CounterexampleRow]:
    """Three-qubit MK maxima of the reductions ABC and BCD of the four-qubit counterexample."""
    opts = opts or SeesawOptions()
    rows = []
    for alpha in alpha_grid:
        psi = counterexample_state(float(alpha))
        s_abc = mk_maximize(partial_trace(psi, (0, 1, 2)), opts).value
        s_bcd = mk_maximize(partial_trace(psi, (1, 2, 3)), opts).value
        rows.append(CounterexampleRow(float(alpha), s_abc, s_bcd))
    return rows
