"""Bell functionals, no-signaling boxes, and their correspondence with games.

A bipartite correlation experiment with inputs X, Y and outcomes a, b maps to
a communication game in which Alice receives the pair (x0, x), playing the
roles of the remote outcome and the remote input, and must keep x hidden.
The directed no-signaling property of the correlations becomes exactly the
obliviousness constraint of the game, and the game performance reproduces the
Bell value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import qmath
from .games import Behavior, ObliviousGame, _check_distribution, _readonly
from .qmath import DensityMatrix

NS_TOL = 1e-10
ZERO_MARGINAL_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class BellFunctional:
    """Real coefficient tensor C[X, Y, a, b] with input priors."""

    coeffs: np.ndarray
    p_alice: np.ndarray
    p_bob: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 4 or c.shape[2] != c.shape[3]:
            raise ValueError("coefficients must have shape (m_A, m_B, d, d)")
        pa = np.asarray(self.p_alice, dtype=float).reshape(-1)
        pb = np.asarray(self.p_bob, dtype=float).reshape(-1)
        if pa.shape != (c.shape[0],) or pb.shape != (c.shape[1],):
            raise ValueError("priors do not match the input counts")
        _check_distribution(pa, 1e-12, "p_alice")
        _check_distribution(pb, 1e-12, "p_bob")
        object.__setattr__(self, "coeffs", _readonly(c))
        object.__setattr__(self, "p_alice", _readonly(pa))
        object.__setattr__(self, "p_bob", _readonly(pb))

    @property
    def m_alice(self) -> int:
        return self.coeffs.shape[0]

    @property
    def m_bob(self) -> int:
        return self.coeffs.shape[1]

    @property
    def n_outcomes(self) -> int:
        return self.coeffs.shape[2]

    def to_dict(self) -> dict:
        return {
            "coeffs": self.coeffs.tolist(),
            "p_alice": self.p_alice.tolist(),
            "p_bob": self.p_bob.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BellFunctional":
        return cls(
            np.asarray(d["coeffs"], dtype=float),
            np.asarray(d["p_alice"], dtype=float),
            np.asarray(d["p_bob"], dtype=float),
        )


@dataclass(frozen=True, eq=False)
class NoSignalingBox:
    """Bipartite correlation table p[X, Y, a, b].

    Construction rejects tables whose marginals signal beyond ``NS_TOL`` in
    either direction; the residual itself is the diagnostic quantity, so no
    silent projection is performed.
    """

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.ndim != 4:
            raise ValueError("box table must have shape (m_A, m_B, d, d)")
        if np.min(t) < -NS_TOL:
            raise ValueError("box has negative probabilities")
        sums = t.sum(axis=(2, 3))
        if np.max(np.abs(sums - 1.0)) >= NS_TOL:
            raise ValueError("box entries do not normalize per input pair")
        resid = _no_signaling_residual(t)
        if resid >= NS_TOL:
            raise ValueError(f"box signals: residual {resid:.3e} >= {NS_TOL}")
        object.__setattr__(self, "table", _readonly(t))

    @property
    def m_alice(self) -> int:
        return self.table.shape[0]

    @property
    def m_bob(self) -> int:
        return self.table.shape[1]

    @property
    def n_outcomes(self) -> int:
        return self.table.shape[2]

    def alice_marginals(self) -> np.ndarray:
        """p(a|X), averaged over Bob's inputs (which agree within tolerance)."""
        return self.table.sum(axis=3).mean(axis=1)

    def no_signaling_residual(self) -> float:
        return _no_signaling_residual(self.table)

    def to_dict(self) -> dict:
        return {"table": self.table.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "NoSignalingBox":
        return cls(np.asarray(d["table"], dtype=float))


def _no_signaling_residual(t: np.ndarray) -> float:
    bob_marg = t.sum(axis=2)  # p(b|X,Y): must not depend on X
    alice_marg = t.sum(axis=3)  # p(a|X,Y): must not depend on Y
    r1 = np.max(np.abs(bob_marg - bob_marg.mean(axis=0, keepdims=True)))
    r2 = np.max(np.abs(alice_marg - alice_marg.mean(axis=1, keepdims=True)))
    return float(max(r1, r2))


def save_functional(bell: BellFunctional, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(bell.to_dict(), fh, indent=1)


def load_functional(path) -> BellFunctional:
    with open(path, "r", encoding="utf-8") as fh:
        return BellFunctional.from_dict(json.load(fh))


def save_box(box: NoSignalingBox, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(box.to_dict(), fh, indent=1)


def load_box(path) -> NoSignalingBox:
    with open(path, "r", encoding="utf-8") as fh:
        return NoSignalingBox.from_dict(json.load(fh))


def bell_value(bell: BellFunctional, box: NoSignalingBox) -> float:
    """Value of the functional on a box."""
    if box.table.shape != bell.coeffs.shape:
        raise ValueError("box shape does not match functional")
    return float(
        np.einsum("XYab,X,Y,XYab->", bell.coeffs, bell.p_alice, bell.p_bob, box.table)
    )


def cglmp3() -> BellFunctional:
    """Three-outcome facet functional with local bound 1/2 and quantum maximum (3+sqrt(33))/12.

    The eight correlation terms carry coefficients +-1; the conventional 1/4
    prefactor is absorbed into the uniform input priors.
    """
    coeffs = np.zeros((2, 2, 3, 3))
    # (X, Y, b as function of a, sign)
    terms = (
        (0, 0, lambda a: a, 1.0),
        (1, 0, lambda a: (a + 1) % 3, 1.0),
        (1, 1, lambda a: a, 1.0),
        (0, 1, lambda a: a, 1.0),
        (0, 0, lambda a: (a + 1) % 3, -1.0),
        (1, 0, lambda a: a, -1.0),
        (1, 1, lambda a: (a + 1) % 3, -1.0),
        (0, 1, lambda a: (a - 1) % 3, -1.0),
    )
    for X, Y, event, sign in terms:
        for a in range(3):
            coeffs[X, Y, a, event(a)] += sign
    return BellFunctional(coeffs, np.full(2, 0.5), np.full(2, 0.5))


def box_from_quantum(state: DensityMatrix, alice_meas, bob_meas) -> NoSignalingBox:
    """Correlation table of local measurements on a bipartite state."""
    alice_meas = tuple(alice_meas)
    bob_meas = tuple(bob_meas)
    da = alice_meas[0].dim
    db = bob_meas[0].dim
    if da * db != state.dim:
        raise ValueError("state dimension does not factor over the measurements")
    na = alice_meas[0].n_outcomes
    nb = bob_meas[0].n_outcomes
    table = np.empty((len(alice_meas), len(bob_meas), na, nb))
    for X, ma in enumerate(alice_meas):
        for Y, mb in enumerate(bob_meas):
            for a, ea in enumerate(ma.elements):
                for b, eb in enumerate(mb.elements):
                    table[X, Y, a, b] = float(
                        np.trace(np.kron(ea, eb) @ state.matrix).real
                    )
    return NoSignalingBox(table)


def game_alice_inputs(n_outcomes: int, m_alice: int) -> tuple:
    """Canonical (x0, x) input ordering of games built from functionals."""
    return tuple((x0, x) for x0 in range(n_outcomes) for x in range(m_alice))


def game_from_bell(bell: BellFunctional, p_g) -> ObliviousGame:
    """Communication game associated with a functional and a choice of p(x0|x).

    Alice's inputs are pairs (x0, x) distributed as p_g(x0|x) p_alice(x); the
    single partition family groups them by x, so the receiver may learn x0 but
    nothing about which x Alice held.
    """
    d, ma, mb = bell.n_outcomes, bell.m_alice, bell.m_bob
    pg = np.asarray(p_g, dtype=float)
    if pg.shape != (ma, d):
        raise ValueError(f"p_g must have shape ({ma}, {d})")
    for x in range(ma):
        _check_distribution(pg[x], 1e-10, f"p_g row {x}")
        if bell.p_alice[x] <= 0.0:
            raise ValueError(f"input {x} has zero prior; its partition set would vanish")
    alice = game_alice_inputs(d, ma)
    p_alice = np.array([pg[x, x0] * bell.p_alice[x] for (x0, x) in alice])
    payoff = np.array(
        [[[bell.coeffs[x, y, x0, b] for b in range(d)] for y in range(mb)] for (x0, x) in alice]
    )
    family = tuple(
        tuple(i for i, (_, x) in enumerate(alice) if x == v) for v in range(ma)
    )
    return ObliviousGame(
        alice_inputs=alice,
        bob_inputs=tuple(range(mb)),
        outcomes=tuple(range(d)),
        p_alice=p_alice,
        p_bob=bell.p_bob,
        payoff=payoff,
        partitions=(family,),
    )


def strategy_from_box(box: NoSignalingBox) -> tuple:
    """Convert a box into (p_g, behavior) for the associated game.

    Uses Alice's observed marginals as p_g, so that the game performance
    reproduces the Bell value of the box exactly.  Outcomes with (numerically)
    zero marginal get a uniform placeholder row; their prior weight vanishes,
    so they cannot affect the performance.
    """
    d, ma, mb = box.n_outcomes, box.m_alice, box.m_bob
    pg = box.alice_marginals()  # (ma, d)
    table = np.empty((d * ma, mb, d))
    for i, (x0, x) in enumerate(game_alice_inputs(d, ma)):
        if pg[x, x0] <= ZERO_MARGINAL_TOL:
            table[i] = 1.0 / d
        else:
            table[i] = box.table[x, :, x0, :] / pg[x, x0]
    pg = pg.copy()
    pg[pg <= ZERO_MARGINAL_TOL] = 0.0
    return pg, Behavior(table)


def preparations_from_entangled(state: DensityMatrix, alice_meas) -> tuple:
    """Conditional states steered on the second factor by Alice's measurements.

    Returns (p_g, preparations) with p_g[X, a] the outcome probability and
    preparations[X][a] the normalized reduced state.  Averaging each row of
    preparations against p_g reproduces the fixed reduced state of the second
    subsystem, so the obliviousness constraint holds by construction.
    Outcomes below ``ZERO_MARGINAL_TOL`` get a maximally mixed placeholder and
    zero weight.
    """
    alice_meas = tuple(alice_meas)
    da = alice_meas[0].dim
    if state.dim % da != 0:
        raise ValueError("state dimension does not factor over Alice's measurement")
    db = state.dim // da
    n_out = alice_meas[0].n_outcomes
    pg = np.zeros((len(alice_meas), n_out))
    preparations = []
    for X, povm in enumerate(alice_meas):
        row = []
        for a, eff in enumerate(povm.elements):
            op = np.kron(eff, np.eye(db)) @ state.matrix
            reduced = qmath.partial_trace(op, da, db, which="a")
            p = float(np.trace(reduced).real)
            if p <= ZERO_MARGINAL_TOL:
                row.append(DensityMatrix(np.eye(db) / db))
                pg[X, a] = 0.0
            else:
                m = reduced / p
                row.append(DensityMatrix((m + m.conj().T) / 2))
                pg[X, a] = p
        preparations.append(row)
    return pg, preparations
