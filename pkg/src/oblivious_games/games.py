"""Communication games with obliviousness constraints.

A game fixes input alphabets and priors for a sender (Alice) and receiver
(Bob), a raw payoff tensor, and partition families over Alice's inputs.  The
payoff coefficients are stored *unscaled*: the average payoff is always

    performance = sum_{x,y,b} payoff[x,y,b] * p_alice[x] * p_bob[y] * p(b|x,y)

so every conventional prefactor (1/12, 1/(n d^n), ...) arises from the priors.
Each partition family is a collection of pairwise-disjoint index sets over
Alice's inputs; the obliviousness constraint demands that the prior-weighted
average statistics of the sets in one family coincide.  Sets may overlap
*across* families.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from .qmath import born_prob

DIST_TOL = 1e-12
BEHAVIOR_TOL = 1e-10


def is_prime(k: int) -> bool:
    if k < 2:
        return False
    i = 2
    while i * i <= k:
        if k % i == 0:
            return False
        i += 1
    return True


def _check_distribution(p: np.ndarray, tol: float, name: str) -> None:
    if np.min(p) < -tol:
        raise ValueError(f"{name} has negative entries")
    s = float(np.sum(p))
    if abs(s - 1.0) >= tol:
        raise ValueError(f"{name} sums to {s!r}, not 1")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ObliviousGame:
    """Alphabets, priors, raw payoff coefficients, and obliviousness partitions."""

    alice_inputs: tuple
    bob_inputs: tuple
    outcomes: tuple
    p_alice: np.ndarray
    p_bob: np.ndarray
    payoff: np.ndarray
    partitions: tuple = ()

    def __post_init__(self):
        na, nb, no = len(self.alice_inputs), len(self.bob_inputs), len(self.outcomes)
        pa = np.asarray(self.p_alice, dtype=float).reshape(-1)
        pb = np.asarray(self.p_bob, dtype=float).reshape(-1)
        pay = np.asarray(self.payoff, dtype=float)
        if pa.shape != (na,) or pb.shape != (nb,) or pay.shape != (na, nb, no):
            raise ValueError("game arrays do not match the alphabet sizes")
        _check_distribution(pa, DIST_TOL, "p_alice")
        _check_distribution(pb, DIST_TOL, "p_bob")
        families = tuple(
            tuple(tuple(int(i) for i in subset) for subset in family)
            for family in self.partitions
        )
        for family in families:
            if not family:
                raise ValueError("empty partition family")
            seen: set[int] = set()
            for subset in family:
                if not subset:
                    raise ValueError("empty set inside a partition family")
                for i in subset:
                    if not 0 <= i < na:
                        raise ValueError(f"partition index {i} out of range")
                    if i in seen:
                        raise ValueError("sets within one family must be disjoint")
                    seen.add(i)
                if float(np.sum(pa[list(subset)])) <= 0.0:
                    raise ValueError("partition set has zero prior weight")
        object.__setattr__(self, "alice_inputs", tuple(self.alice_inputs))
        object.__setattr__(self, "bob_inputs", tuple(self.bob_inputs))
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        object.__setattr__(self, "p_alice", _readonly(pa))
        object.__setattr__(self, "p_bob", _readonly(pb))
        object.__setattr__(self, "payoff", _readonly(pay))
        object.__setattr__(self, "partitions", families)

    @property
    def n_alice(self) -> int:
        return len(self.alice_inputs)

    @property
    def n_bob(self) -> int:
        return len(self.bob_inputs)

    @property
    def n_outcomes(self) -> int:
        return len(self.outcomes)

    def set_weight(self, subset) -> float:
        """Prior weight q of one partition set."""
        return float(np.sum(self.p_alice[list(subset)]))

    def to_dict(self) -> dict:
        return {
            "alice_inputs": [list(x) if isinstance(x, tuple) else x for x in self.alice_inputs],
            "bob_inputs": [list(y) if isinstance(y, tuple) else y for y in self.bob_inputs],
            "outcomes": [list(b) if isinstance(b, tuple) else b for b in self.outcomes],
            "p_alice": self.p_alice.tolist(),
            "p_bob": self.p_bob.tolist(),
            "payoff": self.payoff.tolist(),
            "partitions": [[list(s) for s in family] for family in self.partitions],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ObliviousGame":
        def label(v):
            return tuple(v) if isinstance(v, list) else v

        return cls(
            alice_inputs=tuple(label(x) for x in d["alice_inputs"]),
            bob_inputs=tuple(label(y) for y in d["bob_inputs"]),
            outcomes=tuple(label(b) for b in d["outcomes"]),
            p_alice=np.asarray(d["p_alice"], dtype=float),
            p_bob=np.asarray(d["p_bob"], dtype=float),
            payoff=np.asarray(d["payoff"], dtype=float),
            partitions=tuple(tuple(tuple(s) for s in family) for family in d["partitions"]),
        )


def save_game(game: ObliviousGame, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(game.to_dict(), fh, indent=1)


def load_game(path) -> ObliviousGame:
    with open(path, "r", encoding="utf-8") as fh:
        return ObliviousGame.from_dict(json.load(fh))


@dataclass(frozen=True, eq=False)
class Behavior:
    """Conditional outcome table p[x, y, b]; every (x, y) row is a distribution."""

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.ndim != 3:
            raise ValueError("behavior table must have shape (inputs_A, inputs_B, outcomes)")
        if np.min(t) < -BEHAVIOR_TOL:
            raise ValueError("behavior has negative probabilities")
        sums = t.sum(axis=2)
        if np.max(np.abs(sums - 1.0)) >= BEHAVIOR_TOL:
            raise ValueError("behavior rows do not sum to 1")
        object.__setattr__(self, "table", _readonly(t))


@dataclass(frozen=True, eq=False)
class QuantumStrategy:
    """One preparation per Alice input, one measurement per Bob input."""

    preparations: tuple
    measurements: tuple

    def __post_init__(self):
        preps = tuple(self.preparations)
        meas = tuple(self.measurements)
        if not preps or not meas:
            raise ValueError("quantum strategy needs preparations and measurements")
        dim = preps[0].dim
        if any(p.dim != dim for p in preps) or any(m.dim != dim for m in meas):
            raise ValueError("preparations and measurements must share one dimension")
        n_out = meas[0].n_outcomes
        if any(m.n_outcomes != n_out for m in meas):
            raise ValueError("all measurements must have the same outcome count")
        object.__setattr__(self, "preparations", preps)
        object.__setattr__(self, "measurements", meas)

    @property
    def dim(self) -> int:
        return self.preparations[0].dim

    @property
    def n_outcomes(self) -> int:
        return self.measurements[0].n_outcomes


@dataclass(frozen=True, eq=False)
class ClassicalStrategy:
    """Stochastic encoding x -> message and decoding (message, y) -> outcome."""

    encoding: np.ndarray
    decoding: np.ndarray

    def __post_init__(self):
        enc = np.asarray(self.encoding, dtype=float)
        dec = np.asarray(self.decoding, dtype=float)
        if enc.ndim != 2 or dec.ndim != 3 or enc.shape[1] != dec.shape[0]:
            raise ValueError("encoding (x, m) and decoding (m, y, b) shapes disagree")
        for row in enc:
            _check_distribution(row, DIST_TOL, "encoding row")
        for m in range(dec.shape[0]):
            for y in range(dec.shape[1]):
                _check_distribution(dec[m, y], DIST_TOL, "decoding row")
        object.__setattr__(self, "encoding", _readonly(enc))
        object.__setattr__(self, "decoding", _readonly(dec))


def performance(game: ObliviousGame, behavior: Behavior) -> float:
    """Average payoff of a behavior in a game."""
    if behavior.table.shape != game.payoff.shape:
        raise ValueError(
            f"behavior shape {behavior.table.shape} does not match game {game.payoff.shape}"
        )
    return float(
        np.einsum("ayb,a,y,ayb->", game.payoff, game.p_alice, game.p_bob, behavior.table)
    )


def behavior_from_quantum(strategy: QuantumStrategy) -> Behavior:
    """Born-rule outcome table of a quantum strategy."""
    na = len(strategy.preparations)
    nb = len(strategy.measurements)
    no = strategy.n_outcomes
    table = np.empty((na, nb, no))
    for x, rho in enumerate(strategy.preparations):
        for y, povm in enumerate(strategy.measurements):
            for b, eff in enumerate(povm.elements):
                table[x, y, b] = born_prob(rho, eff)
    return Behavior(table)


def behavior_from_classical(strategy: ClassicalStrategy) -> Behavior:
    return Behavior(np.einsum("xm,myb->xyb", strategy.encoding, strategy.decoding))


def _family_averages_behavior(game, behavior, family):
    out = []
    for subset in family:
        idx = list(subset)
        q = game.set_weight(subset)
        out.append(np.einsum("ayb,a->yb", behavior.table[idx], game.p_alice[idx]) / q)
    return out


def obliviousness_residual_behavior(game: ObliviousGame, behavior: Behavior) -> float:
    """Worst-case deviation from the obliviousness constraint at the statistics level.

    Zero means that for every family, measurement, and outcome the mixed
    statistics of all sets coincide exactly.
    """
    if behavior.table.shape != game.payoff.shape:
        raise ValueError("behavior shape does not match game")
    worst = 0.0
    for family in game.partitions:
        if not family:
            raise ValueError("empty partition family")
        avgs = _family_averages_behavior(game, behavior, family)
        for a, b in combinations(avgs, 2):
            worst = max(worst, float(np.max(np.abs(a - b))))
    return worst


def obliviousness_residual_quantum(game: ObliviousGame, strategy: QuantumStrategy) -> float:
    """Operator-level obliviousness residual.

    Compares the prior-weighted average preparation operators of the sets in
    each family by entrywise max-norm.  A zero residual implies the
    statistics-level constraint for every conceivable measurement.
    """
    if len(strategy.preparations) != game.n_alice:
        raise ValueError("strategy has wrong number of preparations")
    worst = 0.0
    for family in game.partitions:
        if not family:
            raise ValueError("empty partition family")
        avgs = []
        for subset in family:
            q = game.set_weight(subset)
            acc = sum(
                strategy.preparations[i].matrix * (game.p_alice[i] / q) for i in subset
            )
            avgs.append(acc)
        for a, b in combinations(avgs, 2):
            worst = max(worst, float(np.max(np.abs(a - b))))
    return worst


def cglmp3_targets(x0: int, x: int, y: int) -> tuple:
    """Outcomes earning payoff +1 (k=0) and -1 (k=1) in the three-outcome game."""
    return tuple((x0 - ((-1) ** (x + y + k)) * k - x * y) % 3 for k in (0, 1))


def make_cglmp3_game() -> ObliviousGame:
    """Three-outcome game whose noncontextual bound is 1/2.

    Alice holds (x0, x) in {0,1,2} x {0,1} uniformly, Bob holds y in {0,1};
    one partition family groups Alice's inputs by x.  The 1/12 prefactor of
    the usual score is absorbed into the priors.
    """
    alice = tuple((x0, x) for x0 in range(3) for x in range(2))
    bob = (0, 1)
    outcomes = (0, 1, 2)
    payoff = np.zeros((6, 2, 3))
    for i, (x0, x) in enumerate(alice):
        for y in bob:
            t0, t1 = cglmp3_targets(x0, x, y)
            payoff[i, y, t0] += 1.0
            payoff[i, y, t1] -= 1.0
    family = tuple(
        tuple(i for i, (_, x) in enumerate(alice) if x == v) for v in range(2)
    )
    return ObliviousGame(
        alice_inputs=alice,
        bob_inputs=bob,
        outcomes=outcomes,
        p_alice=np.full(6, 1 / 6),
        p_bob=np.full(2, 1 / 2),
        payoff=payoff,
        partitions=(family,),
    )


def make_rac_game(n: int, d: int) -> ObliviousGame:
    """Random access code over length-n strings of prime-d symbols.

    Bob must guess the y-th symbol; one partition family per weighted parity
    string r with at least two nonzero entries hides every such parity of
    Alice's data.  Primality of d makes each parity class contain exactly
    d^(n-1) strings, so all sets in a family carry equal weight.
    """
    if n < 2:
        raise ValueError("need at least two symbols")
    if not is_prime(d):
        raise ValueError(f"alphabet size {d} is not prime")
    alice = tuple(product(range(d), repeat=n))
    bob = tuple(range(1, n + 1))
    outcomes = tuple(range(d))
    payoff = np.zeros((d**n, n, d))
    for i, x in enumerate(alice):
        for yi, y in enumerate(bob):
            payoff[i, yi, x[y - 1]] = 1.0
    families = []
    for r in product(range(d), repeat=n):
        if sum(1 for ri in r if ri != 0) < 2:
            continue
        sets = tuple(
            tuple(
                i
                for i, x in enumerate(alice)
                if sum(ri * xi for ri, xi in zip(r, x)) % d == k
            )
            for k in range(d)
        )
        families.append(sets)
    return ObliviousGame(
        alice_inputs=alice,
        bob_inputs=bob,
        outcomes=outcomes,
        p_alice=np.full(d**n, 1.0 / d**n),
        p_bob=np.full(n, 1.0 / n),
        payoff=payoff,
        partitions=tuple(families),
    )
