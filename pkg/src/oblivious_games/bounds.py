"""Classical bounds: closed forms, brute force over local strategies, LP oracle.

Three routes to a preparation-noncontextual (or local-realist) bound:

* ``rac_pnc_bound`` -- the closed form (n + d - 1)/(n d) for the random
  access family;
* ``local_bound`` -- exhaustive enumeration of deterministic assignments for
  a correlation functional;
* ``pnc_bound_lp_oracle`` -- for a generic game, enumerate deterministic
  decoders and solve one linear program over obliviousness-respecting
  encodings per decoder.  Optimal decoding is deterministic by convexity,
  which is what makes the decoder enumeration exhaustive.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement, product

import numpy as np

from . import lp
from .bellmap import BellFunctional
from .games import ObliviousGame, is_prime

ENUM_GUARD = 10**7
DECODER_GUARD = 10**6


@dataclass(frozen=True, eq=False)
class BoundResult:
    value: float
    method: str  # "formula" | "bruteforce" | "lp-oracle"
    witness: dict | None = None

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError("bound value must be finite")


def rac_pnc_bound(n: int, d: int) -> float:
    """Noncontextual bound (n + d - 1)/(n d) of the random access family."""
    if n < 1:
        raise ValueError("need at least one symbol")
    if not is_prime(d):
        raise ValueError(f"alphabet size {d} is not prime")
    return (n + d - 1) / (n * d)


def local_bound(bell: BellFunctional) -> BoundResult:
    """Maximum of a functional over deterministic local assignments a=f(X), b=g(Y)."""
    ma, mb, d = bell.m_alice, bell.m_bob, bell.n_outcomes
    if d**ma * d**mb > ENUM_GUARD:
        raise ValueError(
            f"{d**ma * d**mb} deterministic strategies exceed the enumeration guard"
        )
    weighted = bell.coeffs * bell.p_alice[:, None, None, None] * bell.p_bob[None, :, None, None]
    best = -np.inf
    witness = None
    for f in product(range(d), repeat=ma):
        # value as a function of g decomposes per Y once f is fixed
        per_y = np.stack([weighted[np.arange(ma), Y, list(f), :].sum(axis=0) for Y in range(mb)])
        for g in product(range(d), repeat=mb):
            value = float(sum(per_y[Y, g[Y]] for Y in range(mb)))
            if value > best:
                best = value
                witness = {"alice_assignment": list(f), "bob_assignment": list(g)}
    return BoundResult(value=best, method="bruteforce", witness=witness)


def pnc_bound_bellgame(bell: BellFunctional) -> BoundResult:
    """Noncontextual bound of the game built from a functional.

    Coincides with the local bound: the obliviousness constraint turns
    classical encodings into exactly the local deterministic models of the
    correlation experiment.
    """
    return local_bound(bell)


def _oblivious_encoding_constraints(game: ObliviousGame, n_messages: int):
    """Equality rows forcing message statistics to be identical across each family."""
    na = game.n_alice
    rows = []
    for family in game.partitions:
        weights = []
        for subset in family:
            w = np.zeros(na)
            q = game.set_weight(subset)
            for i in subset:
                w[i] = game.p_alice[i] / q
            weights.append(w)
        for k in range(1, len(weights)):
            rows.append(weights[0] - weights[k])
    out = []
    for m in range(n_messages):
        for row in rows:
            full = np.zeros(na * n_messages)
            full[m::n_messages] = row
            out.append(full)
    return out


def pnc_bound_lp_oracle(game: ObliviousGame, message_count: int) -> BoundResult:
    """Bound for an arbitrary oblivious game via decoder enumeration plus LPs.

    Messages are interchangeable, so decoders are enumerated as unordered
    multisets of per-message decoding functions (lexicographically, which also
    fixes the witness on ties).  A cheap constraint-free upper bound prunes
    decoders that cannot beat the incumbent.
    """
    if message_count < 1:
        raise ValueError("need at least one message")
    na, nb, no = game.n_alice, game.n_bob, game.n_outcomes
    if no ** (message_count * nb) > DECODER_GUARD:
        raise ValueError(
            f"{no ** (message_count * nb)} decoders exceed the enumeration guard"
        )
    weighted = game.payoff * game.p_alice[:, None, None] * game.p_bob[None, :, None]
    # weighted[x, y, b] summed over y for a fixed decode function y -> b
    decode_fns = list(product(range(no), repeat=nb))
    fn_scores = np.stack(
        [weighted[:, np.arange(nb), list(fn)].sum(axis=1) for fn in decode_fns]
    )  # (n_fns, na): score of decoding with fn given Alice holds x

    constraints = _oblivious_encoding_constraints(game, message_count)
    n_vars = na * message_count
    a_rows = []
    b_vals = []
    for x in range(na):  # each encoding row is a distribution over messages
        row = np.zeros(n_vars)
        row[x * message_count : (x + 1) * message_count] = 1.0
        a_rows.append(row)
        b_vals.append(1.0)
    a_rows.extend(constraints)
    b_vals.extend([0.0] * len(constraints))
    a_eq = np.asarray(a_rows)
    b_eq = np.asarray(b_vals)

    best = -np.inf
    witness = None
    for combo in combinations_with_replacement(range(len(decode_fns)), message_count):
        # objective coefficient of p(m|x) is the score of message m's decoder at x
        coeff = np.empty(n_vars)
        for m, fn_idx in enumerate(combo):
            coeff[m::message_count] = fn_scores[fn_idx]
        # constraint-free bound: best message per input
        cap = float(sum(coeff[x * message_count : (x + 1) * message_count].max() for x in range(na)))
        if cap <= best + 1e-12:
            continue
        solution = lp.solve(lp.LinearProgram(coeff, a_eq, b_eq))
        if solution.status != "optimal":  # pragma: no cover - uniform encodings are feasible
            raise RuntimeError(f"encoding program reported {solution.status}")
        if solution.objective_value > best + 1e-12:
            best = solution.objective_value
            witness = {
                "decoder": [list(decode_fns[i]) for i in combo],
                "encoding": solution.values.reshape(na, message_count).tolist(),
            }
    return BoundResult(value=best, method="lp-oracle", witness=witness)
