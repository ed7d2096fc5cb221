"""Ingestion and analysis of the bundled qutrit measurement tables.

The CSV schema is ``state_j,state_k,basis,projector,probability,sigma``.
Bases 1 and 2 are the two protocol measurements (36 cells: six preparations,
two bases, three projectors); bases 3-5 are tomography rows kept in a
separate auxiliary table for diagnostics only.  Published entries are rounded
to four decimals, so rows may miss unit sum by up to 2e-3; they are stored
as printed and renormalized before any analysis.

The correspondence between lab labels (state psi_jk, basis, projector) and
game labels ((x0, x), y, b) is not part of the data.  It is recovered by an
exhaustive fit against the ideal closed-form distribution and pinned in
``data/mapping.json``; ``pinned_mapping()`` returns the same mapping.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from . import lp
from .cglmp import closed_form_prob
from .games import cglmp3_targets

ROW_SUM_TOL = 2e-3

STATES = ((1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3))
PROTOCOL_BASES = (1, 2)
AUX_BASES = (3, 4, 5)

# Lab-to-game correspondence fitted against the ideal model and frozen:
# psi_jk prepares (x0, x) = (k-1, j-1), bases and projectors map in order.
_PINNED_MAPPING_DICT = {
    "state_map": [[[j, k], [k - 1, j - 1]] for (j, k) in STATES],
    "basis_map": [[1, 0], [2, 1]],
    "outcome_map": [[1, [[1, 0], [2, 1], [3, 2]]], [2, [[1, 0], [2, 1], [3, 2]]]],
}


@dataclass(frozen=True, eq=False)
class PrimaryData:
    """Protocol probabilities (6 states x 2 bases x 3 projectors) plus sigmas.

    ``aux_probabilities`` holds the tomography rows (6 x 3 x 3), NaN where a
    cell was not present in the input files.
    """

    probabilities: np.ndarray
    sigmas: np.ndarray
    aux_probabilities: np.ndarray | None = None
    aux_sigmas: np.ndarray | None = None

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        s = np.asarray(self.sigmas, dtype=float)
        if p.shape != (6, 2, 3) or s.shape != (6, 2, 3):
            raise ValueError("protocol tables must have shape (6, 2, 3)")
        if np.min(p) < 0.0 or np.max(p) > 1.0:
            raise ValueError("probabilities must lie in [0, 1]")
        if np.min(s) < 0.0:
            raise ValueError("sigmas must be nonnegative")
        row_sums = p.sum(axis=2)
        if np.max(np.abs(row_sums - 1.0)) > ROW_SUM_TOL:
            raise ValueError(
                f"a protocol row sums to {row_sums.flat[np.argmax(np.abs(row_sums - 1.0))]}"
            )
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "sigmas", s)

    def normalized(self) -> np.ndarray:
        """Protocol rows rescaled to exact unit sum."""
        return self.probabilities / self.probabilities.sum(axis=2, keepdims=True)


def _parse_rows(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        expected = {"state_j", "state_k", "basis", "projector", "probability", "sigma"}
        if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
            raise ValueError(f"{path}: expected columns {sorted(expected)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                j = int(row["state_j"])
                k = int(row["state_k"])
                basis = int(row["basis"])
                proj = int(row["projector"])
                prob = float(row["probability"])
                sigma = float(row["sigma"])
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed row: {exc}") from exc
            if (j, k) not in STATES:
                raise ValueError(f"{path}:{lineno}: unknown state ({j},{k})")
            if proj not in (1, 2, 3):
                raise ValueError(f"{path}:{lineno}: projector must be 1..3")
            if not 0.0 <= prob <= 1.0:
                raise ValueError(f"{path}:{lineno}: probability {prob} outside [0, 1]")
            if sigma < 0.0:
                raise ValueError(f"{path}:{lineno}: negative sigma {sigma}")
            yield path, lineno, (j, k), basis, proj, prob, sigma


def load_primary(*paths) -> PrimaryData:
    """Load protocol (and optionally tomography) rows from one or more CSVs."""
    if not paths:
        raise ValueError("need at least one CSV path")
    prob = np.full((6, 2, 3), np.nan)
    sig = np.full((6, 2, 3), np.nan)
    aux_prob = np.full((6, 3, 3), np.nan)
    aux_sig = np.full((6, 3, 3), np.nan)
    state_index = {s: i for i, s in enumerate(STATES)}
    any_aux = False
    for path in paths:
        for path_, lineno, state, basis, proj, p, s in _parse_rows(path):
            si = state_index[state]
            if basis in PROTOCOL_BASES:
                prob[si, basis - 1, proj - 1] = p
                sig[si, basis - 1, proj - 1] = s
            elif basis in AUX_BASES:
                aux_prob[si, basis - 3, proj - 1] = p
                aux_sig[si, basis - 3, proj - 1] = s
                any_aux = True
            else:
                raise ValueError(f"{path_}:{lineno}: basis must be 1..5, got {basis}")
    if np.any(np.isnan(prob)):
        missing = int(np.sum(np.isnan(prob)))
        raise ValueError(f"protocol table incomplete: {missing} of 36 cells missing")
    return PrimaryData(
        probabilities=prob,
        sigmas=sig,
        aux_probabilities=aux_prob if any_aux else None,
        aux_sigmas=aux_sig if any_aux else None,
    )


@dataclass(frozen=True, eq=False)
class LabelMapping:
    """Bijections from lab labels to game labels.

    ``state_map``: (j, k) -> (x0, x); ``basis_map``: lab basis -> y;
    ``outcome_map``: lab basis -> {projector -> b}.
    """

    state_map: dict
    basis_map: dict
    outcome_map: dict

    def __post_init__(self):
        if set(self.state_map) != set(STATES) or len(set(self.state_map.values())) != 6:
            raise ValueError("state map must be a bijection over the six states")
        if set(self.basis_map) != {1, 2} or set(self.basis_map.values()) != {0, 1}:
            raise ValueError("basis map must be a bijection {1,2} -> {0,1}")
        for basis in (1, 2):
            om = self.outcome_map.get(basis)
            if om is None or set(om) != {1, 2, 3} or set(om.values()) != {0, 1, 2}:
                raise ValueError(f"outcome map for basis {basis} must be a bijection")

    def state_of(self, x0: int, x: int):
        for lab, game in self.state_map.items():
            if tuple(game) == (x0, x):
                return lab
        raise KeyError((x0, x))

    def lab_basis_of(self, y: int) -> int:
        for lab, game in self.basis_map.items():
            if game == y:
                return lab
        raise KeyError(y)

    def projector_of(self, lab_basis: int, b: int) -> int:
        for proj, game in self.outcome_map[lab_basis].items():
            if game == b:
                return proj
        raise KeyError((lab_basis, b))

    def to_dict(self) -> dict:
        return {
            "state_map": [[list(lab), list(game)] for lab, game in sorted(self.state_map.items())],
            "basis_map": [[lab, game] for lab, game in sorted(self.basis_map.items())],
            "outcome_map": [
                [basis, [[p, b] for p, b in sorted(self.outcome_map[basis].items())]]
                for basis in (1, 2)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LabelMapping":
        return cls(
            state_map={tuple(lab): tuple(game) for lab, game in d["state_map"]},
            basis_map={lab: game for lab, game in d["basis_map"]},
            outcome_map={basis: dict(pairs) for basis, pairs in d["outcome_map"]},
        )


def pinned_mapping() -> LabelMapping:
    """The mapping shipped with the bundled data (also in data/mapping.json)."""
    return LabelMapping.from_dict(_PINNED_MAPPING_DICT)


def save_mapping(mapping: LabelMapping, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(mapping.to_dict(), fh, indent=1)


def load_mapping(path) -> LabelMapping:
    with open(path, "r", encoding="utf-8") as fh:
        return LabelMapping.from_dict(json.load(fh))


def _theory_table() -> np.ndarray:
    """Ideal p(b | (x0, x), y) indexed as [(x0, x) flat, y, b]."""
    t = np.empty((6, 2, 3))
    for i, (x0, x) in enumerate((x0, x) for x0 in range(3) for x in range(2)):
        for y in range(2):
            for b in range(3):
                t[i, y, b] = closed_form_prob(x0, x, y, b)
    return t


def fit_label_mapping(data: PrimaryData) -> tuple:
    """Exhaustive search for the mapping minimizing the L1 distance to theory.

    All 2 basis assignments x 36 outcome assignments are scanned; for each,
    per-state theory/lab cost matrices reduce the state search to the 720
    bijections.  Deterministic: ties keep the first candidate in iteration
    order.  Returns (mapping, residual).
    """
    measured = data.normalized()
    theory = _theory_table()
    game_states = [(x0, x) for x0 in range(3) for x in range(2)]
    best_res = np.inf
    best = None
    for basis_perm in permutations((0, 1)):
        for out0 in permutations((0, 1, 2)):
            for out1 in permutations((0, 1, 2)):
                outs = (out0, out1)
                # cost[s, t]: L1 distance of lab state s to theory state t
                cost = np.zeros((6, 6))
                for s in range(6):
                    for t in range(6):
                        acc = 0.0
                        for lab_basis in range(2):
                            y = basis_perm[lab_basis]
                            for proj in range(3):
                                b = outs[lab_basis][proj]
                                acc += abs(measured[s, lab_basis, proj] - theory[t, y, b])
                        cost[s, t] = acc
                for perm in permutations(range(6)):
                    res = float(sum(cost[s, perm[s]] for s in range(6)))
                    if res < best_res - 1e-15:
                        best_res = res
                        best = (basis_perm, outs, perm)
    basis_perm, outs, perm = best
    mapping = LabelMapping(
        state_map={STATES[s]: game_states[perm[s]] for s in range(6)},
        basis_map={1: basis_perm[0], 2: basis_perm[1]},
        outcome_map={
            1: {p + 1: outs[0][p] for p in range(3)},
            2: {p + 1: outs[1][p] for p in range(3)},
        },
    )
    return mapping, best_res


def _a3_from_matrices(tables: np.ndarray, mapping: LabelMapping) -> float:
    """Score (1/12) sum of signed mapped probabilities over all inputs."""
    state_index = {s: i for i, s in enumerate(STATES)}
    total = 0.0
    for x0 in range(3):
        for x in range(2):
            s = state_index[mapping.state_of(x0, x)]
            for y in range(2):
                lab_basis = mapping.lab_basis_of(y)
                t0, t1 = cglmp3_targets(x0, x, y)
                p0 = tables[s, lab_basis - 1, mapping.projector_of(lab_basis, t0) - 1]
                p1 = tables[s, lab_basis - 1, mapping.projector_of(lab_basis, t1) - 1]
                total += p0 - p1
    return total / 12.0


def a3_primary(data: PrimaryData, mapping: LabelMapping) -> float:
    """Game score computed from the measured (renormalized) tables."""
    return _a3_from_matrices(data.normalized(), mapping)


@dataclass(frozen=True, eq=False)
class SecondaryData:
    """Reprocessed tables satisfying the obliviousness equality exactly.

    ``weights[t, s]`` is the convex weight of source table s in target table
    t (each target row is a distribution over sources); ``s`` is the average
    diagonal weight, the LP objective.
    """

    weights: np.ndarray
    p_prime: np.ndarray
    s: float
    groups: tuple

    def constraint_residual(self) -> float:
        g0 = [i for i, g in enumerate(self.groups) if g == 0]
        g1 = [i for i, g in enumerate(self.groups) if g == 1]
        return float(np.max(np.abs(self.p_prime[g0].sum(axis=0) - self.p_prime[g1].sum(axis=0))))


def _secondary_from_matrices(tables: np.ndarray, groups) -> SecondaryData:
    """Maximize the average self-weight subject to equal group sums of the mixtures."""
    n = 6
    objective = np.zeros(n * n)
    for t in range(n):
        objective[t * n + t] = 1.0 / n
    rows = []
    rhs = []
    for t in range(n):  # each target's weights form a distribution
        row = np.zeros(n * n)
        row[t * n : (t + 1) * n] = 1.0
        rows.append(row)
        rhs.append(1.0)
    for i in range(2):  # entrywise equality of the two group sums
        for p in range(3):
            row = np.zeros(n * n)
            for t in range(n):
                sign = 1.0 if groups[t] == 0 else -1.0
                row[t * n : (t + 1) * n] += sign * tables[:, i, p]
            rows.append(row)
            rhs.append(0.0)
    solution = lp.solve(lp.LinearProgram(objective, np.asarray(rows), np.asarray(rhs)))
    if solution.status != "optimal":  # pragma: no cover - uniform weights are feasible
        raise RuntimeError(f"secondary-data program reported {solution.status}")
    weights = solution.values.reshape(n, n)
    p_prime = np.einsum("ts,sip->tip", weights, tables)
    return SecondaryData(
        weights=weights,
        p_prime=p_prime,
        s=float(solution.objective_value),
        groups=tuple(groups),
    )


def secondary_data(data: PrimaryData, mapping: LabelMapping | None = None) -> SecondaryData:
    """Project the measured tables onto obliviousness-satisfying secondary data.

    The grouping of lab states by game input x is taken from ``mapping``;
    without one, states are grouped by their j label (the pinned convention).
    """
    if mapping is None:
        groups = tuple(j - 1 for (j, _) in STATES)
    else:
        groups = tuple(mapping.state_map[s][1] for s in STATES)
    return _secondary_from_matrices(data.normalized(), groups)


def a3_secondary(secondary: SecondaryData, mapping: LabelMapping) -> float:
    """Game score on the secondary tables."""
    return _a3_from_matrices(secondary.p_prime, mapping)


def mc_uncertainty(
    data: PrimaryData,
    mapping: LabelMapping,
    samples: int,
    seed: int | None = None,
) -> tuple:
    """Monte Carlo spread (sigma_primary, sigma_secondary) of the two scores.

    Each sample perturbs every table entry by an independent zero-mean normal
    draw with the published sigma, clamps to [0, 1], renormalizes rows, and
    recomputes both scores.  Only the published per-entry uncertainties enter;
    systematic components are not modeled.
    """
    if samples < 100:
        raise ValueError("need at least 100 samples")
    rng = np.random.default_rng(seed)
    groups = tuple(mapping.state_map[s][1] for s in STATES)
    a3_pri = np.empty(samples)
    a3_sec = np.empty(samples)
    for i in range(samples):
        draw = data.probabilities + rng.normal(size=(6, 2, 3)) * data.sigmas
        np.clip(draw, 0.0, 1.0, out=draw)
        sums = draw.sum(axis=2, keepdims=True)
        sums[sums <= 0.0] = 1.0
        tables = draw / sums
        a3_pri[i] = _a3_from_matrices(tables, mapping)
        sec = _secondary_from_matrices(tables, groups)
        a3_sec[i] = _a3_from_matrices(sec.p_prime, mapping)
    return float(np.std(a3_pri)), float(np.std(a3_sec))
