"""Alternating heuristic search for quantum values of oblivious games.

Each restart alternates two steps:

* measurements: for fixed preparations, each receiver measurement is
  improved by a fixed-point exchange heuristic on the effect operators
  (completeness is preserved by construction); candidates are only accepted
  when they increase the objective.
* preparations: the objective is linear in the preparation operators, so a
  penalty-augmented gradient step is taken and the iterate is projected back
  onto the feasible set by alternating an exact affine projection (trace one
  plus all obliviousness equalities, which factor over the input index) with
  the eigenvalue-simplex projection onto unit-trace positive matrices.

Accepted values are non-decreasing within a restart, so results are honest
lower bounds on the quantum optimum; nothing here certifies optimality.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .games import (
    ObliviousGame,
    QuantumStrategy,
    behavior_from_quantum,
    obliviousness_residual_quantum,
    performance,
)
from .qmath import DensityMatrix, Povm

_JRF_STEPS = 15
_CONVERGENCE_WINDOW = 30
_CONVERGENCE_GAIN = 1e-8


@dataclass(frozen=True)
class SearchConfig:
    dim: int
    restarts: int = 64
    max_iters: int = 500
    penalty_schedule: tuple = tuple(2.0**k for k in range(10))
    penalty_period: int = 50
    seed: int = 0
    tolerance: float = 1e-8

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dimension must be at least 2")
        if self.dim > 8:
            raise ValueError("dimensions above 8 are not supported")
        if self.restarts < 1:
            raise ValueError("need at least one restart")
        if any(
            b < a for a, b in zip(self.penalty_schedule, self.penalty_schedule[1:])
        ):
            raise ValueError("penalty schedule must be non-decreasing")


@dataclass(frozen=True, eq=False)
class SearchResult:
    value: float
    strategy: QuantumStrategy
    feasibility_residual: float
    iterations_used: int
    feasible: bool
    restart_index: int = 0


def _constraint_rows(game: ObliviousGame) -> np.ndarray:
    """Input-space rows whose vanishing encodes every obliviousness equality."""
    rows = []
    for family in game.partitions:
        weights = []
        for subset in family:
            w = np.zeros(game.n_alice)
            q = game.set_weight(subset)
            for i in subset:
                w[i] = game.p_alice[i] / q
            weights.append(w)
        for k in range(1, len(weights)):
            rows.append(weights[0] - weights[k])
    return np.asarray(rows) if rows else np.zeros((0, game.n_alice))


def _null_projector(rows: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the null space of the constraint rows."""
    n = rows.shape[1]
    if rows.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(rows)
    rank = int(np.sum(s > 1e-12 * s[0]))
    null_basis = vt[rank:]
    return null_basis.T @ null_basis


def _simplex_project(eigvals: np.ndarray) -> np.ndarray:
    """Rowwise Euclidean projection onto the probability simplex."""
    u = np.sort(eigvals, axis=-1)[..., ::-1]
    css = np.cumsum(u, axis=-1) - 1.0
    ks = np.arange(1, eigvals.shape[-1] + 1)
    valid = u - css / ks > 0
    k = np.maximum(valid.sum(axis=-1), 1)
    tau = np.take_along_axis(css, (k - 1)[..., None], axis=-1) / k[..., None]
    return np.clip(eigvals - tau, 0.0, None)


class _Projector:
    """Alternating projection onto {trace one, oblivious} intersect PSD."""

    def __init__(self, game: ObliviousGame, dim: int):
        self.rows = _constraint_rows(game)
        self.null_p = _null_projector(self.rows)
        self.dim = dim
        self.eye = np.eye(dim)

    def affine(self, rhos: np.ndarray) -> np.ndarray:
        # Trace coefficients are orthogonal to the traceless parts, and the
        # obliviousness rows annihilate constant trace shifts, so the exact
        # projection splits: pin every trace to one, then project the
        # traceless components along the input index.
        traces = np.einsum("xii->x", rhos).real
        theta = rhos - traces[:, None, None] * self.eye / self.dim
        theta = np.einsum("xz,zij->xij", self.null_p, theta)
        return theta + self.eye / self.dim

    def psd(self, rhos: np.ndarray) -> np.ndarray:
        herm = (rhos + np.conj(np.swapaxes(rhos, 1, 2))) / 2
        w, v = np.linalg.eigh(herm)
        return np.einsum("xik,xk,xjk->xij", v, _simplex_project(w), np.conj(v))

    def residual(self, rhos: np.ndarray) -> float:
        if self.rows.shape[0] == 0:
            return 0.0
        viol = np.einsum("rx,xij->rij", self.rows, rhos)
        return float(np.max(np.abs(viol)))

    def feasible(self, rhos: np.ndarray, tol: float, max_sweeps: int = 200) -> np.ndarray:
        out = rhos
        for _ in range(max_sweeps):
            out = self.psd(self.affine(out))
            if self.residual(out) < tol:
                break
        return out

    def penalty_gradient(self, rhos: np.ndarray) -> np.ndarray:
        if self.rows.shape[0] == 0:
            return np.zeros_like(rhos)
        viol = np.einsum("rx,xij->rij", self.rows, rhos)
        return np.einsum("rx,rij->xij", self.rows, viol)


def _objective(weighted: np.ndarray, rhos: np.ndarray, effects: np.ndarray) -> float:
    return float(np.einsum("xyb,ybij,xji->", weighted, effects, rhos).real)


def _pinv_sqrt(total: np.ndarray):
    """Pseudo-inverse square root restricted to the support, plus the complement."""
    w, v = np.linalg.eigh((total + total.conj().T) / 2)
    support = w > max(float(w.max()), 1.0) * 1e-12
    vs = v[:, support]
    inv_sqrt = (vs / np.sqrt(w[support])) @ vs.conj().T
    complement = np.eye(total.shape[0]) - vs @ vs.conj().T
    return inv_sqrt, complement


def _normalize_povm(effects: np.ndarray) -> np.ndarray:
    """Clip effects to the positive cone and rescale them to sum to the identity.

    Directions outside the joint support are distributed uniformly over the
    outcomes so completeness holds on the full space.
    """
    effects = (effects + np.conj(np.swapaxes(effects, 1, 2))) / 2
    w, v = np.linalg.eigh(effects)
    effects = np.einsum("bik,bk,bjk->bij", v, np.clip(w, 0.0, None), np.conj(v))
    inv_sqrt, complement = _pinv_sqrt(effects.sum(axis=0))
    out = np.einsum("ij,bjk,kl->bil", inv_sqrt, effects, inv_sqrt)
    out = out + complement / len(effects)
    return (out + np.conj(np.swapaxes(out, 1, 2))) / 2


def _jrf_update(gram: np.ndarray, effects: np.ndarray, steps: int) -> np.ndarray:
    """Fixed-point iteration M_b <- L^-1/2 G_b M_b G_b L^-1/2 on shifted scores.

    ``gram`` holds one positive score operator per outcome; adding a common
    multiple of the identity to all of them shifts the objective by a
    constant, so the operators are shifted positive first.
    """
    shift = min(0.0, float(min(np.linalg.eigvalsh(g).min() for g in gram)))
    g = gram - (shift - 1e-9) * np.eye(gram.shape[-1])
    m = effects
    for _ in range(steps):
        gmg = np.einsum("bij,bjk,bkl->bil", g, m, g)
        inv_sqrt, complement = _pinv_sqrt(gmg.sum(axis=0))
        m = np.einsum("ij,bjk,kl->bil", inv_sqrt, gmg, inv_sqrt)
        m = m + complement / len(m)
        m = (m + np.conj(np.swapaxes(m, 1, 2))) / 2
    return _normalize_povm(m)


def _random_rhos(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    kets = rng.normal(size=(n, dim)) + 1j * rng.normal(size=(n, dim))
    kets /= np.linalg.norm(kets, axis=1, keepdims=True)
    return np.einsum("xi,xj->xij", kets, np.conj(kets))


def _random_povm(rng: np.random.Generator, n_out: int, dim: int) -> np.ndarray:
    g = rng.normal(size=(n_out, dim, dim)) + 1j * rng.normal(size=(n_out, dim, dim))
    effects = np.einsum("bij,bkj->bik", g, np.conj(g))
    return _normalize_povm(effects)


def _strategy_arrays(strategy: QuantumStrategy):
    rhos = np.stack([p.matrix for p in strategy.preparations])
    effects = [np.stack(m.elements) for m in strategy.measurements]
    return rhos, effects


def _run_restart(game, cfg, weighted, projector, restart, initial):
    rng = np.random.default_rng([cfg.seed, restart])
    n_alice, n_bob, n_out = weighted.shape
    dim = cfg.dim

    if initial is not None and restart == 0:
        rhos, effect_list = _strategy_arrays(initial)
        effects = np.stack(effect_list)
        if rhos.shape[-1] != dim:
            raise ValueError("initial strategy dimension disagrees with the config")
    else:
        rhos = projector.feasible(_random_rhos(rng, n_alice, dim), cfg.tolerance / 10)
        effects = np.stack([_random_povm(rng, n_out, dim) for _ in range(n_bob)])

    value = _objective(weighted, rhos, effects)
    step = 0.5
    window_anchor = value
    iterations = 0
    for it in range(cfg.max_iters):
        iterations = it + 1

        # Measurement step: best accepted candidate per receiver input.
        for y in range(n_bob):
            gram = np.einsum("xb,xij->bij", weighted[:, y, :], rhos)
            gram = (gram + np.conj(np.swapaxes(gram, 1, 2))) / 2
            current = float(np.einsum("bij,bji->", effects[y], gram).real)
            best_cand, best_val = None, current
            uniform = np.stack([np.eye(dim) / n_out] * n_out)
            for start in (effects[y], uniform):
                cand = _jrf_update(gram, start, _JRF_STEPS)
                cand_val = float(np.einsum("bij,bji->", cand, gram).real)
                if cand_val > best_val + 1e-14:
                    best_cand, best_val = cand, cand_val
            if best_cand is not None:
                effects[y] = best_cand
        value = _objective(weighted, rhos, effects)

        # Preparation step: penalty-augmented ascent plus exact projection.
        mu = cfg.penalty_schedule[
            min(it // cfg.penalty_period, len(cfg.penalty_schedule) - 1)
        ]
        grad = np.einsum("xyb,ybij->xij", weighted, effects)
        grad = (grad + np.conj(np.swapaxes(grad, 1, 2))) / 2
        for _ in range(4):
            direction = grad - mu * projector.penalty_gradient(rhos)
            trial = projector.feasible(rhos + step * direction, cfg.tolerance / 10)
            trial_val = _objective(weighted, trial, effects)
            if trial_val > value + 1e-14:
                rhos = trial
                value = trial_val
                step = min(step * 1.4, 16.0)
            else:
                step = max(step * 0.4, 1e-4)

        if (it + 1) % _CONVERGENCE_WINDOW == 0:
            if value - window_anchor < _CONVERGENCE_GAIN:
                break
            window_anchor = value

    # Final polish: land exactly inside the feasible set and report the value
    # of the strategy actually returned.
    rhos = projector.feasible(rhos, cfg.tolerance / 10, max_sweeps=500)
    preparations = tuple(DensityMatrix(_unit_trace(r)) for r in rhos)
    measurements = tuple(Povm(tuple(_normalize_povm(e))) for e in effects)
    strategy = QuantumStrategy(preparations, measurements)
    residual = obliviousness_residual_quantum(game, strategy)
    value = performance(game, behavior_from_quantum(strategy))
    return SearchResult(
        value=value,
        strategy=strategy,
        feasibility_residual=residual,
        iterations_used=iterations,
        feasible=residual < cfg.tolerance,
        restart_index=restart,
    )


def _unit_trace(rho: np.ndarray) -> np.ndarray:
    herm = (rho + rho.conj().T) / 2
    return herm / float(np.trace(herm).real)


def search(
    game: ObliviousGame,
    cfg: SearchConfig,
    initial: QuantumStrategy | None = None,
    threads: int = 1,
) -> SearchResult:
    """Best strategy over restarts; the value is a lower bound, never a claim.

    With a fixed seed and one restart the run is bit-reproducible.  Restarts
    are independent, so they may run on a thread pool; the reduction (largest
    value, ties broken by restart index) is deterministic either way.
    """
    if not game.partitions:
        raise ValueError("game has no obliviousness families to respect")
    weighted = game.payoff * game.p_alice[:, None, None] * game.p_bob[None, :, None]
    projector = _Projector(game, cfg.dim)

    def run(restart: int) -> SearchResult:
        return _run_restart(game, cfg, weighted, projector, restart, initial)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(cfg.restarts)))
    else:
        results = [run(r) for r in range(cfg.restarts)]

    feasible = [r for r in results if r.feasible]
    pool_ = feasible if feasible else results
    best = max(pool_, key=lambda r: (r.value, -r.restart_index))
    return best
