"""The explicit optimal qutrit strategy for the three-outcome game.

Fixes the global phase convention omega = exp(+2*pi*i/3) once; entangled
state, measurement bases, conditional preparations, and the closed-form
outcome distribution all follow from it.  The game input x0 corresponds to
the raw correlation outcome a = x0 - 1 (mod 3) whenever x = 1; that
relabeling is what makes the scoring formula of the game apply verbatim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bellmap, games
from .games import QuantumStrategy
from .qmath import DensityMatrix, Ket, Povm

GAMMA1 = (math.sqrt(11.0) - math.sqrt(3.0)) / 2.0
GAMMA = (1.0, GAMMA1, 1.0)
NORMALIZATION = 2.0 + GAMMA1**2
OMEGA = complex(np.exp(2j * np.pi / 3))
ALPHA = (0.0, 0.5)
BETA = (0.25, -0.25)

# Half-wave-plate orientations (degrees) preparing the six lab states psi_jk.
WAVEPLATE_ANGLES = {
    (1, 1): (77.01, 24.93),
    (1, 2): (12.98, 20.07),
    (1, 3): (36.80, 34.79),
    (2, 1): (54.78, 81.28),
    (2, 2): (53.19, 10.21),
    (2, 3): (54.78, 53.71),
}


@dataclass(frozen=True)
class CglmpStrategy:
    """Parameter record of the optimal strategy; construction validates the values."""

    gamma: tuple = GAMMA
    normalization: float = NORMALIZATION
    alpha: tuple = ALPHA
    beta: tuple = BETA
    omega: complex = OMEGA

    def __post_init__(self):
        g0, g1, g2 = self.gamma
        if abs(g0 - 1.0) >= 1e-12 or abs(g2 - 1.0) >= 1e-12:
            raise ValueError("outer amplitudes must equal 1")
        if abs(g1 - GAMMA1) >= 1e-12:
            raise ValueError(f"middle amplitude must equal {GAMMA1!r}")
        if abs(self.normalization - (2.0 + g1**2)) >= 1e-12:
            raise ValueError("normalization must equal 2 + gamma_1^2")
        if abs(self.omega - OMEGA) >= 1e-12:
            raise ValueError("phase must be the primitive third root of unity")


def optimal_state() -> Ket:
    """Partially entangled two-qutrit state, amplitudes gamma_k/sqrt(N) on |kk>."""
    amp = np.zeros(9, dtype=complex)
    for k in range(3):
        amp[4 * k] = GAMMA[k] / math.sqrt(NORMALIZATION)
    return Ket(amp)


def alice_basis(x: int):
    """Measurement basis of the first party for setting x in {0, 1}."""
    return [
        Ket(np.array([OMEGA ** (k * (a + ALPHA[x])) for k in range(3)]) / math.sqrt(3))
        for a in range(3)
    ]


def bob_basis(y: int):
    """Measurement basis of the receiver for setting y in {0, 1}."""
    return [
        Ket(np.array([OMEGA ** (k * (-b + BETA[y])) for k in range(3)]) / math.sqrt(3))
        for b in range(3)
    ]


def alice_povm(x: int) -> Povm:
    return Povm.from_kets(alice_basis(x))


def bob_povm(y: int) -> Povm:
    return Povm.from_kets(bob_basis(y))


def closed_form_prob(x0: int, x: int, y: int, b: int) -> float:
    """Receiver outcome distribution p(b | x0, x, y) of the optimal strategy."""
    u = x0 - b + ALPHA[x] + BETA[y] - (1 if x == 1 else 0)
    amp = sum(GAMMA[k] * OMEGA ** (k * u) for k in range(3))
    return float(abs(amp) ** 2 / (3.0 * NORMALIZATION))


def a3_quantum() -> float:
    """Quantum game value as a cosine sum; equals (3 + sqrt(33))/12."""
    total = 0.0
    for k in range(3):
        for j in range(3):
            total += GAMMA[k] * GAMMA[j] * (
                math.cos(math.pi / 6 * (k - j)) - math.cos(math.pi / 2 * (k - j))
            )
    return total / (3.0 * NORMALIZATION)


def optimal_box() -> bellmap.NoSignalingBox:
    """Correlations of the optimal state and bases."""
    return bellmap.box_from_quantum(
        DensityMatrix.from_ket(optimal_state()),
        [alice_povm(0), alice_povm(1)],
        [bob_povm(0), bob_povm(1)],
    )


def game_strategy() -> QuantumStrategy:
    """Qutrit strategy for ``games.make_cglmp3_game``.

    Preparations are the steered conditional states, reordered so that the
    game input (x0, x) holds the state for correlation outcome
    a = x0 - delta_{x,1} (mod 3).
    """
    state = DensityMatrix.from_ket(optimal_state())
    _, preps = bellmap.preparations_from_entangled(state, [alice_povm(0), alice_povm(1)])
    game = games.make_cglmp3_game()
    ordered = tuple(
        preps[x][(x0 - (1 if x == 1 else 0)) % 3] for (x0, x) in game.alice_inputs
    )
    return QuantumStrategy(ordered, (bob_povm(0), bob_povm(1)))


def waveplate_state(chi1: float, chi2: float) -> Ket:
    """Real qutrit ket prepared by two half-wave plates at angles in degrees."""
    c1 = math.radians(chi1)
    c2 = math.radians(chi2)
    return Ket(
        np.array(
            [
                math.cos(2 * c1),
                math.sin(2 * c1) * math.sin(2 * c2),
                math.sin(2 * c1) * math.cos(2 * c2),
            ],
            dtype=complex,
        )
    )


def experiment_ket(j: int, k: int) -> Ket:
    """Lab preparation psi_jk from the recorded wave-plate orientations."""
    return waveplate_state(*WAVEPLATE_ANGLES[(j, k)])
