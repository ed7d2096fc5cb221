import numpy as np
import pytest

from oblivious_games import cglmp
from oblivious_games.bellmap import (
    BellFunctional,
    NoSignalingBox,
    bell_value,
    box_from_quantum,
    cglmp3,
    game_from_bell,
    load_box,
    load_functional,
    preparations_from_entangled,
    save_box,
    save_functional,
    strategy_from_box,
)
from oblivious_games.games import (
    behavior_from_quantum,
    make_cglmp3_game,
    obliviousness_residual_behavior,
    performance,
)
from oblivious_games.qmath import DensityMatrix, Ket, Povm

from test_qmath import random_povm

A3 = (3 + np.sqrt(33)) / 12


def deterministic_box(f, g, m_a=2, m_b=2, d=3):
    table = np.zeros((m_a, m_b, d, d))
    for X in range(m_a):
        for Y in range(m_b):
            table[X, Y, f[X], g[Y]] = 1.0
    return NoSignalingBox(table)


def uniform_box(m_a=2, m_b=2, d=3):
    return NoSignalingBox(np.full((m_a, m_b, d, d), 1.0 / d**2))


class TestCglmp3Functional:
    def test_correlated_terms_positive(self):
        bell = cglmp3()
        for a in range(3):
            assert bell.coeffs[0, 0, a, a] == 1.0

    def test_shifted_terms_negative(self):
        bell = cglmp3()
        for a in range(3):
            assert bell.coeffs[0, 0, a, (a + 1) % 3] == -1.0

    def test_24_nonzero_cells(self):
        assert np.count_nonzero(cglmp3().coeffs) == 24

    def test_uniform_box_scores_zero(self):
        assert abs(bell_value(cglmp3(), uniform_box())) < 1e-12

    def test_optimal_quantum_box(self):
        assert abs(bell_value(cglmp3(), cglmp.optimal_box()) - A3) < 1e-12

    def test_deterministic_boxes_below_local_bound(self):
        bell = cglmp3()
        values = [
            bell_value(bell, deterministic_box(f, g))
            for f in np.ndindex(3, 3)
            for g in np.ndindex(3, 3)
        ]
        assert max(values) <= 0.5 + 1e-15
        assert abs(max(values) - 0.5) < 1e-15  # equality achievable


class TestNoSignalingBox:
    def test_signaling_table_rejected(self):
        table = np.full((2, 2, 2, 2), 0.25)
        table[0, 0] = [[0.5, 0.0], [0.0, 0.5]]  # Bob marginal depends on X
        table[1, 0] = [[0.5, 0.25], [0.25, 0.0]]
        with pytest.raises(ValueError):
            NoSignalingBox(table)

    def test_quantum_box_passes(self):
        box = cglmp.optimal_box()
        assert box.no_signaling_residual() < 1e-12

    def test_alice_marginals_uniform_for_optimal_box(self):
        box = cglmp.optimal_box()
        assert np.max(np.abs(box.alice_marginals() - 1 / 3)) < 1e-12


class TestBoxFromQuantum:
    def test_product_state_factorizes(self):
        rng = np.random.default_rng(11)
        ka = rng.normal(size=2) + 1j * rng.normal(size=2)
        kb = rng.normal(size=2) + 1j * rng.normal(size=2)
        ka /= np.linalg.norm(ka)
        kb /= np.linalg.norm(kb)
        state = DensityMatrix(np.kron(np.outer(ka, ka.conj()), np.outer(kb, kb.conj())))
        meas_a = [random_povm(rng, 2, 2) for _ in range(2)]
        meas_b = [random_povm(rng, 2, 2) for _ in range(2)]
        box = box_from_quantum(state, meas_a, meas_b)
        pa = box.table.sum(axis=3)
        pb = box.table.sum(axis=2)
        for X in range(2):
            for Y in range(2):
                assert np.max(np.abs(box.table[X, Y] - np.outer(pa[X, Y], pb[X, Y]))) < 1e-12

    def test_conjugate_fourier_bases_correlate(self):
        phi = np.zeros(9)
        phi[[0, 4, 8]] = 1 / np.sqrt(3)
        state = DensityMatrix(np.outer(phi, phi))
        w = np.exp(2j * np.pi / 3)
        fourier = [Ket(np.array([w ** (k * a) for k in range(3)]) / np.sqrt(3)) for a in range(3)]
        conj = [Ket(np.array([w ** (-k * a) for k in range(3)]) / np.sqrt(3)) for a in range(3)]
        box = box_from_quantum(state, [Povm.from_kets(fourier)], [Povm.from_kets(conj)])
        for a in range(3):
            assert abs(box.table[0, 0, a, a] - 1 / 3) < 1e-12


class TestGameFromBell:
    def test_matches_handwritten_game(self):
        bell = cglmp3()
        game = game_from_bell(bell, np.full((2, 3), 1 / 3))
        reference = make_cglmp3_game()
        assert game.alice_inputs == reference.alice_inputs
        assert np.allclose(game.p_alice, reference.p_alice, atol=1e-15)
        assert game.partitions == reference.partitions
        # payoffs agree entrywise after undoing the x0 relabeling on x = 1
        relabeled = np.empty_like(game.payoff)
        for i, (x0, x) in enumerate(reference.alice_inputs):
            a = (x0 - (1 if x == 1 else 0)) % 3
            j = game.alice_inputs.index((a, x))
            relabeled[i] = game.payoff[j]
        assert np.max(np.abs(relabeled - reference.payoff)) < 1e-15

    def test_zero_functional(self):
        bell = BellFunctional(np.zeros((2, 2, 3, 3)), [0.5, 0.5], [0.5, 0.5])
        game = game_from_bell(bell, np.full((2, 3), 1 / 3))
        assert np.max(np.abs(game.payoff)) == 0.0

    def test_partition_shape(self):
        game = game_from_bell(cglmp3(), np.full((2, 3), 1 / 3))
        (family,) = game.partitions
        assert len(family) == 2 and all(len(s) == 3 for s in family)


class TestStrategyFromBox:
    def test_optimal_box_reproduces_quantum_value(self):
        box = cglmp.optimal_box()
        p_g, behavior = strategy_from_box(box)
        game = game_from_bell(cglmp3(), p_g)
        assert abs(performance(game, behavior) - A3) < 1e-12

    def test_deterministic_box_identity(self):
        bell = cglmp3()
        box = deterministic_box((0, 2), (1, 1))
        p_g, behavior = strategy_from_box(box)
        game = game_from_bell(bell, p_g)
        assert abs(performance(game, behavior) - bell_value(bell, box)) < 1e-14

    def test_uniform_box_rows(self):
        _, behavior = strategy_from_box(uniform_box())
        assert np.max(np.abs(behavior.table - 1 / 3)) < 1e-12

    def test_residual_equals_box_residual(self):
        box = cglmp.optimal_box()
        p_g, behavior = strategy_from_box(box)
        game = game_from_bell(cglmp3(), p_g)
        assert obliviousness_residual_behavior(game, behavior) < 1e-10


class TestRoundTripIdentity:
    def test_random_mixtures(self):
        rng = np.random.default_rng(2024)
        bell = cglmp3()
        quantum = cglmp.optimal_box()
        det_boxes = [
            deterministic_box(tuple(rng.integers(0, 3, 2)), tuple(rng.integers(0, 3, 2)))
            for _ in range(6)
        ]
        for _ in range(20):
            weights = rng.dirichlet(np.ones(len(det_boxes) + 1))
            table = weights[0] * quantum.table
            for w, b in zip(weights[1:], det_boxes):
                table = table + w * b.table
            box = NoSignalingBox(table)
            p_g, behavior = strategy_from_box(box)
            game = game_from_bell(bell, p_g)
            assert abs(performance(game, behavior) - bell_value(bell, box)) < 1e-12


class TestPreparationsFromEntangled:
    def test_computational_measurement_on_max_entangled(self):
        phi = np.zeros(9)
        phi[[0, 4, 8]] = 1 / np.sqrt(3)
        state = DensityMatrix(np.outer(phi, phi))
        povm = Povm(tuple(np.diag([1.0 if i == k else 0.0 for i in range(3)]) for k in range(3)))
        p_g, preps = preparations_from_entangled(state, [povm])
        assert np.max(np.abs(p_g - 1 / 3)) < 1e-12
        for k in range(3):
            expected = np.zeros((3, 3))
            expected[k, k] = 1.0
            assert np.max(np.abs(preps[0][k].matrix - expected)) < 1e-12

    def test_averages_reproduce_reduced_state(self):
        state = DensityMatrix.from_ket(cglmp.optimal_state())
        p_g, preps = preparations_from_entangled(
            state, [cglmp.alice_povm(0), cglmp.alice_povm(1)]
        )
        from oblivious_games.qmath import partial_trace

        rho_b = partial_trace(state.matrix, 3, 3, which="a")
        for X in range(2):
            avg = sum(p_g[X, a] * preps[X][a].matrix for a in range(3))
            assert np.max(np.abs(avg - rho_b)) < 1e-12

    def test_conditional_states_are_pure(self):
        state = DensityMatrix.from_ket(cglmp.optimal_state())
        _, preps = preparations_from_entangled(
            state, [cglmp.alice_povm(0), cglmp.alice_povm(1)]
        )
        for row in preps:
            for rho in row:
                assert abs(rho.purity() - 1.0) < 1e-10


def test_behavior_pipelines_agree():
    # steered-preparation route vs direct box conversion
    state = DensityMatrix.from_ket(cglmp.optimal_state())
    alice = [cglmp.alice_povm(0), cglmp.alice_povm(1)]
    bob = [cglmp.bob_povm(0), cglmp.bob_povm(1)]
    box = box_from_quantum(state, alice, bob)
    _, behavior_box = strategy_from_box(box)
    behavior_direct = behavior_from_quantum(cglmp.game_strategy())
    # game_strategy applies the x0 relabeling on x = 1; undo it to compare
    game = make_cglmp3_game()
    for i, (x0, x) in enumerate(game.alice_inputs):
        a = (x0 - (1 if x == 1 else 0)) % 3
        j = game.alice_inputs.index((a, x))
        assert np.max(np.abs(behavior_direct.table[i] - behavior_box.table[j])) < 1e-10


def test_serialization_roundtrip(tmp_path):
    bell = cglmp3()
    box = cglmp.optimal_box()
    save_functional(bell, tmp_path / "bell.json")
    save_box(box, tmp_path / "box.json")
    bell2 = load_functional(tmp_path / "bell.json")
    box2 = load_box(tmp_path / "box.json")
    assert np.array_equal(bell2.coeffs, bell.coeffs)
    assert np.array_equal(box2.table, box.table)
