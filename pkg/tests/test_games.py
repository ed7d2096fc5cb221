import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oblivious_games import cglmp
from oblivious_games.games import (
    Behavior,
    ClassicalStrategy,
    ObliviousGame,
    QuantumStrategy,
    behavior_from_classical,
    behavior_from_quantum,
    cglmp3_targets,
    is_prime,
    load_game,
    make_cglmp3_game,
    make_rac_game,
    obliviousness_residual_behavior,
    obliviousness_residual_quantum,
    performance,
    save_game,
)
from oblivious_games.qmath import DensityMatrix, Povm

from test_qmath import random_density, random_povm


def uniform_behavior(game):
    return Behavior(np.full(game.payoff.shape, 1.0 / game.n_outcomes))


class TestCglmp3Game:
    def test_targets_formula(self):
        assert cglmp3_targets(0, 0, 0) == (0, 1)

    def test_targets_never_collide(self):
        for x0 in range(3):
            for x in range(2):
                for y in range(2):
                    t0, t1 = cglmp3_targets(x0, x, y)
                    assert t0 != t1

    def test_uniform_behavior_scores_zero(self):
        game = make_cglmp3_game()
        assert abs(performance(game, uniform_behavior(game))) < 1e-12

    def test_payoff_rows_sum_to_zero(self):
        game = make_cglmp3_game()
        assert np.max(np.abs(game.payoff.sum(axis=2))) < 1e-12

    def test_optimal_quantum_value(self):
        game = make_cglmp3_game()
        behavior = behavior_from_quantum(cglmp.game_strategy())
        value = performance(game, behavior)
        assert abs(value - (3 + np.sqrt(33)) / 12) < 1e-10

    def test_partition_groups_by_x(self):
        game = make_cglmp3_game()
        (family,) = game.partitions
        assert len(family) == 2
        for v, subset in enumerate(family):
            assert all(game.alice_inputs[i][1] == v for i in subset)


class TestRacGame:
    def test_2_2_structure(self):
        game = make_rac_game(2, 2)
        assert len(game.alice_inputs) == 4
        assert len(game.partitions) == 1  # only r = (1, 1)
        assert [len(s) for s in game.partitions[0]] == [2, 2]

    def test_2_3_admissible_strings(self):
        # every hidden parity string has at least two nonzero weights
        game = make_rac_game(2, 3)
        assert len(game.partitions) == 4

    def test_non_prime_rejected(self):
        with pytest.raises(ValueError):
            make_rac_game(2, 4)

    def test_set_sizes_are_d_pow_n_minus_1(self):
        for n, d in ((2, 2), (2, 3), (3, 2), (3, 3)):
            game = make_rac_game(n, d)
            for family in game.partitions:
                assert all(len(s) == d ** (n - 1) for s in family)

    def test_always_send_first_symbol_value(self):
        # classical strategy: message = x_1, guess when y != 1
        for n, d in ((2, 2), (2, 3), (3, 2)):
            game = make_rac_game(n, d)
            enc = np.zeros((d**n, d))
            for i, x in enumerate(game.alice_inputs):
                enc[i, x[0]] = 1.0
            dec = np.zeros((d, n, d))
            for m in range(d):
                dec[m, 0, m] = 1.0
                dec[m, 1:, :] = 1.0 / d
            value = performance(game, behavior_from_classical(ClassicalStrategy(enc, dec)))
            assert abs(value - (n + d - 1) / (n * d)) < 1e-12

    def test_send_first_symbol_is_oblivious(self):
        game = make_rac_game(2, 3)
        enc = np.zeros((9, 3))
        for i, x in enumerate(game.alice_inputs):
            enc[i, x[0]] = 1.0
        dec = np.zeros((3, 2, 3))
        for m in range(3):
            dec[m, 0, m] = 1.0
            dec[m, 1, :] = 1.0 / 3
        behavior = behavior_from_classical(ClassicalStrategy(enc, dec))
        assert obliviousness_residual_behavior(game, behavior) < 1e-12


class TestResiduals:
    def test_x_independent_behavior(self):
        game = make_cglmp3_game()
        assert obliviousness_residual_behavior(game, uniform_behavior(game)) == 0.0

    def test_distinguishing_behavior_positive(self):
        game = make_cglmp3_game()
        table = np.zeros((6, 2, 3))
        for i, (_, x) in enumerate(game.alice_inputs):
            table[i, :, x] = 1.0  # outcome reveals x outright
        assert obliviousness_residual_behavior(game, Behavior(table)) > 0.4

    def test_equal_preparations_zero(self):
        game = make_cglmp3_game()
        rho = DensityMatrix(np.eye(3) / 3)
        povm = Povm.from_kets(cglmp.bob_basis(0))
        strategy = QuantumStrategy((rho,) * 6, (povm, povm))
        assert obliviousness_residual_quantum(game, strategy) == 0.0

    def test_cglmp_preparations_satisfy_constraint(self):
        game = make_cglmp3_game()
        assert obliviousness_residual_quantum(game, cglmp.game_strategy()) < 1e-12

    def test_experimental_kets_violate_constraint(self):
        game = make_cglmp3_game()
        preps = tuple(
            DensityMatrix(cglmp.experiment_ket(x + 1, x0 + 1).projector())
            for (x0, x) in game.alice_inputs
        )
        strategy = QuantumStrategy(preps, (cglmp.bob_povm(0), cglmp.bob_povm(1)))
        assert obliviousness_residual_quantum(game, strategy) > 1e-3

    def test_empty_family_rejected(self):
        with pytest.raises(ValueError):
            ObliviousGame(
                alice_inputs=(0, 1),
                bob_inputs=(0,),
                outcomes=(0, 1),
                p_alice=[0.5, 0.5],
                p_bob=[1.0],
                payoff=np.zeros((2, 1, 2)),
                partitions=((),),
            )


class TestQuantumBehavior:
    def test_identity_table(self):
        preps = (DensityMatrix(np.diag([1.0, 0.0])), DensityMatrix(np.diag([0.0, 1.0])))
        povm = Povm((np.diag([1.0, 0.0]), np.diag([0.0, 1.0])))
        behavior = behavior_from_quantum(QuantumStrategy(preps, (povm,)))
        assert np.allclose(behavior.table[:, 0, :], np.eye(2), atol=1e-12)

    def test_maximally_mixed_rows(self):
        # rank-1 projective measurement on the maximally mixed qutrit: 1/3 rows
        rng = np.random.default_rng(8)
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        basis, _ = np.linalg.qr(g)
        povm = Povm(tuple(np.outer(basis[:, k], basis[:, k].conj()) for k in range(3)))
        prep = DensityMatrix(np.eye(3) / 3)
        behavior = behavior_from_quantum(QuantumStrategy((prep,), (povm,)))
        assert np.max(np.abs(behavior.table - 1 / 3)) < 1e-12

    def test_shape_mismatch_rejected(self):
        game = make_cglmp3_game()
        with pytest.raises(ValueError):
            performance(game, Behavior(np.full((4, 2, 3), 1 / 3)))

    def test_closed_form_agreement(self):
        behavior = behavior_from_quantum(cglmp.game_strategy())
        game = make_cglmp3_game()
        for i, (x0, x) in enumerate(game.alice_inputs):
            for y in range(2):
                for b in range(3):
                    assert abs(behavior.table[i, y, b] - cglmp.closed_form_prob(x0, x, y, b)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.0, 1.0))
def test_performance_linear_in_behavior(seed, lam):
    rng = np.random.default_rng(seed)
    game = make_cglmp3_game()
    shape = game.payoff.shape

    def random_behavior():
        t = rng.random(shape)
        return Behavior(t / t.sum(axis=2, keepdims=True))

    p, q = random_behavior(), random_behavior()
    mix = Behavior(lam * p.table + (1 - lam) * q.table)
    lhs = performance(game, mix)
    rhs = lam * performance(game, p) + (1 - lam) * performance(game, q)
    assert abs(lhs - rhs) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 4))
def test_behavior_residual_bounded_by_operator_residual(seed, dim):
    rng = np.random.default_rng(seed)
    n_inputs = 4
    game = ObliviousGame(
        alice_inputs=tuple(range(n_inputs)),
        bob_inputs=(0, 1),
        outcomes=tuple(range(dim)),
        p_alice=np.full(n_inputs, 1 / n_inputs),
        p_bob=np.full(2, 0.5),
        payoff=np.zeros((n_inputs, 2, dim)),
        partitions=(((0, 1), (2, 3)),),
    )
    preps = tuple(random_density(rng, dim) for _ in range(n_inputs))
    meas = tuple(random_povm(rng, dim, dim) for _ in range(2))
    strategy = QuantumStrategy(preps, meas)
    lhs = obliviousness_residual_behavior(game, behavior_from_quantum(strategy))
    rhs = dim * obliviousness_residual_quantum(game, strategy)
    assert lhs <= rhs + 1e-10


def test_is_prime():
    assert [k for k in range(14) if is_prime(k)] == [2, 3, 5, 7, 11, 13]


def test_game_json_roundtrip(tmp_path):
    game = make_rac_game(2, 3)
    path = tmp_path / "game.json"
    save_game(game, path)
    loaded = load_game(path)
    assert loaded.alice_inputs == game.alice_inputs
    assert loaded.partitions == game.partitions
    assert np.array_equal(loaded.payoff, game.payoff)
    assert np.array_equal(loaded.p_alice, game.p_alice)
    # document is plain JSON
    json.loads(path.read_text())
