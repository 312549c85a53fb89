import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boxpush._validation import evaluate_rows
from boxpush.dominance import dominates
from boxpush.mopso import (
    MOPSO,
    Archive,
    MopsoConfig,
    Particle,
    advance_position,
    build_grid,
    insert_archive,
    mutate,
    mutation_probability,
    run_mopso,
    select_leader,
    update_pbest,
    update_velocity,
)
from oracles import ScriptedRNG, brute_dominates, pareto_set_sweep


def schaffer(x):
    return (x[0] ** 2, (x[0] - 2) ** 2)


def archive_of(objs, capacity=100, divisions=2):
    arch = Archive(capacity, divisions)
    rng = np.random.default_rng(0)
    for i, o in enumerate(objs):
        assert arch.insert([float(i)], o, rng)
    return arch


# -- grid -----------------------------------------------------------------------


def test_build_grid_hand_example():
    grid = build_grid(np.array([(0, 10), (5, 5), (10, 0)], float), 2)
    assert grid.indices == [(0, 1), (1, 1), (1, 0)]
    assert grid.occupancy == {(0, 1): 1, (1, 1): 1, (1, 0): 1}


def test_build_grid_single_member():
    grid = build_grid(np.array([(3.0, 4.0)]), 7)
    assert grid.occupancy == {grid.indices[0]: 1}
    np.testing.assert_allclose(grid.lower, [2.5, 3.5])
    np.testing.assert_allclose(grid.upper, [3.5, 4.5])


def test_build_grid_identical_members_share_a_cube():
    grid = build_grid(np.tile([1.0, 2.0], (5, 1)), 4)
    assert list(grid.occupancy.values()) == [5]


def test_build_grid_rejects_empty():
    with pytest.raises(ValueError):
        build_grid(np.empty((0, 2)), 3)


@given(st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=1, max_size=60), st.integers(1, 12))
def test_grid_occupancy_accounts_for_every_member(objs, divisions):
    grid = build_grid(np.array(objs, float), divisions)
    assert sum(grid.occupancy.values()) == len(objs)
    for i, cube in enumerate(grid.indices):
        assert i in grid.cells[cube]
        assert all(0 <= c < divisions for c in cube)


# -- leader selection --------------------------------------------------------------


def test_select_leader_roulette_frequency():
    # cube (0,1) holds one member, cube (1,0) holds three: P(lonely cube) = 10 / (10 + 10/3) = 0.75
    arch = archive_of([(0, 10), (6, 4), (7, 3), (10, 0)])
    assert arch.grid.occupancy == {(0, 1): 1, (1, 0): 3}
    rng = np.random.default_rng(12345)
    n = 100_000
    hits = sum(select_leader(arch, arch.grid, rng)[0] == 0.0 for _ in range(n))
    assert abs(hits / n - 0.75) <= 0.01


def test_select_leader_equal_cubes_are_even():
    arch = archive_of([(0, 10), (10, 0)])
    rng = np.random.default_rng(7)
    n = 20_000
    hits = sum(select_leader(arch, arch.grid, rng)[0] == 0.0 for _ in range(n))
    assert abs(hits / n - 0.5) <= 0.02


def test_select_leader_single_member():
    arch = archive_of([(1, 1)])
    rng = np.random.default_rng(0)
    assert all(select_leader(arch, arch.grid, rng)[0] == 0.0 for _ in range(100))


# -- velocity / position ------------------------------------------------------------------


def particle(pos, vel=0.0, pbest=None, objs=(0.0, 0.0), pbest_objs=None):
    pos = np.atleast_1d(np.array(pos, float))
    return Particle(
        position=pos,
        velocity=np.atleast_1d(np.array(vel, float)) * np.ones_like(pos),
        objectives=np.array(objs, float),
        pbest_position=pos.copy() if pbest is None else np.atleast_1d(np.array(pbest, float)),
        pbest_objectives=np.array(objs if pbest_objs is None else pbest_objs, float),
    )


def test_update_velocity_hand_value():
    p = particle(0.0, vel=1.0, pbest=2.0)
    v = update_velocity(p, np.array([4.0]), 0.4, ScriptedRNG([0.5]))
    assert v[0] == pytest.approx(3.4, abs=1e-12)


def test_update_velocity_zero_velocity_at_pbest():
    p = particle([1.0, 2.0])
    rng = ScriptedRNG([0.25, 0.75])
    v = update_velocity(p, np.array([3.0, 0.0]), 0.4, rng)
    np.testing.assert_allclose(v, 0.75 * np.array([2.0, -2.0]))


def test_update_velocity_pure_inertia():
    p = particle([1.0, 2.0], vel=3.0)
    v = update_velocity(p, p.position, 0.4, np.random.default_rng(0))
    np.testing.assert_allclose(v, [1.2, 1.2])


def test_update_velocity_scalar_coefficients():
    # a single R1 and R2 per call: two draws, whatever the dimension
    rng = ScriptedRNG([0.1, 0.9])
    update_velocity(particle(np.zeros(5)), np.ones(5), 0.4, rng)
    assert rng.calls == 2


@pytest.mark.parametrize(
    "pos, vel, new_pos, new_vel",
    [(0.5, 0.2, 0.7, 0.2), (0.9, 0.3, 1.0, -0.3), (0.3, 0.0, 0.3, 0.0), (0.1, -0.4, 0.0, 0.4)],
)
def test_advance_position_clamp_and_reflect(pos, vel, new_pos, new_vel):
    p = advance_position(particle(pos, vel=vel), np.array([0.0]), np.array([1.0]))
    assert p.position[0] == pytest.approx(new_pos)
    assert p.velocity[0] == pytest.approx(new_vel)


# -- personal best ------------------------------------------------------------------------------


def test_update_pbest_dominating_current_replaces():
    p = particle(0.0, objs=(1, 1), pbest=5.0, pbest_objs=(2, 2))
    update_pbest(p, np.random.default_rng(0))
    assert p.pbest_objectives.tolist() == [1, 1]
    assert p.pbest_position[0] == 0.0


def test_update_pbest_dominated_current_is_ignored():
    p = particle(0.0, objs=(2, 2), pbest=5.0, pbest_objs=(1, 1))
    update_pbest(p, np.random.default_rng(0))
    assert p.pbest_objectives.tolist() == [1, 1]


def test_update_pbest_incomparable_is_a_coin_flip():
    rng = np.random.default_rng(99)
    n = 10_000
    took = 0
    for _ in range(n):
        p = particle(0.0, objs=(1, 3), pbest=5.0, pbest_objs=(3, 1))
        took += update_pbest(p, rng).pbest_objectives[0] == 1
    assert abs(took / n - 0.5) <= 0.02


def test_update_pbest_skips_non_finite():
    p = particle(0.0, objs=(math.inf, math.inf), pbest=5.0, pbest_objs=(3, 1))
    update_pbest(p, np.random.default_rng(0))
    assert p.pbest_position[0] == 5.0


# -- archive ---------------------------------------------------------------------------------------


def test_insert_into_empty_archive():
    arch, ok = insert_archive(([0.0], (1, 1)), Archive(5), np.random.default_rng(0))
    assert ok and len(arch) == 1


def test_insert_evicts_dominated_member():
    arch = archive_of([(2, 2)])
    arch, ok = insert_archive(([9.0], (1, 1)), arch, np.random.default_rng(0))
    assert ok
    assert arch.objectives.tolist() == [[1, 1]]


def test_insert_keeps_incomparable_members():
    arch = archive_of([(1, 3), (3, 1)])
    _, ok = insert_archive(([9.0], (2, 2)), arch, np.random.default_rng(0))
    assert ok and len(arch) == 3
    objs = arch.objectives.tolist()
    assert not any(brute_dominates(a, b) for a in objs for b in objs if a is not b)


def test_insert_rejects_dominated_and_duplicates():
    arch = archive_of([(1, 1)])
    rng = np.random.default_rng(0)
    assert not arch.insert([5.0], (2, 2), rng)
    assert not arch.insert([6.0], (1, 1), rng)
    assert not arch.insert([7.0], (math.nan, 0.0), rng)
    assert len(arch) == 1


def test_overflow_evicts_from_the_most_crowded_cube():
    # four members in cube (1, 0) and one in (0, 1); a fifth insertion overflows capacity 5
    arch = archive_of([(0, 10), (6, 4), (7, 3), (8, 2), (10, 0)], capacity=5)
    rng = np.random.default_rng(1)
    assert arch.insert([99.0], (9, 1), rng)
    assert len(arch) == 5
    assert [0, 10] in arch.objectives.tolist()


def test_eviction_tie_goes_to_the_lexicographically_first_cube():
    # cubes (0,1) and (1,0) both hold two members, the newcomer sits alone in (1,1)
    arch = archive_of([(0, 10), (1, 9), (9, 1), (10, 0)], capacity=4)
    assert arch.insert([99.0], (5.5, 5.5), np.random.default_rng(0))
    assert arch.grid.occupancy[(1, 1)] == 1
    kept = arch.objectives.tolist()
    assert sum(o in kept for o in ([0, 10], [1, 9])) == 1
    assert [9, 1] in kept and [10, 0] in kept


# -- mutation ------------------------------------------------------------------------------------------


def test_mutation_probability_schedule():
    assert mutation_probability(0, 100, 0.5) == 1.0
    assert mutation_probability(100, 100, 0.5) == 0.0
    assert mutation_probability(50, 100, 0.5) == 0.5**10
    assert mutation_probability(50, 100, 0.5) == pytest.approx(9.765625e-4, abs=0)


def test_mutation_fires_exactly_below_the_threshold():
    lower, upper = np.zeros(3), np.ones(3)
    prob = mutation_probability(30, 100, 0.8)
    fired = mutate(particle([0.5, 0.5, 0.5]), 30, 100, 0.8, lower, upper, ScriptedRNG([np.nextafter(prob, 0), 0.0], ints=[1]))
    assert fired.position.tolist() != [0.5, 0.5, 0.5]
    held = mutate(particle([0.5, 0.5, 0.5]), 30, 100, 0.8, lower, upper, ScriptedRNG([prob, 0.0], ints=[1]))
    assert held.position.tolist() == [0.5, 0.5, 0.5]


def test_mutation_range_is_clipped_to_bounds():
    # at generation 0 the window is the full range; with the draw at 0 we land on the clipped lower edge
    p = particle([0.2, 0.9])
    mutate(p, 0, 10, 1.0, np.zeros(2), np.ones(2), ScriptedRNG([0.0, 0.0], ints=[1]))
    assert p.position.tolist() == [0.2, 0.0]


def test_mutation_window_shrinks():
    p = particle([0.5])
    prob = mutation_probability(5, 10, 1.0)
    mutate(p, 5, 10, 1.0, np.zeros(1), np.ones(1), ScriptedRNG([0.0, 1.0]))
    assert p.position[0] == pytest.approx(0.5 + prob)


def test_mutation_never_fires_at_the_last_generation():
    p = particle([0.5])
    rng = np.random.default_rng(0)
    for _ in range(1000):
        mutate(p, 10, 10, 0.5, np.zeros(1), np.ones(1), rng)
    assert p.position[0] == 0.5


@settings(max_examples=300)
@given(
    st.lists(st.floats(-10, 10), min_size=1, max_size=5),
    st.integers(0, 20),
    st.floats(0.05, 1.0),
    st.integers(0, 2**32 - 1),
)
def test_mutation_stays_in_bounds(coords, gen, rate, seed):
    lower = np.full(len(coords), -10.0)
    upper = np.full(len(coords), 10.0)
    p = particle(coords)
    mutate(p, gen, 20, rate, lower, upper, np.random.default_rng(seed))
    assert np.all(p.position >= lower) and np.all(p.position <= upper)


# -- full runs -------------------------------------------------------------------------------------------


def test_run_converges_to_the_schaffer_pareto_set():
    sweep = pareto_set_sweep(lambda x: schaffer([x]), -5, 5)
    assert sweep.min() == pytest.approx(0.0, abs=1e-3) and sweep.max() == pytest.approx(2.0, abs=1e-3)
    archive = run_mopso(schaffer, MopsoConfig(bounds=[(-5, 5)], population=50, iterations=100, seed=4))
    xs = np.array(archive.positions)[:, 0]
    assert xs.min() >= -0.05 and xs.max() <= 2.05
    assert abs(xs.min() - 0.0) <= 0.1 and abs(xs.max() - 2.0) <= 0.1


def test_capacity_one_archive():
    sizes = []
    run_mopso(
        schaffer,
        MopsoConfig(bounds=[(-5, 5)], population=10, iterations=15, archive_size=1, seed=0),
        callback=lambda it, arch, swarm: sizes.append(len(arch)),
    )
    assert max(sizes) == 1


def test_same_seed_same_archive():
    cfg = MopsoConfig(bounds=[(-5, 5), (-1, 1)], population=20, iterations=20, seed=11)
    f = lambda x: (x[0] ** 2 + x[1] ** 2, (x[0] - 2) ** 2 + x[1] ** 2)  # noqa: E731
    a, b = run_mopso(f, cfg), run_mopso(f, cfg)
    assert np.array_equal(np.array(a.positions), np.array(b.positions))
    assert np.array_equal(a.objectives, b.objectives)


class BatchOnly:
    """Evaluator whose single-row call is off limits, so only ``batch`` can be used."""

    def __init__(self, f):
        self.f = f
        self.batches = []

    def __call__(self, x):
        raise AssertionError("batch evaluator called row by row")

    def batch(self, X):
        self.batches.append(len(X))
        return np.array([self.f(x) for x in X])


def test_batch_evaluator_gives_the_same_run():
    cfg = MopsoConfig(bounds=[(-5, 5), (-1, 1)], population=12, iterations=9, seed=2)
    f = lambda x: (x[0] ** 2 + x[1] ** 2, (x[0] - 2) ** 2 + x[1] ** 2)  # noqa: E731
    ev = BatchOnly(f)
    a, b = run_mopso(f, cfg), run_mopso(ev, cfg)
    assert ev.batches == [12] * 10
    assert np.array_equal(np.array(a.positions), np.array(b.positions))
    assert np.array_equal(a.objectives, b.objectives)


def test_evaluate_rows_checks_shapes():
    X = np.zeros((3, 2))
    with pytest.raises(ValueError):
        evaluate_rows(lambda x: (1.0,) if x[0] else (1.0, 2.0), np.array([[0.0], [1.0]]))
    with pytest.raises(ValueError):
        evaluate_rows(lambda x: (1.0, 2.0), X, n_objectives=3)
    bad = BatchOnly(lambda x: (1.0, 2.0))
    bad.batch = lambda X: np.zeros((len(X) - 1, 2))
    with pytest.raises(ValueError):
        evaluate_rows(bad, X)


def test_swarm_stays_in_bounds_and_archive_stays_pure():
    lower, upper = np.array([-5.0, -1.0]), np.array([5.0, 1.0])

    def check(it, arch, swarm):
        for p in swarm:
            assert np.all(p.position >= lower) and np.all(p.position <= upper)
        objs = arch.objectives
        assert not any(dominates(objs[i], objs[j]) for i in range(len(objs)) for j in range(len(objs)) if i != j)
        assert len(arch) <= 15

    f = lambda x: (x[0] ** 2 + x[1] ** 2, (x[0] - 2) ** 2 + x[1] ** 2)  # noqa: E731
    run_mopso(f, MopsoConfig(bounds=list(zip(lower, upper)), population=20, iterations=30, archive_size=15, seed=2), callback=check)


def test_non_finite_evaluations_are_counted_and_excluded():
    def f(x):
        return (math.inf, math.inf) if x[0] > 0 else (x[0] ** 2, (x[0] + 2) ** 2)

    archive = run_mopso(f, MopsoConfig(bounds=[(-5, 5)], population=20, iterations=10, seed=0))
    assert archive.n_nonfinite > 0
    assert np.all(np.isfinite(archive.objectives))
    assert all(p[0] <= 0 for p in archive.positions)


def test_config_validation():
    with pytest.raises(ValueError):
        MopsoConfig(bounds=[(1, 0)])
    with pytest.raises(ValueError):
        MopsoConfig(bounds=[(0, 1)], mutation_rate=0.0)
    with pytest.raises(ValueError):
        MopsoConfig(bounds=[(0, 1)], inertia=-0.1)
    with pytest.raises(ValueError):
        MopsoConfig(bounds=[(0, 1)], population=0)


def test_estimator_api():
    est = MOPSO(population=10, iterations=5, random_state=0)
    assert est.get_params()["inertia"] == 0.4
    est.set_params(archive_size=7)
    est.fit(schaffer, [(-5, 5)])
    assert est.pareto_set_.shape[1] == 1
    assert est.pareto_front_.shape == (est.pareto_set_.shape[0], 2)
    assert 1 <= len(est.archive_) <= 7
    assert est.n_evaluations_ == 10 * 6
