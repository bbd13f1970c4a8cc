import numpy as np
import pytest

from armtune import (FAILURE_OBJECTIVES, Individual, OperatorConfig,
                     crowded_compare, crowding_distance, dominates, evolve,
                     mutate_polynomial, mutate_real, nondominated_sort,
                     recombine_real, recombine_sbx)
from armtune.moea import write_archive_csv, write_front_csv


def peel_fronts_bruteforce(objectives):
    """Oracle: repeatedly remove the non-dominated set, plain python."""
    def dom(a, b):
        return all(x <= y for x, y in zip(a, b)) \
            and any(x < y for x, y in zip(a, b))

    remaining = list(range(len(objectives)))
    fronts = []
    while remaining:
        front = [i for i in remaining
                 if not any(dom(objectives[j], objectives[i])
                            for j in remaining if j != i)]
        fronts.append(front)
        remaining = [i for i in remaining if i not in front]
    return fronts


# --- dominance and sorting ------------------------------------------------

def test_dominates_basic_cases():
    assert dominates((1, 1), (2, 2))
    assert not dominates((1, 1), (1, 1))
    assert not dominates((1, 3), (3, 1))
    assert not dominates((3, 1), (1, 3))
    assert dominates((1, 2), (1, 3))
    with pytest.raises(ValueError, match="shapes"):
        dominates((1, 2), (1, 2, 3))


def test_sort_small_example():
    fronts = nondominated_sort([(1, 2), (2, 1), (3, 3)])
    assert fronts == [[0, 1], [2]]


def test_sort_identical_population():
    fronts = nondominated_sort([(2.0, 2.0)] * 7)
    assert fronts == [list(range(7))]


def test_sort_matches_bruteforce_oracle():
    rng = np.random.default_rng(30)
    for _ in range(60):
        n = int(rng.integers(1, 51))
        m = int(rng.integers(2, 4))
        objs = np.round(rng.uniform(0, 1, size=(n, m)), 2)  # force ties
        assert nondominated_sort(objs) == peel_fronts_bruteforce(objs)


def test_sort_assigns_every_individual_once():
    rng = np.random.default_rng(31)
    objs = rng.uniform(size=(40, 3))
    fronts = nondominated_sort(objs)
    flat = [i for front in fronts for i in front]
    assert sorted(flat) == list(range(40))


# --- crowding -------------------------------------------------------------

def test_crowding_small_fronts_all_infinite():
    assert np.all(np.isinf(crowding_distance([0], [(1.0, 2.0)])))
    assert np.all(np.isinf(crowding_distance([0, 1],
                                             [(1.0, 2.0), (2.0, 1.0)])))


def test_crowding_single_objective_hand_value():
    d = crowding_distance([0, 1, 2], [(1.0,), (2.0,), (4.0,)])
    assert np.isinf(d[0]) and np.isinf(d[2])
    assert d[1] == pytest.approx((4.0 - 1.0) / (4.0 - 1.0))


def test_crowding_two_objective_hand_value():
    d = crowding_distance([0, 1, 2], [(1.0, 4.0), (2.0, 2.0), (4.0, 1.0)])
    assert d[1] == pytest.approx((4 - 1) / 3 + (4 - 1) / 3)


def test_crowding_flat_objective_contributes_zero():
    objs = [(1.0, 7.0), (2.0, 7.0), (4.0, 7.0)]
    d = crowding_distance([0, 1, 2], objs)
    assert d[1] == pytest.approx(1.0)  # only the first objective counts


def test_crowding_on_subset_of_population():
    objs = [(9.0, 9.0), (1.0, 4.0), (2.0, 2.0), (4.0, 1.0), (8.0, 8.0)]
    d = crowding_distance([1, 2, 3], objs)
    assert d[1] == pytest.approx(2.0)


# --- crowded comparison ---------------------------------------------------

def _ind(rank, crowding):
    return Individual(genes=np.zeros(1), objectives=np.zeros(2), rank=rank,
                      crowding=crowding)


def test_lower_rank_wins_regardless_of_crowding():
    rng = np.random.default_rng(0)
    a, b = _ind(1, 0.1), _ind(2, np.inf)
    assert crowded_compare(a, b, rng) is a
    assert crowded_compare(b, a, rng) is a


def test_equal_rank_larger_crowding_wins():
    rng = np.random.default_rng(0)
    a, b = _ind(3, np.inf), _ind(3, 1.0)
    assert crowded_compare(a, b, rng) is a
    assert crowded_compare(b, a, rng) is a


def test_full_tie_breaks_uniformly():
    rng = np.random.default_rng(42)
    a, b = _ind(1, 0.5), _ind(1, 0.5)
    wins_a = sum(crowded_compare(a, b, rng) is a for _ in range(10000))
    assert 0.45 <= wins_a / 10000 <= 0.55


# --- variation operators --------------------------------------------------

def test_recombination_disabled_copies_parents():
    rng = np.random.default_rng(1)
    cfg = OperatorConfig(crossover_probability=0.0)
    p1, p2 = np.array([1.0, 2.0]), np.array([3.0, 4.0])
    c1, c2 = recombine_real(p1, p2, np.zeros(2), np.full(2, 10.0), cfg, rng)
    np.testing.assert_array_equal(c1, p1)
    np.testing.assert_array_equal(c2, p2)
    c1[0] = 99.0
    assert p1[0] == 1.0  # children are copies, not views


def test_recombination_identical_parents_fixed_point():
    rng = np.random.default_rng(2)
    cfg = OperatorConfig(crossover_probability=1.0)
    p = np.array([5.0, 6.0, 7.0])
    for _ in range(50):
        c1, c2 = recombine_real(p, p, np.zeros(3), np.full(3, 10.0), cfg, rng)
        np.testing.assert_allclose(c1, p)
        np.testing.assert_allclose(c2, p)


def test_recombination_blend_range():
    rng = np.random.default_rng(3)
    cfg = OperatorConfig(crossover_probability=1.0, spread=0.25)
    p1 = np.array([10.0, 40.0])
    p2 = np.array([20.0, 20.0])
    lo = np.full(2, -1e6)
    hi = np.full(2, 1e6)  # wide bounds: observe the raw blend range
    for _ in range(10000):
        for c in recombine_real(p1, p2, lo, hi, cfg, rng):
            for j in range(2):
                lo_j = min(p1[j], p2[j]) - 0.25 * abs(p2[j] - p1[j])
                hi_j = max(p1[j], p2[j]) + 0.25 * abs(p2[j] - p1[j])
                assert lo_j - 1e-9 <= c[j] <= hi_j + 1e-9


def test_mutation_disabled_is_identity():
    rng = np.random.default_rng(4)
    cfg = OperatorConfig(mutation_probability=0.0)
    g = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(
        mutate_real(g, np.zeros(3), np.full(3, 10.0), cfg, rng), g)


def test_mutation_step_distribution():
    rng = np.random.default_rng(5)
    cfg = OperatorConfig(mutation_probability=1.0, range_fraction=0.1,
                         precision=16.0)
    lo, hi = np.zeros(1), np.full(1, 100.0)
    g = np.full(1, 50.0)
    deltas = np.array([abs(mutate_real(g, lo, hi, cfg, rng)[0] - 50.0)
                       for _ in range(10000)])
    assert deltas.max() <= 10.0 + 1e-12      # r * range bounds the step
    assert np.median(deltas) < 1.0           # small steps dominate
    assert deltas.max() > 1.0                # but large ones do occur


def test_mutation_respects_bounds():
    rng = np.random.default_rng(6)
    cfg = OperatorConfig(mutation_probability=1.0)
    lo, hi = np.zeros(3), np.full(3, 1.0)
    g = np.array([0.0, 0.5, 1.0])
    for _ in range(1000):
        out = mutate_real(g, lo, hi, cfg, rng)
        assert np.all(out >= lo) and np.all(out <= hi)


def test_sbx_family_operators():
    rng = np.random.default_rng(7)
    cfg = OperatorConfig(family="sbx", crossover_probability=1.0,
                         mutation_probability=1.0)
    p1 = np.array([2.0, 8.0])
    p2 = np.array([6.0, 4.0])
    lo, hi = np.zeros(2), np.full(2, 10.0)
    for _ in range(500):
        c1, c2 = recombine_sbx(p1, p2, lo, hi, cfg, rng)
        m = mutate_polynomial(c1, lo, hi, cfg, rng)
        for v in (c1, c2, m):
            assert np.all(v >= lo) and np.all(v <= hi)
    # children are centred on the parents pairwise
    cfg0 = OperatorConfig(family="sbx", crossover_probability=0.0)
    c1, c2 = recombine_sbx(p1, p2, lo, hi, cfg0, rng)
    np.testing.assert_array_equal(c1, p1)
    np.testing.assert_array_equal(c2, p2)


def test_operator_config_validation():
    with pytest.raises(ValueError):
        OperatorConfig(crossover_probability=1.5)
    with pytest.raises(ValueError):
        OperatorConfig(mutation_probability=-0.1)
    with pytest.raises(ValueError):
        OperatorConfig(family="binary")
    with pytest.raises(ValueError):
        OperatorConfig(spread=0.0)


# --- the evolutionary loop ------------------------------------------------

def two_objective_convex(genes):
    return np.array([genes[0], 1.0 + np.sum(genes[1:] ** 2) - genes[0]])


CONVEX_LOWER = np.array([0.0, -1.0, -1.0, -1.0, -1.0, -1.0])
CONVEX_UPPER = np.ones(6)


@pytest.fixture(scope="module")
def convex_result():
    return evolve(two_objective_convex, 6, 2, CONVEX_LOWER, CONVEX_UPPER,
                  population_size=40, generations=50, seed=3)


def test_evolve_validates_arguments():
    with pytest.raises(ValueError, match="even"):
        evolve(two_objective_convex, 6, 2, CONVEX_LOWER, CONVEX_UPPER, 5, 3)
    with pytest.raises(ValueError, match="generations"):
        evolve(two_objective_convex, 6, 2, CONVEX_LOWER, CONVEX_UPPER, 4, 0)
    with pytest.raises(ValueError, match="bound"):
        evolve(two_objective_convex, 6, 2, np.ones(6), np.ones(6), 4, 1)


def test_population_size_constant(convex_result):
    for snap in convex_result.snapshots:
        assert len(snap) == 40


def test_all_genes_within_bounds(convex_result):
    for snap in convex_result.snapshots:
        for ind in snap:
            assert np.all(ind.genes >= CONVEX_LOWER - 1e-12)
            assert np.all(ind.genes <= CONVEX_UPPER + 1e-12)


def test_front_fraction_grows_to_full(convex_result):
    fracs = [np.mean([ind.rank == 1 for ind in snap])
             for snap in convex_result.snapshots]
    assert all(b >= a - 1e-12 for a, b in zip(fracs, fracs[1:]))
    assert fracs[-1] == 1.0


def test_no_front_regression(convex_result):
    # a later front-1 member is never dominated by an earlier front-1 member
    for prev, cur in zip(convex_result.snapshots, convex_result.snapshots[1:]):
        prev_front = [i.objectives for i in prev if i.rank == 1]
        for ind in cur:
            if ind.rank == 1:
                assert not any(dominates(p, ind.objectives)
                               for p in prev_front)


def test_best_per_objective_nonincreasing(convex_result):
    best = np.array([[min(i.objectives[m] for i in snap) for m in range(2)]
                     for snap in convex_result.snapshots])
    assert np.all(np.diff(best, axis=0) <= 1e-12)


def test_single_generation_is_elitist_merge():
    res = evolve(two_objective_convex, 6, 2, CONVEX_LOWER, CONVEX_UPPER,
                 population_size=10, generations=1, seed=9)
    initial = {tuple(i.genes) for i in res.snapshots[0]}
    final = {tuple(i.genes) for i in res.population}
    # survivors either come from the initial population or are offspring
    # evaluated this generation; there were exactly 10 offspring
    new = final - initial
    assert len(new) <= 10
    assert len(res.population) == 10


def test_evaluator_failure_takes_sentinel():
    calls = {"n": 0}

    def flaky(genes):
        calls["n"] += 1
        if genes[0] > 0.5:
            raise RuntimeError("boom")
        return np.array([genes[0], -genes[0]])

    res = evolve(flaky, 1, 2, [0.0], [1.0], population_size=8, generations=2,
                 seed=10)
    objs = np.array([ind.objectives for snap in res.snapshots
                     for ind in snap])
    assert np.all(np.isfinite(objs))
    assert (objs == FAILURE_OBJECTIVES).any()


def test_parallel_evaluation_merges_in_order():
    from concurrent.futures import ThreadPoolExecutor

    serial = evolve(two_objective_convex, 6, 2, CONVEX_LOWER, CONVEX_UPPER,
                    12, 5, seed=14)
    with ThreadPoolExecutor(max_workers=4) as pool:
        threaded = evolve(two_objective_convex, 6, 2, CONVEX_LOWER,
                          CONVEX_UPPER, 12, 5, seed=14, map_fn=pool.map)
    for sa, sb in zip(serial.snapshots, threaded.snapshots):
        for ia, ib in zip(sa, sb):
            np.testing.assert_array_equal(ia.genes, ib.genes)
            np.testing.assert_array_equal(ia.objectives, ib.objectives)


def test_same_seed_bit_identical_archives():
    a = evolve(two_objective_convex, 6, 2, CONVEX_LOWER, CONVEX_UPPER, 12, 6,
               seed=11)
    b = evolve(two_objective_convex, 6, 2, CONVEX_LOWER, CONVEX_UPPER, 12, 6,
               seed=11)
    for sa, sb in zip(a.snapshots, b.snapshots):
        for ia, ib in zip(sa, sb):
            np.testing.assert_array_equal(ia.genes, ib.genes)
            np.testing.assert_array_equal(ia.objectives, ib.objectives)
            assert ia.rank == ib.rank and ia.crowding == ib.crowding
    c = evolve(two_objective_convex, 6, 2, CONVEX_LOWER, CONVEX_UPPER, 12, 6,
               seed=12)
    assert any(not np.array_equal(ia.genes, ic.genes)
               for ia, ic in zip(a.population, c.population))


def test_archive_csv_round_trip(tmp_path):
    res = evolve(two_objective_convex, 6, 2, CONVEX_LOWER, CONVEX_UPPER, 6, 3,
                 seed=13)
    archive = tmp_path / "archive.csv"
    front = tmp_path / "front.csv"
    write_archive_csv(res, archive)
    write_front_csv(res, front)

    lines = archive.read_text().splitlines()
    header = lines[0].split(",")
    assert header[:2] == ["generation", "individual"]
    assert header[-2:] == ["rank", "crowding"]
    assert len(lines) - 1 == 3 * 6  # one block of survivors per generation
    assert any(row.rsplit(",", 1)[1] == "inf" for row in lines[1:])

    rows = [row.split(",") for row in lines[1:]]
    gen2 = [r for r in rows if r[0] == "2"]
    snap = res.snapshots[2]
    for r, ind in zip(gen2, snap):
        np.testing.assert_allclose([float(v) for v in r[2:8]], ind.genes,
                                   rtol=1e-11)
        np.testing.assert_allclose([float(v) for v in r[8:10]],
                                   ind.objectives, rtol=1e-11)
        assert int(r[10]) == ind.rank

    front_rows = front.read_text().splitlines()[1:]
    assert len(front_rows) == sum(1 for i in res.population if i.rank == 1)
    assert all(r.split(",")[10] == "1" for r in front_rows)
