import numpy as np

from gapa.rng import CROSSOVER_MASK, INIT, MUTATION_INDEX, ROLES, RngPolicy


def test_same_key_same_draws():
    a = RngPolicy(7).stream(3, CROSSOVER_MASK, 11).random(5)
    b = RngPolicy(7).stream(3, CROSSOVER_MASK, 11).random(5)
    assert np.array_equal(a, b)


def test_keys_separate_streams():
    base = RngPolicy(7).stream(3, CROSSOVER_MASK, 11).random(5)
    for other in (RngPolicy(8).stream(3, CROSSOVER_MASK, 11), RngPolicy(7).stream(4, CROSSOVER_MASK, 11),
                  RngPolicy(7).stream(3, INIT, 11), RngPolicy(7).stream(3, CROSSOVER_MASK, 12)):
        assert not np.array_equal(base, other.random(5))


def test_row_subsets_match_full_draw():
    rng = RngPolicy(1)
    full = rng.uniform(2, CROSSOVER_MASK, range(10), 4)
    assert np.array_equal(rng.uniform(2, CROSSOVER_MASK, range(5, 10), 4), full[5:])
    ints = rng.integers(2, MUTATION_INDEX, range(10), 4, 9)
    assert np.array_equal(rng.integers(2, MUTATION_INDEX, [3, 7], 4, 9), ints[[3, 7]])
    assert ints.min() >= 0 and ints.max() < 9


def test_role_names():
    rng = RngPolicy(0)
    assert np.array_equal(rng.stream(1, "init", 0).random(3), rng.stream(1, ROLES["init"], 0).random(3))
    assert len(set(ROLES.values())) == len(ROLES)


def test_large_seed_accepted():
    assert RngPolicy(2**64 - 1).stream(1, INIT, 0).random() >= 0


def test_mask_fractions_standard_normal_across_seeds():
    # z-scores of the below-0.5 fraction over independent seeds should look N(0, 1)
    from scipy import stats

    zs = []
    for seed in range(60):
        u = RngPolicy(seed).uniform(1, CROSSOVER_MASK, range(200), 100)
        zs.append((np.mean(u < 0.5) - 0.5) / np.sqrt(0.25 / u.size))
    assert stats.kstest(zs, "norm").pvalue > 0.01
