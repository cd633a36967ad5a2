import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ela_explain.errors import InvalidArgumentError
from ela_explain.problems import ProblemEvaluator, make_problem
from ela_explain.sampling import (build_design, improved_lhs, latin_hypercube, min_pairwise_distance,
                                  read_design_csv, write_design_csv)
from oracles import strata_ok


def test_one_dimensional_strata():
    X = improved_lhs(1, 4, (0, 1), seed=3)
    cells = sorted(np.floor(X[:, 0] * 4).astype(int).tolist())
    assert cells == [0, 1, 2, 3]


def test_full_size_design_is_stratified():
    X = improved_lhs(5, 250, (-5, 5), seed=11)
    assert X.shape == (250, 5)
    assert strata_ok(X, -5, 5)


def test_maximin_not_worse_than_first_candidate():
    for seed in range(10):
        plain = latin_hypercube(2, 16, (0, 1), rng=np.random.default_rng(seed))
        better = improved_lhs(2, 16, (0, 1), seed=seed, n_candidates=20)
        assert min_pairwise_distance(better) >= min_pairwise_distance(plain)


def test_n_zero_rejected():
    with pytest.raises(InvalidArgumentError):
        improved_lhs(2, 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 60), st.integers(0, 10_000))
def test_stratification_property(d, n, seed):
    X = improved_lhs(d, n, (-5, 5), seed=seed, n_candidates=3)
    assert strata_ok(X, -5, 5)
    assert X.min() >= -5 and X.max() <= 5


def test_build_design_counts_and_seeds():
    ev = make_problem(3, 1, 5)
    samples = build_design(ev, 250, 10, base_seed=100)
    assert len(samples) == 10 and ev.evaluations == 2500
    assert [s.seed for s in samples] == list(range(100, 110))
    for s in samples:
        assert np.allclose(s.y, make_problem(3, 1, 5).evaluate_batch(s.X))


def test_constant_function_design():
    ev = ProblemEvaluator.from_function(lambda x: 4.0, 2)
    (s,) = build_design(ev, 20, 1, 0)
    assert np.all(s.y == 4.0)


def test_design_determinism_and_seed_isolation():
    ev = make_problem(1, 1, 2)
    a = build_design(ev, 30, 5, 7)
    b = build_design(ev, 30, 10, 7)
    assert np.array_equal(a[3].X, b[3].X)
    assert np.array_equal(build_design(ev, 30, 2, 7)[0].X, a[0].X)


def test_design_csv_roundtrip(tmp_path):
    (s,) = build_design(make_problem(2, 1, 3), 12, 1, 0)
    p = tmp_path / "d.csv"
    write_design_csv(p, s)
    assert open(p).readline().strip() == "x1,x2,x3,y"
    r = read_design_csv(p)
    assert np.array_equal(r.X, s.X) and np.array_equal(r.y, s.y)
