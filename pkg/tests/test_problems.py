import csv

import numpy as np
import pytest

from ela_explain.errors import DimensionMismatchError, InvalidArgumentError
from ela_explain.problems import (FUNCTION_NAMES, ProblemEvaluator, evaluate, make_problem, precision, suite,
                                  write_suite_manifest)


def test_sphere_at_optimum_has_zero_precision():
    ev = make_problem(1, 1, 5)
    assert precision(ev, evaluate(ev, ev.x_opt)) == 0.0


def test_sphere_unit_offset_gives_precision_one():
    ev = make_problem(1, 1, 5)
    x = ev.x_opt.copy()
    x[0] += 1.0
    assert precision(ev, evaluate(ev, x)) == pytest.approx(1.0, abs=1e-12)


def test_full_suite_has_1200_distinct_evaluators():
    insts = suite(range(1, 25), range(1, 51), 5)
    assert len(set(insts)) == 1200
    probe = np.random.default_rng(0).uniform(-5, 5, 5)
    # distinct (fid, iid) pairs give distinct objectives
    vals = {(i.fid, i.iid): make_problem(i.fid, i.iid, 5).evaluate(probe) for i in insts[::7]}
    assert len(set(vals.values())) == len(vals)


@pytest.mark.parametrize("args,field", [((0, 1, 5), "fid"), ((25, 1, 5), "fid"), ((1, 0, 5), "iid"),
                                        ((1, 1, 1), "dim")])
def test_out_of_range_arguments_name_the_field(args, field):
    with pytest.raises(InvalidArgumentError, match=field):
        make_problem(*args)


def test_zero_shift_sphere_returns_offset():
    ev = ProblemEvaluator.from_function(lambda x: float(np.sum(x**2)) + 7.25, 3, optimum_value=7.25)
    assert ev.evaluate(np.zeros(3)) == 7.25


def test_evaluate_is_deterministic_and_counts():
    ev = make_problem(7, 3, 5)
    x = np.full(5, 0.3)
    assert evaluate(ev, x) == evaluate(ev, x)
    ev.evaluations = 0
    for _ in range(250):
        ev.evaluate(x)
    assert ev.evaluations == 250
    ev.evaluate_batch(np.zeros((10, 5)))
    assert ev.evaluations == 260


def test_wrong_length_raises():
    with pytest.raises(DimensionMismatchError):
        make_problem(1, 1, 5).evaluate(np.zeros(4))


def test_precision_examples():
    ev = make_problem(2, 1, 5)
    assert precision(ev, ev.optimum_value) == 0.0
    assert precision(ev, ev.optimum_value + 99) == pytest.approx(99.0)


def test_random_search_best_matches_log():
    ev = make_problem(1, 4, 5)
    X = np.random.default_rng(3).uniform(-5, 5, (100, 5))
    log = [ev.evaluate(x) for x in X]
    best = min(precision(ev, f) for f in log)
    assert best == pytest.approx(float(np.min(ev.precision(ev.evaluate_batch(X)))), abs=0)


def test_determinism_bitwise():
    X = np.random.default_rng(1).uniform(-5, 5, (1000, 5))
    for fid in (1, 10, 16, 21, 24):
        a, b = make_problem(fid, 2, 5), make_problem(fid, 2, 5)
        assert np.array_equal(a.evaluate_batch(X), b.evaluate_batch(X))


@pytest.mark.parametrize("fid", sorted(FUNCTION_NAMES))
def test_optimality_and_instance_variation(fid):
    rng = np.random.default_rng(fid)
    X = rng.uniform(-5, 5, (10_000, 5))
    for iid in (1, 2, 17, 50):
        ev = make_problem(fid, iid, 5)
        assert np.min(ev.precision(ev.evaluate_batch(X))) >= 0.0
        assert ev.precision(ev.evaluate(ev.x_opt)) == 0.0
    x = X[:1]
    assert make_problem(fid, 1, 5).evaluate_batch(x)[0] != make_problem(fid, 2, 5).evaluate_batch(x)[0]


def test_suite_manifest(tmp_path):
    p = tmp_path / "suite.csv"
    write_suite_manifest(p, suite([1, 2], [1, 2], 2))
    rows = list(csv.DictReader(open(p)))
    assert [r["fid"] for r in rows] == ["1", "1", "2", "2"]
    assert float(rows[0]["optimum_value"]) == make_problem(1, 1, 2).optimum_value
