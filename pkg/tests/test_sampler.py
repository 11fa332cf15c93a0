import os
from fractions import Fraction

import pytest

from qmfinv import sampler
from qmfinv.filters import builtin, construct_thm_1
from qmfinv.gfun import lift
from qmfinv.intervals import Intervals, Points
from qmfinv.sampler import (
    absorption_estimate,
    coupling_report,
    lemma_4_4_check,
    run_paths,
    simulate,
    uniforms,
    var_profile,
    wilson,
)
from qmfinv.symbolic import SymbolSeq

F = Fraction
B13 = Points(["1/3", "2/3"])


def test_uniform_streams_are_per_path():
    a = uniforms(5, 0, 10)
    assert (a == uniforms(5, 0, 10)).all()
    assert not (a == uniforms(5, 1, 10)).all()
    assert (uniforms(5, 0, 20)[:10] == a).all()


def test_simulation_reproducible():
    p = builtin("haar")
    a = simulate(p, F(1, 3), 50, seed=1, path_id=4)
    b = simulate(p, F(1, 3), 50, seed=1, path_id=4)
    assert a.symbols == b.symbols and a.states == b.states
    for t, d in enumerate(a.symbols, 1):
        assert a.states[t] == a.states[t - 1] / 2 + F(d, 2)


def test_constructed_filter_cycles_on_invariant_orbit():
    p = construct_thm_1(B13)
    for seed in range(3):
        path = simulate(p, F(1, 3), 30, seed=seed)
        assert path.states[::2] == [F(1, 3)] * 16
        assert path.states[1::2] == [F(2, 3)] * 15


def test_g_function_simulation():
    g = lift(builtin("cos3"))
    path = simulate(g, SymbolSeq.parse("(10)*", 1), 20, seed=0)
    assert all(s in (SymbolSeq.parse("(10)*", 1), SymbolSeq.parse("(01)*", 1)) for s in path.states)


def test_worker_count_does_not_change_results(monkeypatch):
    p = builtin("haar")
    monkeypatch.setenv("QMFINV_WORKERS", "1")
    one = run_paths(p, F(1, 3), 12, 60, seed=2, with_ref=True)
    monkeypatch.setenv("QMFINV_WORKERS", "3")
    three = run_paths(p, F(1, 3), 12, 60, seed=2, with_ref=True)
    assert one == three


def test_absorption_estimate_nested_horizons():
    est = absorption_estimate(builtin("haar"), F(1, 3), 200, 400, seed=3)
    vals = [est.at(T).estimate for T in (10, 50, 100, 400)]
    assert vals == sorted(vals)
    assert est.ci_low <= est.estimate <= est.ci_high
    with pytest.raises(ValueError):
        absorption_estimate(builtin("haar"), F(1, 3), 10, 10, eps=F(1, 2))


def test_wilson_interval():
    lo, hi = wilson(50, 100)
    assert lo < 0.5 < hi
    assert wilson(100, 100)[1] == pytest.approx(1.0)


def test_coupling_on_invariant_orbit():
    p = construct_thm_1(B13)
    path = simulate(p, F(1, 3), 20, seed=0)
    rep = coupling_report(path, B13)
    assert rep.decouple_times == []


def test_path_bounds_small_depth():
    rep = lemma_4_4_check(B13, F(1, 4), exhaustive_depth=10, n_samples=200, sample_depth=30)
    assert rep.alpha == F(1, 12) and rep.violations == 0


@pytest.mark.parametrize(
    "B",
    [Points(["1/3"]), Points(["0", "1"]), Intervals([["1/3", "2/3", "closed-open"]])],
)
def test_path_bounds_reject_invalid_sets(B):
    with pytest.raises(ValueError):
        lemma_4_4_check(B, F(1, 4), exhaustive_depth=2)


def test_var_profile_of_lifted_haar_decays():
    import math

    prof = var_profile(lift(builtin("haar")), 8, samples=100, seed=0)
    for n, v, _ in prof:
        assert v <= math.pi * 2.0**-n + 1e-12


def test_filter_defect_detected():
    from qmfinv.filters import TransitionFn

    class Bad(TransitionFn):
        def _float(self, x):
            return 1.25

    with pytest.raises(sampler.FilterDefect):
        simulate(Bad(), F(1, 3), 5, seed=0)
