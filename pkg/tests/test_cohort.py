import numpy as np
import pytest

from matchbound.adversary import AdversaryParams, run_construction
from matchbound.algorithms import FLEET, make_algorithm
from matchbound.cohort import (Block, initial_classes, merge_classes, run_cohort_construction,
                               take_lowest)
from matchbound.errors import InfeasibleDecision
from matchbound.frecursion import FParams

CASES = [(0.5, 0.6, 2, 0.0, "uniform"), (0.25, 0.55, 3, 0.5, "skew"),
         (0.25, 0.9, 3, 0.5, "uniform"), (0.5, 0.6, 4, 0.0, "uniform")]


@pytest.mark.parametrize("eps, gamma, n, x0, init", CASES)
@pytest.mark.parametrize("name", FLEET)
def test_engines_agree(name, eps, gamma, n, x0, init):
    params = AdversaryParams.minimal(n, FParams(eps, gamma), x0)
    # enough runs that every arriving vertex of tz is advanced alone
    alg = make_algorithm(name, init=init, chunks=10**6)
    tr, _ = run_construction(params, alg)
    res = run_cohort_construction(params, make_algorithm(name, init=init, chunks=10**6))
    assert res.v_alg == pytest.approx(tr.v_alg, abs=1e-9)
    assert res.opt_size == tr.opt_size
    assert [s.branch for s in res.steps] == [s.branch for s in tr.steps]
    assert res.v_alg_lazy == pytest.approx(res.v_alg, abs=1e-9)


def test_scale_invariance_of_constant_thresholds():
    fp = FParams(0.25, 0.6)
    small = run_cohort_construction(AdversaryParams.minimal(3, fp), make_algorithm("fixed:0.7"))
    big = run_cohort_construction(AdversaryParams(3, 64 * 10**6, 0.0, fp),
                                  make_algorithm("fixed:0.7"))
    assert big.v_alg / big.params.N == pytest.approx(small.v_alg / small.params.N, abs=1e-9)


def test_chunked_tz_converges():
    fp = FParams(0.25, 0.55)
    params = AdversaryParams.minimal(4, fp, 0.5)
    exact = run_cohort_construction(params, make_algorithm("tz", chunks=10**6)).v_alg
    errs = [abs(run_cohort_construction(params, make_algorithm("tz", chunks=c)).v_alg - exact)
            for c in (1, 4, 16)]
    assert errs[0] > errs[1] > errs[2]


def test_take_lowest_splits_a_class():
    (lo_lv, lo_ct), (hi_lv, hi_ct) = take_lowest(np.array([0.1, 0.5, 0.9]),
                                                  np.array([2, 3, 1]), 4)
    assert list(lo_ct) == [2, 2] and list(lo_lv) == [0.1, 0.5]
    assert list(hi_ct) == [1, 1] and list(hi_lv) == [0.5, 0.9]


def test_merge_and_block():
    lv, ct = merge_classes([0.5, 0.1, 0.5, 0.3], [1, 2, 3, 0])
    assert list(lv) == [0.1, 0.5] and list(ct) == [2, 4]
    b = Block(np.array([0.0, 1.0]), np.array([3, 1]), 0, 2)
    assert b.size == 4 and b.average == pytest.approx(0.25)


def test_initial_classes():
    lv, ct = initial_classes(10**12, 0.5, "skew")
    assert int(ct.sum()) == 10**12
    assert float(np.dot(lv, ct.astype(float))) == pytest.approx(0.5e12)
    lv, ct = initial_classes(8, 0.25, "uniform")
    assert list(lv) == [0.25] and list(ct) == [8]


class Leaky:
    name = "leaky"
    init = "uniform"

    def pour_block(self, levels, counts, n_new):
        return levels + 0.1, np.array([0.0]), np.array([n_new])


def test_conservation_enforced():
    with pytest.raises(InfeasibleDecision):
        run_cohort_construction(AdversaryParams.minimal(2, FParams(0.5, 0.6)), Leaky())

