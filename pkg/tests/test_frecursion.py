from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matchbound.errors import ConfigError, DomainError
from matchbound.frecursion import (Branch, FParams, branch_expressions, certify_claims, f1,
                                   f_grid, f_sequence, find_negative_n, grids_csv,
                                   refinement_estimate)
from matchbound.oracle import f2_exact


@pytest.mark.parametrize("eps, gamma, step", [(0.3, 0.6, 1e-3), (0.5, 1.2, 1e-3),
                                              (0.5, 0.6, 0.3), (0.5, 0.0, 1e-3),
                                              (0.25, 0.6, 0.5)])
def test_bad_params(eps, gamma, step):
    with pytest.raises(ConfigError):
        FParams(eps, gamma, step)


def test_params_helpers(fp_half):
    assert fp_half.inv_eps == 2
    assert fp_half.eps_fraction == Fraction(1, 2)
    assert len(fp_half.x) == 1001


def test_f1_affine_and_domain():
    assert f1(0.0, 0.6) == pytest.approx(0.4)
    assert f1(1.0, 0.6) == pytest.approx(-0.1)
    with pytest.raises(DomainError):
        f1(1.5, 0.6)


def test_f2_against_rational_oracle(fp_half):
    g2 = f_grid(fp_half, 2)
    for x in (0.0, 0.25, 0.5, 0.75, 1.0):
        assert g2.at(x) == pytest.approx(float(f2_exact(0.5, 0.6, x)), abs=2e-3)
    assert g2.argmax_a[0] == pytest.approx(0.933, abs=1e-9)
    assert g2.branch[0] == Branch.CONSERVATIVE


def test_known_values(fp_half):
    g2 = f_grid(fp_half, 2)
    assert g2.at(0.0) == pytest.approx(2 / 15, abs=2e-3)
    assert g2.at(0.5) == pytest.approx(0.05, abs=2e-3)
    assert g2.at(1.0) == pytest.approx(-0.1, abs=1e-12)
    assert f_grid(FParams(0.5, 0.9), 2).at(0.0) == pytest.approx(-13 / 60, abs=2e-3)


def test_branch_expressions_scalar(fp_half):
    first = f_grid(fp_half, 1)
    agg, con = branch_expressions(first, 0.0, 0.9, 0.5, 0.6)
    assert agg == pytest.approx(0.6 - 0.45)
    assert con == pytest.approx(-0.1 + 0.25 * 0.9)


def test_find_negative_n():
    assert find_negative_n(FParams(0.5, 0.9), 10) == (2, pytest.approx(-0.21675))
    assert find_negative_n(FParams(0.5, 0.5), 40) is None
    n, v = find_negative_n(FParams(0.1, 0.6), 40)
    assert n == 12 and v < 0
    with pytest.raises(DomainError):
        find_negative_n(FParams(0.5, 0.5), 0)


def test_refinement_gap_is_small(fp_half):
    coarse, fine = refinement_estimate(fp_half, 3)
    assert abs(coarse - fine) <= 2e-3


def test_claims_on_small_grid():
    rep = certify_claims(f_sequence(FParams(0.25, 0.6, 1e-2), 4))
    assert rep.passed
    assert rep.lipschitz <= 1e-12 and rep.monotone <= 1e-12
    with pytest.raises(DomainError):
        certify_claims([])
    with pytest.raises(DomainError):
        certify_claims([f_grid(FParams(0.5, 0.6, 1e-2), 1), f_grid(FParams(0.5, 0.6, 1e-2), 3)])


def test_csv_layout(fp_half):
    text = grids_csv(f_sequence(fp_half, 2))
    lines = text.splitlines()
    assert lines[0] == "n,x,F,argmax_a,branch"
    assert len(lines) == 1 + 2 * 1001
    assert lines[1] == "1,0,0.4,,"
    row = lines[1002].split(",")
    assert row[0] == "2" and row[4] == "conservative"
    assert grids_csv(f_sequence(fp_half, 2)) == text


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([0.5, 0.25, 0.2]), st.floats(0.5, 0.95), st.integers(1, 4))
def test_grid_shape_properties(eps, gamma, n):
    grids = f_sequence(FParams(eps, gamma, 1e-2), n)
    g = grids[-1]
    # F_n never exceeds F_1 and stays 1/2-Lipschitz on the grid
    assert np.all(g.values <= grids[0].values + 1e-12)
    assert np.max(np.abs(np.diff(g.values))) <= 0.5 * 1e-2 + 1e-12
    assert g.values[-1] <= 0.5 - gamma + 1e-12
