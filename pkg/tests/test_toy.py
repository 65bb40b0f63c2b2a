from fractions import Fraction

import pytest

from matchbound.toy import FirstEdge, play, sweep, toy_ratio
from matchbound.errors import DomainError


@pytest.mark.parametrize("z, expected", [(0.0, (0.0, 1.0)), (1.0, (1.0, 0.5)),
                                         (0.5, (0.5, 0.75))])
def test_ratio_pairs(z, expected):
    assert toy_ratio(z) == pytest.approx(expected)


def test_long_instance_optimum_is_two():
    alg_total, opt = play(FirstEdge(0.4), True)
    assert opt == 2 and alg_total == pytest.approx(1.6)


def test_sweep_finds_two_thirds():
    s = sweep(1e-3)
    assert s.best_z == pytest.approx(0.667)
    assert s.best_ratio == pytest.approx(0.6665)
    assert s.crossing_z == Fraction(2, 3)
    assert s.crossing_ratio == Fraction(2, 3)
    assert max(s.ratio) <= 2 / 3


def test_bad_level():
    with pytest.raises(DomainError):
        FirstEdge(1.5)
