"""Scale sequences and their logarithmic weights."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from sphframes.errors import ConfigurationError
from sphframes.scales import make_scales


def test_geometric_sequence():
    s = make_scales("geometric", b0=2.0, q=0.5, J=4)
    assert_allclose(s.scales, [2.0, 1.0, 0.5, 0.25])
    assert_allclose(s.nu, math.log(2.0))
    assert s.closing_ratio == 2.0
    assert s.kind == "geometric"
    assert not s.single_scale
    assert len(s) == 4
    assert s.delta_lo == s.delta_hi == 2.0


def test_explicit_sequence_weights():
    s = make_scales("explicit", scales=[4.0, 2.0, 0.5])
    assert_allclose(s.nu, [math.log(2.0), math.log(4.0), math.log(4.0)])
    assert s.closing_ratio == 4.0
    assert s.delta_lo == 2.0 and s.delta_hi == 4.0


def test_single_scale_needs_closing_ratio():
    with pytest.raises(ConfigurationError):
        make_scales("explicit", scales=[1.0])
    s = make_scales("explicit", scales=[1.0], closing_ratio=2.0)
    assert s.single_scale
    assert_allclose(s.ratios, [2.0])


@pytest.mark.parametrize(
    "kwargs",
    [
        {"b0": -1.0, "q": 0.5, "J": 3},
        {"b0": 1.0, "q": 1.5, "J": 3},
        {"b0": 1.0, "q": 0.5, "J": 0},
        {"b0": None, "q": 0.5, "J": 3},
    ],
)
def test_geometric_rejects(kwargs):
    with pytest.raises(ConfigurationError):
        make_scales("geometric", **kwargs)


def test_explicit_rejects_non_decreasing():
    with pytest.raises(ConfigurationError):
        make_scales("explicit", scales=[1.0, 1.0, 0.5])
    with pytest.raises(ConfigurationError):
        make_scales("explicit", scales=[1.0, -0.5])
    with pytest.raises(ConfigurationError):
        make_scales("explicit", scales=np.zeros((2, 2)))


def test_unknown_kind():
    with pytest.raises(ConfigurationError):
        make_scales("fibonacci", b0=1.0, q=0.5, J=3)
