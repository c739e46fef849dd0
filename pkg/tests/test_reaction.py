from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hawkes_impact.params import MacroParams, MicroParams
from hawkes_impact.reaction import ReactionFn, upsilon


def test_evaluation_examples():
    sq = ReactionFn.power(1, 2)
    assert sq(-3.0) == 0.0
    assert sq(2.0) == 4.0
    assert ReactionFn.linear(5).__call__(0.2) == pytest.approx(1.0)
    f = sq.scalar()
    assert f(-1.0) == 0.0 and f(3.0) == 9.0


finite = st.floats(-50, 50, allow_nan=False)


@given(finite, finite, st.floats(0.1, 5), st.floats(1, 4))
def test_monotone(x1, x2, c, beta):
    phi = ReactionFn.power(c, beta)
    lo, hi = sorted((x1, x2))
    assert phi(lo) <= phi(hi)


@pytest.mark.parametrize("phi", [ReactionFn.power(1.5, 2.5), ReactionFn.linear(2.0), ReactionFn.power(1, 1)])
def test_inverse_roundtrip(phi):
    x = np.linspace(0, 10, 101)
    assert np.allclose(phi.inverse(phi(x)), x, atol=1e-12, rtol=1e-12)
    assert phi.inverse(0.0) == 0.0


def test_inverse_power_formula():
    assert ReactionFn.power(1, 2).inverse(4.0) == pytest.approx(2.0)
    assert ReactionFn.power(3, 2).inverse(0.7) == pytest.approx((0.7 / 3) ** 0.5)


def test_table_kind(tmp_path):
    path = tmp_path / "phi.txt"
    path.write_text("0 0\n1 2\n2 3\n")
    phi = ReactionFn.parse(f"table:{path}")
    assert phi(0.5) == pytest.approx(1.0)
    assert phi(10.0) == pytest.approx(3.0)
    assert phi.inverse(2.5) == pytest.approx(1.5)
    with pytest.raises(ValueError):
        phi.inverse(3.5)
    assert not phi.is_convex
    assert phi.derivative(0.5) == pytest.approx(2.0)


@pytest.mark.parametrize(
    "text", ["power:c=0,beta=2", "power:c=1,beta=0.5", "linear:slope=-1", "cubic:c=1", "power:gamma=2", "power:c"]
)
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        ReactionFn.parse(text)


def test_parse_and_describe_roundtrip():
    for text in ("power:c=1.5,beta=3", "linear:slope=0.25"):
        phi = ReactionFn.parse(text)
        assert ReactionFn.parse(phi.describe()) == phi


@given(st.floats(-1e3, 1e3))
def test_micro_scaling(x):
    micro = MicroParams.from_macro(MacroParams(0.5), 500.0)
    phi = ReactionFn.power(2.0, 2.0)
    b = micro.beta_T
    assert phi.micro(micro, x) / b == pytest.approx(phi(x / (micro.T * b)), rel=1e-12, abs=1e-300)
    assert phi.micro(micro, x) == pytest.approx(
        2.0 * micro.T**-2 / b * max(x, 0.0) ** 2, rel=1e-12, abs=1e-300
    )


def test_lipschitz_and_taylor():
    phi = ReactionFn.power(2, 3)
    assert phi.lipschitz(2.0) == pytest.approx(24.0)
    assert list(phi.taylor_coefficients(4)) == [0, 0, 2, 0]
    assert list(ReactionFn.linear(3).taylor_coefficients(2)) == [3, 0]
    with pytest.raises(ValueError):
        ReactionFn.power(1, 2.5).taylor_coefficients(3)


def test_upsilon():
    assert upsilon(0.5, 2.0) == pytest.approx(-1.0)
    assert upsilon(0.5, 3.0) == pytest.approx(-4.0 / 3.0)
