from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from hawkes_impact.params import (
    KernelFamily,
    MacroParams,
    MicroParams,
    Schedule,
    kernel_phi,
    kernel_tail,
    xi_T,
    zeta_measure_cdf,
    zeta_measure_limit,
    zeta_T,
)


def test_kernel_values():
    k = KernelFamily(0.5)
    assert kernel_phi(k, 0.0) == 0.5
    assert kernel_phi(k, 3.0) == pytest.approx(0.0625)
    assert kernel_tail(k, 0.0) == 1.0
    assert kernel_tail(k, 99.0) == pytest.approx(0.1)


@given(st.floats(0.05, 0.95))
def test_kernel_unit_mass_and_tail(alpha):
    k = KernelFamily(alpha)
    mass, _ = quad(lambda s: kernel_phi(k, s), 0, np.inf, limit=200)
    assert mass == pytest.approx(1.0, abs=1e-6)
    t = 1e8
    assert t**alpha * kernel_tail(k, t) == pytest.approx(k.K, rel=1e-6)


def test_kernel_rejects_negative_time():
    with pytest.raises(ValueError):
        kernel_phi(KernelFamily(0.5), -1.0)


@pytest.mark.parametrize(
    "kwargs",
    [dict(alpha=0.0), dict(alpha=1.0), dict(alpha=0.5, lam=0), dict(alpha=0.5, kappa=0),
     dict(alpha=0.5, gamma=-1), dict(alpha=0.5, mu_star=-1)],
)
def test_macro_validation(kwargs):
    with pytest.raises(ValueError):
        MacroParams(**kwargs)


def test_micro_mapping(base):
    m = MicroParams.from_macro(base, 1e4)
    assert 1 - m.a_T == pytest.approx(0.01)
    assert m.zeta0 == pytest.approx(99.0)
    assert zeta_T(m, 0.0) == pytest.approx(m.zeta0)
    assert m.mu_T == pytest.approx(1e4**-0.5)
    assert m.beta_T == pytest.approx(1.0)
    assert np.all(np.diff(zeta_T(m, np.linspace(0, 100, 50))) < 0)
    assert np.all(xi_T(m, np.linspace(0, 1e5, 20)) >= 1.0)


def test_micro_rejects_small_horizon(base):
    assert MicroParams.t_min(0.5, 1.0) == 1.0
    with pytest.raises(ValueError):
        MicroParams.from_macro(base, 1.0)
    with pytest.raises(ValueError):
        MicroParams.from_macro(MacroParams(0.5, mu_star=0.0), 100.0)


def test_metaorder_rate_vanishes_after_end(base):
    m = MicroParams.from_macro(base, 100.0)
    assert m.metaorder_rate(50.0) == pytest.approx(0.3 * m.beta_T)
    assert m.metaorder_rate(150.0) == 0.0


def test_zeta_measure_cdf_matches_quadrature(base):
    m = MicroParams.from_macro(base, 1e3)
    val, _ = quad(lambda s: zeta_T(m, s * m.T), 0, 0.7, limit=200)
    assert zeta_measure_cdf(m, 0.7) == pytest.approx(val, rel=1e-8)
    assert zeta_measure_cdf(m, 0.0) == 0.0
    assert np.all(np.diff(zeta_measure_cdf(m, np.linspace(0, 1, 11))) > 0)


def test_zeta_measure_approaches_limit(base):
    gaps = [abs(zeta_measure_cdf(MicroParams.from_macro(base, T), 1.0) - 2.0) for T in (1e3, 1e4, 1e5)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert zeta_measure_limit(0.5, 1.0, 1.0) == pytest.approx(2.0)


def test_schedule_constant():
    f = Schedule.constant()
    assert f(0.5) == 1.0 and f(1.5) == 0.0 and f(-0.1) == 0.0
    assert f.cumulative(2.0) == pytest.approx(1.0)
    g = Schedule.constant(extended=True)
    assert g(3.0) == 1.0 and g.cumulative(3.0) == pytest.approx(3.0)


def test_schedule_renormalises_with_warning():
    with pytest.warns(UserWarning):
        f = Schedule([0, 0.5, 1], [1.0, 3.0])
    assert f.cumulative(1.0) == pytest.approx(1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        Schedule([0, 0.5, 1], [0.5, 1.5])


@given(st.lists(st.floats(0.1, 5.0), min_size=1, max_size=5))
def test_schedule_cell_averages_are_exact(levels):
    breaks = np.linspace(0, 1, len(levels) + 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        f = Schedule(breaks, levels)
    times = np.linspace(0, 1, 8)
    avg = f.cell_averages(times)
    for j in range(7):
        val, _ = quad(f, times[j], times[j + 1], points=list(breaks), limit=100)
        assert avg[j] == pytest.approx(val / (times[j + 1] - times[j]), rel=1e-9, abs=1e-12)


def test_schedule_table(tmp_path):
    path = tmp_path / "f.txt"
    path.write_text("# start level\n0 2\n0.5 0\n")
    f = Schedule.from_table(path)
    assert f(0.25) == 2.0 and f(0.75) == 0.0
    starts, ends, levels = f.pieces(1.0)
    assert list(levels) == [2.0, 0.0]


@pytest.mark.parametrize("bad", [([0, 1], [-1.0]), ([0, 0.5], [1.0]), ([0, 1], [0.0])])
def test_schedule_validation(bad):
    with pytest.raises(ValueError):
        Schedule(*bad)
