import math
import warnings

import numpy as np
import pytest
from scipy import stats

from lpcurse import concentration as conc
from lpcurse.geometry import PBallBody


def test_intersection_edge_cases():
    b = PBallBody(6, 4)
    assert conc.intersection_volume(b, 0.0, 1000, 0).estimate == 0.0
    full = conc.intersection_volume(b, b.radius / math.sqrt(6), 1000, 0)
    assert (full.estimate, full.stderr) == (1.0, 0.0)
    with pytest.raises(ValueError):
        conc.intersection_volume(b, -1.0, 1000, 0)


def test_intersection_closed_form_euclidean():
    # D_2^d is a Euclidean ball of radius R: fraction within rho is (rho/R)^d
    d = 6
    b = PBallBody(d, 2)
    r = 0.8 * b.L
    ref = min(1.0, r * math.sqrt(d) / b.radius) ** d
    est = conc.intersection_volume(b, r, 200_000, 3)
    assert abs(est.estimate - ref) < 4 * est.stderr


def test_intersection_monotone_in_r():
    b = PBallBody(8, 3)
    vals = [conc.intersection_volume(b, r, 50_000, 5).estimate for r in np.linspace(0.05, 0.6, 8)]
    # the same samples are reused, so the counts are nested
    assert all(a <= c for a, c in zip(vals, vals[1:]))


@pytest.mark.parametrize("p", [1.0, 2.0, 5.0, math.inf])
def test_moment_identities(p):
    b = PBallBody(5, p)
    assert conc.moment_integral(b, 0.0, 10, 0).estimate == 1.0
    i1 = conc.moment_integral(b, 1.0, 100_000, 1)
    i2 = conc.moment_integral(b, 2.0, 100_000, 1)
    assert abs(i2.estimate - 5 * b.L ** 2) < 4 * i2.stderr
    # Jensen and the Cauchy-Schwarz bound I_1 <= sqrt(d) L
    assert i2.estimate >= i1.estimate ** 2
    assert i1.estimate <= math.sqrt(5) * b.L + 4 * i1.stderr


def test_psi_norm_gaussian_like_and_symmetric():
    b = PBallBody(6, 2)
    theta = np.ones(6) / math.sqrt(6)
    a = conc.empirical_psi_norm(b, theta, 2.0, 50_000, 7)
    c = conc.empirical_psi_norm(b, -theta, 2.0, 50_000, 7)
    assert a.lam == pytest.approx(c.lam, rel=1e-5)
    # the Orlicz mean at lam is 2 up to the bisection tolerance
    x = conc._reduce(b, conc.UNIFORM_NORMALIZED, 50_000, 7, lambda y: y @ theta)
    y = np.abs(np.concatenate(x))
    assert np.mean(np.exp((y / a.lam) ** 2)) == pytest.approx(2.0, rel=1e-4)
    # a Gaussian has psi_2 constant sqrt(8/3); uniform ball marginals are lighter-tailed
    assert 0.5 < a.constant < math.sqrt(8 / 3)


def test_psi_norm_cube_stable_in_d():
    consts = []
    for d in (4, 16, 64):
        e1 = np.zeros(d)
        e1[0] = 1.0
        consts.append(conc.empirical_psi_norm(PBallBody(d, math.inf), e1, 2.0, 40_000, 2).constant)
    # a coordinate of the cube is U(-1/2, 1/2) whatever the dimension
    assert max(consts) - min(consts) < 0.02


def test_psi_norm_validation():
    b = PBallBody(3, 2)
    with pytest.raises(ValueError):
        conc.empirical_psi_norm(b, np.array([1.0, 1.0, 0.0]), 2.0, 1000, 0)
    with pytest.raises(ValueError):
        conc.empirical_psi_norm(b, np.array([1.0, 0.0, 0.0]), 3.0, 1000, 0)


@pytest.mark.filterwarnings("ignore::lpcurse.concentration.ZeroTailWarning")
def test_thin_shell_report_structure():
    b = PBallBody(16, 2)
    rep = conc.thin_shell_report(b, [0.0, 0.2, 0.5], 20_000, 1)
    assert rep.tail(0.0, conc.UPPER).probability + rep.tail(0.0, conc.LOWER).probability == pytest.approx(1.0)
    lower = [rep.tail(t, conc.LOWER).probability for t in (0.0, 0.2, 0.5)]
    assert lower == sorted(lower, reverse=True)
    assert rep.mean_norm_ratio == pytest.approx(1.0, abs=0.05)
    assert rep.eta == pytest.approx(16 / rep.b_alpha ** 2)
    d = rep.to_dict()
    assert d["body"]["d"] == 16 and len(d["tail_table"]) == 6
    assert len(rep.csv_rows()) == 6


@pytest.mark.filterwarnings("ignore::lpcurse.concentration.ZeroTailWarning")
def test_thin_shell_lower_tail_closed_form():
    # for D_2^d, P(||X|| <= 0.8 sqrt(d)) = (0.8 sqrt(d/(d+2)))^d
    d = 8
    rep = conc.thin_shell_report(PBallBody(d, 2), [0.2], 200_000, 4, b_alpha=1.0)
    row = rep.tail(0.2, conc.LOWER)
    ref = (0.8 * math.sqrt(d / (d + 2))) ** d
    assert abs(row.probability - ref) < 4 * row.stderr


def test_zero_tail_warns():
    with pytest.warns(conc.ZeroTailWarning):
        rep = conc.thin_shell_report(PBallBody(64, 2), [0.9], 10_000, 0, b_alpha=1.0)
    row = rep.tail(0.9, conc.UPPER)
    assert row.below_resolution and row.probability == 0.0 and row.resolution == 1e-4


def test_thin_shell_validation():
    b = PBallBody(4, 2)
    with pytest.raises(ValueError):
        conc.thin_shell_report(b, [0.1], 5000, 0)
    with pytest.raises(ValueError):
        conc.thin_shell_report(b, [-0.1], 20_000, 0)


def test_fit_decay_recovers_parameters():
    ds = np.array([4, 8, 16, 32])
    vals = 3.0 * 0.7 ** ds
    fit = conc.fit_decay(ds, vals, alpha=2.0)
    assert fit["q"] == pytest.approx(0.7) and fit["C"] == pytest.approx(3.0)
    with pytest.raises(ValueError):
        conc.fit_decay([4, 8], [0.0, 1.0])
