import math

import numpy as np
import pytest

from heckestat.hecke import SatakePoint, hecke_product_expansion
from heckestat.measures import (
    MeasureSpec,
    MonteCarloEstimate,
    PlancherelWeight,
    SchurValues,
    chunk_plan,
    chunk_rng,
    mc_integrate,
    metropolis_sato_tate,
    plancherel_angles,
    plancherel_constant,
    plancherel_weight,
    rejection_bound,
    sample_plancherel,
    sample_sato_tate,
    sato_tate_angles,
    sato_tate_density,
    small_value_bound,
    small_value_measure,
    torus_angles,
)
from heckestat.symfunc import KappaIndex, partition_from_kappa, schur_eval_tableaux

ks_2samp = pytest.importorskip("scipy.stats").ks_2samp


def K(*k):
    return KappaIndex(tuple(k), len(k) + 1)


def unit_product(angles):
    return np.abs(np.prod(np.exp(1j * angles), axis=1) - 1)


class Trace:
    def __call__(self, angles):
        return np.exp(1j * angles).sum(axis=1)


class TraceSquared:
    def __call__(self, angles):
        return np.abs(np.exp(1j * angles).sum(axis=1)) ** 2


class Ones:
    def __call__(self, angles):
        return np.ones(len(angles))


# -- measure specs ------------------------------------------------------------------


def test_measure_spec_validation():
    with pytest.raises(ValueError):
        MeasureSpec("plancherel", 3)
    with pytest.raises(ValueError):
        MeasureSpec("plancherel", 3, p=1)
    with pytest.raises(ValueError):
        MeasureSpec("gaussian", 3)
    with pytest.raises(ValueError):
        MeasureSpec("sato-tate", 1)
    assert MeasureSpec("plancherel", 3, 5).to_dict() == {"kind": "plancherel", "n": 3, "p": 5}


# -- Sato-Tate ---------------------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_sato_tate_invariants(n):
    a = sato_tate_angles(n, 5000, chunk_rng(0, 0, "sample"))
    assert a.shape == (5000, n)
    assert unit_product(a).max() < 1e-12
    assert a.min() >= 0 and a.max() < 2 * math.pi
    pt = sample_sato_tate(n, chunk_rng(0, 1, "sample"))
    assert abs(np.prod(pt.values) - 1) < 1e-12


def test_sato_tate_is_reproducible():
    a = sato_tate_angles(3, 10, chunk_rng(4, 0, "sample"))
    b = sato_tate_angles(3, 10, chunk_rng(4, 0, "sample"))
    assert np.array_equal(a, b)


def test_sato_tate_moments():
    trace = mc_integrate(Trace(), MeasureSpec("sato-tate", 3), 10**6, seed=21)
    assert abs(trace.value) <= 3 * trace.stderr * math.sqrt(2)
    sq = mc_integrate(TraceSquared(), MeasureSpec("sato-tate", 3), 10**6, seed=22)
    assert abs(sq.value - 1) <= 3 * sq.stderr


def test_metropolis_moments_agree():
    # the independent sampler reproduces the same moments
    a = metropolis_sato_tate(3, 100_000, chunk_rng(5, 0, "metropolis"))
    tr = np.exp(1j * a).sum(axis=1)
    assert unit_product(a).max() < 1e-12
    assert abs(tr.mean()) < 0.05
    assert abs(np.mean(np.abs(tr) ** 2) - 1) < 0.05


def test_gl2_semicircle():
    # 2 cos(theta) under Sato-Tate for n=2 follows the semicircle law on [-2, 2]
    a = sato_tate_angles(2, 200_000, chunk_rng(3, 0, "sample"))
    x = 2 * np.cos(a[:, 0])
    edges = np.linspace(-2, 2, 21)
    observed, _ = np.histogram(x, edges)

    def cdf(t):
        return 0.5 + (t * np.sqrt(4 - t * t) / 2 + 2 * np.arcsin(t / 2)) / (2 * math.pi)

    expected = len(x) * np.diff(cdf(edges))
    chi2 = float(((observed - expected) ** 2 / expected).sum())
    # 19 degrees of freedom, 0.1% critical value 43.8
    assert chi2 < 43.8


def test_sato_tate_density_examples():
    assert sato_tate_density(SatakePoint((1.0, 1.0, -2.0))) == pytest.approx(0, abs=1e-24)
    for theta in (0.3, 1.1, 2.0):
        assert sato_tate_density(SatakePoint((theta, -theta))) == pytest.approx(4 * math.sin(theta) ** 2)
    w = 2 * math.pi / 3
    assert sato_tate_density(SatakePoint((0.0, w, 2 * w))) == pytest.approx(27)
    batch = sato_tate_density(np.array([[0.3, -0.3], [1.1, -1.1]]))
    assert batch.shape == (2,)


# -- Plancherel -----------------------------------------------------------------------------


def test_plancherel_weight_limits():
    pt = SatakePoint((0.4, 2.0, 3.88))
    assert plancherel_weight(pt, 10**9) == pytest.approx(1, abs=1e-8)
    rng = chunk_rng(0, 0, "sample")
    for n in (2, 3, 4):
        a = torus_angles(n, 2000, rng)
        for p in (2, 3, 7):
            w = plancherel_weight(a, p)
            assert np.all(w > 0)
            assert np.all(w <= rejection_bound(n, p) * (1 + 1e-12))


def test_plancherel_constant_values():
    assert plancherel_constant(2, 2) == pytest.approx(1.5)
    assert plancherel_constant(3, 2) == pytest.approx(1.5 * 1.75)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_plancherel_weight_has_unit_mean(p):
    est = mc_integrate(PlancherelWeight([p]), MeasureSpec("sato-tate", 3), 10**6, seed=30 + p)
    assert abs(est.value - 1) <= 3 * est.stderr


def test_acceptance_rate_matches_bound():
    n, p, draws = 3, 3, 200_000
    rng = chunk_rng(8, 0, "sample")
    a = sato_tate_angles(n, draws, rng)
    u = rng.random(draws)
    accepted = u < plancherel_weight(a, p) / rejection_bound(n, p)
    rate = accepted.mean()
    stderr = accepted.std(ddof=1) / math.sqrt(draws)
    assert abs(rate - 1 / rejection_bound(n, p)) <= 3 * stderr


def test_plancherel_sampler_invariants_and_bias():
    a = plancherel_angles(3, 2, 4000, chunk_rng(9, 0, "sample"))
    assert a.shape == (4000, 3)
    assert unit_product(a).max() < 1e-12
    # at p = 2 the Plancherel measure is visibly different from Sato-Tate
    b = sato_tate_angles(3, 4000, chunk_rng(9, 1, "sample"))
    ta, tb = np.abs(np.exp(1j * a).sum(axis=1)), np.abs(np.exp(1j * b).sum(axis=1))
    assert ks_2samp(ta, tb).pvalue < 1e-20
    pt = sample_plancherel(3, 5, chunk_rng(9, 2, "sample"))
    assert abs(np.prod(pt.values) - 1) < 1e-12


def test_plancherel_large_prime_matches_sato_tate():
    a = plancherel_angles(3, 10**6, 50000, chunk_rng(10, 0, "sample"))
    b = sato_tate_angles(3, 50000, chunk_rng(10, 1, "sample"))
    assert ks_2samp(a[:, 0], b[:, 0]).pvalue > 0.001


def test_plancherel_per_prime_rows():
    primes = np.array([2, 3, 5, 7] * 50)
    a = plancherel_angles(2, primes, len(primes), chunk_rng(11, 0, "sample"))
    assert a.shape == (200, 2)


# -- integration ------------------------------------------------------------------------------


def test_mc_constant_function():
    est = mc_integrate(Ones(), MeasureSpec("sato-tate", 3), 1000, seed=1)
    assert est.value == 1 and est.stderr == 0 and est.samples == 1000
    with pytest.raises(ValueError):
        mc_integrate(Ones(), MeasureSpec("sato-tate", 3), 1, seed=1)


def test_mc_chunking_independent_of_workers():
    spec = MeasureSpec("sato-tate", 3)
    a = mc_integrate(Trace(), spec, 5000, seed=3, chunk_size=1000)
    b = mc_integrate(Trace(), spec, 5000, seed=3, chunk_size=1000, workers=2)
    assert a == b


def test_chunk_plan():
    assert chunk_plan(10, 4) == [4, 4, 2]
    assert chunk_plan(8, 4) == [4, 4]


def test_mc_matches_structure_constants():
    k = K(1, 0)
    expansion = hecke_product_expansion(k, k)
    targets = [KappaIndex.zero(3), K(2, 0), K(0, 1), K(1, 1)]
    s = SchurValues([k] + targets)
    est = mc_integrate(_SquareTimesConj(s), MeasureSpec("sato-tate", 3), 400_000, seed=12)
    for i, xi in enumerate(targets):
        assert abs(est.value[i] - expansion.get(xi, 0)) <= 3 * est.stderr[i] + 1e-3


class _SquareTimesConj:
    def __init__(self, values):
        self.values = values

    def __call__(self, angles):
        s = self.values(angles)
        return s[:, :1] ** 2 * s[:, 1:].conj()


def test_estimate_to_dict():
    est = MonteCarloEstimate(1 + 2j, 0.5, 10)
    assert est.to_dict() == {"value": {"re": 1.0, "im": 2.0}, "stderr": 0.5, "samples": 10}


# -- small values ---------------------------------------------------------------------------------


def test_small_value_recorded_oracle():
    est = small_value_measure(K(1, 0), 0.01, 10**6, seed=1)
    # recorded before the build: 13 hits out of 10^6
    assert est.value == pytest.approx(1.3e-5)
    assert est.value <= small_value_bound(0.01, 3)
    assert small_value_bound(0.01, 3) == pytest.approx(0.5623, abs=1e-4)


def test_small_value_extremes():
    est = small_value_measure(K(1, 0), [3.0 + 1e-9, 1e-9], 10**5, seed=2)
    assert est.value[0] == 1
    assert est.value[1] == 0
    with pytest.raises(ValueError):
        small_value_measure(K(1, 0), 0.0, 100, seed=2)


def test_small_value_constrained_option():
    est = small_value_measure(K(1), 0.05, 10**5, seed=3, constrained=True)
    # the semicircle density is about 1/pi near 0, and the window has length 0.1
    assert abs(est.value - 0.1 / math.pi) <= 4 * est.stderr


def test_torus_samples_unconstrained():
    a = torus_angles(3, 1000, chunk_rng(0, 0, "sample"))
    assert unit_product(a).max() > 0.1


def test_schur_values_shape():
    a = sato_tate_angles(3, 7, chunk_rng(0, 0, "sample"))
    v = SchurValues([K(1, 0), K(0, 1)])(a)
    assert v.shape == (7, 2)
    direct = schur_eval_tableaux(partition_from_kappa(K(1, 0)), np.exp(1j * a))
    assert np.allclose(v[:, 0], direct)
