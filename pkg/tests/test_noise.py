"""Mixed Poisson-Gaussian synthesis: determinism, distribution, phantoms."""

import numpy as np
import pytest
from scipy import stats

from mpgdenoise.grid import DomainError
from mpgdenoise.metrics import snr
from mpgdenoise.noise import NoiseSpec, corrupt, make_phantom


def test_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec(eta=0.0, sigma=0.1)
    with pytest.raises(ValueError):
        NoiseSpec(eta=-2.0, sigma=0.1)
    with pytest.raises(ValueError):
        NoiseSpec(eta=1.0, sigma=-1e-9)
    NoiseSpec(eta=1.0, sigma=0.0)


def test_zero_image_zero_sigma_is_exactly_zero():
    f = corrupt(np.zeros((8, 8)), NoiseSpec(eta=4.0, sigma=0.0, seed=3))
    assert np.all(f == 0.0)


def test_negative_clean_image_rejected():
    u = np.full((8, 8), 0.5)
    u[2, 2] = -1e-6
    with pytest.raises(DomainError):
        corrupt(u, NoiseSpec(eta=4.0, sigma=0.0))


def test_huge_eta_recovers_input():
    """eta = 1e9, sigma = 0: relative Poisson noise ~ 1/sqrt(eta*u)."""
    u = np.full((16, 16), 0.5)
    f = corrupt(u, NoiseSpec(eta=1e9, sigma=0.0, seed=0))
    assert np.max(np.abs(f - u)) < 1e-3


def test_deterministic_and_seed_sensitive():
    u = make_phantom("circles", 32, 32)
    a = corrupt(u, NoiseSpec(eta=4.0, sigma=1e-2, seed=11))
    b = corrupt(u, NoiseSpec(eta=4.0, sigma=1e-2, seed=11))
    c = corrupt(u, NoiseSpec(eta=4.0, sigma=1e-2, seed=12))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_gaussian_only_pixels():
    """Zero-intensity pixels see the additive Gaussian term alone."""
    u = np.zeros((50, 50))
    f = corrupt(u, NoiseSpec(eta=2.0, sigma=0.3, seed=5))
    assert abs(float(f.mean())) < 0.3 * 3 / 50  # 3 standard errors
    assert abs(float(f.std()) - 0.3) < 0.02
    assert f.min() < 0.0  # negatives pass through unclamped


def test_monte_carlo_pixel_means():
    """Sample mean over 100 seeds is unbiased: per-pixel z-scores behave.

    With 4096 pixels the largest of 4096 roughly-normal z-scores is expected
    around 3.5, so "every pixel within 3 SE" is not a property any correct
    sampler has; the honest claims are on the z-score *distribution*: at
    least 99.5% of pixels within 3 SE and none beyond 5 SE.
    """
    truth = make_phantom("circles", 64, 64)
    eta, sigma, n = 16.0, 1e-4, 100
    acc = np.zeros_like(truth)
    for seed in range(n):
        acc += corrupt(truth, NoiseSpec(eta, sigma, seed=seed))
    se = np.sqrt((truth / eta + sigma**2) / n)
    z = np.abs(acc / n - truth) / se
    assert np.mean(z <= 3.0) >= 0.995
    assert z.max() <= 5.0


def test_variance_chi_square():
    """Per-pixel scatter matches var = u/eta + sigma^2 (two-sided 1e-3)."""
    truth = make_phantom("circles", 64, 64)
    eta, sigma, n = 16.0, 1e-4, 200
    var = truth / eta + sigma**2
    total = 0.0
    for seed in range(n):
        f = corrupt(truth, NoiseSpec(eta, sigma, seed=1000 + seed))
        total += float(np.sum((f - truth) ** 2 / var))
    df = n * truth.size
    assert stats.chi2.ppf(5e-4, df) < total < stats.chi2.ppf(1 - 5e-4, df)


def test_snr_improves_with_eta():
    truth = make_phantom("circles", 64, 64)
    means = []
    for eta in (1.0, 4.0, 16.0, 64.0):
        vals = [
            snr(corrupt(truth, NoiseSpec(eta, 1e-4, seed=s)), truth) for s in range(20)
        ]
        means.append(float(np.mean(vals)))
    assert all(a < b for a, b in zip(means, means[1:]))


@pytest.mark.parametrize(
    "mean_target",
    [1.6, 40.0],  # below and above the inversion/rejection switch at 10
)
def test_poisson_counts_distribution(mean_target):
    """Counts match the Poisson pmf (chi-square GOF at significance 1e-3)."""
    c = 0.5
    eta = mean_target / c
    f = corrupt(np.full((400, 500), c), NoiseSpec(eta, 0.0, seed=77))
    counts = np.rint(f * eta).astype(int).ravel()
    np.testing.assert_allclose(counts, f.ravel() * eta, atol=1e-6)  # integer counts
    assert counts.min() >= 0

    kmin = int(stats.poisson.ppf(1e-4, mean_target))
    kmax = int(stats.poisson.ppf(1 - 1e-4, mean_target))
    obs = np.bincount(np.clip(counts - kmin, 0, kmax - kmin), minlength=kmax - kmin + 1)
    pk = stats.poisson.pmf(np.arange(kmin, kmax + 1), mean_target)
    pk[0] = stats.poisson.cdf(kmin, mean_target)
    pk[-1] = stats.poisson.sf(kmax - 1, mean_target)
    expected = pk * counts.size
    keep = expected >= 5
    chi2_stat = float(np.sum((obs[keep] - expected[keep]) ** 2 / expected[keep]))
    assert chi2_stat < stats.chi2.ppf(1 - 1e-3, int(keep.sum()) - 1)


# ---------------------------------------------------------------------------
# phantoms


def test_flat_phantom():
    u = make_phantom("flat", 16, 16)
    assert u.shape == (16, 16)
    assert np.all(u == 0.5)


def test_ramp_phantom():
    u = make_phantom("ramp", 10, 8)
    assert np.all(u[:, 0] == 0.0)
    assert np.all(u[:, -1] == 1.0)
    assert np.all(np.diff(u, axis=1) > 0)
    np.testing.assert_array_equal(u[0], u[-1])  # rows identical


def test_checker_phantom_two_values():
    u = make_phantom("checker", 8, 8)
    assert set(np.unique(u)) == {0.25, 0.8}
    # blocks alternate: top-left and the block right of it differ
    assert u[0, 0] != u[0, -1] or u[0, 0] != u[-1, 0]


def test_circles_phantom():
    u = make_phantom("circles", 64, 64)
    assert u.shape == (64, 64)
    assert u.min() >= 0.0 and u.max() <= 1.0
    assert len(np.unique(u)) >= 3  # background plus several disk levels
    assert u[0, 0] == 0.1  # corner is background


def test_phantom_is_deterministic():
    np.testing.assert_array_equal(
        make_phantom("circles", 48, 40), make_phantom("circles", 48, 40)
    )


def test_phantom_rectangular():
    u = make_phantom("circles", 40, 24)
    assert u.shape == (24, 40)  # (height, width)


def test_phantom_validation():
    with pytest.raises(ValueError):
        make_phantom("circles", 7, 64)
    with pytest.raises(ValueError):
        make_phantom("flat", 64, 7)
    with pytest.raises(ValueError):
        make_phantom("swirl", 64, 64)
