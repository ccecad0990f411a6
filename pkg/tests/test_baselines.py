import math

import numpy as np
import pytest

from waveldp.baselines import (
    FrequencyVector,
    Oracle,
    bin_samples,
    binned_cdf,
    binning_estimate,
    choose_oracle,
    krr_estimate,
    krr_perturb,
    krr_perturb_batch,
    normsub,
    oue_estimate,
    oue_perturb,
    oue_perturb_batch,
)


def test_bin_samples_edges() -> None:
    idx = bin_samples(np.array([0.0, 0.24, 0.25, 0.99, 1.0]), 4)
    assert idx.tolist() == [0, 0, 1, 3, 3]
    with pytest.raises(ValueError, match="bins"):
        bin_samples(np.array([0.5]), 1)
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        bin_samples(np.array([1.5]), 4)


def test_frequency_vector_calibration_flag() -> None:
    assert FrequencyVector(np.array([0.5, 0.5])).is_calibrated()
    assert not FrequencyVector(np.array([0.6, 0.5])).is_calibrated()
    assert not FrequencyVector(np.array([-0.1, 1.1])).is_calibrated()
    with pytest.raises(ValueError, match="non-empty"):
        FrequencyVector(np.array([]))


def test_krr_frozen_estimate() -> None:
    # eps = ln 3, d = 3: p = 0.6, q = 0.2; observed frequency 0.6 debiases to 1
    reports = np.array([1] * 6 + [0] * 2 + [2] * 2)
    est = krr_estimate(reports, math.log(3.0), 3)
    assert est.values[1] == pytest.approx(1.0, abs=1e-12)
    assert est.values[0] == pytest.approx(0.0, abs=1e-12)


def test_krr_noiseless_limit() -> None:
    rng = np.random.default_rng(1)
    x = rng.integers(0, 5, size=20_000)
    reports = krr_perturb_batch(x, 5, 30.0, rng)
    assert (reports == x).all()
    est = krr_estimate(reports, 30.0, 5)
    emp = np.bincount(x, minlength=5) / x.size
    assert np.max(np.abs(est.values - emp)) < 1e-3


def test_krr_uniform_within_standard_errors() -> None:
    d, eps, n = 4, 1.0, 100_000
    rng = np.random.default_rng(2)
    x = rng.integers(0, d, size=n)
    est = krr_estimate(krr_perturb_batch(x, d, eps, rng), eps, d)
    p = math.exp(eps) / (math.exp(eps) + d - 1)
    q = 1.0 / (math.exp(eps) + d - 1)
    hit = 1.0 / d * p + (1.0 - 1.0 / d) * q
    se = math.sqrt(hit * (1.0 - hit) / n) / (p - q)
    emp = np.bincount(x, minlength=d) / n
    assert np.all(np.abs(est.values - emp) < 3 * se)


def test_krr_scalar_and_validation() -> None:
    rng = np.random.default_rng(3)
    out = krr_perturb(2, 4, 0.5, rng)
    assert 0 <= out < 4
    with pytest.raises(ValueError, match="categories"):
        krr_perturb_batch(np.array([4]), 4, 1.0, rng)
    with pytest.raises(ValueError, match="epsilon"):
        krr_perturb_batch(np.array([0]), 4, -1.0, rng)
    with pytest.raises(ValueError, match="at least one"):
        krr_estimate(np.array([], dtype=np.int64), 1.0, 4)


def test_krr_exhaustive_privacy_audit() -> None:
    for d in (2, 4, 8):
        for eps in (0.5, 1.0):
            p = math.exp(eps) / (math.exp(eps) + d - 1)
            q = 1.0 / (math.exp(eps) + d - 1)
            # pmf of output y given input x is p if y == x else q
            ratio = p / q
            assert ratio == pytest.approx(math.exp(eps), rel=1e-12)


def test_oue_single_user_unbiased() -> None:
    rng = np.random.default_rng(4)
    eps = 30.0
    reports = np.stack([oue_perturb(0, 3, eps, rng) for _ in range(400)])
    est = oue_estimate(reports, eps, 3)
    # p = 1/2 exactly, so the debiased estimate has mean 1 at the true bin
    se = math.sqrt(0.25 / 400) / (0.5 - 1.0 / (math.exp(eps) + 1.0))
    assert abs(est.values[0] - 1.0) < 3 * se


def test_oue_flip_rate() -> None:
    d, eps, n = 5, 1.0, 200_000
    rng = np.random.default_rng(5)
    x = np.zeros(n, dtype=np.int64)
    bits = oue_perturb_batch(x, d, eps, rng)
    q = 1.0 / (math.exp(eps) + 1.0)
    se = math.sqrt(q * (1 - q) / n)
    off = bits[:, 1:].mean(axis=0)
    assert np.all(np.abs(off - q) < 3 * se)
    se_p = math.sqrt(0.25 / n)
    assert abs(bits[:, 0].mean() - 0.5) < 3 * se_p


def test_oue_uniform_within_standard_errors() -> None:
    d, eps, n = 8, 1.0, 100_000
    rng = np.random.default_rng(6)
    x = rng.integers(0, d, size=n)
    est = oue_estimate(oue_perturb_batch(x, d, eps, rng), eps, d)
    q = 1.0 / (math.exp(eps) + 1.0)
    hit = 1.0 / d * 0.5 + (1.0 - 1.0 / d) * q
    se = math.sqrt(hit * (1.0 - hit) / n) / (0.5 - q)
    emp = np.bincount(x, minlength=d) / n
    assert np.all(np.abs(est.values - emp) < 3 * se)


def test_oue_pairwise_privacy_audit() -> None:
    # two inputs differ only on their own bits; the worst-case pmf ratio is
    # the product of the two per-bit ratios and equals e**eps exactly
    for eps in (0.5, 1.0, 2.0):
        q = 1.0 / (math.exp(eps) + 1.0)
        worst = (0.5 / q) * ((1.0 - q) / 0.5)
        assert worst == pytest.approx(math.exp(eps), rel=1e-12)
        for bit_x, bit_other in ((0, 0), (0, 1), (1, 0), (1, 1)):
            px = (0.5 if bit_x else 0.5) * (q if bit_other else 1.0 - q)
            po = (q if bit_x else 1.0 - q) * (0.5 if bit_other else 0.5)
            assert px / po <= math.exp(eps) * (1 + 1e-12)


def test_oue_validation() -> None:
    rng = np.random.default_rng(7)
    with pytest.raises(ValueError, match="categories"):
        oue_perturb_batch(np.array([-1]), 4, 1.0, rng)
    with pytest.raises(ValueError, match="bit matrix"):
        oue_estimate(np.zeros((0, 4)), 1.0, 4)
    with pytest.raises(ValueError, match="bit matrix"):
        oue_estimate(np.zeros((5, 3)), 1.0, 4)


def test_normsub_frozen_cases() -> None:
    out = normsub(FrequencyVector(np.array([0.5, -0.1, 0.6])))
    assert np.allclose(out.values, [0.45, 0.0, 0.55], atol=1e-12)
    out = normsub(FrequencyVector(np.array([-1.0, -1.0, 3.0])))
    assert np.allclose(out.values, [0.0, 0.0, 1.0], atol=1e-12)


def test_normsub_idempotent_on_simplex() -> None:
    v = np.array([0.2, 0.3, 0.5])
    out = normsub(FrequencyVector(v))
    assert np.allclose(out.values, v, atol=1e-15)


def test_normsub_degenerate_input() -> None:
    out = normsub(FrequencyVector(np.array([-0.5, -0.2, 0.0])))
    assert np.allclose(out.values, [1 / 3, 1 / 3, 1 / 3])


def test_normsub_always_on_simplex() -> None:
    rng = np.random.default_rng(8)
    for _ in range(200):
        d = int(rng.integers(1, 40))
        raw = FrequencyVector(rng.normal(scale=3.0, size=d))
        out = normsub(raw)
        assert out.is_calibrated()


def test_binned_cdf_frozen_values() -> None:
    uniform = FrequencyVector(np.full(4, 0.25))
    assert binned_cdf(uniform, 4).knots.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    point = FrequencyVector(np.array([1.0, 0.0, 0.0, 0.0]))
    knots = binned_cdf(point, 4).knots
    assert knots[1] == 1.0
    assert knots[-1] == 1.0


def test_binned_cdf_monotone_and_validation() -> None:
    rng = np.random.default_rng(9)
    for _ in range(20):
        freq = normsub(FrequencyVector(rng.normal(size=8)))
        cdf = binned_cdf(freq, 64)
        assert cdf.monotone
        assert cdf.knots[0] == 0.0
        assert cdf.knots[-1] == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError, match="calibrated"):
        binned_cdf(FrequencyVector(np.array([0.9, -0.1, 0.2])), 8)


def test_choose_oracle_threshold() -> None:
    assert choose_oracle(8, 1.0) is Oracle.KRR
    assert choose_oracle(64, 1.0) is Oracle.OUE
    assert choose_oracle(8, 0.1) is Oracle.OUE


def test_binning_estimate_end_to_end() -> None:
    rng = np.random.default_rng(10)
    x = rng.random(50_000)
    for d in (8, 64):
        freq = binning_estimate(x, d, 1.0, np.random.default_rng(11))
        assert freq.is_calibrated()
        assert np.max(np.abs(freq.values - 1.0 / d)) < 0.05
