import math

import numpy as np
import pytest
from scipy import stats

from learnedbf.channel import (
    AwgnHardErrors,
    BscErrors,
    ChannelSpec,
    bsc_llr_magnitude,
    make_rng,
    q_function,
    snr_to_params,
    transmit_awgn,
    transmit_bsc,
)


def test_bsc_p_at_4db():
    assert snr_to_params(4.0, 0.5).bsc_p == pytest.approx(0.0565, abs=5e-5)


def test_bsc_p_at_0db():
    spec = snr_to_params(0.0, 0.5)
    assert spec.sigma == pytest.approx(1.0)
    assert spec.bsc_p == pytest.approx(0.158655, abs=1e-6)


def test_infinite_snr():
    spec = snr_to_params(math.inf, 0.5)
    assert spec.sigma == 0.0 and spec.bsc_p == 0.0


def test_q_function_matches_erfc():
    x = np.linspace(-3, 5, 17)
    ref = [0.5 * math.erfc(v / math.sqrt(2)) for v in x]
    assert np.allclose(q_function(x), ref, rtol=1e-12)


def test_sigma_formula():
    spec = snr_to_params(3.0, 16 / 32)
    assert spec.sigma == pytest.approx(1 / math.sqrt(2 * 0.5 * 10 ** 0.3))


def test_bad_rate():
    with pytest.raises(ValueError):
        snr_to_params(3.0, 0.0)


def test_awgn_noiseless():
    c = np.array([0, 1, 1, 0], np.uint8)
    rx = transmit_awgn(c, snr_to_params(math.inf, 0.5), make_rng(0))
    assert np.array_equal(rx.hard, c) and not rx.error_pattern.any()
    assert np.array_equal(np.sign(rx.llr), [1, -1, -1, 1])


def test_awgn_fields_consistent():
    spec = snr_to_params(2.0, 0.5)
    rng = make_rng(1)
    c = rng.integers(0, 2, (200, 32)).astype(np.uint8)
    rx = transmit_awgn(c, spec, rng)
    assert np.array_equal(rx.hard, (rx.soft < 0).astype(np.uint8))
    assert np.allclose(rx.llr, 2 * rx.soft / spec.sigma**2)
    assert np.array_equal(rx.error_pattern, rx.hard ^ c)
    assert np.all((rx.llr < 0) == (rx.hard == 1))


def test_awgn_zero_word_mean():
    rx = transmit_awgn(np.zeros((20000, 4), np.uint8), snr_to_params(4.0, 0.5), make_rng(2))
    sigma = snr_to_params(4.0, 0.5).sigma
    assert np.all(np.abs(rx.soft.mean(axis=0) - 1.0) < 4 * sigma / math.sqrt(20000))


def test_awgn_hard_error_rate_matches_q():
    spec = snr_to_params(4.0, 0.5)
    rx = transmit_awgn(np.zeros(10**6, np.uint8), spec, make_rng(3))
    p = spec.bsc_p
    est = rx.error_pattern.mean()
    assert abs(est - p) < 3 * math.sqrt(p * (1 - p) / 10**6)


def test_awgn_hard_is_bsc_chi_square():
    # the number of errors per word must be Binomial(N, p)
    spec = snr_to_params(3.0, 0.5)
    p = spec.bsc_p
    E = AwgnHardErrors(32, spec).sample(make_rng(4), 200_000)
    w = E.sum(axis=1)
    k_max = 7
    observed = np.array([np.sum(w == k) for k in range(k_max)] + [np.sum(w >= k_max)])
    probs = stats.binom.pmf(np.arange(k_max), 32, p)
    probs = np.append(probs, 1 - probs.sum())
    res = stats.chisquare(observed, probs * len(w))
    assert res.pvalue > 1e-3


def test_bsc_examples():
    rng = make_rng(5)
    rx = transmit_bsc(np.zeros((100, 32), np.uint8), 0.0, rng)
    assert not rx.error_pattern.any()
    rx = transmit_bsc(np.zeros((100_000, 32), np.uint8), 0.0565, rng)
    weight = rx.error_pattern.sum(axis=1)
    assert weight.mean() == pytest.approx(32 * 0.0565, abs=4 * math.sqrt(32 * 0.0565 * 0.9435 / 100_000))
    assert np.allclose(np.abs(rx.llr), math.log(0.9435 / 0.0565))
    assert np.all((rx.llr < 0) == (rx.hard == 1))
    assert np.array_equal(rx.soft, 1.0 - 2.0 * rx.hard)


def test_bsc_llr_magnitude_value():
    assert bsc_llr_magnitude(0.0565) == pytest.approx(2.815, abs=1e-3)


@pytest.mark.parametrize("p", [-0.1, 0.5, 0.7])
def test_bsc_bad_p(p):
    with pytest.raises(ValueError):
        transmit_bsc(np.zeros(4, np.uint8), p, make_rng(0))


def test_make_rng_streams_independent_and_reproducible():
    a = make_rng(7, 1, 2).random(5)
    assert np.array_equal(a, make_rng(7, 1, 2).random(5))
    assert not np.array_equal(a, make_rng(7, 1, 3).random(5))
    assert not np.array_equal(a, make_rng(7, 2, 2).random(5))


def test_channel_spec_dispatch():
    spec = snr_to_params(4.0, 0.5)
    c = np.zeros((10, 8), np.uint8)
    rx = ChannelSpec("bsc", spec).transmit(c, make_rng(0))
    assert set(np.unique(rx.soft)) <= {-1.0, 1.0}
    with pytest.raises(ValueError):
        ChannelSpec("fading", spec)


def test_bsc_error_source():
    E = BscErrors(16, 0.25).sample(make_rng(9), 40_000)
    assert E.shape == (40_000, 16) and abs(E.mean() - 0.25) < 0.005
