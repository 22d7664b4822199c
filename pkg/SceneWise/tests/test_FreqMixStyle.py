"""
test_FreqMixStyle.py

Created: 09/17/26
Last Modified: 10/06/26

Description: Tests of the per-frequency statistics mixing augmentation.
"""
# Library Imports.
import numpy as np
import pytest
import sys

sys.path.append("../")

# Custom Imports.
from SceneWise.Errors.Errors import ConfigurationError
from SceneWise.Network.FreqMixStyle import FreqMixStyleConfig, freqMixStyle, getBinStatistics


def getBatch(seed=0, size=4):
    """
    Spectrogram-like batch whose examples have distinct per-bin levels.
    """
    rng = np.random.default_rng(seed)
    offsets = rng.uniform(-3, 3, size=(size, 1, 8, 1))
    scales = rng.uniform(0.5, 2.0, size=(size, 1, 8, 1))
    return offsets + scales * rng.standard_normal((size, 2, 8, 12))


class TestFreqMixStyle:
    def test_BinStatisticsShape(self):
        mean, std = getBinStatistics(getBatch())
        assert mean.shape == std.shape == (4, 1, 8, 1)
        assert np.all(std > 0)

    def test_KeepOwnStatistics(self):
        """
        A mixing weight of 1 reproduces the input.
        """
        batch = getBatch(1)
        cfg = FreqMixStyleConfig(alpha=0.3, probability=1.0)
        out = freqMixStyle(batch, cfg, np.random.default_rng(0), lam=1.0)
        assert out.shape == batch.shape
        assert np.allclose(out, batch, rtol=0, atol=1e-10)

    def test_TakePartnerStatistics(self):
        """
        A mixing weight of 0 gives every example the per-bin mean and spread
        of its partner while keeping its own normalized content.
        """
        batch = getBatch(2)
        permutation = np.array([1, 2, 3, 0])
        cfg = FreqMixStyleConfig(probability=1.0)
        out = freqMixStyle(batch, cfg, np.random.default_rng(0), lam=0.0, permutation=permutation)

        mean, std = getBinStatistics(batch)
        outMean, outStd = getBinStatistics(out)
        assert np.allclose(outMean, mean[permutation], atol=1e-10)
        assert np.allclose(outStd, std[permutation], rtol=1e-4)

        normalized = (batch - mean) / std
        outNormalized = (out - outMean) / outStd
        assert np.allclose(outNormalized, normalized, atol=1e-4)

    def test_NeverApplied(self):
        batch = getBatch(3)
        cfg = FreqMixStyleConfig(probability=0.0)
        rng = np.random.default_rng(4)
        for _ in range(20):
            assert freqMixStyle(batch, cfg, rng) is batch

    def test_SingleExample(self):
        batch = getBatch(4, size=1)
        cfg = FreqMixStyleConfig(probability=1.0)
        assert freqMixStyle(batch, cfg, np.random.default_rng(0)) is batch

    def test_SeededDraws(self):
        """
        The same generator seed gives the same mixed batch; the input is not
        modified.
        """
        batch = getBatch(5).astype(np.float32)
        original = batch.copy()
        cfg = FreqMixStyleConfig(probability=1.0)
        first = freqMixStyle(batch, cfg, np.random.default_rng(9))
        second = freqMixStyle(batch, cfg, np.random.default_rng(9))
        assert first.dtype == np.float32
        assert np.array_equal(first, second)
        assert np.array_equal(batch, original)

    def test_ApplyRate(self):
        batch = getBatch(6)
        cfg = FreqMixStyleConfig(alpha=0.3, probability=0.4)
        rng = np.random.default_rng(11)
        applied = sum(freqMixStyle(batch, cfg, rng) is not batch for _ in range(2000))
        assert 0.35 < applied / 2000 < 0.45

    def test_InvalidConfig(self):
        with pytest.raises(ConfigurationError):
            FreqMixStyleConfig(alpha=0.0)
        with pytest.raises(ConfigurationError):
            FreqMixStyleConfig(probability=1.5)
