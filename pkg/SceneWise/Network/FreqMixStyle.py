"""
FreqMixStyle.py

Created: 09/10/26
Last Modified: 10/01/26

Description: Freq-MixStyle augmentation. Each input spectrogram is normalized
per frequency bin (statistics pooled over channels and time) and re-styled
with a mixture of its own and a random partner's statistics, which imitates
the per-band coloration of a different recording device.
"""
# Library Imports.
from dataclasses import dataclass

import numpy as np

# Custom Imports.
from SceneWise.Errors.Errors import ConfigurationError


@dataclass(frozen=True)
class FreqMixStyleConfig:
    """
    alpha is the concentration of the Beta(alpha, alpha) mixing weight;
    probability is the chance that a batch is mixed at all.
    """

    alpha: float = 0.3
    probability: float = 0.4

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigurationError(
                "Freq-MixStyle alpha must be > 0, got " + str(self.alpha) + "."
            )
        if not 0.0 <= self.probability <= 1.0:
            raise ConfigurationError(
                "Freq-MixStyle probability must lie in [0, 1], got "
                + str(self.probability)
                + "."
            )


# Added to the per-bin variance before the square root.
STD_EPSILON = 1e-6


def getBinStatistics(batch):
    """
    Per-example, per-frequency-bin mean and standard deviation.

    Parameters
    ----------
    batch: np.ndarray
        (B, C, F, T) spectrograms.

    Returns
    -------
    tuple: (mean, std), each shaped (B, 1, F, 1).
    """
    mean = batch.mean(axis=(1, 3), keepdims=True)
    std = np.sqrt(batch.var(axis=(1, 3), keepdims=True) + STD_EPSILON)
    return mean, std


def freqMixStyle(batch, cfg, rng, lam=None, permutation=None):
    """
    Applies Freq-MixStyle to a batch.

    Parameters
    ----------
    batch: np.ndarray
        (B, C, F, T) input spectrograms.
    cfg: FreqMixStyleConfig
        Mixing hyperparameters.
    rng: np.random.Generator
        Source of the mixing decision, the Beta draws and the permutation.
    lam: float
        Forces the mixing weight of every example when given.
    permutation: np.ndarray
        Forces the partner index of every example when given.

    Returns
    -------
    np.ndarray: array of the input's shape and dtype. The input itself is
    returned when the batch is not mixed.
    """
    if batch.shape[0] < 2:
        return batch
    if rng.random() >= cfg.probability:
        return batch

    size = batch.shape[0]
    if lam is None:
        lam = rng.beta(cfg.alpha, cfg.alpha, size=(size, 1, 1, 1))
    else:
        lam = np.full((size, 1, 1, 1), float(lam))
    if permutation is None:
        permutation = rng.permutation(size)
    permutation = np.asarray(permutation)

    mean, std = getBinStatistics(batch)
    normalized = (batch - mean) / std

    mixedMean = lam * mean + (1.0 - lam) * mean[permutation]
    mixedStd = lam * std + (1.0 - lam) * std[permutation]
    return (normalized * mixedStd + mixedMean).astype(batch.dtype, copy=False)
