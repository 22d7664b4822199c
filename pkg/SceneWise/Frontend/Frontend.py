"""
Frontend.py

Created: 09/03/26
Last Modified: 10/12/26

Description: The log-mel frontend. Raw clips are resampled to the target rate,
framed with center padding, windowed, transformed into power spectra, projected
onto a triangular mel filterbank and log compressed.

    AudioClip (any rate)
          |
          V
      resample()          Kaiser windowed-sinc polyphase filter.
          |
          V
     stftPower()          Reflect pad by window/2, Hann window, |DFT|^2.
          |
          V
   melFilterbank() @      HTK mel scale triangles.
          |
          V
  log(max(., floor))      -> MelSpectrogram (mel bins x frames)

With the default configuration (32 kHz, 4096-point FFT, 3072-sample window,
500-sample hop, 256 mel bins) a one second clip yields a 256 x 65 grid.
"""
# Library Imports.
from dataclasses import asdict, dataclass
from fractions import Fraction
import hashlib
import json

import numpy as np
from scipy import signal

# Custom Imports.
from SceneWise.Errors.Errors import ConfigurationError, InvalidInputError
from SceneWise.Frontend.AudioClip import AudioClip


# Kaiser beta and taps per polyphase branch of the resampling filter.
RESAMPLE_KAISER_BETA = 8.0
RESAMPLE_TAPS_PER_PHASE = 64

# Window names accepted by FrontendConfig.windowType. "rect" is a test fixture
# mode only.
WINDOW_TYPES = {"hann": "hann", "rect": "boxcar"}


@dataclass(frozen=True)
class FrontendConfig:
    """
    Frontend parameters. fmaxHz of None means half the target rate.
    """

    targetRateHz: int = 32000
    fftSize: int = 4096
    windowSamples: int = 3072
    hopSamples: int = 500
    melBins: int = 256
    fminHz: float = 0.0
    fmaxHz: float = None
    logFloor: float = 1e-5
    windowType: str = "hann"

    def __post_init__(self):
        if self.fmaxHz is None:
            object.__setattr__(self, "fmaxHz", self.targetRateHz / 2.0)
        self.validate()

    def validate(self):
        """
        Checks the configuration invariants. Raises ConfigurationError.
        """
        if self.targetRateHz <= 0:
            raise ConfigurationError("targetRateHz must be positive.")
        if self.windowSamples < 1 or self.windowSamples > self.fftSize:
            raise ConfigurationError(
                "windowSamples must be in [1, fftSize]; got "
                + str(self.windowSamples)
                + " with fftSize "
                + str(self.fftSize)
            )
        if self.hopSamples < 1:
            raise ConfigurationError("hopSamples must be at least 1.")
        if self.melBins < 1:
            raise ConfigurationError("melBins must be at least 1.")
        if not (0 <= self.fminHz < self.fmaxHz <= self.targetRateHz / 2.0):
            raise ConfigurationError(
                "Frequency range must satisfy 0 <= fmin < fmax <= target rate / 2; got ("
                + str(self.fminHz)
                + ", "
                + str(self.fmaxHz)
                + ")"
            )
        if self.logFloor <= 0:
            raise ConfigurationError("logFloor must be positive.")
        if self.windowType not in WINDOW_TYPES:
            raise ConfigurationError("Unknown window type " + str(self.windowType))

    def getFingerprint(self):
        """
        Returns
        -------
        String: a short stable hash of every field. Spectrograms computed with
        different configurations carry different fingerprints.
        """
        text = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha1(text.encode("utf-8")).hexdigest()[:12]

    def toDict(self):
        return asdict(self)

    @staticmethod
    def fromDict(values):
        return FrontendConfig(**values)


@dataclass(frozen=True)
class MelSpectrogram:
    """
    Log-mel grid of shape (melBins, frames) and the fingerprint of the
    FrontendConfig that produced it.
    """

    values: np.ndarray
    fingerprint: str

    def getShape(self):
        return self.values.shape


def hzToMel(frequency):
    """HTK mel scale."""
    return 2595.0 * np.log10(1.0 + np.asarray(frequency, dtype=np.float64) / 700.0)


def melToHz(mel):
    """Inverse of hzToMel."""
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def resample(clip, targetRateHz):
    """
    Resamples a clip with a Kaiser windowed-sinc polyphase filter.

    Parameters
    ----------
    clip: AudioClip
        Input clip.
    targetRateHz: int
        Output sample rate.

    Returns
    -------
    AudioClip: clip at targetRateHz whose length is
        round(len(clip) * targetRateHz / clip.sampleRateHz). The input clip is
        returned unchanged if the rates already match.
    """
    if clip is None or clip.samples.size == 0:
        raise InvalidInputError("Cannot resample an empty clip.")
    if targetRateHz <= 0:
        raise InvalidInputError("Target rate must be positive, got " + str(targetRateHz))
    if clip.sampleRateHz == targetRateHz:
        return clip

    ratio = Fraction(int(targetRateHz), clip.sampleRateHz)
    up, down = ratio.numerator, ratio.denominator
    maxRate = max(up, down)

    # Odd length keeps the filter linear phase with an integer group delay.
    numTaps = RESAMPLE_TAPS_PER_PHASE * maxRate + 1
    taps = signal.firwin(
        numTaps, 1.0 / maxRate, window=("kaiser", RESAMPLE_KAISER_BETA)
    )
    resampled = signal.resample_poly(clip.samples, up, down, window=taps)

    targetLength = int(round(clip.samples.size * targetRateHz / clip.sampleRateHz))
    if resampled.size >= targetLength:
        resampled = resampled[:targetLength]
    else:
        resampled = np.pad(resampled, (0, targetLength - resampled.size))
    if targetLength == 0:
        raise InvalidInputError("Resampled clip would be empty.")

    return AudioClip(resampled, targetRateHz)


def getWindow(cfg):
    """
    Returns
    -------
    np.ndarray: the periodic analysis window of length cfg.windowSamples.
    """
    return signal.get_window(WINDOW_TYPES[cfg.windowType], cfg.windowSamples, fftbins=True)


def getFrameCount(numSamples, cfg):
    """
    Number of frames produced for a clip of numSamples under center padding.
    """
    return numSamples // cfg.hopSamples + 1


def stftPower(clip, cfg, window=None):
    """
    Computes the power spectrogram of a clip.

    Parameters
    ----------
    clip: AudioClip
        Clip at cfg.targetRateHz.
    cfg: FrontendConfig
        Frontend parameters.
    window: np.ndarray
        Optional precomputed analysis window (see getWindow).

    Returns
    -------
    np.ndarray: power grid of shape (fftSize / 2 + 1, frames). Column f is the
        squared DFT magnitude of frame f, which covers padded samples
        [f * hop, f * hop + windowSamples).
    """
    if clip.sampleRateHz != cfg.targetRateHz:
        raise InvalidInputError(
            "stftPower expects a clip at "
            + str(cfg.targetRateHz)
            + " Hz, got "
            + str(clip.sampleRateHz)
            + " Hz."
        )
    samples = clip.samples
    if samples.size < cfg.hopSamples:
        raise InvalidInputError(
            "Clip of "
            + str(samples.size)
            + " samples is shorter than one hop ("
            + str(cfg.hopSamples)
            + ")."
        )
    if window is None:
        window = getWindow(cfg)

    half = cfg.windowSamples // 2
    padded = np.pad(samples, (half, cfg.windowSamples - half), mode="reflect")
    numFrames = getFrameCount(samples.size, cfg)

    starts = np.arange(numFrames) * cfg.hopSamples
    frames = padded[starts[:, None] + np.arange(cfg.windowSamples)[None, :]]
    spectrum = np.fft.rfft(frames * window[None, :], n=cfg.fftSize, axis=1)
    power = spectrum.real ** 2 + spectrum.imag ** 2

    return power.T


def melFilterbank(cfg):
    """
    Builds the triangular mel filterbank.

    Parameters
    ----------
    cfg: FrontendConfig
        Frontend parameters.

    Returns
    -------
    np.ndarray: matrix of shape (melBins, fftSize / 2 + 1). Row m is a triangle
        rising from center m - 1 to center m and falling to center m + 1, with
        centers uniformly spaced on the HTK mel scale over (fmin, fmax).
    Raises ConfigurationError if any row has no positive weight, which happens
        when the mel resolution is finer than the FFT bin spacing.
    """
    numBins = cfg.fftSize // 2 + 1
    binFrequencies = np.arange(numBins) * cfg.targetRateHz / cfg.fftSize

    melEdges = np.linspace(hzToMel(cfg.fminHz), hzToMel(cfg.fmaxHz), cfg.melBins + 2)
    hzEdges = melToHz(melEdges)

    lower = hzEdges[:-2, None]
    center = hzEdges[1:-1, None]
    upper = hzEdges[2:, None]
    rising = (binFrequencies[None, :] - lower) / (center - lower)
    falling = (upper - binFrequencies[None, :]) / (upper - center)
    weights = np.maximum(0.0, np.minimum(rising, falling))

    emptyRows = np.flatnonzero(weights.max(axis=1) <= 0.0)
    if emptyRows.size > 0:
        raise ConfigurationError(
            str(cfg.melBins)
            + " mel bins are too many for a "
            + str(cfg.fftSize)
            + "-point FFT; filter rows "
            + str(emptyRows[:5].tolist())
            + " have no positive weight."
        )
    return weights


def getMelCenters(cfg):
    """
    Returns
    -------
    np.ndarray: center frequency in Hz of every mel filter.
    """
    melEdges = np.linspace(hzToMel(cfg.fminHz), hzToMel(cfg.fmaxHz), cfg.melBins + 2)
    return melToHz(melEdges[1:-1])


def computeMel(clip, cfg):
    """
    Converts a clip into a log-mel spectrogram, resampling first if needed.

    Returns
    -------
    MelSpectrogram: values = log(max(filterbank @ power, logFloor)).
    """
    return MelFrontend(cfg).computeMel(clip)


class MelFrontend:
    """
    The MelFrontend class binds a FrontendConfig to its precomputed window and
    filterbank so repeated clips do not rebuild them. Instances hold no mutable
    state after construction and may be shared between threads.
    """

    def __init__(self, cfg=None):
        self._cfg = cfg if cfg is not None else FrontendConfig()
        self._window = getWindow(self._cfg)
        self._filterbank = melFilterbank(self._cfg)
        self._fingerprint = self._cfg.getFingerprint()

    def getConfig(self):
        return self._cfg

    def getOutputShape(self, numSamples):
        """
        Returns the (melBins, frames) shape produced for a clip of numSamples at
        the target rate.
        """
        return (self._cfg.melBins, getFrameCount(numSamples, self._cfg))

    def computeMel(self, clip):
        """
        Converts a clip into a MelSpectrogram. See the module description.
        """
        clip = resample(clip, self._cfg.targetRateHz)
        power = stftPower(clip, self._cfg, self._window)
        mel = self._filterbank @ power
        values = np.log(np.maximum(mel, self._cfg.logFloor))
        return MelSpectrogram(values, self._fingerprint)
