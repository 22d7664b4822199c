"""
SceneProfile.py

Created: 09/18/26
Last Modified: 10/16/26

Description: Synthetic acoustic scenes. Each scene is a spectral envelope of
three to five resonant peaks, 7 to 10 dB above a tilted noise floor, plus one
amplitude-modulated tone. A clip of a scene is Gaussian noise shaped by the
envelope with the tone added on top.

Scenes come in pairs that share their peaks. The two scenes of a pair tilt the
floor in opposite directions, and each has its own tone, which only sounds in
part of the clips. A device's own tilt overlaps the tilt cue, so a model that
knows the device separates the pair more easily than one that does not.

Every clip jitters the parameters of its scene around their nominal values,
and its tone may be missing.
"""
# Library Imports.
from dataclasses import dataclass

import numpy as np

# Custom Imports.
from SceneWise.Errors.Errors import ConfigurationError
from SceneWise.Frontend.AudioClip import AudioClip

# Scene names of the challenge, used for the first ten synthetic scenes.
SCENE_NAMES = (
    "airport",
    "bus",
    "metro",
    "metro_station",
    "park",
    "public_square",
    "shopping_mall",
    "street_pedestrian",
    "street_traffic",
    "tram",
)

# Ranges the envelope parameters are drawn from.
PEAK_COUNT_RANGE = (3, 5)
PEAK_RANGE_HZ = (150.0, 10000.0)
PEAK_BANDWIDTH_HZ = (80.0, 400.0)
PEAK_GAIN_DB = (7.0, 10.0)
TONE_RANGE_HZ = (200.0, 4000.0)
MODULATION_RANGE_HZ = (0.5, 8.0)

# Floor tilt of a scene around 1 kHz; the second scene of a pair gets the
# negated value. The excursion is clipped to +/-TILT_LIMIT_DB.
SCENE_TILT_DB_PER_OCTAVE = 2.0
TILT_LIMIT_DB = 12.0

# Per-clip variation. Jitter values are standard deviations, clipped to
# twice their size. Peak centers move by a fraction of the peak bandwidth, so
# the nominal center stays at least 6 dB above the floor.
PEAK_JITTER_WIDTHS = 0.2
PEAK_GAIN_JITTER_DB = 0.25
TILT_JITTER_DB_PER_OCTAVE = 0.3
TONE_JITTER_OCTAVES = 0.02
TONE_PROBABILITY = 0.65

# Smallest peak height above the floor in any rendered clip.
MIN_PEAK_GAIN_DB = PEAK_GAIN_DB[0] - 2.0 * PEAK_GAIN_JITTER_DB

# RMS level of the shaped noise in a rendered clip.
NOISE_RMS = 0.05

# Offset of the generator streams of shared pair peaks.
PAIR_STREAM = 1000


def getTiltFloor(frequencies, tiltDbPerOctave):
    """
    Linear amplitude of the tilted noise floor; 1 at 1 kHz.
    """
    octaves = np.log2(np.maximum(frequencies, 20.0) / 1000.0)
    return 10.0 ** (np.clip(tiltDbPerOctave * octaves, -TILT_LIMIT_DB, TILT_LIMIT_DB) / 20.0)


def getPeakEnvelope(frequencies, centers, widths, gainsDb):
    """
    Linear amplitude of the peaks over a floor of 1.
    """
    envelope = np.ones_like(frequencies, dtype=np.float64)
    for center, width, gainDb in zip(centers, widths, gainsDb):
        bump = np.exp(-0.5 * ((frequencies - center) / width) ** 2)
        envelope += (10.0 ** (gainDb / 20.0) - 1.0) * bump
    return envelope


@dataclass(frozen=True)
class SceneProfile:
    sceneLabel: str
    peakFrequenciesHz: tuple
    peakBandwidthsHz: tuple
    peakGainsDb: tuple
    tiltDbPerOctave: float
    toneFrequencyHz: float
    modulationRateHz: float
    toneLevel: float

    def getEnvelope(self, frequencies):
        """
        Nominal linear amplitude envelope at the given frequencies.
        """
        return getTiltFloor(frequencies, self.tiltDbPerOctave) * getPeakEnvelope(
            frequencies, self.peakFrequenciesHz, self.peakBandwidthsHz, self.peakGainsDb
        )


@dataclass(frozen=True)
class ClipVariation:
    """
    The realized parameters of one clip of a scene.
    """

    peakFrequenciesHz: tuple
    peakBandwidthsHz: tuple
    peakGainsDb: tuple
    tiltDbPerOctave: float
    toneFrequencyHz: float
    hasTone: bool

    def getFloor(self, frequencies):
        return getTiltFloor(frequencies, self.tiltDbPerOctave)

    def getEnvelope(self, frequencies):
        return self.getFloor(frequencies) * getPeakEnvelope(
            frequencies, self.peakFrequenciesHz, self.peakBandwidthsHz, self.peakGainsDb
        )


def getSceneLabels(sceneCount):
    """
    Returns
    -------
    list: the challenge scene names, followed by scene_<i> beyond ten.
    """
    if sceneCount < 2:
        raise ConfigurationError("At least two scenes are needed, got " + str(sceneCount) + ".")
    return [
        SCENE_NAMES[i] if i < len(SCENE_NAMES) else "scene_" + str(i) for i in range(sceneCount)
    ]


def _drawPairPeaks(seed, pairIndex):
    rng = np.random.default_rng([seed, PAIR_STREAM + pairIndex])
    count = int(rng.integers(PEAK_COUNT_RANGE[0], PEAK_COUNT_RANGE[1] + 1))
    centers = np.exp(rng.uniform(np.log(PEAK_RANGE_HZ[0]), np.log(PEAK_RANGE_HZ[1]), count))
    return (
        tuple(float(c) for c in np.sort(centers)),
        tuple(float(w) for w in rng.uniform(*PEAK_BANDWIDTH_HZ, count)),
        tuple(float(g) for g in rng.uniform(*PEAK_GAIN_DB, count)),
    )


def buildSceneProfiles(seed, sceneCount):
    """
    Draws the envelope of every scene. Scenes 2k and 2k+1 share the peaks
    drawn from (seed, PAIR_STREAM + k); everything else of scene i comes from
    (seed, i), so adding scenes leaves earlier ones unchanged.

    Returns
    -------
    list: SceneProfile per scene, in label order.
    """
    profiles = []
    for index, label in enumerate(getSceneLabels(sceneCount)):
        centers, widths, gains = _drawPairPeaks(seed, index // 2)
        rng = np.random.default_rng([seed, index])
        profiles.append(
            SceneProfile(
                sceneLabel=label,
                peakFrequenciesHz=centers,
                peakBandwidthsHz=widths,
                peakGainsDb=gains,
                tiltDbPerOctave=SCENE_TILT_DB_PER_OCTAVE * (1.0 if index % 2 == 0 else -1.0),
                toneFrequencyHz=float(np.exp(rng.uniform(*np.log(TONE_RANGE_HZ)))),
                modulationRateHz=float(rng.uniform(*MODULATION_RANGE_HZ)),
                toneLevel=float(rng.uniform(0.5, 1.5)),
            )
        )
    return profiles


def _jitter(rng, size, scale):
    values = rng.standard_normal(size) * scale
    return np.clip(values, -2.0 * scale, 2.0 * scale)


def drawClipVariation(profile, rng):
    """
    Draws the per-clip parameters of a scene.

    Returns
    -------
    ClipVariation: jittered peaks, tilt and tone.
    """
    count = len(profile.peakFrequenciesHz)
    widths = np.array(profile.peakBandwidthsHz)
    centers = np.array(profile.peakFrequenciesHz) + widths * _jitter(rng, count, PEAK_JITTER_WIDTHS)
    gains = np.array(profile.peakGainsDb) + _jitter(rng, count, PEAK_GAIN_JITTER_DB)
    tilt = profile.tiltDbPerOctave + float(_jitter(rng, 1, TILT_JITTER_DB_PER_OCTAVE)[0])
    tone = profile.toneFrequencyHz * 2.0 ** float(_jitter(rng, 1, TONE_JITTER_OCTAVES)[0])
    hasTone = bool(rng.uniform() < TONE_PROBABILITY)
    return ClipVariation(
        peakFrequenciesHz=tuple(float(c) for c in centers),
        peakBandwidthsHz=tuple(profile.peakBandwidthsHz),
        peakGainsDb=tuple(float(g) for g in gains),
        tiltDbPerOctave=tilt,
        toneFrequencyHz=tone,
        hasTone=hasTone,
    )


def renderSceneClip(profile, rng, sampleRateHz=32000, durationS=1.0):
    """
    Renders one clip of a scene.

    Parameters
    ----------
    profile: SceneProfile
        Scene to render.
    rng: np.random.Generator
        Per-clip generator.
    sampleRateHz: int
        Output sample rate.
    durationS: float
        Clip length in seconds.

    Returns
    -------
    AudioClip: the rendered clip.
    """
    variation = drawClipVariation(profile, rng)
    length = int(round(sampleRateHz * durationS))
    noise = rng.standard_normal(length)
    spectrum = np.fft.rfft(noise)
    frequencies = np.fft.rfftfreq(length, 1.0 / sampleRateHz)
    shaped = np.fft.irfft(spectrum * variation.getEnvelope(frequencies), n=length)
    shaped *= NOISE_RMS / np.sqrt(np.mean(shaped**2))

    t = np.arange(length) / sampleRateHz
    phase = rng.uniform(0.0, 2.0 * np.pi)
    tonePhase = rng.uniform(0.0, 2.0 * np.pi)
    if not variation.hasTone:
        return AudioClip(shaped, sampleRateHz)

    modulation = 1.0 + 0.5 * np.sin(2.0 * np.pi * profile.modulationRateHz * t + phase)
    tone = (
        profile.toneLevel
        * NOISE_RMS
        * modulation
        * np.sin(2.0 * np.pi * variation.toneFrequencyHz * t + tonePhase)
    )
    return AudioClip(shaped + tone, sampleRateHz)
