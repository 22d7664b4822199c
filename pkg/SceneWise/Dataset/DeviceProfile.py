"""
DeviceProfile.py

Created: 09/18/26
Last Modified: 10/16/26

Description: Synthetic recording devices. A device is an FIR impulse response
plus a gain; rendering a clip through a device convolves it with the response
and scales it:

    output = (clip * ir)[:len(clip)] * 10^(gain_db / 20)

Generated responses are 256-tap linear-phase FIRs designed by frequency
sampling. Their magnitude combines a spectral tilt around 1 kHz (clipped to
+/-18 dB) with two or three wide notches between 300 Hz and 12 kHz.

Profile sets are JSON files (see External/DeviceProfiles.json):

    {
        "sample_rate_hz": 32000,
        "devices": [
            {"id": "a", "known": true, "gain_db": 0.0, "identity": true},
            {"id": "b", "known": true, "gain_db": -2.0,
             "generate": {"seed": 101, "tilt_db_per_octave": 2.5}},
            {"id": "s4", "known": false, "gain_db": 1.5, "ir": [1.0, -0.3]}
        ]
    }

Generated fields not given in the file are drawn from the device's seed.
"""
# Library Imports.
import json
from dataclasses import dataclass

import numpy as np
from scipy import signal

# Custom Imports.
from SceneWise.Errors.Errors import ConfigurationError, InvalidInputError
from SceneWise.Frontend.AudioClip import AudioClip

# Length of generated impulse responses.
IR_TAPS = 256

# Range of the drawn spectral tilt, in dB per octave around 1 kHz.
TILT_RANGE_DB = (-6.0, 6.0)

# Limit of the tilt's excursion from 0 dB.
TILT_LIMIT_DB = 18.0

# Frequency range and depth range of the drawn notches.
NOTCH_RANGE_HZ = (300.0, 12000.0)
NOTCH_DEPTH_DB = (15.0, 30.0)

# Notch width, in octaves (standard deviation of the log-frequency dip).
NOTCH_WIDTH_OCTAVES = 0.3

# Range of the drawn gain offset.
GAIN_RANGE_DB = (-6.0, 6.0)


@dataclass(frozen=True)
class SyntheticDeviceProfile:
    """
    A simulated recording device. The identity profile (unit impulse, 0 dB)
    stands for the reference device.
    """

    deviceId: str
    impulseResponse: np.ndarray
    gainDb: float = 0.0
    isKnown: bool = True

    def __post_init__(self):
        ir = np.asarray(self.impulseResponse, dtype=np.float64)
        if ir.ndim != 1 or ir.size == 0:
            raise ConfigurationError(
                "Device '" + self.deviceId + "' needs a 1-D impulse response."
            )
        if not np.all(np.isfinite(ir)):
            raise ConfigurationError(
                "Device '" + self.deviceId + "' has a non-finite impulse response."
            )
        object.__setattr__(self, "impulseResponse", ir)
        object.__setattr__(self, "gainDb", float(self.gainDb))

    def isIdentity(self):
        ir = self.impulseResponse
        return self.gainDb == 0.0 and ir[0] == 1.0 and not np.any(ir[1:])

    def getFrequencyResponse(self, frequencies, sampleRateHz):
        """
        Complex response of the IR (gain included) at the given frequencies.
        """
        _, response = signal.freqz(self.impulseResponse, worN=frequencies, fs=sampleRateHz)
        return response * 10.0 ** (self.gainDb / 20.0)


def identityProfile(deviceId="a", isKnown=True):
    return SyntheticDeviceProfile(deviceId, np.array([1.0]), 0.0, isKnown)


def applyDeviceIr(clip, profile):
    """
    Renders a clip through a device.

    Parameters
    ----------
    clip: AudioClip
        Clip at the profile's sample rate.
    profile: SyntheticDeviceProfile
        Device to simulate.

    Returns
    -------
    AudioClip: filtered clip, truncated to the input length. The identity
    profile returns the input clip itself.
    """
    if not np.any(profile.impulseResponse):
        raise InvalidInputError(
            "Device '" + profile.deviceId + "' has an all-zero impulse response."
        )
    if profile.isIdentity():
        return clip

    filtered = signal.lfilter(profile.impulseResponse, [1.0], clip.samples)
    return AudioClip(filtered * 10.0 ** (profile.gainDb / 20.0), clip.sampleRateHz)


def getColorationDb(frequencies, tiltDbPerOctave, notches):
    """
    Target magnitude, in dB, of a generated device response.

    Parameters
    ----------
    frequencies: np.ndarray
        Frequencies in Hz.
    tiltDbPerOctave: float
        Slope around 1 kHz.
    notches: list
        (center Hz, depth dB) pairs.
    """
    octaves = np.log2(np.maximum(frequencies, 20.0) / 1000.0)
    magnitude = np.clip(tiltDbPerOctave * octaves, -TILT_LIMIT_DB, TILT_LIMIT_DB)
    for center, depth in notches:
        distance = np.log2(np.maximum(frequencies, 20.0) / center)
        magnitude = magnitude - depth * np.exp(-0.5 * (distance / NOTCH_WIDTH_OCTAVES) ** 2)
    return magnitude


def generateImpulseResponse(sampleRateHz, tiltDbPerOctave, notches, taps=IR_TAPS):
    """
    Designs a linear-phase FIR whose magnitude follows getColorationDb().

    Returns
    -------
    np.ndarray: taps coefficients.
    """
    nyquist = sampleRateHz / 2.0
    grid = np.concatenate(([0.0], np.geomspace(20.0, nyquist * 0.98, 240), [nyquist]))
    gain = 10.0 ** (getColorationDb(grid, tiltDbPerOctave, notches) / 20.0)
    # Even-length linear-phase filters have a zero at Nyquist.
    if taps % 2 == 0:
        gain[-1] = 0.0
    return signal.firwin2(taps, grid, gain, fs=sampleRateHz)


def drawColoration(seed):
    """
    Draws tilt, notches and gain of a generated device from its seed.

    Returns
    -------
    tuple: (tilt dB/octave, list of (center Hz, depth dB), gain dB).
    """
    rng = np.random.default_rng(seed)
    tilt = float(rng.uniform(*TILT_RANGE_DB))
    count = int(rng.integers(2, 4))
    centers = np.exp(rng.uniform(np.log(NOTCH_RANGE_HZ[0]), np.log(NOTCH_RANGE_HZ[1]), count))
    depths = rng.uniform(*NOTCH_DEPTH_DB, count)
    gain = float(rng.uniform(*GAIN_RANGE_DB))
    notches = [(float(c), float(d)) for c, d in zip(np.sort(centers), depths)]
    return tilt, notches, gain


def _profileFromDict(values, sampleRateHz, path):
    def fail(message):
        raise ConfigurationError("Device profile file " + str(path) + ": " + message)

    if not isinstance(values, dict) or "id" not in values:
        fail("every device needs an 'id'.")
    deviceId = str(values["id"])
    isKnown = bool(values.get("known", True))
    sources = [key for key in ("identity", "ir", "generate") if key in values]
    if len(sources) != 1:
        fail("device '" + deviceId + "' needs exactly one of identity, ir or generate.")
    if "generate" in values and (
        not isinstance(values["generate"], dict) or "seed" not in values["generate"]
    ):
        fail("device '" + deviceId + "' generate block needs a 'seed'.")

    try:
        if "identity" in values:
            profile = SyntheticDeviceProfile(
                deviceId, np.array([1.0]), float(values.get("gain_db", 0.0)), isKnown
            )
        elif "ir" in values:
            ir = np.array(values["ir"], dtype=np.float64)
            profile = SyntheticDeviceProfile(
                deviceId, ir, float(values.get("gain_db", 0.0)), isKnown
            )
        else:
            generate = values["generate"]
            tilt, notches, gain = drawColoration(int(generate["seed"]))
            tilt = float(generate.get("tilt_db_per_octave", tilt))
            if "notches" in generate:
                notches = [(float(c), float(d)) for c, d in generate["notches"]]
            gain = float(values.get("gain_db", gain))
            profile = SyntheticDeviceProfile(
                deviceId, generateImpulseResponse(sampleRateHz, tilt, notches), gain, isKnown
            )
    except (TypeError, ValueError, ConfigurationError) as e:
        fail("device '" + deviceId + "': " + str(e))

    if not np.any(profile.impulseResponse):
        fail("device '" + deviceId + "' has an all-zero impulse response.")
    return profile


def loadProfiles(path):
    """
    Reads a device profile set.

    Returns
    -------
    tuple: (sample rate in Hz, list of SyntheticDeviceProfile in file order).
    Raises ConfigurationError naming the file for any problem.
    """
    try:
        with open(path, "r", encoding="utf-8") as profileFile:
            data = json.load(profileFile)
    except (OSError, ValueError) as e:
        raise ConfigurationError("Cannot read device profile file " + str(path) + ": " + str(e))

    if not isinstance(data, dict) or not isinstance(data.get("devices"), list):
        raise ConfigurationError(
            "Device profile file " + str(path) + " needs a 'devices' list."
        )
    sampleRateHz = int(data.get("sample_rate_hz", 32000))
    profiles = [_profileFromDict(values, sampleRateHz, path) for values in data["devices"]]

    ids = [profile.deviceId for profile in profiles]
    if len(set(ids)) != len(ids):
        raise ConfigurationError("Device profile file " + str(path) + " repeats a device id.")
    return sampleRateHz, profiles
