"""
test_Frontend.py

Created: 09/04/26
Last Modified: 10/12/26

Description: Tests of the log-mel frontend: resampling, the STFT, the mel
filterbank and the full clip-to-spectrogram path, plus WAV input.
"""
# Library Imports.
import numpy as np
import pytest
import soundfile as sf
import sys

sys.path.append("../")

# Custom Imports.
from SceneWise.Errors.Errors import ConfigurationError, InvalidInputError
from SceneWise.Frontend.AudioClip import AudioClip
from SceneWise.Frontend.Frontend import (
    FrontendConfig,
    MelFrontend,
    computeMel,
    getFrameCount,
    getMelCenters,
    getWindow,
    hzToMel,
    melFilterbank,
    resample,
    stftPower,
)
from SceneWise.Frontend.WavIO import readWav, writeWav


def getTone(frequencyHz, sampleRateHz, numSamples, amplitude=0.5):
    t = np.arange(numSamples) / sampleRateHz
    return amplitude * np.sin(2 * np.pi * frequencyHz * t)


class TestResample:
    def test_ResampleLength(self):
        """
        44.1 kHz to 32 kHz keeps the duration.
        """
        clip = AudioClip(np.random.default_rng(0).standard_normal(44100), 44100)
        out = resample(clip, 32000)
        assert out.sampleRateHz == 32000
        assert out.samples.size == 32000

    def test_ResampleIdentity(self):
        clip = AudioClip(np.random.default_rng(1).standard_normal(32000), 32000)
        out = resample(clip, 32000)
        assert np.array_equal(out.samples, clip.samples)

    def test_ResampleTone(self):
        """
        A resampled 1 kHz tone matches a tone synthesized at the new rate.
        """
        clip = AudioClip(getTone(1000, 44100, 44100), 44100)
        out = resample(clip, 32000)
        reference = getTone(1000, 32000, 32000)
        assert np.corrcoef(out.samples, reference)[0, 1] > 0.999

    def test_ResampleEmpty(self):
        with pytest.raises(InvalidInputError):
            AudioClip(np.zeros(0), 32000)
        with pytest.raises(InvalidInputError):
            resample(None, 32000)


class TestStft:
    def getTestConfig(self, windowType="rect"):
        return FrontendConfig(
            targetRateHz=32000, fftSize=1024, windowSamples=1024, hopSamples=256, melBins=32, windowType=windowType
        )

    def test_StftDc(self):
        """
        A constant signal puts nearly all energy in bin 0.
        """
        cfg = self.getTestConfig()
        power = stftPower(AudioClip(np.ones(32000), 32000), cfg)
        fractions = power[0] / power.sum(axis=0)
        assert np.all(fractions > 0.99)

    def test_StftImpulse(self):
        """
        A unit impulse has a flat magnitude spectrum.
        """
        cfg = self.getTestConfig()
        samples = np.zeros(32000)
        samples[16000] = 1.0
        power = stftPower(AudioClip(samples, 32000), cfg)
        # Frame 62 spans samples [15360, 16384).
        assert np.allclose(power[:, 62], 1.0)

    def test_StftParseval(self):
        """
        Per frame, spectral energy equals windowed-frame energy.
        """
        cfg = FrontendConfig()
        samples = np.random.default_rng(2).uniform(-1, 1, 32000)
        power = stftPower(AudioClip(samples, 32000), cfg)
        assert power.shape == (2049, 65)
        assert np.all(power >= 0)

        window = getWindow(cfg)
        half = cfg.windowSamples // 2
        padded = np.pad(samples, (half, cfg.windowSamples - half), mode="reflect")
        for frame in (0, 1, 32, 64):
            start = frame * cfg.hopSamples
            energy = np.sum((padded[start : start + cfg.windowSamples] * window) ** 2)
            column = power[:, frame]
            spectral = (column[0] + 2 * np.sum(column[1:-1]) + column[-1]) / cfg.fftSize
            assert spectral == pytest.approx(energy, rel=1e-6)

    def test_StftFrameCount(self):
        cfg = FrontendConfig()
        for length in (1600, 4321, 16000, 32001):
            power = stftPower(AudioClip(np.random.default_rng(length).standard_normal(length), 32000), cfg)
            assert power.shape[1] == length // cfg.hopSamples + 1 == getFrameCount(length, cfg)

    def test_StftErrors(self):
        cfg = FrontendConfig()
        with pytest.raises(InvalidInputError):
            stftPower(AudioClip(np.zeros(100), 32000), cfg)
        with pytest.raises(InvalidInputError):
            stftPower(AudioClip(np.zeros(44100), 44100), cfg)


class TestMelFilterbank:
    def test_FilterbankDefault(self):
        cfg = FrontendConfig()
        weights = melFilterbank(cfg)
        assert weights.shape == (256, 2049)
        assert np.all(weights >= 0)
        assert np.all(weights.max(axis=1) > 0)
        assert np.all(np.diff(getMelCenters(cfg)) > 0)

    def test_FilterbankSingleRow(self):
        cfg = FrontendConfig(melBins=1)
        weights = melFilterbank(cfg)
        assert weights.shape == (1, 2049)
        assert weights[0, 0] == 0.0
        assert weights[0, -1] == 0.0
        assert weights.max() > 0.99
        # The single center sits in the middle of the mel range.
        assert hzToMel(getMelCenters(cfg)[0]) == pytest.approx(hzToMel(16000.0) / 2)

    def test_FilterbankTooFine(self):
        cfg = FrontendConfig(fftSize=256, windowSamples=256, melBins=256)
        with pytest.raises(ConfigurationError) as excinfo:
            melFilterbank(cfg)
        assert "no positive weight" in str(excinfo.value)

    def test_ConfigInvariants(self):
        with pytest.raises(ConfigurationError):
            FrontendConfig(windowSamples=5000)
        with pytest.raises(ConfigurationError):
            FrontendConfig(hopSamples=0)
        with pytest.raises(ConfigurationError):
            FrontendConfig(fminHz=9000.0, fmaxHz=8000.0)
        with pytest.raises(ConfigurationError):
            FrontendConfig(fmaxHz=20000.0)
        with pytest.raises(ConfigurationError):
            FrontendConfig(logFloor=0.0)


class TestComputeMel:
    def test_MelShape(self):
        clip = AudioClip(np.random.default_rng(3).uniform(-1, 1, 32000), 32000)
        mel = computeMel(clip, FrontendConfig())
        assert mel.getShape() == (256, 65)
        assert MelFrontend().getOutputShape(32000) == (256, 65)
        assert np.all(np.isfinite(mel.values))

    def test_MelSilence(self):
        cfg = FrontendConfig()
        mel = computeMel(AudioClip(np.zeros(32000), 32000), cfg)
        assert np.all(mel.values == np.log(cfg.logFloor))

    def test_MelTone(self):
        """
        The strongest mel bin of a 1 kHz tone is the filter centered nearest
        1 kHz, give or take one.
        """
        cfg = FrontendConfig()
        mel = computeMel(AudioClip(getTone(1000, 32000, 32000, 0.5), 32000), cfg)
        expected = int(np.argmin(np.abs(getMelCenters(cfg) - 1000.0)))
        assert np.all(np.abs(np.argmax(mel.values, axis=0) - expected) <= 1)

    def test_MelResamples(self):
        clip = AudioClip(np.random.default_rng(4).uniform(-1, 1, 44100), 44100)
        assert computeMel(clip, FrontendConfig()).getShape() == (256, 65)

    def test_MelSignAndScale(self):
        """
        The output ignores the sign of the input and shifts by 2 log(c) when
        the input is scaled by c.
        """
        frontend = MelFrontend()
        samples = np.random.default_rng(5).uniform(-0.25, 0.25, 32000)
        base = frontend.computeMel(AudioClip(samples, 32000)).values
        flipped = frontend.computeMel(AudioClip(-samples, 32000)).values
        scaled = frontend.computeMel(AudioClip(2.0 * samples, 32000)).values
        assert np.allclose(base, flipped, rtol=0, atol=1e-12)

        mask = base > np.log(1e-5) + 1.0
        assert mask.any()
        assert np.allclose(scaled[mask] - base[mask], 2 * np.log(2.0), rtol=0, atol=1e-9)

    def test_MelLoudInput(self):
        clip = AudioClip(np.random.default_rng(6).uniform(-1e6, 1e6, 32000), 32000)
        assert np.all(np.isfinite(computeMel(clip, FrontendConfig()).values))

    def test_MelFingerprint(self):
        clip = AudioClip(np.random.default_rng(7).uniform(-1, 1, 32000), 32000)
        first = computeMel(clip, FrontendConfig())
        second = computeMel(clip, FrontendConfig())
        other = computeMel(clip, FrontendConfig(logFloor=1e-6))
        assert np.array_equal(first.values, second.values)
        assert first.fingerprint == second.fingerprint
        assert first.fingerprint != other.fingerprint


class TestWavIO:
    def test_WavRoundTrip(self, tmp_path):
        samples = np.random.default_rng(8).uniform(-1, 1, 8000)
        path = tmp_path / "clip.wav"
        writeWav(path, AudioClip(samples, 16000))
        clip = readWav(path)
        assert clip.sampleRateHz == 16000
        assert np.array_equal(clip.samples, samples.astype(np.float32).astype(np.float64))

    def test_WavPcm16(self, tmp_path):
        path = tmp_path / "pcm.wav"
        sf.write(str(path), np.zeros(1000, dtype=np.int16), 32000, subtype="PCM_16")
        clip = readWav(path)
        assert clip.samples.size == 1000
        assert np.all(clip.samples == 0.0)

    def test_WavStereo(self, tmp_path):
        path = tmp_path / "stereo.wav"
        sf.write(str(path), np.zeros((1000, 2)), 32000, subtype="PCM_16")
        with pytest.raises(InvalidInputError) as excinfo:
            readWav(path)
        assert "2 channels" in str(excinfo.value)

    def test_WavMissing(self, tmp_path):
        with pytest.raises(InvalidInputError):
            readWav(tmp_path / "missing.wav")
