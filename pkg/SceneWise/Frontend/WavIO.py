"""
WavIO.py

Created: 09/03/26
Last Modified: 10/09/26

Description: Reading and writing of mono WAV files.

Reading goes through soundfile (libsndfile), which covers 16/24/32-bit integer
PCM and 32-bit float. Writing uses scipy's WAV writer, which emits no time
stamped chunks, so a synthetic dataset regenerated from the same seed is byte
identical.
"""
# Library Imports.
import numpy as np
import soundfile as sf
from scipy.io import wavfile

# Custom Imports.
from SceneWise.Errors.Errors import InvalidInputError
from SceneWise.Frontend.AudioClip import AudioClip


# Subtypes we accept on read.
SUPPORTED_SUBTYPES = ("PCM_16", "PCM_24", "PCM_32", "FLOAT")


def readWav(path):
    """
    Reads a mono WAV file.

    Parameters
    ----------
    path: String or Path
        File to read.

    Returns
    -------
    AudioClip: the decoded clip, samples widened to float64.
    Raises InvalidInputError for multi-channel files or unsupported encodings.
    """
    try:
        info = sf.info(str(path))
    except RuntimeError as e:
        raise InvalidInputError("Cannot read audio file " + str(path) + ": " + str(e))

    if info.format != "WAV" or info.subtype not in SUPPORTED_SUBTYPES:
        raise InvalidInputError(
            "Unsupported audio encoding in "
            + str(path)
            + ": "
            + info.format
            + "/"
            + info.subtype
        )
    if info.channels != 1:
        raise InvalidInputError(
            "Only mono audio is supported; "
            + str(path)
            + " has "
            + str(info.channels)
            + " channels."
        )

    samples, sampleRate = sf.read(str(path), dtype="float64", always_2d=True)
    return AudioClip(samples[:, 0], sampleRate)


def writeWav(path, clip):
    """
    Writes a clip as a mono 32-bit float WAV file.

    Parameters
    ----------
    path: String or Path
        Destination file.
    clip: AudioClip
        Clip to write.
    """
    wavfile.write(str(path), clip.sampleRateHz, clip.samples.astype(np.float32))
