"""
AudioClip.py

Created: 09/03/26
Last Modified: 09/28/26

Description: The AudioClip value type, a mono signal plus its sample rate.
"""
# Library Imports.
from dataclasses import dataclass

import numpy as np

# Custom Imports.
from SceneWise.Errors.Errors import InvalidInputError


@dataclass(frozen=True)
class AudioClip:
    """
    A mono audio clip. Samples are nominally in [-1, 1]; the frontend accepts
    any finite amplitude.
    """

    samples: np.ndarray
    sampleRateHz: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise InvalidInputError(
                "AudioClip expects a 1-D (mono) signal, got shape " + str(samples.shape)
            )
        if samples.size == 0:
            raise InvalidInputError("AudioClip has no samples.")
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("AudioClip contains non-finite samples.")
        if int(self.sampleRateHz) <= 0:
            raise InvalidInputError(
                "Sample rate must be positive, got " + str(self.sampleRateHz)
            )
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sampleRateHz", int(self.sampleRateHz))

    def getDuration(self):
        """
        Returns
        -------
        float: clip duration in seconds.
        """
        return self.samples.size / self.sampleRateHz
