"""
WarmupCosineSchedule.py

Created: 09/15/26
Last Modified: 10/05/26

Description: Linear warmup followed by cosine decay.

    lr(s) = peak * (s + 1) / W                                  , s < W
            final + (peak - final) * (1 + cos(pi * p)) / 2      , s >= W

with W = round(warmupFraction * totalSteps), p the progress through the
remaining steps (0 at the first, 1 at the last) and final = finalFraction * peak.
"""
# Library Imports.
from math import cos, pi

# Custom Imports.
from SceneWise.Errors.Errors import ConfigurationError
from SceneWise.Optimizer.Schedule import Schedule


class WarmupCosineSchedule(Schedule):
    """
    Derived class of Schedule ramping up linearly and then decaying along a
    half cosine to a fraction of the peak.
    """

    def __init__(self, peakLearningRate=0.005, totalSteps=1, warmupFraction=0.1, finalFraction=0.01):
        super(WarmupCosineSchedule, self).__init__("WarmupCosine", peakLearningRate, totalSteps)
        if not 0.0 <= warmupFraction <= 1.0:
            raise ConfigurationError(
                "Warmup fraction must lie in [0, 1], got " + str(warmupFraction) + "."
            )
        if not 0.0 <= finalFraction <= 1.0:
            raise ConfigurationError(
                "Final fraction must lie in [0, 1], got " + str(finalFraction) + "."
            )
        self.warmupSteps = int(round(warmupFraction * self.totalSteps))
        self.finalLearningRate = finalFraction * self.peakLearningRate

    def getLearningRate(self, step):
        if step < self.warmupSteps:
            return self.peakLearningRate * (step + 1) / self.warmupSteps

        decaySteps = self.totalSteps - self.warmupSteps
        progress = min((step - self.warmupSteps) / max(decaySteps - 1, 1), 1.0)
        return self.finalLearningRate + (
            self.peakLearningRate - self.finalLearningRate
        ) * 0.5 * (1.0 + cos(pi * progress))
