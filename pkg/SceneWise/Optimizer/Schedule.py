"""
Schedule.py

Created: 09/15/26
Last Modified: 09/30/26

Description: Implementation of the Schedule class.
"""
# Library Imports.


# Custom Imports.
from SceneWise.Errors.Errors import ConfigurationError


class Schedule:
    """
    The Schedule class provides the base API for derived classes to compute the
    learning rate of every optimizer step.

    By default, the schedule implemented by the concrete base class is a
    constant learning rate.
    """

    def __init__(self, scheduleType="Constant", peakLearningRate=0.005, totalSteps=1):
        """
        Parameters
        ----------
        scheduleType: String
            The name of the schedule type.
        peakLearningRate: float
            Largest learning rate of the run.
        totalSteps: int
            Number of optimizer steps the schedule spans.
        """
        if peakLearningRate < 0:
            raise ConfigurationError(
                "Learning rate must be >= 0, got " + str(peakLearningRate) + "."
            )
        if totalSteps < 0:
            raise ConfigurationError(
                "Step count must be >= 0, got " + str(totalSteps) + "."
            )

        # Name of the explicit schedule used.
        self._scheduleType = scheduleType

        self.peakLearningRate = float(peakLearningRate)
        self.totalSteps = int(totalSteps)

    def getLearningRate(self, step):
        """
        Parameters
        ----------
        step: int
            Zero-based optimizer step.

        Returns
        -------
        float: learning rate to use for that step.
        """
        return self.peakLearningRate

    def getScheduleType(self):
        return self._scheduleType
