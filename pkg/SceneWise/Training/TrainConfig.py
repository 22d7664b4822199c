"""
TrainConfig.py

Created: 09/20/26
Last Modified: 10/11/26

Description: Hyperparameters of the two training stages. Stage 2 (per-device
fine-tuning) reuses the schedule shape of stage 1 with a lower peak learning
rate, 0.1 x the stage-1 peak unless given.
"""
# Library Imports.
from dataclasses import asdict, dataclass, fields
import hashlib
import json

# Custom Imports.
from SceneWise.Errors.Errors import ConfigurationError
from SceneWise.Network.FreqMixStyle import FreqMixStyleConfig


@dataclass(frozen=True)
class TrainConfig:
    stage1Epochs: int = 150
    stage2Epochs: int = 50
    batchSize: int = 256
    stage1LearningRate: float = 0.005
    stage2LearningRate: float = None
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    weightDecay: float = 0.004
    warmupFraction: float = 0.1
    finalFraction: float = 0.01
    mixStyleAlpha: float = 0.3
    mixStyleProbability: float = 0.4
    stage2MixStyle: bool = False
    seed: int = 2025
    precision: str = "fp16"
    validationFraction: float = 0.1
    workers: int = 1

    def __post_init__(self):
        if self.stage2LearningRate is None:
            object.__setattr__(self, "stage2LearningRate", 0.1 * self.stage1LearningRate)
        self.validate()

    def validate(self):
        if self.stage1Epochs < 0 or self.stage2Epochs < 0:
            raise ConfigurationError("Epoch counts must be >= 0.")
        if self.batchSize < 1:
            raise ConfigurationError("batchSize must be >= 1, got " + str(self.batchSize) + ".")
        if self.stage1LearningRate < 0 or self.stage2LearningRate < 0:
            raise ConfigurationError("Learning rates must be >= 0.")
        if self.stage2LearningRate > self.stage1LearningRate:
            raise ConfigurationError(
                "The stage-2 learning rate ("
                + str(self.stage2LearningRate)
                + ") may not exceed the stage-1 learning rate ("
                + str(self.stage1LearningRate)
                + ")."
            )
        if self.precision not in ("fp16", "fp32"):
            raise ConfigurationError(
                "Checkpoint precision must be fp16 or fp32, got '" + str(self.precision) + "'."
            )
        if not 0.0 <= self.validationFraction < 1.0:
            raise ConfigurationError("validationFraction must lie in [0, 1).")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1.")
        self.getMixStyleConfig()

    def getMixStyleConfig(self):
        return FreqMixStyleConfig(self.mixStyleAlpha, self.mixStyleProbability)

    def toDict(self):
        return asdict(self)

    @staticmethod
    def fromDict(values):
        """
        Builds a TrainConfig from a dict; unknown keys are rejected.
        """
        known = {field.name for field in fields(TrainConfig)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigurationError("Unknown training settings: " + ", ".join(unknown) + ".")
        return TrainConfig(**values)

    def getHash(self):
        """
        Returns
        -------
        String: short digest of every setting except the worker count, which
        does not change results.
        """
        values = self.toDict()
        values.pop("workers")
        encoded = json.dumps(values, sort_keys=True).encode("utf-8")
        return hashlib.sha1(encoded).hexdigest()[:12]
