"""
TrainingPipeline.py

Created: 09/21/26
Last Modified: 10/14/26

Description: The two-stage training procedure.

    Stage 1   general model, every training device, Freq-MixStyle on.
    Stage 2   one copy of the general model per known device, fine-tuned on
              that device's clips only, Freq-MixStyle off by default.

Both stages run AdamW over shuffled mini-batches with a warmup + cosine
learning-rate schedule. The optimizer loop is single threaded; feature
extraction may use worker threads. Every random draw (initialization,
shuffling, mixing, validation split) comes from generators seeded by the
configured seed, so a rerun reproduces the same parameters bit for bit.

Each epoch appends one JSON object to the training log:

    {"stage": 1, "device": null, "epoch": 3, "step": 30, "lr": 0.0049,
     "loss": 1.93, "train_acc": 0.41, "val_acc": 0.38, "timestamp": "..."}
"""
# Library Imports.
from dataclasses import dataclass
from datetime import datetime
import json
import math
import zlib

import numpy as np
from tqdm import tqdm

# Custom Imports.
from SceneWise.Complexity.ComplexityAuditor import auditGraph
from SceneWise.Config.Logger import getLogger
from SceneWise.Errors.Errors import BudgetError, DataError, NonFiniteError
from SceneWise.Network.Checkpoint import dequantizeLoad, quantizeStore
from SceneWise.Network.FreqMixStyle import freqMixStyle
from SceneWise.Network.Loss import softmaxCrossEntropy
from SceneWise.Network.Model import Model
from SceneWise.Optimizer.AdamW import AdamW
from SceneWise.Optimizer.WarmupCosineSchedule import WarmupCosineSchedule
from SceneWise.Training.Features import extractFeatures, stackFeatures

logger = getLogger("training")

# Generator streams derived from the seed.
STREAM_INIT = 0
STREAM_SHUFFLE = 1
STREAM_MIX = 2
STREAM_FINETUNE = 3
STREAM_VALIDATION = 4


@dataclass
class TrainingData:
    """
    Network inputs of a labeled manifest. isValidation marks the held-out
    clips used for logging only.
    """

    features: np.ndarray
    targets: np.ndarray
    devices: np.ndarray
    isValidation: np.ndarray

    def select(self, mask):
        return self.features[mask], self.targets[mask]


def getValidationMask(manifest, fraction, seed):
    """
    Holds out a fraction of every (scene, device) cell. Cells keep at least one
    training clip.

    Returns
    -------
    np.ndarray: boolean mask in manifest order, True for held-out clips.
    """
    mask = np.zeros(len(manifest), dtype=bool)
    if fraction <= 0:
        return mask

    cells = {}
    for position, entry in enumerate(manifest.entries):
        cells.setdefault((entry.sceneLabel, entry.deviceId), []).append(position)

    rng = np.random.default_rng([seed, STREAM_VALIDATION])
    for key in sorted(cells):
        positions = cells[key]
        count = min(int(math.floor(fraction * len(positions))), len(positions) - 1)
        for i in rng.permutation(len(positions))[:count]:
            mask[positions[i]] = True
    return mask


class TrainingPipeline:
    """
    Trains the general and device-specific parameter sets of one graph.
    """

    def __init__(self, graph, cfg, labels, budget=None, logPath=None, showProgress=False):
        """
        Parameters
        ----------
        graph: ModelGraph
            Network to train. Must pass the budget at cfg.precision.
        cfg: TrainConfig
            Hyperparameters.
        labels: list
            Scene labels; position i is class index i.
        budget: Budget
            Complexity limits; the task budget when None.
        logPath: String
            JSON-lines training log, appended to. No file log when None.
        showProgress: bool
            Show a progress bar over epochs.
        """
        if len(labels) != graph.classCount:
            raise DataError(
                "The graph has "
                + str(graph.classCount)
                + " outputs but the training data has "
                + str(len(labels))
                + " scene labels."
            )
        self.graph = graph
        self.cfg = cfg
        self.labels = list(labels)
        self.budget = budget
        self.logPath = logPath
        self.showProgress = showProgress
        self.model = Model(graph)
        self.history = []

        self._tensorNames = {}
        for index, layer in enumerate(self.model.layers):
            for name in layer.LEARNABLE:
                self._tensorNames[(index, name)] = layer.getName() + "." + name

    def auditBudget(self, title=""):
        """
        Audits the graph at the configured storage precision.

        Returns
        -------
        ComplexityReport: passing report. Raises BudgetError otherwise.
        """
        report = auditGraph(self.graph, self.cfg.precision, self.budget, title=title)
        if not report.passed:
            raise BudgetError(
                "Model '" + (title or "graph") + "' exceeds the complexity budget: "
                + ", ".join(report.failures) + ".",
                report,
            )
        return report

    def prepareData(self, manifest, frontend):
        """
        Extracts features and targets of a labeled training manifest and
        draws the validation split.

        Returns
        -------
        TrainingData: arrays in manifest order.
        """
        labelIndex = {label: i for i, label in enumerate(self.labels)}
        targets = []
        for entry in manifest.entries:
            if entry.sceneLabel not in labelIndex:
                raise DataError(
                    "Entry " + entry.filename + " has label " + repr(entry.sceneLabel)
                    + ", which is not one of the training labels."
                )
            targets.append(labelIndex[entry.sceneLabel])

        features, _ = extractFeatures(manifest, frontend, self.cfg.workers)
        data = TrainingData(
            features=stackFeatures(features),
            targets=np.array(targets, dtype=np.int64),
            devices=np.array([entry.deviceId for entry in manifest.entries], dtype=object),
            isValidation=getValidationMask(manifest, self.cfg.validationFraction, self.cfg.seed),
        )
        logger.info(
            "Prepared %d training and %d validation clips of shape %s.",
            int(np.count_nonzero(~data.isValidation)),
            int(np.count_nonzero(data.isValidation)),
            str(data.features.shape[1:]),
        )
        return data

    def initParams(self):
        return self.model.initParams(np.random.default_rng([self.cfg.seed, STREAM_INIT]))

    def trainGeneral(self, data, store=None):
        """
        Stage 1: trains on the clips of every device.

        Parameters
        ----------
        data: TrainingData
            Output of prepareData().
        store: ParameterStore
            Starting parameters; freshly initialized when None.

        Returns
        -------
        ParameterStore: trained fp32 parameters.
        """
        self.auditBudget("general")
        store = store if store is not None else self.initParams()
        x, y = data.select(~data.isValidation)
        validation = data.select(data.isValidation)
        if len(y) == 0:
            raise DataError("No training clips left for the general model.")

        seeds = (self.cfg.seed,)
        self._runStage(
            store, x, y, validation, 1, None, self.cfg.stage1Epochs,
            self.cfg.stage1LearningRate, True, seeds,
        )
        return store

    def finetuneDevice(self, generalStore, deviceId, data, registry):
        """
        Stage 2: fine-tunes a copy of the general parameters on one device.

        Returns
        -------
        ParameterStore: device parameters. generalStore is not modified.
        """
        registry.requireKnown(deviceId)
        self.auditBudget("device_" + deviceId)
        onDevice = data.devices == deviceId
        x, y = data.select(onDevice & ~data.isValidation)
        validation = data.select(onDevice & data.isValidation)
        if len(y) == 0:
            raise DataError("Device '" + deviceId + "' has no training clips.")

        store = generalStore.copy()
        seeds = (self.cfg.seed, STREAM_FINETUNE, zlib.crc32(deviceId.encode("utf-8")))
        self._runStage(
            store, x, y, validation, 2, deviceId, self.cfg.stage2Epochs,
            self.cfg.stage2LearningRate, self.cfg.stage2MixStyle, seeds,
        )
        return store

    def toStoredPrecision(self, store):
        """
        Rounds a store through the checkpoint precision so in-memory inference
        matches a saved and reloaded bank.
        """
        return dequantizeLoad(quantizeStore(store, self.cfg.precision))

    def _runStage(self, store, x, y, validation, stage, deviceId, epochs, peakLr, useMixStyle, seeds):
        count = len(y)
        stepsPerEpoch = int(math.ceil(count / self.cfg.batchSize))
        schedule = WarmupCosineSchedule(
            peakLr, epochs * stepsPerEpoch, self.cfg.warmupFraction, self.cfg.finalFraction
        )
        optimizer = AdamW(
            self.cfg.beta1, self.cfg.beta2, self.cfg.epsilon, self.cfg.weightDecay, self._tensorNames
        )
        shuffleRng = np.random.default_rng(list(seeds) + [STREAM_SHUFFLE])
        mixRng = np.random.default_rng(list(seeds) + [STREAM_MIX])
        mixConfig = self.cfg.getMixStyleConfig()
        label = "stage " + str(stage) + ("" if deviceId is None else " device " + deviceId)

        step = 0
        for epoch in tqdm(range(1, epochs + 1), desc=label, disable=not self.showProgress, leave=False):
            order = shuffleRng.permutation(count)
            lossSum = 0.0
            correct = 0
            for batchIndex in range(stepsPerEpoch):
                indices = order[batchIndex * self.cfg.batchSize : (batchIndex + 1) * self.cfg.batchSize]
                batch = x[indices]
                if useMixStyle:
                    batch = freqMixStyle(batch, mixConfig, mixRng)
                learningRate = schedule.getLearningRate(step)

                logits, caches = self.model.forward(batch, store, "train")
                loss, gradLogits = softmaxCrossEntropy(logits, y[indices])
                if not math.isfinite(loss):
                    raise NonFiniteError(
                        "Non-finite loss in " + label + ", epoch " + str(epoch)
                        + ", batch " + str(batchIndex + 1) + ", lr " + repr(learningRate) + "."
                    )
                self.model.backward(gradLogits, caches, store)
                try:
                    optimizer.step(store, learningRate)
                except NonFiniteError as e:
                    raise NonFiniteError(
                        label + ", epoch " + str(epoch) + ", batch " + str(batchIndex + 1)
                        + ", lr " + repr(learningRate) + ": " + str(e)
                    ) from e

                lossSum += loss * len(indices)
                correct += int(np.count_nonzero(np.argmax(logits, axis=1) == y[indices]))
                step += 1

            record = {
                "stage": stage,
                "device": deviceId,
                "epoch": epoch,
                "step": step,
                "lr": schedule.getLearningRate(max(step - 1, 0)),
                "loss": lossSum / count,
                "train_acc": correct / count,
                "val_acc": self.getAccuracy(validation[0], validation[1], store),
                "timestamp": datetime.now().isoformat(timespec="seconds"),
            }
            self._appendLog(record)
            logger.info(
                "%s epoch %d/%d: loss %.4f, train acc %.3f, val acc %s",
                label, epoch, epochs, record["loss"], record["train_acc"],
                "-" if record["val_acc"] is None else format(record["val_acc"], ".3f"),
            )

    def getAccuracy(self, x, y, store):
        """
        Eval-mode accuracy, or None for an empty set.
        """
        if len(y) == 0:
            return None
        correct = 0
        for start in range(0, len(y), self.cfg.batchSize):
            logits = self.model.predictLogits(x[start : start + self.cfg.batchSize], store)
            correct += int(np.count_nonzero(np.argmax(logits, axis=1) == y[start : start + self.cfg.batchSize]))
        return correct / len(y)

    def _appendLog(self, record):
        self.history.append(record)
        if self.logPath is None:
            return
        with open(self.logPath, "a", encoding="utf-8") as logFile:
            logFile.write(json.dumps(record) + "\n")
