"""
Metrics.py

Created: 09/24/26
Last Modified: 10/16/26

Description: Challenge metrics over prediction records.

    macro accuracy   unweighted mean of the per-class recalls, over classes
                     present in the ground truth (the ranking metric)
    device accuracy  fraction of correct clips per device (micro); a per-device
                     class-macro figure is reported as well
    cross-entropy    mean of -log(max(p_true, 1e-12))

Ground truth and device ids come from the labeled manifest, matched to the
records by file name.
"""
# Library Imports.
from dataclasses import dataclass, field
import json
import math

import jsbeautifier
import numpy as np
from sklearn.metrics import balanced_accuracy_score, recall_score

# Custom Imports.
from SceneWise.Errors.Errors import MetricError

# Probability floor applied before the logarithm.
PROBABILITY_FLOOR = 1e-12


@dataclass
class MetricsReport:
    macroAccuracy: float
    perClassRecall: dict
    perDeviceAccuracy: dict
    perDeviceMacroAccuracy: dict
    meanOverDevices: float
    crossEntropy: float
    classCounts: dict
    deviceCounts: dict
    total: int
    routing: dict = field(default_factory=dict)

    def toDict(self):
        return {
            "macro_over_classes": self.macroAccuracy,
            "mean_over_devices": self.meanOverDevices,
            "cross_entropy": self.crossEntropy,
            "per_class_recall": self.perClassRecall,
            "per_device_accuracy": self.perDeviceAccuracy,
            "per_device_macro_accuracy": self.perDeviceMacroAccuracy,
            "class_counts": self.classCounts,
            "device_counts": self.deviceCounts,
            "routing": self.routing,
            "total": self.total,
        }

    def save(self, path):
        options = jsbeautifier.default_options()
        options.indent_size = 4
        with open(path, "w", encoding="utf-8") as reportFile:
            reportFile.write(jsbeautifier.beautify(json.dumps(self.toDict()), options))


def _matchTruth(records, manifest):
    """
    Pairs each record with its manifest entry.

    Returns
    -------
    tuple: (true labels, predicted labels, device ids) in record order.
    """
    if not records:
        raise MetricError("No prediction records to evaluate.")
    byFile = {entry.filename: entry for entry in manifest.entries}
    truth, predicted, devices = [], [], []
    for record in records:
        entry = byFile.get(record.filename)
        if entry is None:
            raise MetricError("Record " + record.filename + " is not part of the manifest.")
        if not entry.sceneLabel:
            raise MetricError(
                "Entry "
                + record.filename
                + " has no ground-truth scene label; use --predict-only for unlabeled manifests."
            )
        truth.append(entry.sceneLabel)
        predicted.append(record.predictedLabel)
        devices.append(entry.deviceId)
    return truth, predicted, devices


def macroAccuracy(records, manifest):
    """
    Returns
    -------
    float: class-wise macro-averaged accuracy.
    """
    truth, predicted, _ = _matchTruth(records, manifest)
    return _macro(truth, predicted)


def _macro(truth, predicted):
    # Predicted classes absent from the truth do not enter the mean.
    # Exactly rounded sum of the recalls.
    present = sorted(set(truth))
    recalls = recall_score(truth, predicted, labels=present, average=None, zero_division=0)
    return math.fsum(float(recall) for recall in recalls) / len(present)


def crossEntropyMetric(records, manifest):
    """
    Returns
    -------
    float: mean negative log-probability of the true class.
    """
    truth, _, _ = _matchTruth(records, manifest)
    total = 0.0
    for record, label in zip(records, truth):
        if label not in record.classLabels:
            raise MetricError(
                "Label '" + label + "' of " + record.filename + " is not a class of the model."
            )
        probability = record.probabilities[record.classLabels.index(label)]
        total += -np.log(max(float(probability), PROBABILITY_FLOOR))
    return float(total / len(records))


def computeMetrics(records, manifest):
    """
    Computes every metric of the report.

    Returns
    -------
    MetricsReport: macro accuracy, per-class recall, per-device accuracy
    (micro and macro), their mean over devices, cross-entropy and counts.
    """
    truth, predicted, devices = _matchTruth(records, manifest)
    truthArray = np.array(truth, dtype=object)
    predictedArray = np.array(predicted, dtype=object)
    deviceArray = np.array(devices, dtype=object)

    present = sorted(set(truth))
    recalls = recall_score(truth, predicted, labels=present, average=None, zero_division=0)
    perClassRecall = {label: float(recall) for label, recall in zip(present, recalls)}

    perDeviceAccuracy = {}
    perDeviceMacro = {}
    deviceCounts = {}
    for deviceId in sorted(set(devices)):
        mask = deviceArray == deviceId
        deviceCounts[deviceId] = int(np.count_nonzero(mask))
        perDeviceAccuracy[deviceId] = float(np.mean(truthArray[mask] == predictedArray[mask]))
        perDeviceMacro[deviceId] = float(
            balanced_accuracy_score(list(truthArray[mask]), list(predictedArray[mask]))
        )

    routing = {}
    for record in records:
        routing[record.modelId] = routing.get(record.modelId, 0) + 1

    return MetricsReport(
        macroAccuracy=_macro(truth, predicted),
        perClassRecall=perClassRecall,
        perDeviceAccuracy=perDeviceAccuracy,
        perDeviceMacroAccuracy=perDeviceMacro,
        meanOverDevices=float(np.mean(list(perDeviceAccuracy.values()))),
        crossEntropy=crossEntropyMetric(records, manifest),
        classCounts={label: truth.count(label) for label in present},
        deviceCounts=deviceCounts,
        total=len(records),
        routing=routing,
    )
