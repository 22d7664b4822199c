"""
Inference.py

Created: 09/23/26
Last Modified: 10/14/26

Description: Device-routed inference over a ModelBank. Every entry is routed
by its device id: devices with a fine-tuned model use it, all others (the
literal "unknown" included) use the general model. Each clip is run through
its model on its own, so a clip's probabilities depend only on the clip and
the model it is routed to, never on which other clips share the run.
"""
# Library Imports.
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

# Custom Imports.
from SceneWise.Config.Logger import getLogger
from SceneWise.Errors.Errors import SceneWiseError
from SceneWise.Frontend.Frontend import MelFrontend
from SceneWise.Frontend.WavIO import readWav
from SceneWise.Network.Loss import softmax

logger = getLogger("inference")


@dataclass(frozen=True)
class PredictionRecord:
    """
    Prediction for one clip. probabilities follow the order of classLabels.
    """

    filename: str
    deviceId: str
    modelId: str
    probabilities: np.ndarray
    classLabels: tuple

    @property
    def predictedIndex(self):
        # np.argmax returns the first maximum, i.e. the lowest class index.
        return int(np.argmax(self.probabilities))

    @property
    def predictedLabel(self):
        return self.classLabels[self.predictedIndex]


@dataclass(frozen=True)
class InferenceFailure:
    filename: str
    message: str


def predictClip(bank, clip, deviceId, frontend=None):
    """
    Routes and classifies one clip.

    Returns
    -------
    tuple: (model id, float64 probabilities).
    """
    frontend = frontend if frontend is not None else MelFrontend(bank.frontendConfig)
    modelId, store = bank.route(deviceId)
    values = frontend.computeMel(clip).values.astype(np.float32)
    logits = bank.model.predictLogits(values[None, None, :, :], store)
    return modelId, softmax(logits.astype(np.float64))[0]


def routeAndPredict(bank, manifest, workers=1):
    """
    Classifies every manifest entry.

    Parameters
    ----------
    bank: ModelBank
        Loaded bank.
    manifest: Manifest
        Entries with device ids.
    workers: int
        Threads decoding and classifying clips.

    Returns
    -------
    tuple: (list of PredictionRecord in manifest order, list of
    InferenceFailure for entries that could not be processed).
    """
    frontend = MelFrontend(bank.frontendConfig)
    labels = tuple(bank.labels)

    def run(entry):
        try:
            clip = readWav(manifest.resolvePath(entry))
            modelId, probabilities = predictClip(bank, clip, entry.deviceId, frontend)
            return PredictionRecord(entry.filename, entry.deviceId, modelId, probabilities, labels)
        except (SceneWiseError, OSError, RuntimeError) as e:
            return InferenceFailure(entry.filename, str(e))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, manifest.entries))
    else:
        results = [run(entry) for entry in manifest.entries]

    records = [result for result in results if isinstance(result, PredictionRecord)]
    failures = [result for result in results if isinstance(result, InferenceFailure)]
    for failure in failures:
        logger.warning("Skipped %s: %s", failure.filename, failure.message)

    routed = {}
    for record in records:
        routed[record.modelId] = routed.get(record.modelId, 0) + 1
    logger.info(
        "Classified %d clips (%s); %d failures.",
        len(records),
        ", ".join(modelId + ": " + str(count) for modelId, count in sorted(routed.items())),
        len(failures),
    )
    return records, failures
