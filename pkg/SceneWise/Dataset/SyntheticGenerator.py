"""
SyntheticGenerator.py

Created: 09/19/26
Last Modified: 10/13/26

Description: Builds a desk-scale device-shift dataset. Every source clip of a
scene is rendered through several devices in parallel, so the same content
exists once per device, mirroring how the challenge data was recorded and
simulated from the reference device.

Clip indices [0, trainClipsPerCell) of each scene go to training and are
rendered through the training devices only. The following indices go to the
test split and are rendered through every device; known devices get
testClipsPerKnownCell clips per scene and unknown devices get
testClipsPerUnknownCell, which sets the known:unknown ratio of the test set.

Output layout:

    <out>/audio/<scene>-<city>-<index>-0-<device>.wav
    <out>/train.tsv                     labeled, known devices only
    <out>/test.tsv                      labeled, every device
    <out>/evaluation_setup/eval.tsv     unknown devices masked, no labels
    <out>/dataset.json                  summary of the run
"""
# Library Imports.
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import jsbeautifier
import numpy as np

# Custom Imports.
from SceneWise.Config.Logger import getLogger
from SceneWise.Dataset.DeviceProfile import applyDeviceIr
from SceneWise.Dataset.DeviceRegistry import DeviceRegistry
from SceneWise.Dataset.Manifest import Manifest, RecordingEntry, writeManifest
from SceneWise.Dataset.SceneProfile import buildSceneProfiles, renderSceneClip
from SceneWise.Errors.Errors import ConfigurationError
from SceneWise.Frontend.WavIO import writeWav

logger = getLogger("dataset")

# City names given to synthetic recordings, assigned round-robin by clip index.
CITIES = ("lyon", "milan", "prague", "vienna")


@dataclass
class SplitSpec:
    """
    Which devices enter training and how many clips each (scene, device) cell
    receives per split. An empty trainDevices list means every known profile.
    """

    trainDevices: list = field(default_factory=list)
    trainClipsPerCell: int = 40
    testClipsPerKnownCell: int = 10
    testClipsPerUnknownCell: int = 10

    def validate(self, profiles):
        byId = {profile.deviceId: profile for profile in profiles}
        for deviceId in self.trainDevices:
            if deviceId not in byId:
                raise ConfigurationError(
                    "Split requests training device '" + deviceId + "' that has no profile."
                )
            if not byId[deviceId].isKnown:
                raise ConfigurationError(
                    "Split requests unknown device '"
                    + deviceId
                    + "' in training; unknown devices may only appear in the test split."
                )
        for name in ("trainClipsPerCell", "testClipsPerKnownCell", "testClipsPerUnknownCell"):
            if getattr(self, name) < 0:
                raise ConfigurationError(name + " must be >= 0.")
        if self.trainClipsPerCell < 1:
            raise ConfigurationError("trainClipsPerCell must be >= 1.")


def getTrainDevices(profiles, splitSpec):
    if splitSpec.trainDevices:
        return list(splitSpec.trainDevices)
    return [profile.deviceId for profile in profiles if profile.isKnown]


def _getFilename(scene, clipIndex, deviceId):
    city = CITIES[clipIndex % len(CITIES)]
    return "audio/" + scene + "-" + city + "-" + str(clipIndex) + "-0-" + deviceId + ".wav"


def _getIdentifier(clipIndex):
    return CITIES[clipIndex % len(CITIES)] + "-" + str(clipIndex)


def _renderSource(outDir, seed, sceneIndex, sceneProfile, clipIndex, devices, sampleRateHz):
    """Renders one source clip through each listed device and writes the WAVs."""
    rng = np.random.default_rng([seed, sceneIndex, clipIndex])
    source = renderSceneClip(sceneProfile, rng, sampleRateHz)
    for profile in devices:
        clip = applyDeviceIr(source, profile)
        writeWav(
            os.path.join(outDir, _getFilename(sceneProfile.sceneLabel, clipIndex, profile.deviceId)),
            clip,
        )


def synthGenerate(outDir, seed, sceneCount, profiles, splitSpec, sampleRateHz=32000, workers=1):
    """
    Generates the dataset.

    Parameters
    ----------
    outDir: String
        Output directory; created if missing.
    seed: int
        Seed of every random draw.
    sceneCount: int
        Number of scenes, >= 2.
    profiles: list
        SyntheticDeviceProfile objects. Needs the identity profile, at least
        one known and at least one unknown device.
    splitSpec: SplitSpec
        Clip counts per cell and the training devices.
    sampleRateHz: int
        Rate of the rendered audio.
    workers: int
        Threads rendering source clips. Output does not depend on it.

    Returns
    -------
    tuple: (train Manifest, test Manifest).
    """
    if sceneCount < 2:
        raise ConfigurationError("At least two scenes are needed, got " + str(sceneCount) + ".")
    if not any(profile.isIdentity() for profile in profiles):
        raise ConfigurationError("The device profiles need an identity (reference) device.")
    if not any(profile.isKnown for profile in profiles):
        raise ConfigurationError("The device profiles need at least one known device.")
    if all(profile.isKnown for profile in profiles):
        raise ConfigurationError("The device profiles need at least one unknown device.")
    splitSpec.validate(profiles)

    trainIds = getTrainDevices(profiles, splitSpec)
    trainDevices = [profile for profile in profiles if profile.deviceId in trainIds]
    scenes = buildSceneProfiles(seed, sceneCount)
    testStart = splitSpec.trainClipsPerCell
    testClips = max(splitSpec.testClipsPerKnownCell, splitSpec.testClipsPerUnknownCell)

    def getTestDevices(clipIndex):
        offset = clipIndex - testStart
        return [
            profile
            for profile in profiles
            if offset
            < (
                splitSpec.testClipsPerKnownCell
                if profile.deviceId in trainIds
                else splitSpec.testClipsPerUnknownCell
            )
        ]

    jobs = []
    for sceneIndex, scene in enumerate(scenes):
        for clipIndex in range(testStart):
            jobs.append((sceneIndex, scene, clipIndex, trainDevices))
        for clipIndex in range(testStart, testStart + testClips):
            jobs.append((sceneIndex, scene, clipIndex, getTestDevices(clipIndex)))

    os.makedirs(os.path.join(outDir, "audio"), exist_ok=True)
    with ThreadPoolExecutor(max_workers=max(1, int(workers))) as pool:
        futures = [
            pool.submit(_renderSource, outDir, seed, sceneIndex, scene, clipIndex, devices, sampleRateHz)
            for sceneIndex, scene, clipIndex, devices in jobs
        ]
        for future in futures:
            future.result()

    # Manifests are assembled in a fixed scene, device, clip order.
    trainEntries = []
    testEntries = []
    for scene in scenes:
        label = scene.sceneLabel
        for profile in trainDevices:
            for clipIndex in range(testStart):
                trainEntries.append(
                    RecordingEntry(
                        _getFilename(label, clipIndex, profile.deviceId),
                        profile.deviceId,
                        label,
                        _getIdentifier(clipIndex),
                    )
                )
        for profile in profiles:
            for clipIndex in range(testStart, testStart + testClips):
                testIds = [device.deviceId for device in getTestDevices(clipIndex)]
                if profile.deviceId in testIds:
                    testEntries.append(
                        RecordingEntry(
                            _getFilename(label, clipIndex, profile.deviceId),
                            profile.deviceId,
                            label,
                            _getIdentifier(clipIndex),
                        )
                    )

    trainManifest = Manifest(trainEntries, "train", outDir)
    testManifest = Manifest(testEntries, "test", outDir)
    registry = DeviceRegistry(trainIds)
    writeManifest(trainManifest, os.path.join(outDir, "train.tsv"))
    writeManifest(testManifest, os.path.join(outDir, "test.tsv"))
    writeManifest(
        registry.maskUnknownDevices(testManifest),
        os.path.join(outDir, "evaluation_setup", "eval.tsv"),
    )

    summary = {
        "seed": seed,
        "sample_rate_hz": sampleRateHz,
        "scenes": [scene.sceneLabel for scene in scenes],
        "known_devices": registry.getKnownDevices(),
        "unknown_devices": [p.deviceId for p in profiles if p.deviceId not in trainIds],
        "train_clips_per_cell": splitSpec.trainClipsPerCell,
        "test_clips_per_known_cell": splitSpec.testClipsPerKnownCell,
        "test_clips_per_unknown_cell": splitSpec.testClipsPerUnknownCell,
        "train_entries": len(trainEntries),
        "test_entries": len(testEntries),
    }
    options = jsbeautifier.default_options()
    options.indent_size = 4
    with open(os.path.join(outDir, "dataset.json"), "w", encoding="utf-8") as summaryFile:
        summaryFile.write(jsbeautifier.beautify(json.dumps(summary), options))

    logger.info(
        "Synthesized %d train and %d test clips: %d scenes, known devices %s, unknown devices %s.",
        len(trainEntries),
        len(testEntries),
        sceneCount,
        ",".join(summary["known_devices"]),
        ",".join(summary["unknown_devices"]),
    )
    return trainManifest, testManifest
