"""
test_CLI.py

Created: 09/30/26
Last Modified: 10/16/26

Description: Tests of the command line entry point: settings, exit codes and
the files each subcommand leaves behind.
"""
# Library Imports.
import json
import numpy as np
import os
import pytest
import sys

sys.path.append("../")

# Custom Imports.
from SceneWise.Config.RunConfig import EXTERNAL_ROOT
from SceneWise.Dataset.DeviceRegistry import DeviceRegistry
from SceneWise.Dataset.Manifest import Manifest, RecordingEntry, loadManifest, writeManifest
from SceneWise.Frontend.AudioClip import AudioClip
from SceneWise.Frontend.Frontend import FrontendConfig
from SceneWise.Frontend.WavIO import writeWav
from SceneWise.Inference.Inference import routeAndPredict
from SceneWise.Inference.Metrics import macroAccuracy
from SceneWise.Inference.Submission import loadSubmission
from SceneWise.Network.Model import Model
from SceneWise.Network.ModelGraph import parseGraph
from SceneWise.SceneCLI import main
from SceneWise.Training.ModelBank import GENERAL_NAME, buildBank, loadBank

TINY_GRAPH = """
input 1 16 16
classes 2
conv2d name=conv in=1 out=4 kernel=3,3 padding=1,1 bias=false
batchnorm2d name=bn channels=4
relu name=act
global_avg_pool name=pool
linear name=fc in=4 out=2
"""

REFERENCE_GRAPH = os.path.join(EXTERNAL_ROOT, "ReferenceGraph.txt")


def saveTinyBank(directory):
    graph = parseGraph(TINY_GRAPH)
    general = Model(graph).initParams(np.random.default_rng(0))
    device = general.copy()
    device.setTensor(4, "bias", np.array([0.3, -0.3], dtype=np.float32))
    frontend = FrontendConfig(fftSize=1024, windowSamples=1024, hopSamples=512, melBins=16)
    bank = buildBank(graph, general, {"b": device}, DeviceRegistry(["a", "b"]), ["bus", "park"], frontend)
    bank.save(str(directory))
    return bank


def writeTestManifest(directory, labeled=False):
    entries = []
    for index, device in enumerate(("a", "b", "s7")):
        name = "clip" + str(index) + ".wav"
        samples = np.random.default_rng(index).uniform(-0.5, 0.5, 8000)
        writeWav(directory / name, AudioClip(samples, 32000))
        entries.append(RecordingEntry(name, device, "bus" if labeled else None))
    path = directory / "test.tsv"
    writeManifest(Manifest(entries, "test", str(directory)), path)
    return path


class TestSettings:
    def test_ShowConfig(self, capsys):
        assert main(["--show-config"]) == 0
        values = json.loads(capsys.readouterr().out)
        assert values["preset"] == "full"
        assert values["train"]["stage1Epochs"] == 150
        assert values["budget"] == {"maxMemoryBytes": 128000, "maxMacs": 30000000}
        assert "presets" not in values

    def test_PresetAndFlags(self, capsys):
        """
        Flags win over the preset, and may follow the subcommand.
        """
        assert main(["--preset", "desk", "train", "--seed", "7", "--epochs", "2", "--show-config"]) == 0
        values = json.loads(capsys.readouterr().out)
        assert values["preset"] == "desk"
        assert values["seed"] == 7
        assert values["train"]["stage1Epochs"] == 2
        assert values["train"]["stage2Epochs"] == 2
        assert values["train"]["batchSize"] == 32
        assert values["paths"]["graph"] == "DeskGraph.txt"

    def test_ConfigFile(self, tmp_path, capsys):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"preset": "desk", "workers": 3, "train": {"batchSize": 16}}))
        assert main(["--config", str(path), "--show-config"]) == 0
        values = json.loads(capsys.readouterr().out)
        assert values["workers"] == 3
        assert values["train"]["batchSize"] == 16
        assert values["train"]["stage1Epochs"] == 15

    def test_BadSettings(self, tmp_path, capsys):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"preset": "huge"}))
        assert main(["--config", str(path), "--show-config"]) == 2
        assert "Unknown preset 'huge'" in capsys.readouterr().err

        path.write_text("[1, 2]")
        assert main(["--config", str(path), "audit"]) == 2
        assert main(["--config", str(tmp_path / "absent.json"), "audit"]) == 2

    def test_UsageErrors(self, tmp_path, capsys):
        assert main([]) == 2
        assert main(["--out", str(tmp_path), "train", "--stage", "1", "--device", "b"]) == 2
        assert "stage 2 only" in capsys.readouterr().err
        with pytest.raises(SystemExit) as excinfo:
            main(["audit", "--precision", "bf16"])
        assert excinfo.value.code == 2


class TestAudit:
    def test_ReferenceGraph(self, capsys):
        assert main(["audit", REFERENCE_GRAPH]) == 0
        out = capsys.readouterr().out
        assert "14,619,200" in out
        assert "PASS" in out

    def test_DefaultTarget(self, capsys):
        """
        Without a target the configured graph is audited.
        """
        assert main(["--preset", "desk", "audit"]) == 0
        assert "1,280,480" in capsys.readouterr().out

    def test_OverBudget(self, capsys):
        assert main(["audit", REFERENCE_GRAPH, "--precision", "fp32"]) == 1
        assert "FAIL (memory)" in capsys.readouterr().out

    def test_FusedAudit(self, capsys):
        assert main(["audit", REFERENCE_GRAPH, "--fused"]) == 0
        assert "(fused)" in capsys.readouterr().out

    def test_MalformedGraph(self, tmp_path, capsys):
        path = tmp_path / "broken.txt"
        path.write_text("input 1 x 65\nclasses 10\n")
        assert main(["audit", str(path)]) == 2
        err = capsys.readouterr().err
        assert str(path) in err
        assert "line 1" in err

    def test_MissingGraph(self, tmp_path):
        assert main(["audit", str(tmp_path / "absent.txt")]) == 2

    def test_BankAudit(self, tmp_path, capsys):
        saveTinyBank(tmp_path / "bank")
        assert main(["audit", str(tmp_path / "bank")]) == 0
        out = capsys.readouterr().out
        assert "general" in out
        assert "device_b" in out


class TestEvaluate:
    def test_PredictOnly(self, tmp_path):
        saveTinyBank(tmp_path / "bank")
        manifestPath = writeTestManifest(tmp_path)
        argv = [
            "--out", str(tmp_path / "run"), "evaluate",
            "--bank", str(tmp_path / "bank"), "--manifest", str(manifestPath), "--predict-only",
        ]
        assert main(argv) == 0

        submissionPath = tmp_path / "run" / "eval" / "submission.tsv"
        lines = submissionPath.read_text().splitlines()
        assert lines[0].split("\t") == ["filename", "scene_label", "bus", "park"]
        assert [line.split("\t")[0] for line in lines[1:]] == ["clip0.wav", "clip1.wav", "clip2.wav"]
        records = loadSubmission(str(submissionPath))
        assert len(records) == 3
        assert not (tmp_path / "run" / "eval" / "metrics.json").exists()

    def test_UnlabeledNeedsPredictOnly(self, tmp_path, capsys):
        saveTinyBank(tmp_path / "bank")
        manifestPath = writeTestManifest(tmp_path)
        argv = ["--out", str(tmp_path / "run"), "evaluate", "--bank", str(tmp_path / "bank"), "--manifest", str(manifestPath)]
        assert main(argv) == 1
        assert "--predict-only" in capsys.readouterr().err

    def test_LabeledManifest(self, tmp_path, capsys):
        saveTinyBank(tmp_path / "bank")
        manifestPath = writeTestManifest(tmp_path, labeled=True)
        argv = [
            "--out", str(tmp_path / "run"), "evaluate",
            "--bank", str(tmp_path / "bank"), "--manifest", str(manifestPath), "--compare-general",
        ]
        assert main(argv) == 0
        out = capsys.readouterr().out
        assert "general: macro accuracy" in out
        assert "bank: macro accuracy" in out

        evalDir = tmp_path / "run" / "eval"
        with open(evalDir / "metrics.json", "r") as metricsFile:
            metrics = json.load(metricsFile)
        assert sorted(metrics["rows"]) == ["bank", "general"]
        assert metrics["failures"] == []
        with open(evalDir / "device_table.json", "r") as tableFile:
            table = json.load(tableFile)
        assert table["columns"][:2] == ["a", "b"]
        assert (evalDir / "device_table.txt").exists()
        assert (evalDir / "submission.tsv").exists()

    def test_MissingManifest(self, tmp_path):
        saveTinyBank(tmp_path / "bank")
        argv = ["--out", str(tmp_path), "evaluate", "--bank", str(tmp_path / "bank")]
        assert main(argv) == 1

    def test_MissingBank(self, tmp_path):
        manifestPath = writeTestManifest(tmp_path)
        argv = ["--out", str(tmp_path), "evaluate", "--manifest", str(manifestPath), "--predict-only"]
        assert main(argv) == 1


class TestSynth:
    def test_SmallDataset(self, tmp_path, capsys):
        path = tmp_path / "small.json"
        path.write_text(
            json.dumps(
                {
                    "synth": {
                        "sceneCount": 2,
                        "trainClipsPerCell": 1,
                        "testClipsPerKnownCell": 1,
                        "testClipsPerUnknownCell": 1,
                    }
                }
            )
        )
        assert main(["--config", str(path), "--out", str(tmp_path / "run"), "synth"]) == 0
        out = capsys.readouterr().out
        assert "clips per scene and device" in out
        assert "train clips: " in out

        datasetDir = tmp_path / "run" / "dataset"
        assert (datasetDir / "train.tsv").exists()
        assert (datasetDir / "test.tsv").exists()
        assert (datasetDir / "evaluation_setup" / "eval.tsv").exists()
        assert (datasetDir / "dataset.json").exists()

    def test_MissingProfiles(self, tmp_path):
        argv = ["--out", str(tmp_path), "synth", "--profiles", str(tmp_path / "absent.json")]
        assert main(argv) == 2


class TestTrain:
    def test_MissingManifest(self, tmp_path, capsys):
        assert main(["--preset", "desk", "--out", str(tmp_path), "train"]) == 1
        assert "run synth first" in capsys.readouterr().err

    def test_StageTwoNeedsBank(self, tmp_path, capsys):
        entries = [RecordingEntry("x" + str(i) + ".wav", "a", "scene" + str(i)) for i in range(10)]
        writeManifest(Manifest(entries, "train", str(tmp_path)), tmp_path / "dataset" / "train.tsv")
        assert main(["--preset", "desk", "--out", str(tmp_path), "train", "--stage", "2"]) == 1
        assert "run --stage 1 first" in capsys.readouterr().err




def runDesk(outDir):
    common = ["--preset", "desk", "--out", str(outDir)]
    assert main(common + ["synth"]) == 0
    assert main(common + ["train"]) == 0
    assert main(common + ["evaluate", "--compare-general"]) == 0
    return outDir


def readTrainingLog(path):
    """
    Training log records with their timestamps removed.
    """
    records = []
    with open(path, "r") as logFile:
        for line in logFile:
            record = json.loads(line)
            record.pop("timestamp")
            records.append(record)
    return records


def getDeviceSplit(outDir):
    bank = loadBank(str(outDir / "bank"))
    test = loadManifest(outDir / "dataset" / "test.tsv", "test")
    known = Manifest([e for e in test if bank.registry.isKnown(e.deviceId)], "test", test.root)
    unknown = Manifest([e for e in test if not bank.registry.isKnown(e.deviceId)], "test", test.root)
    return bank, known, unknown


@pytest.fixture(scope="class")
def deskRuns(tmp_path_factory):
    """
    Two complete desk runs with the same seed.
    """
    return [runDesk(tmp_path_factory.mktemp("desk")) for _ in range(2)]


@pytest.mark.additional
class TestDeskRun:
    """
    The desk preset end to end: 10 scenes, 6 known and 3 unknown devices,
    40 training clips per scene and device, 15 + 5 epochs.
    """

    def test_DatasetSize(self, deskRuns):
        with open(deskRuns[0] / "dataset" / "dataset.json", "r") as summaryFile:
            summary = json.load(summaryFile)
        assert len(summary["scenes"]) == 10
        assert len(summary["known_devices"]) == 6
        assert len(summary["unknown_devices"]) == 3
        assert summary["train_entries"] == 10 * 6 * 40

    def test_GeneralModelLearns(self, deskRuns):
        bank, known, _ = getDeviceSplit(deskRuns[0])
        records, failures = routeAndPredict(bank.getGeneralOnly(), known)
        assert failures == []
        accuracy = macroAccuracy(records, known)
        assert accuracy >= 0.70

        history = [r for r in readTrainingLog(deskRuns[0] / "logs" / "train.jsonl") if r["stage"] == 1]
        assert len(history) == 15
        assert history[-1]["loss"] < history[0]["loss"]

    def test_BankBeatsGeneral(self, deskRuns):
        """
        Device models raise the mean known-device accuracy by at least one
        point, while unknown devices get the same predictions bit for bit.
        """
        bank, _, unknown = getDeviceSplit(deskRuns[0])
        with open(deskRuns[0] / "eval" / "metrics.json", "r") as metricsFile:
            rows = json.load(metricsFile)["rows"]
        general = rows["general"][0]["per_device_accuracy"]
        full = rows["bank"][0]["per_device_accuracy"]
        knownDevices = bank.registry.getKnownDevices()
        assert sorted(bank.deviceStores) == sorted(knownDevices)
        gain = np.mean([full[d] for d in knownDevices]) - np.mean([general[d] for d in knownDevices])
        assert 100 * gain >= 1.0
        for deviceId in unknown.getDevices():
            assert full[deviceId] == general[deviceId]

        fullRecords, _ = routeAndPredict(bank, unknown)
        generalRecords, _ = routeAndPredict(bank.getGeneralOnly(), unknown)
        assert len(fullRecords) == len(unknown) == 3 * 10 * 10
        for first, second in zip(fullRecords, generalRecords):
            assert first.modelId == GENERAL_NAME
            assert np.array_equal(first.probabilities, second.probabilities)

    def test_BankWithinBudget(self, deskRuns, capsys):
        assert main(["audit", str(deskRuns[0] / "bank")]) == 0
        assert "FAIL" not in capsys.readouterr().out

    def test_Deterministic(self, deskRuns):
        """
        Same seed, same checkpoints and submission bytes, and the same training
        log apart from timestamps.
        """
        first, second = deskRuns
        checkpoints = sorted(name for name in os.listdir(first / "bank") if name.endswith(".ckpt"))
        assert len(checkpoints) == 7
        assert checkpoints == sorted(name for name in os.listdir(second / "bank") if name.endswith(".ckpt"))
        for name in checkpoints:
            assert (first / "bank" / name).read_bytes() == (second / "bank" / name).read_bytes()

        firstSubmission = (first / "eval" / "submission.tsv").read_bytes()
        assert firstSubmission == (second / "eval" / "submission.tsv").read_bytes()
        firstLog = readTrainingLog(first / "logs" / "train.jsonl")
        assert firstLog == readTrainingLog(second / "logs" / "train.jsonl")
        assert len(firstLog) == 15 + 6 * 5
