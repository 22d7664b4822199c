"""
test_Inference.py

Created: 09/24/26
Last Modified: 10/16/26

Description: Tests of device-routed inference, the challenge metrics, the
per-device results table and submission files.
"""
# Library Imports.
import json
import math
import numpy as np
import pytest
import sys

sys.path.append("../")

# Custom Imports.
from SceneWise.Dataset.DeviceRegistry import DeviceRegistry
from SceneWise.Dataset.Manifest import Manifest, RecordingEntry
from SceneWise.Errors.Errors import FormatError, MetricError
from SceneWise.Frontend.AudioClip import AudioClip
from SceneWise.Frontend.Frontend import FrontendConfig
from SceneWise.Frontend.WavIO import writeWav
from SceneWise.Inference.DeviceTable import MACRO_COLUMN, DeviceTable, deviceTable
from SceneWise.Inference.Inference import PredictionRecord, routeAndPredict
from SceneWise.Inference.Metrics import MetricsReport, computeMetrics, crossEntropyMetric, macroAccuracy
from SceneWise.Inference.Submission import emitSubmission, loadSubmission
from SceneWise.Network.Model import Model
from SceneWise.Network.ModelGraph import parseGraph
from SceneWise.Training.ModelBank import GENERAL_NAME, buildBank

TINY_GRAPH = """
input 1 16 16
classes 3
conv2d name=conv in=1 out=4 kernel=3,3 padding=1,1 bias=false
batchnorm2d name=bn channels=4
relu name=act
global_avg_pool name=pool
linear name=fc in=4 out=3
"""

LABELS = ("bus", "park", "tram")

TEN_LABELS = tuple("class" + str(i) for i in range(10))


def getBank():
    graph = parseGraph(TINY_GRAPH)
    general = Model(graph).initParams(np.random.default_rng(0))
    device = general.copy()
    device.setTensor(4, "bias", np.array([0.5, 0.0, -0.5], dtype=np.float32))
    frontend = FrontendConfig(fftSize=1024, windowSamples=1024, hopSamples=512, melBins=16)
    return buildBank(graph, general, {"b": device}, DeviceRegistry(["a", "b"]), list(LABELS), frontend)


def writeClips(directory, count):
    names = []
    for index in range(count):
        name = "clip" + str(index) + ".wav"
        samples = np.random.default_rng(index).uniform(-0.5, 0.5, 8000)
        writeWav(directory / name, AudioClip(samples, 32000))
        names.append(name)
    return names


def getRecord(filename, probabilities, labels=("bus", "park"), deviceId="a", modelId=GENERAL_NAME):
    return PredictionRecord(filename, deviceId, modelId, np.array(probabilities, dtype=np.float64), tuple(labels))


def getReport(macro, perDevice):
    return MetricsReport(
        macroAccuracy=macro,
        perClassRecall={},
        perDeviceAccuracy=perDevice,
        perDeviceMacroAccuracy=dict(perDevice),
        meanOverDevices=float(np.mean(list(perDevice.values()))),
        crossEntropy=0.0,
        classCounts={},
        deviceCounts={},
        total=0,
    )


class TestRouting:
    def test_RoutesByDevice(self, tmp_path):
        names = writeClips(tmp_path, 4)
        devices = ["a", "b", "unknown", "s9"]
        manifest = Manifest(
            [RecordingEntry(name, device) for name, device in zip(names, devices)], "test", str(tmp_path)
        )
        records, failures = routeAndPredict(getBank(), manifest)
        assert failures == []
        assert [record.filename for record in records] == names
        assert [record.modelId for record in records] == [GENERAL_NAME, "device_b", GENERAL_NAME, GENERAL_NAME]
        for record in records:
            assert record.classLabels == LABELS
            assert record.probabilities.sum() == pytest.approx(1.0)
            assert record.predictedLabel in LABELS

    def test_UnknownDevicesUseGeneral(self, tmp_path):
        """
        A clip routed as unknown, as an unseen device or as a known device
        without its own model gets the general model's probabilities bit for
        bit; the device model gives different ones.
        """
        (name,) = writeClips(tmp_path, 1)
        manifest = Manifest(
            [RecordingEntry(name, device) for device in ("a", "unknown", "s9", "b")], "test", str(tmp_path)
        )
        records, _ = routeAndPredict(getBank(), manifest)
        general = records[0].probabilities
        assert np.array_equal(records[1].probabilities, general)
        assert np.array_equal(records[2].probabilities, general)
        assert not np.array_equal(records[3].probabilities, general)

    def test_ClipsIndependent(self, tmp_path):
        names = writeClips(tmp_path, 5)
        bank = getBank()
        manifest = Manifest([RecordingEntry(name, "a") for name in names], "test", str(tmp_path))
        together, _ = routeAndPredict(bank, manifest)
        threaded, _ = routeAndPredict(bank, manifest, workers=3)
        alone, _ = routeAndPredict(bank, Manifest([manifest.entries[2]], "test", str(tmp_path)))
        assert np.array_equal(alone[0].probabilities, together[2].probabilities)
        for first, second in zip(together, threaded):
            assert np.array_equal(first.probabilities, second.probabilities)

    def test_Failures(self, tmp_path):
        names = writeClips(tmp_path, 2)
        entries = [RecordingEntry(names[0], "a"), RecordingEntry("gone.wav", "a"), RecordingEntry(names[1], "b")]
        records, failures = routeAndPredict(getBank(), Manifest(entries, "test", str(tmp_path)))
        assert [record.filename for record in records] == names
        assert [failure.filename for failure in failures] == ["gone.wav"]


class TestMetrics:
    def getManifest(self):
        return Manifest(
            [
                RecordingEntry("1.wav", "a", "bus"),
                RecordingEntry("2.wav", "a", "bus"),
                RecordingEntry("3.wav", "b", "bus"),
                RecordingEntry("4.wav", "b", "bus"),
                RecordingEntry("5.wav", "a", "park"),
                RecordingEntry("6.wav", "b", "park"),
            ],
            "test",
        )

    def getRecords(self):
        """
        Bus recall 3/4, park recall 1/2.
        """
        return [
            getRecord("1.wav", [0.9, 0.1]),
            getRecord("2.wav", [0.6, 0.4]),
            getRecord("3.wav", [0.7, 0.3], deviceId="b", modelId="device_b"),
            getRecord("4.wav", [0.2, 0.8], deviceId="b", modelId="device_b"),
            getRecord("5.wav", [0.3, 0.7]),
            getRecord("6.wav", [0.55, 0.45], deviceId="b", modelId="device_b"),
        ]

    def test_MacroAccuracy(self):
        assert macroAccuracy(self.getRecords(), self.getManifest()) == pytest.approx(0.625)

    def test_UniformCrossEntropy(self):
        manifest = Manifest([RecordingEntry(str(i) + ".wav", "a", TEN_LABELS[i]) for i in range(10)], "test")
        records = [getRecord(str(i) + ".wav", np.full(10, 0.1), TEN_LABELS) for i in range(10)]
        assert abs(crossEntropyMetric(records, manifest) - math.log(10.0)) <= 1e-9

    def test_CrossEntropy(self):
        expected = -np.mean(np.log([0.9, 0.6, 0.7, 0.2, 0.7, 0.45]))
        assert crossEntropyMetric(self.getRecords(), self.getManifest()) == pytest.approx(expected)

        manifest = Manifest([RecordingEntry("1.wav", "a", "bus")], "test")
        floored = crossEntropyMetric([getRecord("1.wav", [0.0, 1.0])], manifest)
        assert floored == pytest.approx(-np.log(1e-12))

    def getNaiveMetrics(self, truth, rows, labels):
        """
        Per-record recomputation of macro accuracy and cross-entropy.
        """
        counts, hits = {}, {}
        loss = 0.0
        for label, row in zip(truth, rows):
            best = 0
            for i in range(len(row)):
                if row[i] > row[best]:
                    best = i
            counts[label] = counts.get(label, 0) + 1
            hits[label] = hits.get(label, 0) + (labels[best] == label)
            loss += -math.log(max(float(row[labels.index(label)]), 1e-12))
        macro = math.fsum(hits[label] / counts[label] for label in counts) / len(counts)
        return macro, loss / len(truth)

    def test_RandomPredictionSets(self):
        """
        Macro accuracy matches a per-record recount exactly, cross-entropy to
        a relative 1e-9, over 1,000 random prediction sets.
        """
        rng = np.random.default_rng(2025)
        for trial in range(1000):
            classCount = int(rng.integers(2, 11))
            labels = TEN_LABELS[:classCount]
            count = int(rng.integers(1, 41))
            truth = [labels[i] for i in rng.integers(0, classCount, count)]
            if trial % 10 == 0:
                # One-hot rows put zeros on the true class now and then.
                rows = np.eye(classCount)[rng.integers(0, classCount, count)]
            else:
                rows = rng.dirichlet(np.ones(classCount), count)

            names = [str(i) + ".wav" for i in range(count)]
            manifest = Manifest([RecordingEntry(n, "a", label) for n, label in zip(names, truth)], "test")
            records = [getRecord(n, row, labels) for n, row in zip(names, rows)]
            expectedMacro, expectedLoss = self.getNaiveMetrics(truth, rows, labels)

            assert macroAccuracy(records, manifest) == expectedMacro
            assert computeMetrics(records, manifest).macroAccuracy == expectedMacro
            assert crossEntropyMetric(records, manifest) == pytest.approx(expectedLoss, rel=1e-9)

    def test_ComputeMetrics(self):
        report = computeMetrics(self.getRecords(), self.getManifest())
        assert report.macroAccuracy == pytest.approx(0.625)
        assert report.perClassRecall == {"bus": 0.75, "park": 0.5}
        # Device a: 1.wav, 2.wav, 5.wav all right; device b: 3.wav right only.
        assert report.perDeviceAccuracy == {"a": 1.0, "b": pytest.approx(1 / 3)}
        assert report.perDeviceMacroAccuracy["a"] == 1.0
        assert report.perDeviceMacroAccuracy["b"] == pytest.approx(0.25)
        assert report.meanOverDevices == pytest.approx(2 / 3)
        assert report.classCounts == {"bus": 4, "park": 2}
        assert report.deviceCounts == {"a": 3, "b": 3}
        assert report.routing == {GENERAL_NAME: 3, "device_b": 3}
        assert report.total == 6
        assert report.toDict()["macro_over_classes"] == report.macroAccuracy

    def test_AbsentPredictedClass(self):
        """
        A class that is predicted but never true does not dilute the mean.
        """
        manifest = Manifest([RecordingEntry("1.wav", "a", "bus"), RecordingEntry("2.wav", "a", "bus")], "test")
        records = [getRecord("1.wav", [0.9, 0.1]), getRecord("2.wav", [0.1, 0.9])]
        assert macroAccuracy(records, manifest) == pytest.approx(0.5)

    def test_MetricErrors(self):
        manifest = self.getManifest()
        with pytest.raises(MetricError):
            macroAccuracy([], manifest)
        with pytest.raises(MetricError) as excinfo:
            macroAccuracy([getRecord("9.wav", [0.5, 0.5])], manifest)
        assert "9.wav" in str(excinfo.value)

        unlabeled = Manifest([RecordingEntry("1.wav", "a")], "test")
        with pytest.raises(MetricError) as excinfo:
            computeMetrics([getRecord("1.wav", [0.5, 0.5])], unlabeled)
        assert "--predict-only" in str(excinfo.value)

        foreign = Manifest([RecordingEntry("1.wav", "a", "metro")], "test")
        with pytest.raises(MetricError):
            crossEntropyMetric([getRecord("1.wav", [0.5, 0.5])], foreign)

    def test_SaveReport(self, tmp_path):
        report = computeMetrics(self.getRecords(), self.getManifest())
        path = tmp_path / "metrics.json"
        report.save(path)
        with open(path) as reportFile:
            values = json.load(reportFile)
        assert values["macro_over_classes"] == pytest.approx(0.625)
        assert values["per_device_accuracy"]["a"] == 1.0


class TestSubmission:
    def test_Layout(self, tmp_path):
        records = [
            getRecord(str(i) + ".wav", np.random.default_rng(i).dirichlet(np.ones(10)), TEN_LABELS) for i in range(3)
        ]
        path = tmp_path / "submission.tsv"
        emitSubmission(records, path)
        lines = path.read_text().split("\n")
        assert lines[-1] == ""
        rows = [line.split("\t") for line in lines[:-1]]
        assert len(rows) == 4
        assert all(len(row) == 12 for row in rows)
        assert rows[0] == ["filename", "scene_label"] + list(TEN_LABELS)
        assert rows[1][1] == records[0].predictedLabel

    def test_RoundTripMetrics(self, tmp_path):
        """
        Metrics computed from a reloaded submission equal those of the
        in-memory records exactly.
        """
        metrics = TestMetrics()
        records = [
            getRecord(record.filename, record.probabilities * 0.999 + 0.0005, deviceId=record.deviceId)
            for record in metrics.getRecords()
        ]
        manifest = metrics.getManifest()
        path = tmp_path / "submission.tsv"
        emitSubmission(records, path)
        loaded = loadSubmission(path, manifest)

        assert [record.deviceId for record in loaded] == [record.deviceId for record in records]
        assert all(record.modelId == "" for record in loaded)
        for first, second in zip(records, loaded):
            assert np.array_equal(first.probabilities, second.probabilities)
        original = computeMetrics(records, manifest)
        reloaded = computeMetrics(loaded, manifest)
        assert reloaded.macroAccuracy == original.macroAccuracy
        assert reloaded.crossEntropy == original.crossEntropy
        assert reloaded.perDeviceAccuracy == original.perDeviceAccuracy

    def test_EmitErrors(self, tmp_path):
        with pytest.raises(MetricError):
            emitSubmission([], tmp_path / "empty.tsv")
        mixed = [getRecord("1.wav", [0.6, 0.4]), getRecord("2.wav", [0.6, 0.4], ("park", "bus"))]
        with pytest.raises(MetricError):
            emitSubmission(mixed, tmp_path / "mixed.tsv")

    def test_FormatErrors(self, tmp_path):
        path = tmp_path / "submission.tsv"
        cases = [
            ("file\tlabel\tbus\tpark\n", "header"),
            ("filename\tscene_label\n", "header"),
            ("filename\tscene_label\tbus\tpark\n1.wav\tbus\t0.9\n", "line 2"),
            ("filename\tscene_label\tbus\tpark\n1.wav\tbus\t0.9\tlots\n", "not a number"),
            ("filename\tscene_label\tbus\tpark\n1.wav\tpark\t0.9\t0.1\n", "most probable"),
        ]
        for text, fragment in cases:
            path.write_text(text)
            with pytest.raises(FormatError) as excinfo:
                loadSubmission(path)
            assert fragment in str(excinfo.value)


class TestDeviceTable:
    def test_Columns(self):
        table = DeviceTable(DeviceRegistry(["b", "a"]))
        table.addRun("bank", getReport(0.5, {"unknown": 0.2, "s4": 0.3, "b": 0.6, "a": 0.7}))
        assert table.getColumns() == ["a", "b", "s4", "unknown"]
        assert table.getRowNames() == ["bank"]
        assert table.getCell("bank", "a") == (pytest.approx(70.0), 0.0, 1)
        assert table.getCell("bank", MACRO_COLUMN) == (pytest.approx(50.0), 0.0, 1)

    def test_SeveralRuns(self):
        """
        Cells over several runs report the mean and the sample standard
        deviation.
        """
        table = DeviceTable(DeviceRegistry(["a"]))
        table.addRun("bank", getReport(0.4, {"a": 0.5}))
        table.addRun("bank", getReport(0.6, {"a": 0.7, "s5": 0.1}))
        mean, std, count = table.getCell("bank", "a")
        assert mean == pytest.approx(60.0)
        assert std == pytest.approx(np.sqrt(200.0))
        assert count == 2
        assert table.getCell("bank", "s5") == (pytest.approx(10.0), 0.0, 1)

        text = table.render()
        lines = text.splitlines()
        assert lines[0].split()[0] == "model"
        assert MACRO_COLUMN in lines[0]
        assert set(lines[1]) == {"-"}
        assert "60.00 ± 14.14" in lines[2]
        assert "50.00 ± 14.14" in lines[2]

    def test_MissingCell(self):
        table = DeviceTable(DeviceRegistry(["a"]))
        table.addRun("general", getReport(0.4, {"a": 0.5}))
        table.addRun("bank", getReport(0.6, {"a": 0.7, "s5": 0.1}))
        assert table.getCell("general", "s5") is None
        assert table.getRowNames() == ["general", "bank"]
        generalLine = table.render().splitlines()[2]
        assert generalLine.startswith("general")
        assert generalLine.split()[2] == "-"

    def test_Save(self, tmp_path):
        table = DeviceTable(DeviceRegistry(["a"]))
        table.addRun("bank", getReport(0.4, {"a": 0.5, "unknown": 0.3}))
        path = tmp_path / "device_table.json"
        table.save(path)
        with open(path, encoding="utf-8") as tableFile:
            values = json.load(tableFile)
        assert values["columns"] == ["a", "unknown"]
        assert values["known_devices"] == ["a"]
        row = values["rows"]["bank"]
        assert row["runs"] == 1
        assert row["devices"]["unknown"]["mean"] == pytest.approx(30.0)
        assert row["macro_over_classes"]["mean"] == pytest.approx(40.0)
        assert row["mean_over_devices"]["mean"] == pytest.approx(40.0)

    def test_FromRecords(self):
        metrics = TestMetrics()
        table = deviceTable({"bank": metrics.getRecords()}, metrics.getManifest(), DeviceRegistry(["a", "b"]))
        assert table.getColumns() == ["a", "b"]
        assert table.getCell("bank", "b")[0] == pytest.approx(100 / 3)
        assert table.getCell("bank", MACRO_COLUMN)[0] == pytest.approx(62.5)
