"""
SceneCLI.py

Created: 09/29/26
Last Modified: 10/16/26

Description: The SceneCLI file is the entry point to the application. It
exposes the pipeline as subcommands:

    synth      render the synthetic device-shift dataset
    train      stage 1 (general model), stage 2 (device models), model bank
    evaluate   device-routed inference, metrics, device table, submission
    audit      complexity audit of a graph file or every member of a bank

The pipeline looks something like the following:

        synth                   train                      evaluate
    audio + manifests  --->  general model        --->  route each clip by
                             + one model per           device id, score,
                             known device              write the table and
                                    |                  the submission file
                                    V
                                  audit
                          MACs and parameter
                          memory vs. the budget

Exit codes: 0 success, 1 domain failure (budget verdict, data, metrics,
checkpoints), 2 usage or parse error.

Usage:
    python -m SceneWise.SceneCLI --preset desk --out runs/desk synth
    python -m SceneWise.SceneCLI --preset desk --out runs/desk train --plot
    python -m SceneWise.SceneCLI --preset desk --out runs/desk evaluate --compare-general
    python -m SceneWise.SceneCLI audit SceneWise/External/ReferenceGraph.txt --precision fp32
"""
# Library Imports.
import argparse
import json
import os
import sys

import jsbeautifier
import numpy as np

# Custom Imports.
from SceneWise.Complexity.ComplexityAuditor import auditGraph
from SceneWise.Config.Logger import configureLogging, getLogger
from SceneWise.Config.RunConfig import loadRunConfig
from SceneWise.Dataset.DeviceProfile import loadProfiles
from SceneWise.Dataset.DeviceRegistry import buildRegistry
from SceneWise.Dataset.Manifest import loadManifest, subsetManifest
from SceneWise.Dataset.SyntheticGenerator import synthGenerate
from SceneWise.Errors.Errors import (
    BudgetError,
    ConfigurationError,
    DataError,
    MetricError,
    SceneWiseError,
)
from SceneWise.Frontend.Frontend import MelFrontend
from SceneWise.Inference.DeviceTable import DeviceTable
from SceneWise.Inference.Inference import routeAndPredict
from SceneWise.Inference.Metrics import computeMetrics
from SceneWise.Inference.Submission import emitSubmission
from SceneWise.Network.Fusion import fuseBatchnorm
from SceneWise.Network.Model import Model
from SceneWise.Network.ModelGraph import loadGraph
from SceneWise.Reporting.Plot import plotDeviceAccuracy, plotTrainingCurves
from SceneWise.Training.ModelBank import (
    GENERAL_NAME,
    META_FILE,
    buildBank,
    getDeviceModelId,
    loadBank,
)
from SceneWise.Training.TrainingPipeline import TrainingPipeline

logger = getLogger("cli")

# Seed offset of the --train-fraction draw.
SUBSET_STREAM = 5


def _writeJson(path, values):
    options = jsbeautifier.default_options()
    options.indent_size = 4
    with open(path, "w", encoding="utf-8") as jsonFile:
        jsonFile.write(jsbeautifier.beautify(json.dumps(values, ensure_ascii=False), options))


def cmdSynth(config, args):
    """
    Renders the dataset into <out>/dataset and prints clips per scene and
    device.
    """
    sampleRateHz, profiles = loadProfiles(args.profiles or config.getProfilesPath())
    outDir = config.getPath("dataset")
    train, test = synthGenerate(
        outDir,
        config.seed,
        config.getSceneCount(),
        profiles,
        config.getSplitSpec(),
        sampleRateHz,
        config.workers,
    )

    devices = [profile.deviceId for profile in profiles]
    trainCounts = train.getCounts()
    testCounts = test.getCounts()
    sceneWidth = max(len("scene"), max(len(label) for label in test.getLabels()))
    print("dataset: " + outDir)
    print("clips per scene and device (train/test)")
    print("scene".ljust(sceneWidth) + "".join(d.rjust(9) for d in devices))
    for label in test.getLabels():
        cells = [
            (str(trainCounts.get((label, d), 0)) + "/" + str(testCounts.get((label, d), 0))).rjust(9)
            for d in devices
        ]
        print(label.ljust(sceneWidth) + "".join(cells))
    print("train clips: " + str(len(train)) + ", test clips: " + str(len(test)))
    return 0


def _loadTrainingManifest(config, args):
    path = args.manifest or os.path.join(config.getPath("dataset"), "train.tsv")
    if not os.path.isfile(path):
        raise DataError("Training manifest " + path + " does not exist; run synth first or pass --manifest.")
    manifest = loadManifest(path, "train")
    manifest.checkSceneCount(10)
    if args.train_fraction is not None:
        manifest = subsetManifest(manifest, args.train_fraction, config.seed + SUBSET_STREAM)
        logger.info("Training on a %.0f%% subset: %d clips.", 100 * args.train_fraction, len(manifest))
    return manifest


def cmdTrain(config, args):
    """
    Runs the requested stages and writes the bank to <out>/bank.
    """
    graph = loadGraph(config.getGraphPath())
    cfg = config.getTrainConfig()
    frontendConfig = config.getFrontendConfig()
    frontend = MelFrontend(frontendConfig)
    manifest = _loadTrainingManifest(config, args)
    registry = buildRegistry(manifest)
    labels = manifest.getLabels()

    logDir = config.getPath("logs")
    os.makedirs(logDir, exist_ok=True)
    bankDir = config.getPath("bank")
    pipeline = TrainingPipeline(
        graph, cfg, labels, config.getBudget(), os.path.join(logDir, "train.jsonl"), args.progress
    )
    print(pipeline.auditBudget("general").renderTable())

    existing = None
    if args.stage == "2":
        if not os.path.isfile(os.path.join(bankDir, META_FILE)):
            raise DataError("Stage 2 needs the stage-1 bank at " + bankDir + "; run --stage 1 first.")
        existing = loadBank(bankDir)
        if existing.graph != graph or existing.labels != labels:
            raise DataError("The bank at " + bankDir + " was trained with another graph or label set.")

    data = pipeline.prepareData(manifest, frontend)
    if tuple(data.features.shape[1:]) != tuple(graph.inputShape):
        raise DataError(
            "Frontend produces inputs of shape " + str(tuple(data.features.shape[1:]))
            + " but the graph expects " + str(tuple(graph.inputShape)) + "."
        )

    deviceStores = {}
    if existing is None:
        generalStore = pipeline.toStoredPrecision(pipeline.trainGeneral(data))
    else:
        generalStore = existing.generalStore
        deviceStores = dict(existing.deviceStores)

    if args.stage in ("2", "all"):
        devices = [args.device] if args.device else registry.getKnownDevices()
        for deviceId in devices:
            store = pipeline.finetuneDevice(generalStore, deviceId, data, registry)
            deviceStores[deviceId] = pipeline.toStoredPrecision(store)

    provenance = {"config_hash": cfg.getHash(), "seed": cfg.seed, "preset": config.values["preset"]}
    bank = buildBank(
        graph, generalStore, deviceStores, registry, labels, frontendConfig, cfg.precision,
        provenance, config.getBudget(),
    )
    bank.save(bankDir)
    print("bank: " + bankDir + " (" + ", ".join(bank.getModelIds()) + ")")

    if args.plot:
        plotPath = os.path.join(logDir, "training_curves.png")
        plotTrainingCurves(pipeline.history, plotPath)
        print("plot: " + plotPath)
    return 0


def cmdEvaluate(config, args):
    """
    Classifies the test manifest with each bank and writes the results to
    <out>/eval.
    """
    bankDirs = args.bank or [config.getPath("bank")]
    path = args.manifest or os.path.join(config.getPath("dataset"), "test.tsv")
    if not os.path.isfile(path):
        raise DataError("Test manifest " + path + " does not exist.")
    manifest = loadManifest(path, "test")
    if not args.predict_only and not manifest.isLabeled():
        raise MetricError(
            "Manifest " + path + " has no scene labels, so metrics cannot be computed; "
            + "use --predict-only to write predictions only."
        )

    evalDir = config.getPath("eval")
    os.makedirs(evalDir, exist_ok=True)
    submissionPath = os.path.join(evalDir, "submission.tsv")

    banks = [loadBank(directory) for directory in bankDirs]
    if args.predict_only:
        records, failures = routeAndPredict(banks[0], manifest, config.workers)
        emitSubmission(records, submissionPath)
        print("submission: " + submissionPath + " (" + str(len(records)) + " clips, "
              + str(len(failures)) + " failures)")
        return 0

    table = DeviceTable(banks[0].registry)
    reports = {}
    failed = []
    for index, bank in enumerate(banks):
        if bank.registry != banks[0].registry or bank.labels != banks[0].labels:
            raise ConfigurationError(
                "Bank " + bankDirs[index] + " has other known devices or labels than " + bankDirs[0] + "."
            )
        rows = [("bank", bank)]
        if args.compare_general:
            rows.insert(0, ("general", bank.getGeneralOnly()))
        for rowName, rowBank in rows:
            records, failures = routeAndPredict(rowBank, manifest, config.workers)
            report = computeMetrics(records, manifest)
            table.addRun(rowName, report)
            reports.setdefault(rowName, []).append(report.toDict())
            failed += [
                {"bank": bankDirs[index], "row": rowName, "file": f.filename, "error": f.message}
                for f in failures
            ]
            if index == 0 and rowName == "bank":
                emitSubmission(records, submissionPath)

    text = table.render()
    print(text)
    with open(os.path.join(evalDir, "device_table.txt"), "w", encoding="utf-8") as tableFile:
        tableFile.write(text + "\n")
    table.save(os.path.join(evalDir, "device_table.json"))
    _writeJson(os.path.join(evalDir, "metrics.json"), {"rows": reports, "failures": failed})

    for rowName in table.getRowNames():
        first = reports[rowName][0]
        print(
            rowName + ": macro accuracy " + format(100 * first["macro_over_classes"], ".2f")
            + "%, mean over devices " + format(100 * first["mean_over_devices"], ".2f")
            + "%, cross-entropy " + format(first["cross_entropy"], ".4f")
        )
    if failed:
        print(str(len(failed)) + " clips could not be processed; see metrics.json.")
    print("results: " + evalDir)

    if args.plot:
        plotDeviceAccuracy(table, os.path.join(evalDir, "device_accuracy.png"))
    return 0


def cmdAudit(config, args):
    """
    Prints the audit table of a graph or of every bank member. Exit 0 when all
    pass, 1 otherwise.
    """
    target = args.target or config.getGraphPath()
    budget = config.getBudget()
    if os.path.isdir(target):
        bank = loadBank(target)
        members = [(GENERAL_NAME, bank.graph, bank.generalStore)] + [
            (getDeviceModelId(deviceId), bank.graph, store) for deviceId, store in bank.deviceStores.items()
        ]
    else:
        graph = loadGraph(target)
        members = [(os.path.basename(target), graph, None)]

    passed = True
    for title, graph, store in members:
        if args.fused:
            # Folding only needs the layer structure when no trained tensors exist.
            if store is None:
                store = Model(graph).initParams(np.random.default_rng(config.seed))
            graph, _ = fuseBatchnorm(graph, store)
            title += " (fused)"
        report = auditGraph(graph, args.precision, budget, args.include_bn_stats, title)
        print(report.renderTable())
        print()
        passed = passed and report.passed
    return 0 if passed else 1


def _addCommonArguments(parser, default):
    """
    Adds the global flags. Subparsers get them again with suppressed defaults
    so they may be given before or after the subcommand.
    """
    value = (lambda v: v) if default else (lambda v: argparse.SUPPRESS)
    parser.add_argument("--config", default=value(None), help="JSON file merged over the defaults.")
    parser.add_argument("--preset", choices=["full", "desk"], default=value(None), help="Settings preset.")
    parser.add_argument("--seed", type=int, default=value(None), help="Seed of every random draw.")
    parser.add_argument("--out", default=value(None), help="Output directory.")
    parser.add_argument("--workers", type=int, default=value(None), help="Worker threads for audio processing.")
    parser.add_argument("--show-config", action="store_true", default=value(False), help="Print the merged settings and exit.")


def buildParser():
    parser = argparse.ArgumentParser(
        prog="scenewise",
        description="Low-complexity acoustic scene classification with device-specific models.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    _addCommonArguments(parser, True)
    subparsers = parser.add_subparsers(dest="command")

    synth = subparsers.add_parser("synth", help="Render the synthetic device-shift dataset.")
    _addCommonArguments(synth, False)
    synth.add_argument("--profiles", help="Device profile JSON file.")

    train = subparsers.add_parser("train", help="Train the general and device-specific models.")
    _addCommonArguments(train, False)
    train.add_argument("--stage", choices=["1", "2", "all"], default="all")
    train.add_argument("--device", help="Fine-tune only this device (stage 2).")
    train.add_argument("--epochs", type=int, help="Epochs of every stage that runs.")
    train.add_argument("--precision", choices=["fp16", "fp32"], help="Checkpoint storage precision.")
    train.add_argument("--graph", help="Graph file.")
    train.add_argument("--manifest", help="Training manifest; <out>/dataset/train.tsv by default.")
    train.add_argument("--train-fraction", type=float, help="Train on a stratified fraction of the manifest.")
    train.add_argument("--progress", action="store_true", help="Show epoch progress bars.")
    train.add_argument("--plot", action="store_true", help="Plot the training curves.")

    evaluate = subparsers.add_parser("evaluate", help="Classify a test manifest and score it.")
    _addCommonArguments(evaluate, False)
    evaluate.add_argument("--bank", action="append", help="Bank directory; repeat for repeated runs.")
    evaluate.add_argument("--manifest", help="Test manifest; <out>/dataset/test.tsv by default.")
    evaluate.add_argument("--compare-general", action="store_true", help="Add the general-only row.")
    evaluate.add_argument("--predict-only", action="store_true", help="Write the submission file only.")
    evaluate.add_argument("--plot", action="store_true", help="Plot device-wise accuracies.")

    audit = subparsers.add_parser("audit", help="Audit a graph file or a bank against the budget.")
    _addCommonArguments(audit, False)
    audit.add_argument("target", nargs="?", help="Graph file or bank directory.")
    audit.add_argument("--precision", choices=["int8", "fp16", "fp32"], default="fp16")
    audit.add_argument("--fused", action="store_true", help="Audit with batchnorm folded into convs.")
    audit.add_argument("--include-bn-stats", action="store_true", help="Count batchnorm running statistics.")
    return parser


def _getOverrides(args):
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out"] = args.out
    if args.workers is not None:
        overrides["workers"] = args.workers
    train = {}
    if getattr(args, "epochs", None) is not None:
        train["stage1Epochs"] = args.epochs
        train["stage2Epochs"] = args.epochs
    if args.command == "train" and args.precision is not None:
        train["precision"] = args.precision
    if train:
        overrides["train"] = train
    if getattr(args, "graph", None):
        overrides["paths"] = {"graph": args.graph}
    return overrides


COMMANDS = {"synth": cmdSynth, "train": cmdTrain, "evaluate": cmdEvaluate, "audit": cmdAudit}


def main(argv=None):
    """
    Runs one subcommand.

    Returns
    -------
    int: process exit code.
    """
    configureLogging()
    parser = buildParser()
    args = parser.parse_args(argv)

    try:
        config = loadRunConfig(args.command, args.config, args.preset, _getOverrides(args))
        if args.show_config:
            print(config.toText())
            return 0
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 2
        if args.command == "train" and args.device and args.stage == "1":
            raise ConfigurationError("--device applies to stage 2 only.")
        return COMMANDS[args.command](config, args)
    except BudgetError as e:
        if e.report is not None:
            print(e.report.renderTable(), file=sys.stderr)
        print("error: " + str(e), file=sys.stderr)
        return e.exitCode
    except SceneWiseError as e:
        print("error: " + str(e), file=sys.stderr)
        return e.exitCode
    except OSError as e:
        print("error: " + str(e), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
