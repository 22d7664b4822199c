"""
ModelBank.py

Created: 09/22/26
Last Modified: 10/16/26

Description: The ModelBank class bundles the general parameters and one
parameter set per known device, all for the same graph. On disk a bank is a
directory:

    general.ckpt          general model
    device_<id>.ckpt      one per fine-tuned device
    bank.meta             JSON: graph text, labels, known devices, devices
                          with checkpoints, frontend settings, precision and
                          provenance (config hash, seed)

A bank directory is written to a temporary sibling first and moved into place,
so readers see either the old or the new bank.
"""
# Library Imports.
import json
import os
import shutil

import jsbeautifier

# Custom Imports.
from SceneWise.Complexity.ComplexityAuditor import auditGraph
from SceneWise.Config.Logger import getLogger
from SceneWise.Dataset.DeviceRegistry import DeviceRegistry
from SceneWise.Errors.Errors import BankError, BudgetError, CheckpointError, GraphParseError
from SceneWise.Frontend.Frontend import FrontendConfig
from SceneWise.Network.Checkpoint import loadCheckpoint, saveCheckpoint
from SceneWise.Network.Model import Model
from SceneWise.Network.ModelGraph import parseGraph

logger = getLogger("bank")

GENERAL_NAME = "general"
META_FILE = "bank.meta"


def getDeviceModelId(deviceId):
    return "device_" + deviceId


class ModelBank:
    """
    The general model plus device-specific models sharing one graph, and the
    routing rule between them: a device with its own model uses it, any other
    device (unknown ones included) uses the general model.
    """

    def __init__(self, graph, generalStore, deviceStores, registry, labels, frontendConfig, precision="fp16", provenance=None):
        """
        Parameters
        ----------
        graph: ModelGraph
            Graph shared by every member.
        generalStore: ParameterStore
            General parameters.
        deviceStores: dict
            Device id -> ParameterStore.
        registry: DeviceRegistry
            Known devices; every key of deviceStores must be registered.
        labels: list
            Scene labels in class-index order.
        frontendConfig: FrontendConfig
            Frontend the models were trained with.
        precision: String
            Storage precision of the checkpoints.
        provenance: dict
            Free-form origin information, i.e. config hash and seed.
        """
        if generalStore is None:
            raise BankError("A model bank needs a general checkpoint.")
        for deviceId in deviceStores:
            if not registry.isKnown(deviceId):
                raise BankError(
                    "Device checkpoint for '" + deviceId + "', which is not a registered device."
                )
        self.graph = graph
        self.model = Model(graph)
        self.generalStore = generalStore
        self.deviceStores = dict(sorted(deviceStores.items()))
        self.registry = registry
        self.labels = list(labels)
        self.frontendConfig = frontendConfig
        self.precision = precision
        self.provenance = dict(provenance or {})

    def getModelIds(self):
        return [GENERAL_NAME] + [getDeviceModelId(d) for d in self.deviceStores]

    def route(self, deviceId):
        """
        Returns
        -------
        tuple: (model id, ParameterStore) serving the device.
        """
        if deviceId in self.deviceStores:
            return getDeviceModelId(deviceId), self.deviceStores[deviceId]
        return GENERAL_NAME, self.generalStore

    def getGeneralOnly(self):
        """
        The same bank without device models, so every device routes to the
        general model.
        """
        return ModelBank(
            self.graph, self.generalStore, {}, self.registry, self.labels, self.frontendConfig,
            self.precision, self.provenance,
        )

    def auditMembers(self, budget=None):
        """
        Audits every member. Members share the graph, so the MAC count is the
        same for all; the check is still recorded per member.

        Returns
        -------
        dict: model id -> ComplexityReport. Raises BudgetError on the first
        failing member.
        """
        reports = {}
        for modelId in self.getModelIds():
            report = auditGraph(self.graph, self.precision, budget, title=modelId)
            if not report.passed:
                raise BudgetError(
                    "Bank member '" + modelId + "' exceeds the complexity budget: "
                    + ", ".join(report.failures) + ".",
                    report,
                )
            reports[modelId] = report
        return reports

    def getMeta(self):
        return {
            "graph": self.graph.toText(),
            "labels": self.labels,
            "known_devices": self.registry.getKnownDevices(),
            "device_models": list(self.deviceStores),
            "frontend": self.frontendConfig.toDict(),
            "precision": self.precision,
            "provenance": self.provenance,
        }

    def save(self, directory):
        """
        Writes the bank directory, replacing any previous bank there.
        """
        directory = os.path.abspath(directory)
        parent = os.path.dirname(directory)
        os.makedirs(parent, exist_ok=True)
        staging = directory + ".partial"
        if os.path.exists(staging):
            shutil.rmtree(staging)
        os.makedirs(staging)

        saveCheckpoint(os.path.join(staging, GENERAL_NAME + ".ckpt"), self.model, self.generalStore, self.precision)
        for deviceId, store in self.deviceStores.items():
            saveCheckpoint(
                os.path.join(staging, getDeviceModelId(deviceId) + ".ckpt"), self.model, store, self.precision
            )
        options = jsbeautifier.default_options()
        options.indent_size = 4
        with open(os.path.join(staging, META_FILE), "w", encoding="utf-8") as metaFile:
            metaFile.write(jsbeautifier.beautify(json.dumps(self.getMeta()), options))

        previous = directory + ".previous"
        if os.path.exists(directory):
            if os.path.exists(previous):
                shutil.rmtree(previous)
            os.replace(directory, previous)
        os.replace(staging, directory)
        if os.path.exists(previous):
            shutil.rmtree(previous)
        logger.info("Saved model bank with %d checkpoints to %s.", len(self.getModelIds()), directory)


def buildBank(graph, generalStore, deviceStores, registry, labels, frontendConfig, precision="fp16", provenance=None, budget=None):
    """
    Assembles a ModelBank and audits every member against the budget.

    Returns
    -------
    ModelBank: the validated bank.
    Raises BankError for a missing general model or unregistered devices and
    BudgetError if any member exceeds the budget.
    """
    bank = ModelBank(graph, generalStore, deviceStores, registry, labels, frontendConfig, precision, provenance)
    bank.auditMembers(budget)
    return bank


def loadBank(directory):
    """
    Reads a bank directory completely before returning it.

    Returns
    -------
    ModelBank: the loaded bank with float32 working tensors.
    """
    metaPath = os.path.join(directory, META_FILE)
    if not os.path.isfile(metaPath):
        raise BankError("Model bank " + str(directory) + " has no " + META_FILE + ".")
    try:
        with open(metaPath, "r", encoding="utf-8") as metaFile:
            meta = json.load(metaFile)
        graph = parseGraph(meta["graph"])
        registry = DeviceRegistry(meta["known_devices"])
        frontendConfig = FrontendConfig.fromDict(meta["frontend"])
        labels = list(meta["labels"])
        deviceIds = list(meta["device_models"])
        precision = meta["precision"]
    except (OSError, ValueError, KeyError, TypeError, GraphParseError) as e:
        raise BankError("Model bank " + str(metaPath) + " is unreadable: " + str(e))

    model = Model(graph)
    generalPath = os.path.join(directory, GENERAL_NAME + ".ckpt")
    if not os.path.isfile(generalPath):
        raise BankError("Model bank " + str(directory) + " is missing " + GENERAL_NAME + ".ckpt.")
    generalStore = loadCheckpoint(generalPath, model)

    deviceStores = {}
    for deviceId in deviceIds:
        path = os.path.join(directory, getDeviceModelId(deviceId) + ".ckpt")
        if not os.path.isfile(path):
            raise CheckpointError("Model bank is missing checkpoint " + path + ".")
        deviceStores[deviceId] = loadCheckpoint(path, model)

    return ModelBank(
        graph, generalStore, deviceStores, registry, labels, frontendConfig, precision, meta.get("provenance")
    )
