"""
RunConfig.py

Created: 09/28/26
Last Modified: 10/15/26

Description: Settings of one command line run. Values are layered, later
layers winning key by key:

    External/DefaultConfig.json
    the selected preset ("full" or "desk") from the same file
    a --config JSON file
    command line flags

Relative resource names (graph and device profile files) are looked up as
given first and then under SceneWise/External/. Output locations are relative
to the output directory.
"""
# Library Imports.
import copy
import json
import os

import jsbeautifier

# Custom Imports.
from SceneWise.Complexity.ComplexityAuditor import Budget
from SceneWise.Dataset.SyntheticGenerator import SplitSpec
from SceneWise.Errors.Errors import ConfigurationError
from SceneWise.Frontend.Frontend import FrontendConfig
from SceneWise.Training.TrainConfig import TrainConfig

# Where bundled resources are located.
EXTERNAL_ROOT = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "External")

DEFAULT_CONFIG_PATH = os.path.join(EXTERNAL_ROOT, "DefaultConfig.json")


def deepMerge(base, override):
    """
    Returns
    -------
    dict: a copy of base with override merged in; nested dicts merge key by
    key, any other value is replaced.
    """
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deepMerge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def readJson(path):
    try:
        with open(path, "r", encoding="utf-8") as configFile:
            values = json.load(configFile)
    except (OSError, ValueError) as e:
        raise ConfigurationError("Cannot read configuration file " + str(path) + ": " + str(e))
    if not isinstance(values, dict):
        raise ConfigurationError("Configuration file " + str(path) + " must hold a JSON object.")
    return values


def resolveResource(name):
    """
    Returns
    -------
    String: name itself when it exists, else the file of that name under
    External/. Raises ConfigurationError when neither exists.
    """
    if os.path.exists(name):
        return name
    bundled = os.path.join(EXTERNAL_ROOT, name)
    if os.path.exists(bundled):
        return bundled
    raise ConfigurationError("Resource " + str(name) + " not found (also looked in " + EXTERNAL_ROOT + ").")


class RunConfig:
    """
    Merged settings of one subcommand run.
    """

    def __init__(self, subcommand, values, configPath=None, overrides=None):
        """
        Parameters
        ----------
        subcommand: String
            Subcommand being run, or None.
        values: dict
            Fully merged settings.
        configPath: String
            The --config file, if any.
        overrides: dict
            Settings that came from flags.
        """
        self.subcommand = subcommand
        self.values = values
        self.configPath = configPath
        self.overrides = dict(overrides or {})

    @property
    def seed(self):
        return int(self.values["seed"])

    @property
    def outDir(self):
        return self.values["out"]

    @property
    def workers(self):
        return int(self.values["workers"])

    def getPath(self, key):
        """
        Output location named in "paths", under the output directory unless
        absolute.
        """
        path = self.values["paths"][key]
        if os.path.isabs(path):
            return path
        return os.path.join(self.outDir, path)

    def getGraphPath(self):
        return resolveResource(self.values["paths"]["graph"])

    def getProfilesPath(self):
        return resolveResource(self.values["synth"]["profiles"])

    def getFrontendConfig(self):
        try:
            return FrontendConfig.fromDict(self.values["frontend"])
        except TypeError as e:
            raise ConfigurationError("Invalid frontend settings: " + str(e))

    def getTrainConfig(self):
        values = dict(self.values["train"])
        values["seed"] = self.seed
        values["workers"] = self.workers
        return TrainConfig.fromDict(values)

    def getBudget(self):
        budget = self.values["budget"]
        return Budget(int(budget["maxMemoryBytes"]), int(budget["maxMacs"]))

    def getSplitSpec(self):
        synth = self.values["synth"]
        return SplitSpec(
            list(synth["trainDevices"]),
            int(synth["trainClipsPerCell"]),
            int(synth["testClipsPerKnownCell"]),
            int(synth["testClipsPerUnknownCell"]),
        )

    def getSceneCount(self):
        return int(self.values["synth"]["sceneCount"])

    def toText(self):
        options = jsbeautifier.default_options()
        options.indent_size = 4
        return jsbeautifier.beautify(json.dumps(self.values), options)


def loadRunConfig(subcommand=None, configPath=None, preset=None, overrides=None):
    """
    Builds the merged settings.

    Parameters
    ----------
    subcommand: String
        Subcommand being run.
    configPath: String
        Optional user JSON file merged over the defaults.
    preset: String
        Preset name; when None the "preset" value of the merged files is used.
    overrides: dict
        Nested settings from command line flags.

    Returns
    -------
    RunConfig: the merged settings.
    """
    overrides = overrides or {}
    defaults = readJson(DEFAULT_CONFIG_PATH)
    user = readJson(configPath) if configPath is not None else {}

    presets = deepMerge(defaults.get("presets", {}), user.get("presets", {}))
    name = preset or overrides.get("preset") or user.get("preset") or defaults.get("preset")
    if name not in presets:
        raise ConfigurationError(
            "Unknown preset '" + str(name) + "'; available presets: " + ", ".join(sorted(presets)) + "."
        )

    values = deepMerge(defaults, presets[name])
    values = deepMerge(values, user)
    values = deepMerge(values, overrides)
    values["preset"] = name
    values.pop("presets", None)
    return RunConfig(subcommand, values, configPath, overrides)
