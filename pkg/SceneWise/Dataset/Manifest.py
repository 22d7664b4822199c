"""
Manifest.py

Created: 09/17/26
Last Modified: 10/12/26

Description: Recording manifests in the TAU layout. A manifest is a UTF-8,
tab-separated file with a header row:

    filename                        scene_label  identifier   source_label
    audio/airport-lyon-0-0-a.wav    airport      lyon-0       a
    ...

The city of a recording is the identifier up to its first "-". Training
manifests must carry scene_label and source_label; test manifests must carry
source_label, and scene_label is optional. Devices absent from training are
written as the literal "unknown".
"""
# Library Imports.
import csv
import math
import os
from dataclasses import dataclass, replace

import numpy as np

# Custom Imports.
from SceneWise.Config.Logger import getLogger
from SceneWise.Errors.Errors import ConfigurationError, FormatError

logger = getLogger("dataset")

# Column order of written manifests.
COLUMNS = ("filename", "scene_label", "identifier", "source_label")

# Device id of recordings from devices outside the training set.
UNKNOWN_DEVICE = "unknown"

# Columns each manifest kind cannot do without.
_REQUIRED_COLUMNS = {
    "train": ("filename", "scene_label", "source_label"),
    "test": ("filename", "source_label"),
}


@dataclass(frozen=True)
class RecordingEntry:
    """
    One manifest row. Absent fields are None.
    """

    filename: str
    deviceId: str
    sceneLabel: str = None
    identifier: str = None

    @property
    def city(self):
        if not self.identifier:
            return None
        return self.identifier.split("-", 1)[0]

    @property
    def isUnknownDevice(self):
        return self.deviceId == UNKNOWN_DEVICE


class Manifest:
    """
    Ordered recording entries plus the directory their file names resolve
    against.
    """

    def __init__(self, entries, kind="train", root="."):
        """
        Parameters
        ----------
        entries: list
            RecordingEntry objects in file order.
        kind: String
            "train" or "test".
        root: String
            Directory relative file names are resolved against.
        """
        if kind not in _REQUIRED_COLUMNS:
            raise ConfigurationError("Unknown manifest kind '" + str(kind) + "'.")
        self.entries = list(entries)
        self.kind = kind
        self.root = str(root)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def getLabels(self):
        """
        Returns
        -------
        list: sorted scene labels present in the manifest.
        """
        return sorted({entry.sceneLabel for entry in self.entries if entry.sceneLabel})

    def getDevices(self):
        """
        Returns
        -------
        list: sorted device ids present in the manifest.
        """
        return sorted({entry.deviceId for entry in self.entries})

    def isLabeled(self):
        return bool(self.entries) and all(entry.sceneLabel for entry in self.entries)

    def resolvePath(self, entry):
        if os.path.isabs(entry.filename):
            return entry.filename
        return os.path.join(self.root, entry.filename)

    def filterDevice(self, deviceId):
        """Entries recorded by one device, in file order."""
        return Manifest(
            [entry for entry in self.entries if entry.deviceId == deviceId], self.kind, self.root
        )

    def checkSceneCount(self, expected=10):
        """
        Warns when the manifest does not have the expected number of scenes.

        Returns
        -------
        bool: True when the count matches.
        """
        count = len(self.getLabels())
        if count != expected:
            logger.warning(
                "Manifest has %d scene labels; the challenge setup expects %d.",
                count,
                expected,
            )
            return False
        return True

    def getCounts(self):
        """
        Returns
        -------
        dict: (scene label, device id) -> number of entries.
        """
        counts = {}
        for entry in self.entries:
            key = (entry.sceneLabel, entry.deviceId)
            counts[key] = counts.get(key, 0) + 1
        return counts


def loadManifest(path, kind="train", root=None):
    """
    Reads a manifest file.

    Parameters
    ----------
    path: String
        TSV file with a header row.
    kind: String
        "train" or "test"; decides which columns are required.
    root: String
        Directory for relative file names. Defaults to the manifest's folder.

    Returns
    -------
    Manifest: entries in file order.
    Raises FormatError naming the column and line of the first problem.
    """
    if kind not in _REQUIRED_COLUMNS:
        raise ConfigurationError("Unknown manifest kind '" + str(kind) + "'.")
    try:
        with open(path, "r", encoding="utf-8", newline="") as manifestFile:
            rows = list(csv.reader(manifestFile, delimiter="\t"))
    except OSError as e:
        raise FormatError("Cannot read manifest " + str(path) + ": " + str(e))

    if not rows:
        raise FormatError("Manifest " + str(path) + " is empty.")

    header = [column.strip() for column in rows[0]]
    for column in _REQUIRED_COLUMNS[kind]:
        if column not in header:
            raise FormatError(
                "Manifest "
                + str(path)
                + " line 1: missing required column '"
                + column
                + "' for a "
                + kind
                + " manifest."
            )
    position = {column: header.index(column) for column in COLUMNS if column in header}

    entries = []
    for lineNumber, row in enumerate(rows[1:], start=2):
        if not any(cell.strip() for cell in row):
            continue
        if len(row) > len(header):
            raise FormatError(
                "Manifest "
                + str(path)
                + " line "
                + str(lineNumber)
                + ": "
                + str(len(row))
                + " fields for "
                + str(len(header))
                + " columns."
            )

        values = {}
        for column, index in position.items():
            value = row[index].strip() if index < len(row) else ""
            values[column] = value or None
        for column in _REQUIRED_COLUMNS[kind]:
            if values.get(column) is None:
                raise FormatError(
                    "Manifest "
                    + str(path)
                    + " line "
                    + str(lineNumber)
                    + ": missing value for column '"
                    + column
                    + "'."
                )
        entries.append(
            RecordingEntry(
                filename=values["filename"],
                deviceId=values["source_label"],
                sceneLabel=values.get("scene_label"),
                identifier=values.get("identifier"),
            )
        )

    if not entries:
        raise FormatError("Manifest " + str(path) + " has no entries.")

    root = root if root is not None else os.path.dirname(os.path.abspath(path))
    return Manifest(entries, kind, root)


def writeManifest(manifest, path):
    """
    Writes all four columns; absent values are written as empty fields.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as manifestFile:
        writer = csv.writer(manifestFile, delimiter="\t", lineterminator="\n")
        writer.writerow(COLUMNS)
        for entry in manifest.entries:
            writer.writerow(
                [
                    entry.filename,
                    entry.sceneLabel or "",
                    entry.identifier or "",
                    entry.deviceId,
                ]
            )


def subsetManifest(manifest, fraction, seed):
    """
    Draws a fraction of a training manifest, stratified by (scene, device).
    Every non-empty cell keeps at least one entry.

    Parameters
    ----------
    manifest: Manifest
        Manifest to subsample.
    fraction: float
        Share of every cell to keep, in (0, 1].
    seed: int
        Seed of the draw.

    Returns
    -------
    Manifest: kept entries in their original order.
    """
    if not 0.0 < fraction <= 1.0:
        raise ConfigurationError(
            "Subset fraction must lie in (0, 1], got " + str(fraction) + "."
        )
    if fraction == 1.0:
        return Manifest(manifest.entries, manifest.kind, manifest.root)

    cells = {}
    for position, entry in enumerate(manifest.entries):
        cells.setdefault((entry.sceneLabel or "", entry.deviceId), []).append(position)

    rng = np.random.default_rng(seed)
    kept = set()
    for key in sorted(cells):
        positions = cells[key]
        count = max(1, int(math.ceil(fraction * len(positions))))
        chosen = rng.permutation(len(positions))[:count]
        kept.update(positions[i] for i in chosen)

    entries = [entry for position, entry in enumerate(manifest.entries) if position in kept]
    return Manifest(entries, manifest.kind, manifest.root)


def stripLabels(manifest):
    """Copy of a manifest without scene labels and identifiers."""
    entries = [replace(entry, sceneLabel=None, identifier=None) for entry in manifest.entries]
    return Manifest(entries, "test", manifest.root)
