"""
Submission.py

Created: 09/25/26
Last Modified: 10/13/26

Description: Prediction files in submission layout. A UTF-8, tab-separated
file with a header row:

    filename   scene_label   airport   bus   ...   tram
    audio/x.wav   bus   0.0123   0.8011   ...   0.0004

Probability columns follow the class order of the model. Values are written
with repr() so a reloaded file reproduces the in-memory probabilities exactly.
Rows keep the order of the records, which is manifest order.
"""
# Library Imports.
import csv

import numpy as np

# Custom Imports.
from SceneWise.Errors.Errors import FormatError, MetricError
from SceneWise.Inference.Inference import PredictionRecord

# Leading columns before the per-class probabilities.
HEADER = ("filename", "scene_label")


def emitSubmission(records, path):
    """
    Writes prediction records as a submission file.

    Parameters
    ----------
    records: list
        PredictionRecord objects sharing one class order.
    path: String
        Output file.
    """
    if not records:
        raise MetricError("Cannot write a submission without prediction records.")
    classLabels = tuple(records[0].classLabels)
    with open(path, "w", newline="", encoding="utf-8") as submissionFile:
        writer = csv.writer(submissionFile, delimiter="\t", lineterminator="\n")
        writer.writerow(list(HEADER) + list(classLabels))
        for record in records:
            if tuple(record.classLabels) != classLabels:
                raise MetricError("Record " + record.filename + " has a different class order.")
            writer.writerow(
                [record.filename, record.predictedLabel]
                + [repr(float(p)) for p in record.probabilities]
            )


def loadSubmission(path, manifest=None):
    """
    Reads a submission file back into prediction records.

    Parameters
    ----------
    path: String
        Submission file.
    manifest: Manifest
        Optional; supplies device ids by file name.

    Returns
    -------
    list: PredictionRecord objects in file order. The routed model id is not
    part of the file and comes back as "".
    """
    devices = {}
    if manifest is not None:
        devices = {entry.filename: entry.deviceId for entry in manifest.entries}

    with open(path, "r", newline="", encoding="utf-8") as submissionFile:
        rows = list(csv.reader(submissionFile, delimiter="\t"))
    if not rows or tuple(rows[0][: len(HEADER)]) != HEADER or len(rows[0]) <= len(HEADER):
        raise FormatError(str(path) + ": header must start with filename, scene_label and list the classes.")

    classLabels = tuple(rows[0][len(HEADER):])
    records = []
    for lineNumber, row in enumerate(rows[1:], start=2):
        if len(row) != len(rows[0]):
            raise FormatError(
                str(path) + " line " + str(lineNumber) + ": expected " + str(len(rows[0]))
                + " columns, found " + str(len(row)) + "."
            )
        try:
            probabilities = np.array([float(value) for value in row[len(HEADER):]], dtype=np.float64)
        except ValueError:
            raise FormatError(str(path) + " line " + str(lineNumber) + ": probability is not a number.")
        record = PredictionRecord(row[0], devices.get(row[0], ""), "", probabilities, classLabels)
        if record.predictedLabel != row[1]:
            raise FormatError(
                str(path) + " line " + str(lineNumber) + ": scene_label " + row[1]
                + " is not the most probable class."
            )
        records.append(record)
    return records
