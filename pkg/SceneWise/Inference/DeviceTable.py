"""
DeviceTable.py

Created: 09/25/26
Last Modified: 10/14/26

Description: Device-wise accuracy table. One row per model configuration
(i.e. "general" and "bank"), one column per device of the test manifest with
known devices first, then a final macro accuracy column:

    model     a      b      c      s1     s2     s3     s4     s5     s6     Macro Avg. Accuracy
    general   62.10  55.30  ...

Cells are percentages. A row may collect several runs (repeated seeds), in
which case cells read "mean ± std".
"""
# Library Imports.
import json

import jsbeautifier
import numpy as np

# Custom Imports.
from SceneWise.Inference.Metrics import computeMetrics

# Header of the overall column.
MACRO_COLUMN = "Macro Avg. Accuracy"


class DeviceTable:
    def __init__(self, registry):
        """
        Parameters
        ----------
        registry: DeviceRegistry
            Known devices; they are listed before all others.
        """
        self.registry = registry
        self._rows = {}

    def addRun(self, rowName, report):
        """
        Adds one evaluated run to a row.

        Parameters
        ----------
        rowName: String
            Model configuration, i.e. "general" or "bank".
        report: MetricsReport
            Metrics of the run.
        """
        self._rows.setdefault(rowName, []).append(report)

    def getRowNames(self):
        return list(self._rows)

    def getColumns(self):
        """
        Returns
        -------
        list: device ids, known devices in registry order, then the others in
        sorted order.
        """
        devices = set()
        for reports in self._rows.values():
            for report in reports:
                devices.update(report.perDeviceAccuracy)
        known = [d for d in self.registry.getKnownDevices() if d in devices]
        others = sorted(d for d in devices if not self.registry.isKnown(d))
        return known + others

    def getCell(self, rowName, column):
        """
        Returns
        -------
        tuple: (mean percent, std percent, run count), or None when the row
        has no run covering the column. The std is the sample std over runs
        and 0 for a single run.
        """
        values = []
        for report in self._rows[rowName]:
            if column == MACRO_COLUMN:
                values.append(report.macroAccuracy)
            elif column in report.perDeviceAccuracy:
                values.append(report.perDeviceAccuracy[column])
        if not values:
            return None
        percent = 100.0 * np.array(values, dtype=np.float64)
        std = float(np.std(percent, ddof=1)) if len(percent) > 1 else 0.0
        return float(np.mean(percent)), std, len(percent)

    def _formatCell(self, cell):
        if cell is None:
            return "-"
        mean, std, count = cell
        if count > 1:
            return format(mean, ".2f") + " ± " + format(std, ".2f")
        return format(mean, ".2f")

    def render(self):
        """
        Returns
        -------
        String: aligned text table.
        """
        columns = self.getColumns() + [MACRO_COLUMN]
        cells = [["model"] + columns]
        for rowName in self._rows:
            cells.append([rowName] + [self._formatCell(self.getCell(rowName, c)) for c in columns])
        widths = [max(len(row[i]) for row in cells) for i in range(len(columns) + 1)]

        lines = []
        for rowIndex, row in enumerate(cells):
            lines.append(
                "  ".join(
                    value.ljust(widths[i]) if i == 0 else value.rjust(widths[i])
                    for i, value in enumerate(row)
                )
            )
            if rowIndex == 0:
                lines.append("-" * len(lines[0]))
        return "\n".join(lines)

    def toDict(self):
        rows = {}
        for rowName, reports in self._rows.items():
            row = {"runs": len(reports), "devices": {}}
            for column in self.getColumns():
                cell = self.getCell(rowName, column)
                if cell is not None:
                    row["devices"][column] = {"mean": cell[0], "std": cell[1]}
            macro = self.getCell(rowName, MACRO_COLUMN)
            row["macro_over_classes"] = {"mean": macro[0], "std": macro[1]}
            overDevices = 100.0 * np.array([r.meanOverDevices for r in reports], dtype=np.float64)
            row["mean_over_devices"] = {
                "mean": float(np.mean(overDevices)),
                "std": float(np.std(overDevices, ddof=1)) if len(overDevices) > 1 else 0.0,
            }
            rows[rowName] = row
        return {
            "columns": self.getColumns(),
            "known_devices": self.registry.getKnownDevices(),
            "rows": rows,
        }

    def save(self, path):
        options = jsbeautifier.default_options()
        options.indent_size = 4
        with open(path, "w", encoding="utf-8") as tableFile:
            tableFile.write(jsbeautifier.beautify(json.dumps(self.toDict(), ensure_ascii=False), options))


def deviceTable(recordsByRow, manifest, registry):
    """
    Builds a one-run-per-row table.

    Parameters
    ----------
    recordsByRow: dict
        Row name -> list of PredictionRecord.
    manifest: Manifest
        Labeled test manifest.
    registry: DeviceRegistry
        Known devices.

    Returns
    -------
    DeviceTable: the filled table.
    """
    table = DeviceTable(registry)
    for rowName, records in recordsByRow.items():
        table.addRun(rowName, computeMetrics(records, manifest))
    return table
