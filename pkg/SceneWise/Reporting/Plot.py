"""
Plot.py

Created: 09/27/26
Last Modified: 10/14/26

Description: Static figures of a training run and of a device table, drawn
with matplotlib's headless backend and written to image files.

    training curves   loss and accuracy per epoch, one line per stage/device
    device accuracy   grouped bars, one group per device, one bar per row
"""
# Library Imports.
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

# Custom Imports.
from SceneWise.Inference.DeviceTable import MACRO_COLUMN

# Line colors of the training curves.
SERIES_COLOR_SET = {
    "loss": "tab:red",
    "train_acc": "tab:blue",
    "val_acc": "tab:green",
}


def _groupRuns(records):
    runs = {}
    for record in records:
        key = "stage 1" if record["device"] is None else "stage 2 " + record["device"]
        runs.setdefault(key, []).append(record)
    return runs


def plotTrainingCurves(records, path):
    """
    Draws loss (top) and accuracy (bottom) against epoch.

    Parameters
    ----------
    records: list
        Training log records.
    path: String
        Output image.
    """
    fig, ax = plt.subplots(2, 1)
    fig.set_size_inches(9, 10)

    for key, run in _groupRuns(records).items():
        epochs = [r["epoch"] for r in run]
        # Stage 2 runs are thinner so the general curve stands out.
        width = 2.0 if key == "stage 1" else 0.8
        ax[0].plot(epochs, [r["loss"] for r in run], color=SERIES_COLOR_SET["loss"], linewidth=width, label=key)
        ax[1].plot(
            epochs, [r["train_acc"] for r in run], color=SERIES_COLOR_SET["train_acc"], linewidth=width,
            label=key + " train",
        )
        validation = [(r["epoch"], r["val_acc"]) for r in run if r["val_acc"] is not None]
        if validation:
            ax[1].plot(
                [v[0] for v in validation], [v[1] for v in validation], color=SERIES_COLOR_SET["val_acc"],
                linewidth=width, linestyle="--", label=key + " val",
            )

    ax[0].set_xlabel("Epoch")
    ax[0].set_ylabel("Loss")
    ax[0].title.set_text("Training loss")
    ax[0].grid()
    ax[1].set_xlabel("Epoch")
    ax[1].set_ylabel("Accuracy")
    ax[1].set_ylim([0, 1])
    ax[1].title.set_text("Training and validation accuracy")
    ax[1].grid()
    if records:
        ax[1].legend(fontsize="small", ncol=2)

    plt.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plotDeviceAccuracy(table, path):
    """
    Draws the device table as grouped bars with run std as error bars.

    Parameters
    ----------
    table: DeviceTable
        Filled table.
    path: String
        Output image.
    """
    columns = table.getColumns() + [MACRO_COLUMN]
    rowNames = table.getRowNames()
    positions = np.arange(len(columns))
    width = 0.8 / max(len(rowNames), 1)

    fig, ax = plt.subplots(1, 1)
    fig.set_size_inches(max(6, len(columns)), 5)
    for rowIndex, rowName in enumerate(rowNames):
        cells = [table.getCell(rowName, column) for column in columns]
        means = [0.0 if c is None else c[0] for c in cells]
        stds = [0.0 if c is None else c[1] for c in cells]
        ax.bar(positions + rowIndex * width, means, width, yerr=stds, label=rowName)

    ax.set_xticks(positions + width * (len(rowNames) - 1) / 2)
    ax.set_xticklabels(["Macro" if c == MACRO_COLUMN else c for c in columns])
    ax.set_ylabel("Accuracy (%)")
    ax.set_ylim([0, 100])
    ax.title.set_text("Device-wise accuracy")
    ax.grid(axis="y")
    ax.legend()

    plt.tight_layout()
    fig.savefig(path)
    plt.close(fig)
