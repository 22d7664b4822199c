"""
Loss.py

Created: 09/08/26
Last Modified: 09/29/26

Description: Softmax and the softmax cross-entropy loss used for training.
"""
# Library Imports.
import numpy as np

# Custom Imports.
from SceneWise.Errors.Errors import DataError


def softmax(logits):
    """
    Row-wise softmax with max subtraction.

    Parameters
    ----------
    logits: np.ndarray
        (batch, classes).

    Returns
    -------
    np.ndarray: probabilities, same shape and dtype.
    """
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def softmaxCrossEntropy(logits, labels):
    """
    Mean negative log-likelihood of the true classes.

    Parameters
    ----------
    logits: np.ndarray
        (batch, classes).
    labels: np.ndarray
        Integer class indices in [0, classes).

    Returns
    -------
    tuple: (loss as a float, gradient w.r.t. the logits).
    """
    labels = np.asarray(labels, dtype=np.int64)
    batch, classes = logits.shape
    if labels.shape != (batch,):
        raise DataError(
            "Expected " + str(batch) + " labels, got shape " + str(labels.shape) + "."
        )
    if batch and (labels.min() < 0 or labels.max() >= classes):
        raise DataError("Labels must lie in [0, " + str(classes) + ").")

    shifted = logits - logits.max(axis=1, keepdims=True)
    logSumExp = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(batch)
    loss = float(np.mean(logSumExp - shifted[rows, labels]))

    grad = softmax(logits)
    grad[rows, labels] -= 1.0
    grad /= batch
    return loss, grad
