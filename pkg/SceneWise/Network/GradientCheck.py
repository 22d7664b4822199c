"""
GradientCheck.py

Created: 09/11/26
Last Modified: 10/09/26

Description: Finite-difference verification of the analytic gradients. The
model is run on float64 copies of the parameters and input; every learnable
element is nudged by +h and -h and the central difference of the
cross-entropy loss is compared against backward().

The reported error of a tensor is

    ||analytic - numeric|| / max(||analytic|| + ||numeric||, 1e-8)

and gradientCheck() returns the largest error over all tensors.
"""
# Library Imports.
import numpy as np

# Custom Imports.
from SceneWise.Network.Loss import softmaxCrossEntropy
from SceneWise.Network.Model import Model, ParameterStore


def _relativeError(analytic, numeric):
    difference = np.linalg.norm((analytic - numeric).ravel())
    scale = np.linalg.norm(analytic.ravel()) + np.linalg.norm(numeric.ravel())
    return float(difference / max(scale, 1e-8))


def _toFloat64(store):
    tensors = {
        index: {name: value.astype(np.float64) for name, value in layer.items()}
        for index, layer in store.tensors.items()
    }
    return ParameterStore(tensors, "fp32", dict(store.learnable))


def getGradientErrors(graph, store, x, labels, h=1e-3, mode="train", includeInput=False):
    """
    Compares analytic and numeric gradients tensor by tensor.

    Parameters
    ----------
    graph: ModelGraph
        Small graph to check; every learnable element costs two forward passes.
    store: ParameterStore
        Parameters of the graph. Not modified.
    x: np.ndarray
        (batch, channels, freq, time) input.
    labels: np.ndarray
        Integer labels of the batch.
    h: float
        Finite-difference step.
    mode: String
        "train" checks through batch statistics, "eval" through running ones.
    includeInput: bool
        Also checks the gradient w.r.t. x, reported under the key "input".

    Returns
    -------
    dict: "<layer name>.<tensor>" -> relative error.
    """
    model = Model(graph)
    params = _toFloat64(store)
    x = np.array(x, dtype=np.float64)

    def loss(inputs):
        logits, _ = model.forward(inputs, params, mode, updateRunning=False)
        return softmaxCrossEntropy(logits, labels)[0]

    logits, caches = model.forward(x, params, mode, updateRunning=False)
    _, gradLogits = softmaxCrossEntropy(logits, labels)
    gradInput, grads = model.backward(gradLogits, caches, params)

    errors = {}
    for index, name, tensor in params.iterLearnable():
        numeric = np.zeros_like(tensor)
        flat = tensor.reshape(-1)
        numericFlat = numeric.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + h
            lossPlus = loss(x)
            flat[i] = original - h
            lossMinus = loss(x)
            flat[i] = original
            numericFlat[i] = (lossPlus - lossMinus) / (2.0 * h)
        key = model.layers[index].getName() + "." + name
        errors[key] = _relativeError(grads[index][name], numeric)

    if includeInput:
        numeric = np.zeros_like(x)
        flat = x.reshape(-1)
        numericFlat = numeric.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + h
            lossPlus = loss(x)
            flat[i] = original - h
            lossMinus = loss(x)
            flat[i] = original
            numericFlat[i] = (lossPlus - lossMinus) / (2.0 * h)
        errors["input"] = _relativeError(gradInput, numeric)

    return errors


def gradientCheck(graph, store, x, labels, h=1e-3, mode="train"):
    """
    Returns
    -------
    float: largest relative error over every learnable tensor.
    """
    errors = getGradientErrors(graph, store, x, labels, h, mode)
    return max(errors.values()) if errors else 0.0
