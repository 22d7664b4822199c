"""
Fusion.py

Created: 09/14/26
Last Modified: 10/04/26

Description: Folds every batchnorm layer into the convolution in front of it.
With scale = gamma / sqrt(running_var + eps):

    weight' = weight * scale            (per output channel)
    bias'   = (bias - running_mean) * scale + beta

The fused graph has no batchnorm layers and produces the same eval-mode
logits up to rounding.
"""
# Library Imports.
from dataclasses import replace

import numpy as np

# Custom Imports.
from SceneWise.Errors.Errors import FusionUnsupportedError
from SceneWise.Network.Layers.BatchNorm2D import BatchNorm2D
from SceneWise.Network.Model import ParameterStore
from SceneWise.Network.ModelGraph import ModelGraph


def fuseBatchnorm(graph, store):
    """
    Parameters
    ----------
    graph: ModelGraph
        Graph whose batchnorm layers all directly follow a conv2d.
    store: ParameterStore
        Tensors of the graph; left untouched.

    Returns
    -------
    tuple: (fused ModelGraph, fused fp32 ParameterStore).
    Raises FusionUnsupportedError when a batchnorm has no conv2d in front.
    """
    layers = []
    tensors = {}
    learnable = {}
    # Index in the fused graph of the conv that a following batchnorm folds into.
    lastConv = None

    for index, spec in enumerate(graph.layers):
        source = store.tensors.get(index, {})

        if spec.kind != "batchnorm2d":
            newIndex = len(layers)
            layers.append(spec)
            if source:
                tensors[newIndex] = {name: value.copy() for name, value in source.items()}
                learnable[newIndex] = tuple(store.learnable.get(index, ()))
            lastConv = newIndex if spec.kind == "conv2d" else None
            continue

        if lastConv is None:
            raise FusionUnsupportedError(
                "Batchnorm layer '"
                + spec.name
                + "' is not preceded by a conv2d layer and cannot be fused."
            )
        conv = layers[lastConv]
        if conv.outChannels != spec.channels:
            raise FusionUnsupportedError(
                "Batchnorm layer '"
                + spec.name
                + "' has "
                + str(spec.channels)
                + " channels but conv '"
                + conv.name
                + "' emits "
                + str(conv.outChannels)
                + "."
            )

        convTensors = tensors[lastConv]
        gamma = source["gamma"].astype(np.float64)
        beta = source["beta"].astype(np.float64)
        mean = source["running_mean"].astype(np.float64)
        var = source["running_var"].astype(np.float64)
        scale = gamma / np.sqrt(var + BatchNorm2D.EPSILON)

        weight = convTensors["weight"].astype(np.float64)
        bias = convTensors["bias"].astype(np.float64) if conv.bias else np.zeros_like(mean)
        convTensors["weight"] = (weight * scale[:, None, None, None]).astype(np.float32)
        convTensors["bias"] = ((bias - mean) * scale + beta).astype(np.float32)

        layers[lastConv] = replace(conv, bias=True)
        learnable[lastConv] = ("weight", "bias")
        # A second batchnorm in a row has no conv of its own.
        lastConv = None

    fusedGraph = ModelGraph(graph.inputShape, graph.classCount, layers)
    fusedGraph.validate()
    return fusedGraph, ParameterStore(tensors, "fp32", learnable)
