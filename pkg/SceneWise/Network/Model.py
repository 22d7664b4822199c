"""
Model.py

Created: 09/08/26
Last Modified: 10/12/26

Description: The Model class runs a ModelGraph forward and backward over the
tensors of a ParameterStore. The same Model is shared by the general and the
device-specific checkpoints; only the ParameterStore differs.
"""
# Library Imports.
import copy

import numpy as np

# Custom Imports.
from SceneWise.Errors.Errors import DataError


class ParameterStore:
    """
    Named tensors of every layer, keyed by layer index, plus a gradient slot of
    the same shape for every learnable tensor.
    """

    # Precision tags a store can carry.
    PRECISIONS = ("fp32", "fp16")

    def __init__(self, tensors, precision="fp32", learnable=None):
        """
        Parameters
        ----------
        tensors: dict
            Layer index -> {tensor name: np.ndarray}.
        precision: String
            "fp32", or "fp16" for stores holding binary16-rounded values.
        learnable: dict
            Layer index -> tuple of learnable tensor names. Tensors not listed
            are buffers (i.e. batchnorm running statistics).
        """
        if precision not in self.PRECISIONS:
            raise ValueError("Unknown precision tag '" + str(precision) + "'.")
        self.tensors = tensors
        self.precision = precision
        self.learnable = learnable if learnable is not None else {}
        self.grads = {
            index: {name: np.zeros_like(tensors[index][name]) for name in names}
            for index, names in self.learnable.items()
        }

    def copy(self):
        """Deep copy; tensors, gradients and precision tag are duplicated."""
        clone = ParameterStore(
            {index: {k: v.copy() for k, v in layer.items()} for index, layer in self.tensors.items()},
            self.precision,
            copy.deepcopy(self.learnable),
        )
        return clone

    def getTensor(self, index, name):
        return self.tensors[index][name]

    def setTensor(self, index, name, value):
        self.tensors[index][name] = value

    def iterLearnable(self):
        """
        Yields (layer index, tensor name, tensor) for every learnable tensor in
        layer order.
        """
        for index in sorted(self.learnable):
            for name in self.learnable[index]:
                yield index, name, self.tensors[index][name]

    def getTensorCount(self):
        return sum(len(layer) for layer in self.tensors.values())

    def isIdentical(self, other):
        """
        Bitwise equality of every tensor, dtype included.
        """
        if sorted(self.tensors) != sorted(other.tensors):
            return False
        for index, layer in self.tensors.items():
            otherLayer = other.tensors[index]
            if sorted(layer) != sorted(otherLayer):
                return False
            for name, value in layer.items():
                otherValue = otherLayer[name]
                if value.dtype != otherValue.dtype or value.shape != otherValue.shape:
                    return False
                if value.tobytes() != otherValue.tobytes():
                    return False
        return True


class Model:
    """
    Executes a ModelGraph. Stateless with respect to weights: every call takes
    the ParameterStore to use, so one Model can serve several checkpoints and
    concurrent eval-mode calls.
    """

    def __init__(self, graph):
        """
        Parameters
        ----------
        graph: ModelGraph
            Shape-valid graph. Raises GraphValidationError otherwise.
        """
        self.graph = graph
        self.layerShapes = graph.getLayerShapes()
        self.layers = graph.buildLayers()

    def initParams(self, rng):
        """
        Draws initial weights.

        Parameters
        ----------
        rng: np.random.Generator
            Seeded generator; the only source of randomness.

        Returns
        -------
        ParameterStore: fp32 tensors for every layer.
        """
        tensors = {}
        learnable = {}
        for index, layer in enumerate(self.layers):
            params = layer.initParams(self.layerShapes[index], rng)
            if params:
                tensors[index] = params
                learnable[index] = tuple(layer.LEARNABLE)
        return ParameterStore(tensors, "fp32", learnable)

    def getTensorNames(self):
        """
        Returns
        -------
        list: (layer index, "<layer name>.<tensor name>") for every stored
        tensor, in layer order with learnable tensors before buffers.
        """
        names = []
        for index, layer in enumerate(self.layers):
            for tensorName in tuple(layer.LEARNABLE) + tuple(layer.BUFFERS):
                names.append((index, layer.getName() + "." + tensorName))
        return names

    def forward(self, x, store, mode="eval", updateRunning=True):
        """
        Runs the graph on a batch.

        Parameters
        ----------
        x: np.ndarray
            (batch, channels, freq, time) input.
        store: ParameterStore
            Tensors to use. Train mode may update batchnorm running stats.
        mode: String
            "train" or "eval".
        updateRunning: bool
            When False, train mode leaves the running statistics untouched.

        Returns
        -------
        tuple: ((batch, classes) logits, list of per-layer caches).
        """
        if x.ndim != 4 or x.shape[1] != self.graph.inputShape[0]:
            raise DataError(
                "Model expects (batch, "
                + str(self.graph.inputShape[0])
                + ", freq, time) input, got "
                + str(x.shape)
                + "."
            )

        caches = []
        for index, layer in enumerate(self.layers):
            params = store.tensors.get(index, {})
            x, cache = layer.forward(x, params, mode, updateRunning)
            caches.append(cache)
        return x, caches

    def backward(self, gradLogits, caches, store):
        """
        Back propagates a logit gradient through the graph. The gradients are
        written into store.grads and returned.

        Returns
        -------
        tuple: (gradient w.r.t. the input, store.grads).
        """
        grad = gradLogits
        for index in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[index]
            params = store.tensors.get(index, {})
            grad, layerGrads = layer.backward(grad, caches[index], params)
            for name, value in layerGrads.items():
                store.grads[index][name] = value
        return grad, store.grads

    def predictLogits(self, x, store):
        """Eval-mode forward pass returning only the logits."""
        logits, _ = self.forward(x, store, "eval")
        return logits
