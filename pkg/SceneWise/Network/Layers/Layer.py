"""
Layer.py

Created: 09/05/26
Last Modified: 10/06/26

Description: The Layer class is a concrete base class that provides a common
API for the derived layer kinds of the network. Layers are stateless: weights
live in a ParameterStore and everything the backward pass needs is returned by
forward() as a cache. This keeps inference a pure function of (graph, params)
so it can run concurrently across clips.

Activations are 4-D arrays shaped (batch, channels, freq, time). Shapes passed
to getOutputShape() and getMacs() drop the batch axis.
"""
# Library Imports.


# Custom Imports.
from SceneWise.Errors.Errors import GraphValidationError


class Layer:
    """
    The Layer class is a concrete base class for network layers. By default it
    behaves as an identity layer without parameters.
    """

    # Names of learnable tensors. Derived classes override.
    LEARNABLE = ()

    # Names of tensors that are stored but not trained.
    BUFFERS = ()

    def __init__(self, spec):
        """
        Parameters
        ----------
        spec: LayerSpec
            Hyperparameters of the layer.
        """
        self.spec = spec

    def getOutputShape(self, inputShape):
        """
        Validates the input shape and returns the output shape.

        Parameters
        ----------
        inputShape: tuple
            (channels, freq, time), or (features,) after flattening layers.

        Returns
        -------
        tuple: output shape without the batch axis.
        Raises GraphValidationError for shapes the layer cannot consume.
        """
        return tuple(inputShape)

    def initParams(self, inputShape, rng):
        """
        Returns a dict of freshly initialized tensors for this layer.
        """
        return {}

    def forward(self, x, params, mode="eval", updateRunning=True):
        """
        Computes the layer output.

        Parameters
        ----------
        x: np.ndarray
            Input batch.
        params: dict
            Tensors of this layer, keyed by name.
        mode: String
            "train" or "eval".
        updateRunning: bool
            Whether train mode may update running statistics.

        Returns
        -------
        tuple: (output, cache) where cache is consumed by backward().
        """
        return x, None

    def backward(self, gradOut, cache, params):
        """
        Back propagates through the layer.

        Returns
        -------
        tuple: (gradInput, grads) with grads keyed like LEARNABLE.
        """
        return gradOut, {}

    def getMacs(self, inputShape):
        """
        Multiply-accumulate count of one forward pass for a single example.
        """
        return 0

    def getParamCount(self, inputShape, includeRunningStats=False):
        """
        Number of stored values of this layer.
        """
        return 0

    def getKind(self):
        return self.spec.kind

    def getName(self):
        return self.spec.name

    def _fail(self, message):
        raise GraphValidationError("Layer '" + self.spec.name + "': " + message)
