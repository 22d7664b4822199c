"""
Linear.py

Created: 09/06/26
Last Modified: 10/02/26

Description: Fully connected layer. Any (channels, 1, 1) or flat input is
flattened per example; the output is (batch, out).
"""
# Library Imports.
import numpy as np

# Custom Imports.
from SceneWise.Network.Layers.Layer import Layer


class Linear(Layer):
    """
    Derived class of Layer computing x @ weight.T + bias with weight shaped
    (out, in).
    """

    LEARNABLE = ("weight", "bias")

    def getOutputShape(self, inputShape):
        features = int(np.prod(inputShape))
        if features != self.spec.inChannels:
            self._fail(
                "expects "
                + str(self.spec.inChannels)
                + " input features, got "
                + str(features)
                + " from shape "
                + str(tuple(inputShape))
            )
        return (self.spec.outChannels,)

    def initParams(self, inputShape, rng):
        bound = np.sqrt(6.0 / self.spec.inChannels)
        shape = (self.spec.outChannels, self.spec.inChannels)
        return {
            "weight": rng.uniform(-bound, bound, size=shape).astype(np.float32),
            "bias": np.zeros(self.spec.outChannels, dtype=np.float32),
        }

    def forward(self, x, params, mode="eval", updateRunning=True):
        flat = x.reshape(x.shape[0], -1)
        weight = params["weight"].astype(x.dtype, copy=False)
        bias = params["bias"].astype(x.dtype, copy=False)
        return flat @ weight.T + bias[None, :], (x.shape, flat)

    def backward(self, gradOut, cache, params):
        inputShape, flat = cache
        weight = params["weight"].astype(gradOut.dtype, copy=False)
        grads = {"weight": gradOut.T @ flat, "bias": gradOut.sum(axis=0)}
        return (gradOut @ weight).reshape(inputShape), grads

    def getMacs(self, inputShape):
        return self.spec.inChannels * self.spec.outChannels

    def getParamCount(self, inputShape, includeRunningStats=False):
        return self.spec.inChannels * self.spec.outChannels + self.spec.outChannels
