"""
AvgPool2D.py

Created: 09/06/26
Last Modified: 10/02/26

Description: Average pooling over (freq, time) windows, and the global average
pool that reduces each channel map to 1 x 1.
"""
# Library Imports.
import numpy as np

# Custom Imports.
from SceneWise.Network.Layers.Layer import Layer
from SceneWise.Network.Layers.Conv2D import col2im, getConvOutputSize, im2col


class AvgPool2D(Layer):
    """
    Derived class of Layer averaging kF x kT windows placed every (sF, sT).
    No padding; windows never extend past the input.
    """

    def getOutputShape(self, inputShape):
        if len(inputShape) != 3:
            self._fail("expects a (channels, freq, time) input, got " + str(inputShape))
        C, F, T = inputShape
        (kF, kT), (sF, sT) = self.spec.kernel, self.spec.stride
        if min(kF, kT, sF, sT) < 1:
            self._fail("pool window and stride must be >= 1.")
        if kF > F or kT > T:
            self._fail(
                "pool window " + str(self.spec.kernel) + " is larger than input " + str((F, T))
            )
        return (C, getConvOutputSize(F, kF, sF, 0), getConvOutputSize(T, kT, sT, 0))

    def forward(self, x, params, mode="eval", updateRunning=True):
        cols = im2col(x, self.spec.kernel, self.spec.stride, (0, 0))
        return cols.mean(axis=(2, 3)), (x.shape, cols.shape)

    def backward(self, gradOut, cache, params):
        inputShape, colsShape = cache
        kF, kT = self.spec.kernel
        gradCols = np.broadcast_to(
            (gradOut / (kF * kT))[:, :, None, None, :, :], colsShape
        )
        return col2im(gradCols, inputShape, self.spec.kernel, self.spec.stride, (0, 0)), {}


class GlobalAvgPool(Layer):
    """
    Derived class of Layer averaging every channel map to a single value. The
    output keeps a (channels, 1, 1) shape.
    """

    def getOutputShape(self, inputShape):
        if len(inputShape) != 3:
            self._fail("expects a (channels, freq, time) input, got " + str(inputShape))
        return (inputShape[0], 1, 1)

    def forward(self, x, params, mode="eval", updateRunning=True):
        return x.mean(axis=(2, 3), keepdims=True), x.shape

    def backward(self, gradOut, cache, params):
        inputShape = cache
        scale = 1.0 / (inputShape[2] * inputShape[3])
        return np.broadcast_to(gradOut * scale, inputShape).copy(), {}
