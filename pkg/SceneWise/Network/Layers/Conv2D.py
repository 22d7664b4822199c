"""
Conv2D.py

Created: 09/05/26
Last Modified: 10/10/26

Description: Grouped 2-D cross-correlation with zero padding, the building
block of the factorized CNN. The forward pass unfolds the padded input into
columns (im2col) and runs one batched matrix product per group; the backward
pass folds column gradients back (col2im).

    input (B, C, F, T)  --im2col-->  cols (B, g, C/g * kF * kT, outF * outT)
    weight (O, C/g, kF, kT)  ------>  (g, O/g, C/g * kF * kT)
    output = weight @ cols   ------>  (B, O, outF, outT)
"""
# Library Imports.
import numpy as np

# Custom Imports.
from SceneWise.Network.Layers.Layer import Layer


def getConvOutputSize(size, kernel, stride, padding):
    """floor((size + 2 * padding - kernel) / stride) + 1"""
    return (size + 2 * padding - kernel) // stride + 1


def im2col(x, kernel, stride, padding):
    """
    Unfolds x into overlapping patches.

    Returns
    -------
    np.ndarray: shape (B, C, kF, kT, outF, outT).
    """
    (kF, kT), (sF, sT), (pF, pT) = kernel, stride, padding
    B, C, F, T = x.shape
    outF = getConvOutputSize(F, kF, sF, pF)
    outT = getConvOutputSize(T, kT, sT, pT)

    padded = np.pad(x, ((0, 0), (0, 0), (pF, pF), (pT, pT)))
    cols = np.empty((B, C, kF, kT, outF, outT), dtype=x.dtype)
    for i in range(kF):
        iEnd = i + sF * outF
        for j in range(kT):
            jEnd = j + sT * outT
            cols[:, :, i, j, :, :] = padded[:, :, i:iEnd:sF, j:jEnd:sT]
    return cols


def col2im(cols, inputShape, kernel, stride, padding):
    """
    Adjoint of im2col: accumulates patch gradients into an input-shaped array.
    """
    (kF, kT), (sF, sT), (pF, pT) = kernel, stride, padding
    B, C, F, T = inputShape
    outF, outT = cols.shape[4], cols.shape[5]

    padded = np.zeros((B, C, F + 2 * pF, T + 2 * pT), dtype=cols.dtype)
    for i in range(kF):
        iEnd = i + sF * outF
        for j in range(kT):
            jEnd = j + sT * outT
            padded[:, :, i:iEnd:sF, j:jEnd:sT] += cols[:, :, i, j, :, :]
    return padded[:, :, pF : pF + F, pT : pT + T]


class Conv2D(Layer):
    """
    Derived class of Layer implementing grouped convolution. Weights have shape
    (outChannels, inChannels / groups, kF, kT); the optional bias has shape
    (outChannels,).
    """

    def __init__(self, spec):
        super(Conv2D, self).__init__(spec)
        self.LEARNABLE = ("weight", "bias") if spec.bias else ("weight",)

    def getOutputShape(self, inputShape):
        spec = self.spec
        if len(inputShape) != 3:
            self._fail("expects a (channels, freq, time) input, got " + str(inputShape))
        C, F, T = inputShape
        if C != spec.inChannels:
            self._fail(
                "expects " + str(spec.inChannels) + " input channels, got " + str(C)
            )
        if spec.groups < 1 or spec.inChannels % spec.groups or spec.outChannels % spec.groups:
            self._fail(
                "groups="
                + str(spec.groups)
                + " must divide in="
                + str(spec.inChannels)
                + " and out="
                + str(spec.outChannels)
            )
        if min(spec.kernel) < 1 or min(spec.stride) < 1 or min(spec.padding) < 0:
            self._fail("kernel and stride must be >= 1 and padding >= 0.")
        outF = getConvOutputSize(F, spec.kernel[0], spec.stride[0], spec.padding[0])
        outT = getConvOutputSize(T, spec.kernel[1], spec.stride[1], spec.padding[1])
        if outF < 1 or outT < 1:
            self._fail("kernel " + str(spec.kernel) + " does not fit input " + str(inputShape))
        return (spec.outChannels, outF, outT)

    def initParams(self, inputShape, rng):
        # Kaiming-uniform over the fan-in, gain sqrt(2) for ReLU networks.
        spec = self.spec
        fanIn = (spec.inChannels // spec.groups) * spec.kernel[0] * spec.kernel[1]
        bound = np.sqrt(6.0 / fanIn)
        shape = (spec.outChannels, spec.inChannels // spec.groups) + tuple(spec.kernel)
        params = {"weight": rng.uniform(-bound, bound, size=shape).astype(np.float32)}
        if spec.bias:
            params["bias"] = np.zeros(spec.outChannels, dtype=np.float32)
        return params

    def forward(self, x, params, mode="eval", updateRunning=True):
        spec = self.spec
        weight = params["weight"].astype(x.dtype, copy=False)
        B = x.shape[0]
        groups = spec.groups

        cols = im2col(x, spec.kernel, spec.stride, spec.padding)
        outF, outT = cols.shape[4], cols.shape[5]
        groupCols = cols.reshape(B, groups, -1, outF * outT)
        groupWeight = weight.reshape(groups, spec.outChannels // groups, -1)

        out = np.matmul(groupWeight[None], groupCols)
        out = out.reshape(B, spec.outChannels, outF, outT)
        if spec.bias:
            out = out + params["bias"].astype(x.dtype, copy=False)[None, :, None, None]
        return out, (x.shape, groupCols, outF, outT)

    def backward(self, gradOut, cache, params):
        spec = self.spec
        inputShape, groupCols, outF, outT = cache
        B = gradOut.shape[0]
        groups = spec.groups
        weight = params["weight"].astype(gradOut.dtype, copy=False)

        groupGrad = gradOut.reshape(B, groups, spec.outChannels // groups, outF * outT)
        gradWeight = np.matmul(groupGrad, groupCols.transpose(0, 1, 3, 2)).sum(axis=0)
        grads = {"weight": gradWeight.reshape(weight.shape)}
        if spec.bias:
            grads["bias"] = gradOut.sum(axis=(0, 2, 3))

        groupWeight = weight.reshape(groups, spec.outChannels // groups, -1)
        gradCols = np.matmul(groupWeight.transpose(0, 2, 1)[None], groupGrad)
        gradCols = gradCols.reshape(
            (B, inputShape[1]) + tuple(spec.kernel) + (outF, outT)
        )
        gradInput = col2im(gradCols, inputShape, spec.kernel, spec.stride, spec.padding)
        return gradInput, grads

    def getMacs(self, inputShape):
        spec = self.spec
        outC, outF, outT = self.getOutputShape(inputShape)
        return (
            outF
            * outT
            * outC
            * (spec.inChannels // spec.groups)
            * spec.kernel[0]
            * spec.kernel[1]
        )

    def getParamCount(self, inputShape, includeRunningStats=False):
        spec = self.spec
        count = spec.outChannels * (spec.inChannels // spec.groups) * spec.kernel[0] * spec.kernel[1]
        if spec.bias:
            count += spec.outChannels
        return count
