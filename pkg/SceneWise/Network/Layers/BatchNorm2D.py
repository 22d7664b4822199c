"""
BatchNorm2D.py

Created: 09/06/26
Last Modified: 10/06/26

Description: Per-channel batch normalization over (batch, freq, time).

Train mode normalizes with the batch statistics and moves the running
statistics toward them:

    running = (1 - momentum) * running + momentum * batch

with the unbiased batch variance feeding running_var. Eval mode normalizes with
the running statistics. Both modes apply the affine gamma, beta.
"""
# Library Imports.
import numpy as np

# Custom Imports.
from SceneWise.Network.Layers.Layer import Layer


class BatchNorm2D(Layer):
    """
    Derived class of Layer implementing 2-D batch normalization.
    """

    LEARNABLE = ("gamma", "beta")
    BUFFERS = ("running_mean", "running_var")

    # Variance offset in the denominator; zero-variance channels collapse to beta.
    EPSILON = 1e-5

    # Weight of the current batch in the running statistics.
    MOMENTUM = 0.1

    def getOutputShape(self, inputShape):
        if len(inputShape) != 3:
            self._fail("expects a (channels, freq, time) input, got " + str(inputShape))
        if inputShape[0] != self.spec.channels:
            self._fail(
                "expects "
                + str(self.spec.channels)
                + " channels, got "
                + str(inputShape[0])
            )
        return tuple(inputShape)

    def initParams(self, inputShape, rng):
        channels = self.spec.channels
        return {
            "gamma": np.ones(channels, dtype=np.float32),
            "beta": np.zeros(channels, dtype=np.float32),
            "running_mean": np.zeros(channels, dtype=np.float32),
            "running_var": np.ones(channels, dtype=np.float32),
        }

    def forward(self, x, params, mode="eval", updateRunning=True):
        dtype = x.dtype
        gamma = params["gamma"].astype(dtype, copy=False)[None, :, None, None]
        beta = params["beta"].astype(dtype, copy=False)[None, :, None, None]

        if mode == "train":
            mean = x.mean(axis=(0, 2, 3))
            var = x.var(axis=(0, 2, 3))
            invStd = 1.0 / np.sqrt(var + self.EPSILON)
            normalized = (x - mean[None, :, None, None]) * invStd[None, :, None, None]

            if updateRunning:
                count = x.shape[0] * x.shape[2] * x.shape[3]
                unbiased = var * count / max(count - 1, 1)
                running = params["running_mean"]
                params["running_mean"] = (
                    (1.0 - self.MOMENTUM) * running + self.MOMENTUM * mean
                ).astype(running.dtype)
                running = params["running_var"]
                params["running_var"] = (
                    (1.0 - self.MOMENTUM) * running + self.MOMENTUM * unbiased
                ).astype(running.dtype)

            return normalized * gamma + beta, ("train", normalized, invStd)

        mean = params["running_mean"].astype(dtype, copy=False)
        var = params["running_var"].astype(dtype, copy=False)
        invStd = 1.0 / np.sqrt(var + self.EPSILON)
        normalized = (x - mean[None, :, None, None]) * invStd[None, :, None, None]
        return normalized * gamma + beta, ("eval", normalized, invStd)

    def backward(self, gradOut, cache, params):
        mode, normalized, invStd = cache
        gamma = params["gamma"].astype(gradOut.dtype, copy=False)
        grads = {
            "gamma": (gradOut * normalized).sum(axis=(0, 2, 3)),
            "beta": gradOut.sum(axis=(0, 2, 3)),
        }

        gradNormalized = gradOut * gamma[None, :, None, None]
        if mode == "eval":
            return gradNormalized * invStd[None, :, None, None], grads

        # Batch statistics depend on every element of the channel.
        meanGrad = gradNormalized.mean(axis=(0, 2, 3), keepdims=True)
        meanGradNorm = (gradNormalized * normalized).mean(axis=(0, 2, 3), keepdims=True)
        gradInput = (
            gradNormalized - meanGrad - normalized * meanGradNorm
        ) * invStd[None, :, None, None]
        return gradInput, grads

    def getParamCount(self, inputShape, includeRunningStats=False):
        count = 2 * self.spec.channels
        if includeRunningStats:
            count += 2 * self.spec.channels
        return count
