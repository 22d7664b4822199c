"""
ReLU.py

Created: 09/06/26
Last Modified: 09/06/26

Description: Rectified linear activation, max(0, x).
"""
# Library Imports.
import numpy as np

# Custom Imports.
from SceneWise.Network.Layers.Layer import Layer


class ReLU(Layer):
    """
    Derived class of Layer implementing max(0, x). The gradient at exactly zero
    is taken as zero.
    """

    def forward(self, x, params, mode="eval", updateRunning=True):
        mask = x > 0
        return np.where(mask, x, 0).astype(x.dtype, copy=False), mask

    def backward(self, gradOut, cache, params):
        return gradOut * cache, {}
