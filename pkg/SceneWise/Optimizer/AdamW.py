"""
AdamW.py

Created: 09/15/26
Last Modified: 10/08/26

Description: Adam with decoupled weight decay. For every learnable tensor and
learning rate lr, one step does

    theta <- theta - lr * wd * theta
    m     <- beta1 * m + (1 - beta1) * g
    v     <- beta2 * v + (1 - beta2) * g^2
    theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)

with the bias-corrected moments m_hat = m / (1 - beta1^t) and
v_hat = v / (1 - beta2^t).
"""
# Library Imports.
import numpy as np

# Custom Imports.
from SceneWise.Errors.Errors import ConfigurationError, NonFiniteError


class AdamW:
    """
    Optimizer state: first and second moment of every learnable tensor of a
    ParameterStore and the step counter.
    """

    def __init__(self, beta1=0.9, beta2=0.999, epsilon=1e-8, weightDecay=0.004, tensorNames=None):
        """
        Parameters
        ----------
        beta1, beta2: float
            Decay rates of the first and second moment, in [0, 1).
        epsilon: float
            Added to the root of the second moment.
        weightDecay: float
            Decoupled decay rate, scaled by the learning rate every step.
        tensorNames: dict
            (layer index, tensor name) -> display name used in diagnostics.
        """
        if not (0.0 <= beta1 < 1.0 and 0.0 <= beta2 < 1.0):
            raise ConfigurationError("AdamW betas must lie in [0, 1).")
        if epsilon <= 0 or weightDecay < 0:
            raise ConfigurationError("AdamW needs epsilon > 0 and weight decay >= 0.")

        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.weightDecay = weightDecay
        self.tensorNames = tensorNames if tensorNames is not None else {}

        self.stepCount = 0
        self.firstMoment = {}
        self.secondMoment = {}

    def _getName(self, index, name):
        return self.tensorNames.get((index, name), "layer " + str(index) + " " + name)

    def step(self, store, learningRate):
        """
        Applies one update to every learnable tensor of the store, using the
        gradients in store.grads.

        Parameters
        ----------
        store: ParameterStore
            Updated in place.
        learningRate: float
            Learning rate of this step, >= 0.

        Raises NonFiniteError naming the first tensor with a NaN or infinite
        gradient; no tensor is modified in that case.
        """
        if learningRate < 0:
            raise ConfigurationError("Learning rate must be >= 0, got " + str(learningRate) + ".")

        for index, name, tensor in store.iterLearnable():
            grad = store.grads[index][name]
            if grad.shape != tensor.shape:
                raise ConfigurationError(
                    "Gradient of "
                    + self._getName(index, name)
                    + " has shape "
                    + str(grad.shape)
                    + ", parameter has "
                    + str(tensor.shape)
                    + "."
                )
            if not np.all(np.isfinite(grad)):
                raise NonFiniteError(
                    "Non-finite gradient in tensor "
                    + self._getName(index, name)
                    + " at optimizer step "
                    + str(self.stepCount + 1)
                    + "."
                )

        self.stepCount += 1
        correction1 = 1.0 - self.beta1**self.stepCount
        correction2 = 1.0 - self.beta2**self.stepCount

        for index, name, tensor in store.iterLearnable():
            grad = store.grads[index][name].astype(tensor.dtype, copy=False)
            key = (index, name)
            if key not in self.firstMoment:
                self.firstMoment[key] = np.zeros_like(tensor)
                self.secondMoment[key] = np.zeros_like(tensor)
            m = self.firstMoment[key]
            v = self.secondMoment[key]

            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad

            tensor -= learningRate * self.weightDecay * tensor
            tensor -= learningRate * (m / correction1) / (np.sqrt(v / correction2) + self.epsilon)

    def getMoments(self, index, name):
        """
        Returns
        -------
        tuple: (first moment, second moment) of one tensor, or (None, None)
        before its first update.
        """
        key = (index, name)
        return self.firstMoment.get(key), self.secondMoment.get(key)
