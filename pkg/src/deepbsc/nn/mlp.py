"""Stacked dense layers with optional batch normalisation."""
from __future__ import annotations

import copy

import numpy as np

from .activations import activate, activate_backward
from .dense import BatchNormParams, DenseParams, batchnorm_apply, batchnorm_backward, dense_apply, dense_backward


class Mlp:
    """Dense -> [BN] -> activation, repeated.

    ``layers`` is a list of ``(size, activation, batchnorm)`` tuples.
    """

    def __init__(self, n_in, layers, rng, final_limit=None, bn_momentum=0.99):
        self.n_in = n_in
        self.dense = []
        self.bn = []
        self.activations = []
        prev = n_in
        for i, (size, act, use_bn) in enumerate(layers):
            limit = final_limit if (i == len(layers) - 1 and final_limit is not None) else None
            self.dense.append(DenseParams.init(prev, size, rng, limit))
            self.bn.append(BatchNormParams.init(size, momentum=bn_momentum) if use_bn else None)
            self.activations.append(act)
            prev = size

    @property
    def n_out(self):
        return self.dense[-1].n_out

    def params(self):
        out = {}
        for i, (d, bn) in enumerate(zip(self.dense, self.bn)):
            out[f"l{i}.weights"] = d.weights
            out[f"l{i}.bias"] = d.bias
            if bn is not None:
                out[f"l{i}.gamma"] = bn.gamma
                out[f"l{i}.beta"] = bn.beta
        return out

    def buffers(self):
        out = {}
        for i, bn in enumerate(self.bn):
            if bn is not None:
                out[f"l{i}.running_mean"] = bn.running_mean
                out[f"l{i}.running_var"] = bn.running_var
        return out

    def state_tensors(self):
        return {**self.params(), **self.buffers()}

    def copy(self):
        return copy.deepcopy(self)

    def forward(self, x, training=False):
        caches = []
        h = np.asarray(x, dtype=np.float64)
        for d, bn, act in zip(self.dense, self.bn, self.activations):
            if bn is None:
                h, c = dense_apply(d, h, act)
                caches.append((c, None, None))
            else:
                z, c = dense_apply(d, h, "linear")
                zn, cbn = batchnorm_apply(bn, z, training)
                h = activate(zn, act)
                caches.append((c, cbn, (zn, h, act)))
        return h, caches

    def __call__(self, x, training=False):
        return self.forward(x, training)[0]

    def backward(self, caches, dy):
        grads = {}
        g = np.asarray(dy, dtype=np.float64)
        for i in reversed(range(len(self.dense))):
            c, cbn, cact = caches[i]
            if cbn is not None:
                zn, h, act = cact
                g = activate_backward(g, zn, h, act)
                g, gbn = batchnorm_backward(self.bn[i], cbn, g)
                grads[f"l{i}.gamma"] = gbn["gamma"]
                grads[f"l{i}.beta"] = gbn["beta"]
            g, gd = dense_backward(self.dense[i], c, g)
            grads[f"l{i}.weights"] = gd["weights"]
            grads[f"l{i}.bias"] = gd["bias"]
        return g, grads
