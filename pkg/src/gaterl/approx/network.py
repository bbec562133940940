"""Small dense feedforward approximator with hand-derived gradients.

A tanh trunk feeds one or more linear heads (policy logits, state value,
action values). Reverse-mode gradients are computed analytically from
per-head output gradients, so agents only need the derivative of their
loss with respect to head outputs. All math is float64.
"""

from __future__ import annotations

import numpy as np

from ..errors import NumericError, ValidationError
from . import backend


class FeedforwardApproximator:
    """Trunk of tanh layers plus named linear heads.

    Parameters are exposed as a flat list (trunk W,b pairs in order, then
    head W,b pairs in sorted-name order); gradients use the same layout.
    """

    def __init__(self, input_dim=10, hidden=(32, 32), heads=None, seed=0):
        if heads is None:
            heads = {"policy": 2, "value": 1}
        if input_dim <= 0 or any(h <= 0 for h in hidden):
            raise ValidationError("layer dimensions must be positive")
        self.input_dim = int(input_dim)
        self.hidden = tuple(int(h) for h in hidden)
        self.head_dims = {str(k): int(v) for k, v in heads.items()}
        self.trunk = []
        self.heads = {}
        rng = np.random.default_rng(seed)
        dims = [self.input_dim, *self.hidden]
        for din, dout in zip(dims[:-1], dims[1:]):
            self.trunk.append(self._init_layer(din, dout, rng))
        last = dims[-1]
        for name in sorted(self.head_dims):
            self.heads[name] = self._init_layer(last, self.head_dims[name], rng)

    @staticmethod
    def _init_layer(din, dout, rng):
        limit = np.sqrt(6.0 / (din + dout))
        w = rng.uniform(-limit, limit, size=(dout, din))
        b = np.zeros(dout)
        return [w, b]

    @property
    def dims(self):
        return [self.input_dim, *self.hidden]

    def parameters(self):
        """Flat parameter list; mutating the arrays mutates the network."""
        out = []
        for w, b in self.trunk:
            out.extend((w, b))
        for name in sorted(self.heads):
            out.extend(self.heads[name])
        return out

    def zero_like_parameters(self):
        return [np.zeros_like(p) for p in self.parameters()]

    def set_parameters(self, params):
        own = self.parameters()
        if len(own) != len(params):
            raise ValidationError("parameter count mismatch")
        for dst, src in zip(own, params):
            if dst.shape != src.shape:
                raise ValidationError("parameter shape mismatch")
            dst[...] = src

    def copy(self) -> "FeedforwardApproximator":
        clone = FeedforwardApproximator(self.input_dim, self.hidden, self.head_dims, seed=0)
        clone.set_parameters([p.copy() for p in self.parameters()])
        return clone

    def forward_batch(self, x):
        """Run a (B, input_dim) batch; returns (head outputs, cache)."""
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ValidationError(f"expected input shape (B, {self.input_dim})")
        acts = [x]
        h = x
        for w, b in self.trunk:
            h = backend.dense_forward(h, w, b, True)
            acts.append(h)
        outputs = {
            name: backend.dense_forward(h, w, b, False)
            for name, (w, b) in self.heads.items()
        }
        return outputs, acts

    def forward(self, x):
        """Single-observation forward; returns 1-D arrays per head."""
        outputs, _ = self.forward_batch(np.asarray(x, dtype=np.float64)[None, :])
        return {name: out[0] for name, out in outputs.items()}

    def backward(self, acts, head_grads):
        """Backpropagate per-head output gradients to all parameters.

        `acts` is the cache from forward_batch on the same batch;
        `head_grads` maps head name -> (B, head_dim) gradient (heads absent
        from the dict contribute nothing). Returns the flat gradient list.
        """
        h_last = acts[-1]
        trunk_grads = [None] * len(self.trunk)
        head_grad_store = {}
        dh = np.zeros_like(h_last)
        for name, dy in head_grads.items():
            w, _ = self.heads[name]
            dy = np.ascontiguousarray(dy, dtype=np.float64)
            if not np.all(np.isfinite(dy)):
                bad = int(np.argwhere(~np.isfinite(dy).all(axis=1))[0][0])
                raise NumericError(f"non-finite head gradient for {name!r} at sample {bad}")
            # y is unused when tanh was not applied; dy satisfies the signature
            dx, dw, db = backend.dense_backward(h_last, dy, dy, w, False)
            head_grad_store[name] = (dw, db)
            dh += dx
        for i in reversed(range(len(self.trunk))):
            w, _ = self.trunk[i]
            dx, dw, db = backend.dense_backward(acts[i], acts[i + 1], dh, w, True)
            trunk_grads[i] = (dw, db)
            dh = dx
        grads = []
        for dw, db in trunk_grads:
            grads.extend((dw, db))
        for name in sorted(self.heads):
            if name in head_grad_store:
                grads.extend(head_grad_store[name])
            else:
                w, b = self.heads[name]
                grads.extend((np.zeros_like(w), np.zeros_like(b)))
        return grads
