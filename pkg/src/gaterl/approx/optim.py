"""Adam with bias correction and optional global gradient-norm clipping."""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError


class Adam:
    """Per-parameter first/second moment estimates, updated in place."""

    def __init__(self, params, lr=3e-4, beta1=0.9, beta2=0.999, eps=1e-8, clip_norm=0.5):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.clip_norm = clip_norm  # None disables clipping
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params, grads):
        if len(params) != len(self.m) or len(grads) != len(self.m):
            raise ValidationError("optimizer/parameter count mismatch")
        if self.clip_norm is not None:
            sq = sum(float(np.sum(g * g)) for g in grads)
            norm = np.sqrt(sq)
            if norm > self.clip_norm and norm > 0:
                scale = self.clip_norm / norm
                grads = [g * scale for g in grads]
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def state_dict(self):
        return {
            "lr": self.lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "clip_norm": self.clip_norm,
            "t": self.t,
            "m": [a.copy() for a in self.m],
            "v": [a.copy() for a in self.v],
        }

    def load_state_dict(self, state):
        self.lr = state["lr"]
        self.beta1 = state["beta1"]
        self.beta2 = state["beta2"]
        self.eps = state["eps"]
        self.clip_norm = state["clip_norm"]
        self.t = state["t"]
        if len(state["m"]) != len(self.m):
            raise ValidationError("optimizer moment count mismatch")
        self.m = [np.array(a, dtype=np.float64) for a in state["m"]]
        self.v = [np.array(a, dtype=np.float64) for a in state["v"]]
