"""Pure-numpy dense-layer kernels (fallback backend).

Same contract as the compiled kernels: row-major float64 arrays, weights
stored (out, in), layer output y = x @ W.T + b with optional tanh.
"""

import numpy as np


def dense_forward(x, w, b, apply_tanh):
    z = x @ w.T + b
    if apply_tanh:
        np.tanh(z, out=z)
    return z


def dense_backward(x, y, dy, w, applied_tanh):
    """Gradients of one dense layer given upstream grad dy.

    When tanh was applied, y holds tanh(z) so dz = dy * (1 - y^2).
    Returns (dx, dw, db).
    """
    dz = dy * (1.0 - y * y) if applied_tanh else dy
    dw = dz.T @ x
    db = dz.sum(axis=0)
    dx = dz @ w
    return dx, dw, db
