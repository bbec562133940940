"""Hand-built demonstration policy: allow exactly when the learner has
failed the current question at least `threshold` times.

The network has no hidden layers; the allow logit is a steep linear ramp
in the (saturating) failed-attempts feature, with the cut placed halfway
between the encodings of threshold-1 and threshold failures, so greedy
action selection flips precisely at the threshold."""

from __future__ import annotations

import numpy as np

from .approx import FeedforwardApproximator, save_checkpoint
from .domain import FEATURE_DIM, FeatureCaps
from .errors import ValidationError


def build_threshold_net(threshold: int = 3, sharpness: float = 50.0, caps=FeatureCaps()):
    if not 1 <= threshold <= caps.fa_cap:
        raise ValidationError(f"threshold in [1, {caps.fa_cap}]")
    net = FeedforwardApproximator(FEATURE_DIM, (), {"policy": 2, "value": 1}, seed=0)
    zero = [np.zeros_like(p) for p in net.parameters()]
    net.set_parameters(zero)
    cut = (threshold - 0.5) / caps.fa_cap
    w_policy, b_policy = net.heads["policy"]
    w_policy[1, 0] = sharpness
    b_policy[1] = -sharpness * cut
    return net


def save_demo_checkpoint(path, threshold: int = 3, sharpness: float = 50.0) -> str:
    net = build_threshold_net(threshold, sharpness)
    save_checkpoint(net, path, step=0, config_hash=f"demo-threshold-{threshold}")
    return str(path)
