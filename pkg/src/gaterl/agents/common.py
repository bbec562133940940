"""Action selection shared by agents, baselines, and the serving layer."""

from __future__ import annotations

import numpy as np

from ..approx import load_checkpoint
from ..domain import Action, FeatureCaps, featurize
from ..errors import ValidationError


def softmax(logits):
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def log_softmax(logits):
    z = logits - np.max(logits, axis=-1, keepdims=True)
    return z - np.log(np.sum(np.exp(z), axis=-1, keepdims=True))


def greedy_action(values) -> Action:
    """Argmax over [deny, allow] scores; Deny wins exact ties."""
    return Action.ALLOW if values[1] > values[0] else Action.DENY


def sample_action(logits, rng) -> tuple:
    """Sample the softmax policy; returns (action, log-probability)."""
    logp = log_softmax(np.asarray(logits, dtype=np.float64))
    p_deny = float(np.exp(logp[0]))
    action = Action.DENY if rng.random() < p_deny else Action.ALLOW
    return action, float(logp[int(action)])


def act(net, obs, mode="sample", rng=None, caps: FeatureCaps = FeatureCaps()):
    """Policy-head action for one observation.

    mode 'sample' draws from softmax(logits) (requires rng); 'greedy'
    takes the argmax with the Deny tie-break. Returns (action, logp).
    """
    if mode not in ("sample", "greedy"):
        raise ValidationError("mode must be 'sample' or 'greedy'")
    logits = net.forward(featurize(obs, caps))["policy"]
    if mode == "greedy":
        action = greedy_action(logits)
        return action, float(log_softmax(logits)[int(action)])
    if rng is None:
        raise ValidationError("sample mode requires an rng")
    return sample_action(logits, rng)


class GreedyPolicy:
    """Deterministic policy read off a network: argmax of the policy head,
    or of the action-value head when no policy head exists. A pure function
    of the observation — the rng argument is accepted and ignored so it can
    stand in anywhere a stochastic policy fits."""

    def __init__(self, net, caps: FeatureCaps = FeatureCaps()):
        head = "policy" if "policy" in net.head_dims else "q"
        if head not in net.head_dims or net.head_dims[head] != 2:
            raise ValidationError("checkpoint lacks a 2-way policy or q head")
        self.net = net
        self.head = head
        self.caps = caps

    def __call__(self, obs, rng=None) -> Action:
        return greedy_action(self.net.forward(featurize(obs, self.caps))[self.head])

    def p_allow(self, obs) -> float:
        """Softmax allow-probability of the policy head (heatmap export)."""
        scores = self.net.forward(featurize(obs, self.caps))[self.head]
        return float(softmax(scores)[1])


def greedy_checkpoint_policy(path, caps: FeatureCaps = FeatureCaps()) -> GreedyPolicy:
    return GreedyPolicy(load_checkpoint(path).net, caps)
