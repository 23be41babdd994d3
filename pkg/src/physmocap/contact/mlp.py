"""Small fully connected network, written directly in numpy.

Architecture: linear layers with batch norm and ReLU on all but the last,
dropout on the activations feeding the third linear layer. Trained with
binary cross entropy on logits and Adam. Keeping this in numpy makes training
bit-reproducible from a seed and lets the gradient be checked against finite
differences without an autodiff layer in between.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LAYER_SIZES = (351, 1024, 512, 128, 32, 20)
BN_EPS = 1e-5


@dataclass
class MlpState:
    """Parameters and batch-norm running statistics."""
    sizes: tuple
    W: list            # per layer, (out, in)
    b: list            # per layer, (out,)
    gamma: list        # per hidden layer
    beta: list
    run_mean: list
    run_var: list
    dropout_p: float = 0.3
    dropout_layer: int = 1   # dropout after this hidden layer's ReLU
    bn_momentum: float = 0.1

    @property
    def n_layers(self):
        return len(self.W)


def init_mlp(sizes=LAYER_SIZES, seed=0, dropout_p=0.3, dropout_layer=1):
    rng = np.random.default_rng(seed)
    W, b, gamma, beta, run_mean, run_var = [], [], [], [], [], []
    for i in range(len(sizes) - 1):
        fan_in, fan_out = sizes[i], sizes[i + 1]
        W.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), (fan_out, fan_in)))
        b.append(np.zeros(fan_out))
        if i < len(sizes) - 2:
            gamma.append(np.ones(fan_out))
            beta.append(np.zeros(fan_out))
            run_mean.append(np.zeros(fan_out))
            run_var.append(np.ones(fan_out))
    return MlpState(sizes=tuple(sizes), W=W, b=b, gamma=gamma, beta=beta,
                    run_mean=run_mean, run_var=run_var,
                    dropout_p=dropout_p, dropout_layer=dropout_layer)


def mlp_forward(state, X, training=False, dropout_mask=None):
    """Forward pass. Returns (logits, cache); cache is None in eval mode.

    In training mode batch statistics are used for the norm layers and the
    caller-supplied dropout_mask (bool, shape of the dropped activations) is
    applied with inverted scaling. Running stats are NOT updated here; see
    update_running_stats.
    """
    h = np.asarray(X, dtype=float)
    if h.ndim == 1:
        h = h[None]
    n_hidden = state.n_layers - 1
    cache = {"inputs": [], "z": [], "xhat": [], "mean": [], "var": [],
             "y": [], "relu_in": [], "dropout_mask": dropout_mask}
    for i in range(state.n_layers):
        cache["inputs"].append(h)
        z = h @ state.W[i].T + state.b[i]
        if i < n_hidden:
            if training:
                mu = z.mean(axis=0)
                var = z.var(axis=0)
            else:
                mu = state.run_mean[i]
                var = state.run_var[i]
            xhat = (z - mu) / np.sqrt(var + BN_EPS)
            y = state.gamma[i] * xhat + state.beta[i]
            h = np.maximum(y, 0.0)
            if training and i == state.dropout_layer and dropout_mask is not None:
                h = h * dropout_mask / (1.0 - state.dropout_p)
            cache["z"].append(z)
            cache["xhat"].append(xhat)
            cache["mean"].append(mu)
            cache["var"].append(var)
            cache["y"].append(y)
        else:
            logits = z
    if not training:
        return logits, None
    return logits, cache


def update_running_stats(state, cache):
    m = state.bn_momentum
    for i in range(len(state.gamma)):
        state.run_mean[i] = (1 - m) * state.run_mean[i] + m * cache["mean"][i]
        state.run_var[i] = (1 - m) * state.run_var[i] + m * cache["var"][i]


def bce_loss(logits, targets, mask=None):
    """Stable binary cross entropy on logits, averaged over unmasked entries.

    Returns (loss, dloss/dlogits).
    """
    z = logits
    y = np.asarray(targets, dtype=float)
    loss_el = np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))
    grad = 1.0 / (1.0 + np.exp(-z)) - y
    if mask is None:
        n = z.size
        return float(loss_el.mean()), grad / n
    mask = np.asarray(mask, dtype=bool)
    n = max(1, int(mask.sum()))
    return float(loss_el[mask].sum() / n), np.where(mask, grad, 0.0) / n


def mlp_backward(state, cache, dlogits):
    """Gradients of the scalar loss w.r.t. all parameters (training-mode graph)."""
    n_hidden = state.n_layers - 1
    grads = {"W": [None] * state.n_layers, "b": [None] * state.n_layers,
             "gamma": [None] * n_hidden, "beta": [None] * n_hidden}
    g = dlogits
    for i in reversed(range(state.n_layers)):
        if i < n_hidden:
            if i == state.dropout_layer and cache["dropout_mask"] is not None:
                g = g * cache["dropout_mask"] / (1.0 - state.dropout_p)
            g = g * (cache["y"][i] > 0.0)
            xhat = cache["xhat"][i]
            grads["gamma"][i] = (g * xhat).sum(axis=0)
            grads["beta"][i] = g.sum(axis=0)
            # batch-norm backward with batch statistics
            gz = g * state.gamma[i]
            inv_std = 1.0 / np.sqrt(cache["var"][i] + BN_EPS)
            g = inv_std * (gz - gz.mean(axis=0)
                           - xhat * (gz * xhat).mean(axis=0))
        h_in = cache["inputs"][i]
        grads["W"][i] = g.T @ h_in
        grads["b"][i] = g.sum(axis=0)
        if i > 0:
            g = g @ state.W[i]
    return grads


def mlp_loss_and_grads(state, X, y, mask=None, dropout_mask=None):
    """One training-mode forward/backward. Pure given its inputs."""
    logits, cache = mlp_forward(state, X, training=True, dropout_mask=dropout_mask)
    loss, dlogits = bce_loss(logits, y, mask)
    grads = mlp_backward(state, cache, dlogits)
    return loss, grads, cache


@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: int = 0


def adam_step(state, grads, opt, lr, weight_decay=0.0,
              beta1=0.9, beta2=0.999, eps=1e-8):
    """In-place Adam update. L2 weight decay applies to linear weights only."""
    opt.t += 1
    t = opt.t
    for key in ("W", "b", "gamma", "beta"):
        params = getattr(state, key)
        for i, g in enumerate(grads[key]):
            if g is None:
                continue
            if key == "W" and weight_decay:
                g = g + weight_decay * params[i]
            slot = (key, i)
            m = opt.m.get(slot, 0.0)
            v = opt.v.get(slot, 0.0)
            m = beta1 * m + (1 - beta1) * g
            v = beta2 * v + (1 - beta2) * g * g
            opt.m[slot] = m
            opt.v[slot] = v
            mhat = m / (1 - beta1 ** t)
            vhat = v / (1 - beta2 ** t)
            params[i] = params[i] - lr * mhat / (np.sqrt(vhat) + eps)
