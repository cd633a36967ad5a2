"""Feed-forward regressor with a concatenation skip, trained with Adam on MSE.

Layout for hidden widths ``[w1, ..., w5]``::

    x -> dense(w1) -> dense(w2) -> dense(w3) -+
                          |                   concat -> dense(w4) -> dense(w5) -> linear(T)
                          +-------------------+

Hidden layers use ReLU, the output layer is linear.  Inputs are z-scored
with statistics stored in the model (fit on the training rows only).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidArgumentError, NumericFailure, SchemaMismatchError

log = logging.getLogger(__name__)

# raw feature values are clipped before scaling so SENTINEL entries stay finite
INPUT_CLIP = 1e12


@dataclass
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X) -> "Standardizer":
        X = np.clip(np.asarray(X, dtype=float), -INPUT_CLIP, INPUT_CLIP)
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale <= 0] = 1.0
        return cls(mean, scale)

    def transform(self, X) -> np.ndarray:
        return (np.clip(np.asarray(X, dtype=float), -INPUT_CLIP, INPUT_CLIP) - self.mean) / self.scale


def layer_inputs(n_hidden: int) -> list[tuple[int, ...]]:
    """Activation indices concatenated as input of each dense layer (0 = input)."""
    if n_hidden != 5:
        return [(i,) for i in range(n_hidden + 1)]
    return [(0,), (1,), (2,), (2, 3), (4,), (5,)]


@dataclass
class MlpModel:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    inputs: list[tuple[int, ...]]
    standardizer: Standardizer | None = None
    dropout: float = 0.0
    history: list[float] = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return self.weights[0].shape[0]

    @property
    def n_targets(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def layer_sizes(self) -> list[int]:
        return [self.n_features] + [w.shape[1] for w in self.weights]

    @property
    def n_parameters(self) -> int:
        return int(sum(w.size + b.size for w, b in zip(self.weights, self.biases)))

    # -- parameters as one flat vector (used by the optimiser and gradient checks)
    def get_params(self) -> np.ndarray:
        return np.concatenate([np.concatenate([w.ravel(), b]) for w, b in zip(self.weights, self.biases)])

    def set_params(self, theta) -> None:
        pos = 0
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            self.weights[i] = theta[pos:pos + w.size].reshape(w.shape).copy()
            pos += w.size
            self.biases[i] = theta[pos:pos + b.size].copy()
            pos += b.size

    def _forward(self, Z, masks=None):
        acts = [Z]
        pre = []
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            a_in = np.hstack([acts[j] for j in self.inputs[i]]) if len(self.inputs[i]) > 1 else acts[self.inputs[i][0]]
            z = a_in @ w + b
            pre.append(z)
            if i == last:
                acts.append(z)
            else:
                a = np.maximum(z, 0.0)
                if masks is not None:
                    a = a * masks[i]
                acts.append(a)
        return acts, pre

    def forward_scaled(self, Z) -> np.ndarray:
        return self._forward(np.atleast_2d(Z))[0][-1]

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.n_features:
            raise SchemaMismatchError(f"model expects {self.n_features} features, got {X.shape[1]}")
        Z = self.standardizer.transform(X) if self.standardizer is not None else X
        out = self.forward_scaled(Z)
        return out[0] if single else out

    def loss_and_grad(self, Z, Y, masks=None):
        """Mean squared error over rows and targets, and its gradient (flat)."""
        acts, pre = self._forward(Z, masks)
        diff = acts[-1] - Y
        loss = float(np.mean(diff**2))
        grad_act = [None] * len(acts)
        grad_act[-1] = 2.0 * diff / diff.size
        gw = [None] * len(self.weights)
        gb = [None] * len(self.weights)
        last = len(self.weights) - 1
        for i in range(last, -1, -1):
            g = grad_act[i + 1]
            if i != last:
                if masks is not None:
                    g = g * masks[i]
                g = g * (pre[i] > 0)
            srcs = self.inputs[i]
            a_in = np.hstack([acts[j] for j in srcs]) if len(srcs) > 1 else acts[srcs[0]]
            gw[i] = a_in.T @ g
            gb[i] = g.sum(axis=0)
            g_in = g @ self.weights[i].T
            pos = 0
            for j in srcs:
                width = acts[j].shape[1]
                part = g_in[:, pos:pos + width]
                grad_act[j] = part if grad_act[j] is None else grad_act[j] + part
                pos += width
        flat = np.concatenate([np.concatenate([w.ravel(), b]) for w, b in zip(gw, gb)])
        return loss, flat


def init_mlp(n_features: int, n_targets: int, widths=(24, 16, 16, 12, 8), seed: int = 0,
             dropout: float = 0.0) -> MlpModel:
    """He-uniform weights, zero biases."""
    rng = np.random.default_rng(seed)
    inputs = layer_inputs(len(widths))
    sizes = [n_features] + list(widths) + [n_targets]
    weights, biases = [], []
    for i, srcs in enumerate(inputs):
        fan_in = sum(sizes[j] for j in srcs)
        lim = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-lim, lim, size=(fan_in, sizes[i + 1])))
        biases.append(np.zeros(sizes[i + 1]))
    return MlpModel(weights, biases, inputs, dropout=dropout)


def fit_mlp(X, Y, epochs: int = 100, batch_size: int = 10, learning_rate: float = 0.001,
            widths=(24, 16, 16, 12, 8), dropout: float = 0.0, seed: int = 0,
            beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8,
            standardize: bool = True) -> MlpModel:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if len(X) != len(Y) or len(X) == 0:
        raise InvalidArgumentError(f"incompatible shapes X{X.shape}, Y{Y.shape}")
    if not 0.0 <= dropout < 1.0:
        raise InvalidArgumentError(f"dropout must be in [0, 1), got {dropout}")
    ss = np.random.SeedSequence(seed)
    init_seed, shuffle_seed = ss.generate_state(2).tolist()
    model = init_mlp(X.shape[1], Y.shape[1], widths, init_seed, dropout)
    log.info("mlp layers %s, %d trainable parameters", model.layer_sizes, model.n_parameters)
    if standardize:
        model.standardizer = Standardizer.fit(X)
        Z = model.standardizer.transform(X)
    else:
        Z = X
    rng = np.random.default_rng(shuffle_seed)
    theta = model.get_params()
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    step = 0
    n = len(Z)
    for epoch in range(epochs):
        perm = rng.permutation(n)
        total = 0.0
        for b, start in enumerate(range(0, n, batch_size)):
            idx = perm[start:start + batch_size]
            masks = None
            if dropout > 0:
                masks = [(rng.random((len(idx), w.shape[1])) >= dropout) / (1 - dropout)
                         for w in model.weights[:-1]]
            loss, g = model.loss_and_grad(Z[idx], Y[idx], masks)
            if not (np.isfinite(loss) and np.all(np.isfinite(g))):
                raise NumericFailure(f"non-finite loss in mlp training (epoch {epoch}, batch {b})")
            step += 1
            m = beta1 * m + (1 - beta1) * g
            v = beta2 * v + (1 - beta2) * g * g
            mhat = m / (1 - beta1**step)
            vhat = v / (1 - beta2**step)
            theta = theta - learning_rate * mhat / (np.sqrt(vhat) + eps)
            model.set_params(theta)
            total += loss * len(idx)
        model.history.append(total / n)
    return model
