"""Minimal dense feed-forward engine with analytic gradients and Adam.

Everything is plain numpy. `backward` returns parameter gradients and the
gradient with respect to the network input, so one network can be chained
through another (generator through discriminator). Output activations:

- "sigmoid"        elementwise logistic
- "identity"       raw affine output
- "softmax_blocks" independent softmax over each (start, stop) span in
                   `output_blocks`; columns outside every span get a sigmoid
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import TrainingDiverged

EPS = 1e-7  # probability clamp before any log

CHECKPOINT_FORMAT = "twkit-mlp"
CHECKPOINT_VERSION = 1


@dataclass
class MLP:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    hidden_activation: str = "relu"
    output_activation: str = "sigmoid"
    output_blocks: tuple[tuple[int, int], ...] = ()

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    def copy(self) -> "MLP":
        return MLP(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.hidden_activation,
            self.output_activation,
            tuple(self.output_blocks),
        )


def init_mlp(
    layer_sizes,
    seed: int,
    hidden_activation: str = "relu",
    output_activation: str = "sigmoid",
    output_blocks: tuple[tuple[int, int], ...] = (),
) -> MLP:
    """Xavier-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases."""
    sizes = list(layer_sizes)
    if len(sizes) < 2 or any(s <= 0 for s in sizes):
        raise ValueError(f"need >=2 positive layer sizes, got {sizes}")
    if hidden_activation not in ("relu", "tanh"):
        raise ValueError(f"unknown hidden activation {hidden_activation!r}")
    if output_activation not in ("sigmoid", "identity", "softmax_blocks"):
        raise ValueError(f"unknown output activation {output_activation!r}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MLP(weights, biases, hidden_activation, output_activation, tuple(output_blocks))


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(z):
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _apply_output(mlp: MLP, z: np.ndarray) -> np.ndarray:
    if mlp.output_activation == "identity":
        return z
    if mlp.output_activation == "sigmoid":
        return _sigmoid(z)
    out = _sigmoid(z)
    for start, stop in mlp.output_blocks:
        out[:, start:stop] = _softmax(z[:, start:stop])
    return out


def forward(mlp: MLP, batch: np.ndarray):
    """Return (output, cache); the cache feeds `backward`."""
    if batch.shape[1] != mlp.weights[0].shape[0]:
        raise ValueError(
            f"batch width {batch.shape[1]} does not match input size {mlp.weights[0].shape[0]}"
        )
    activations = [batch]
    pre = []
    a = batch
    last = len(mlp.weights) - 1
    for i, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        z = a @ w + b
        pre.append(z)
        if i < last:
            a = np.maximum(z, 0.0) if mlp.hidden_activation == "relu" else np.tanh(z)
        else:
            a = _apply_output(mlp, z)
        activations.append(a)
    return a, {"pre": pre, "post": activations}


def _output_grad_to_pre(mlp: MLP, grad_out: np.ndarray, out: np.ndarray) -> np.ndarray:
    if mlp.output_activation == "identity":
        return grad_out
    dz = grad_out * out * (1.0 - out)  # sigmoid columns
    for start, stop in mlp.output_blocks:
        s = out[:, start:stop]
        g = grad_out[:, start:stop]
        dz[:, start:stop] = s * (g - (g * s).sum(axis=1, keepdims=True))
    return dz


def backward(mlp: MLP, cache, output_gradient: np.ndarray):
    """Exact reverse-mode gradients: ([(dW, db), ...], d_input)."""
    pre, post = cache["pre"], cache["post"]
    out = post[-1]
    if output_gradient.shape != out.shape:
        raise ValueError(f"gradient shape {output_gradient.shape} != output shape {out.shape}")
    grads = [None] * len(mlp.weights)
    dz = _output_grad_to_pre(mlp, output_gradient, out)
    for i in range(len(mlp.weights) - 1, -1, -1):
        a_prev = post[i]
        grads[i] = (a_prev.T @ dz, dz.sum(axis=0))
        da_prev = dz @ mlp.weights[i].T
        if i > 0:
            if mlp.hidden_activation == "relu":
                dz = da_prev * (pre[i - 1] > 0)
            else:
                dz = da_prev * (1.0 - post[i] ** 2)
    return grads, da_prev


@dataclass
class AdamState:
    m: list
    v: list
    step: int = 0
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_mlp(cls, mlp: MLP, learning_rate: float = 1e-3) -> "AdamState":
        zeros = [(np.zeros_like(w), np.zeros_like(b)) for w, b in zip(mlp.weights, mlp.biases)]
        return cls(
            m=[(zw.copy(), zb.copy()) for zw, zb in zeros],
            v=[(zw.copy(), zb.copy()) for zw, zb in zeros],
            learning_rate=learning_rate,
        )


def adam_step(mlp: MLP, grads, state: AdamState):
    """Bias-corrected Adam update (in place); returns (mlp, state)."""
    for (dw, db) in grads:
        if not (np.all(np.isfinite(dw)) and np.all(np.isfinite(db))):
            raise TrainingDiverged("non-finite gradient in adam_step")
    state.step += 1
    t = state.step
    correction1 = 1.0 - state.beta1**t
    correction2 = 1.0 - state.beta2**t
    for i, (dw, db) in enumerate(grads):
        for j, grad in enumerate((dw, db)):
            m = state.m[i][j]
            v = state.v[i][j]
            m *= state.beta1
            m += (1.0 - state.beta1) * grad
            v *= state.beta2
            v += (1.0 - state.beta2) * grad**2
            m_hat = m / correction1
            v_hat = v / correction2
            target = mlp.weights[i] if j == 0 else mlp.biases[i]
            target -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
    return mlp, state


# -- losses: each returns (mean-reduced scalar, gradient wrt first argument) --


def binary_cross_entropy(p: np.ndarray, y: np.ndarray, mask: np.ndarray | None = None):
    if p.shape != y.shape:
        raise ValueError(f"shape mismatch {p.shape} vs {y.shape}")
    pc = np.clip(p, EPS, 1.0 - EPS)
    if mask is None:
        mask = np.ones_like(pc)
    count = float(mask.sum())
    if count == 0:
        return 0.0, np.zeros_like(pc)
    loss = -float((mask * (y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc))).sum() / count)
    grad = mask * (pc - y) / (pc * (1.0 - pc)) / count
    return loss, grad


def mse(x: np.ndarray, y: np.ndarray, mask: np.ndarray | None = None):
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {y.shape}")
    if mask is None:
        mask = np.ones_like(x)
    count = float(mask.sum())
    if count == 0:
        return 0.0, np.zeros_like(x)
    diff = mask * (x - y)
    return float((diff**2).sum() / count), 2.0 * diff / count


def softmax_cross_entropy(logits: np.ndarray, y: np.ndarray):
    """`y` is integer class indices or a one-hot matrix; gradient is wrt logits."""
    probs = _softmax(logits)
    n = logits.shape[0]
    if y.ndim == 1:
        onehot = np.zeros_like(probs)
        onehot[np.arange(n), y.astype(int)] = 1.0
    else:
        if y.shape != logits.shape:
            raise ValueError(f"shape mismatch {logits.shape} vs {y.shape}")
        onehot = y
    loss = -float((onehot * np.log(np.clip(probs, EPS, 1.0))).sum() / n)
    return loss, (probs - onehot) / n


def iter_batches(n: int, batch_size: int, rng: np.random.Generator):
    """Seeded shuffle each epoch; the remainder batch is kept, not dropped."""
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def check_finite(mlp: MLP, epoch: int, batch: int) -> None:
    for w, b in zip(mlp.weights, mlp.biases):
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise TrainingDiverged("non-finite parameter", epoch=epoch, batch=batch)


# -- JSON checkpoints ---------------------------------------------------------


def mlp_to_dict(mlp: MLP) -> dict:
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "layer_sizes": list(mlp.layer_sizes),
        "hidden_activation": mlp.hidden_activation,
        "output_activation": mlp.output_activation,
        "output_blocks": [list(span) for span in mlp.output_blocks],
        "weights": [w.ravel().tolist() for w in mlp.weights],
        "biases": [b.tolist() for b in mlp.biases],
    }


def mlp_from_dict(doc: dict) -> MLP:
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"not a {CHECKPOINT_FORMAT} checkpoint")
    sizes = doc["layer_sizes"]
    weights = [
        np.array(flat, dtype=np.float64).reshape(fan_in, fan_out)
        for flat, fan_in, fan_out in zip(doc["weights"], sizes[:-1], sizes[1:])
    ]
    biases = [np.array(b, dtype=np.float64) for b in doc["biases"]]
    return MLP(
        weights,
        biases,
        doc["hidden_activation"],
        doc["output_activation"],
        tuple(tuple(span) for span in doc["output_blocks"]),
    )


def save_mlp(mlp: MLP, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(mlp_to_dict(mlp), fh)
        fh.write("\n")


def load_mlp(path) -> MLP:
    with open(path, encoding="utf-8") as fh:
        return mlp_from_dict(json.load(fh))
