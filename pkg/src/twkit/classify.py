"""Decision trees, random forests with Gini importance, and the companion
classifiers (softmax regression, one-hidden-layer MLP, linear one-vs-rest SVM).

All models train on the encoded feature matrix (one-hot categorical view plus
scaled numerics) and integer class indices. Categorical splits are one-vs-rest
per code, which in the one-hot view is just a threshold at 0.5.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import Codec
from .errors import DataError
from .nn import (
    AdamState,
    MLP,
    adam_step,
    backward,
    forward,
    init_mlp,
    iter_batches,
    softmax_cross_entropy,
    _sigmoid,
    _softmax,
)
from .seeds import derive_seed


def gini(counts) -> float:
    """Gini impurity 1 - sum((c/n)^2) of a class-count vector."""
    counts = np.asarray(counts, dtype=np.float64)
    if (counts < 0).any():
        raise DataError("negative class count")
    n = counts.sum()
    if n == 0:
        raise DataError("gini of an empty count vector")
    p = counts / n
    return float(1.0 - (p * p).sum())


@dataclass(frozen=True)
class TreeNode:
    """Split node (children set) or leaf (counts set)."""

    n_samples: int
    counts: tuple[int, ...]
    feature: int = -1
    threshold: float = 0.0
    decrease: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass(frozen=True)
class TreeConfig:
    n_classes: int
    max_depth: int | None = None
    min_samples_leaf: int = 1
    feature_subset_size: int | None = None  # None = all features


def _best_split(X, y, idx, candidates, n_classes, min_leaf):
    """Max Gini-decrease split over candidate columns.

    Ties break toward the lowest feature index, then the lowest threshold
    (strict `>` while scanning ascending candidates and thresholds).
    """
    parent_counts = np.bincount(y[idx], minlength=n_classes)
    n = len(idx)
    parent_gini = gini(parent_counts)
    best = None  # (decrease, feature, threshold, left_idx, right_idx)
    for f in candidates:
        values = X[idx, f]
        order = np.argsort(values, kind="stable")
        sv = values[order]
        sy = y[idx][order]
        # cumulative class counts after each prefix
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), sy] = 1.0
        cum = onehot.cumsum(axis=0)
        boundaries = np.nonzero(sv[1:] > sv[:-1])[0]  # split after position b
        if len(boundaries) == 0:
            continue
        left_n = boundaries + 1.0
        right_n = n - left_n
        valid = (left_n >= min_leaf) & (right_n >= min_leaf)
        if not valid.any():
            continue
        left_counts = cum[boundaries]
        right_counts = parent_counts - left_counts
        gl = 1.0 - ((left_counts / left_n[:, None]) ** 2).sum(axis=1)
        gr = 1.0 - ((right_counts / right_n[:, None]) ** 2).sum(axis=1)
        decrease = parent_gini - (left_n / n) * gl - (right_n / n) * gr
        decrease[~valid] = -np.inf
        b = int(np.argmax(decrease))  # first max = lowest threshold
        # zero-gain splits are allowed on impure nodes (XOR-style patterns
        # need them); recursion still terminates because children shrink
        if decrease[b] < 0:
            continue
        if best is None or decrease[b] > best[0]:
            threshold = 0.5 * (sv[b] + sv[b + 1])
            mask = values <= threshold
            best = (float(decrease[b]), int(f), float(threshold), idx[mask], idx[~mask])
    return best


def _build(X, y, idx, depth, config, rng):
    counts = np.bincount(y[idx], minlength=config.n_classes)
    node_kwargs = dict(n_samples=len(idx), counts=tuple(int(c) for c in counts))
    if (
        (counts > 0).sum() <= 1
        or (config.max_depth is not None and depth >= config.max_depth)
        or len(idx) < 2 * config.min_samples_leaf
    ):
        return TreeNode(**node_kwargs)
    d = X.shape[1]
    if config.feature_subset_size is not None and config.feature_subset_size < d:
        candidates = np.sort(rng.choice(d, size=config.feature_subset_size, replace=False))
    else:
        candidates = np.arange(d)
    best = _best_split(X, y, idx, candidates, config.n_classes, config.min_samples_leaf)
    if best is None:
        return TreeNode(**node_kwargs)
    decrease, f, threshold, left_idx, right_idx = best
    return TreeNode(
        **node_kwargs,
        feature=f,
        threshold=threshold,
        decrease=decrease,
        left=_build(X, y, left_idx, depth + 1, config, rng),
        right=_build(X, y, right_idx, depth + 1, config, rng),
    )


def train_tree(X, y, config: TreeConfig, seed: int = 0) -> TreeNode:
    """Greedy CART-style tree maximizing Gini-impurity decrease."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(X) == 0:
        raise DataError("cannot train a tree on an empty dataset")
    rng = np.random.default_rng(seed)
    return _build(X, y, np.arange(len(X)), 0, config, rng)


def _tree_leaf(node: TreeNode, row) -> TreeNode:
    while not node.is_leaf:
        node = node.left if row[node.feature] <= node.threshold else node.right
    return node


def tree_predict_proba(node: TreeNode, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    out = np.empty((len(X), len(node.counts)))
    for i, row in enumerate(X):
        counts = np.asarray(_tree_leaf(node, row).counts, dtype=np.float64)
        out[i] = counts / counts.sum()
    return out


@dataclass(frozen=True)
class ForestConfig:
    n_classes: int
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 1
    feature_subset_size: int | None = None  # None = ceil(sqrt(d))
    bootstrap: bool = True


@dataclass
class Forest:
    trees: list[TreeNode]
    tree_seeds: list[int]
    config: ForestConfig
    codec: Codec | None = None  # encoded-column layout, for importance aggregation

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        acc = np.zeros((len(X), self.config.n_classes))
        for tree in self.trees:
            acc += tree_predict_proba(tree, X)
        return acc / len(self.trees)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


def train_forest(X, y, config: ForestConfig, seed: int = 0, codec: Codec | None = None) -> Forest:
    """Bootstrap ensemble; per-tree seeds derive from the master seed, so
    parallel or serial training would build the identical forest."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(X) == 0:
        raise DataError("cannot train a forest on an empty dataset")
    d = X.shape[1]
    subset = config.feature_subset_size
    if subset is None:
        subset = int(np.ceil(np.sqrt(d)))
    tree_config = TreeConfig(
        n_classes=config.n_classes,
        max_depth=config.max_depth,
        min_samples_leaf=config.min_samples_leaf,
        feature_subset_size=min(subset, d),
    )
    trees, tree_seeds = [], []
    n = len(X)
    for t in range(config.n_trees):
        tree_seed = derive_seed(seed, f"tree-{t}")
        tree_seeds.append(tree_seed)
        if config.bootstrap:
            boot = np.random.default_rng(derive_seed(seed, f"boot-{t}")).integers(0, n, size=n)
            trees.append(train_tree(X[boot], y[boot], tree_config, tree_seed))
        else:
            trees.append(train_tree(X, y, tree_config, tree_seed))
    return Forest(trees, tree_seeds, config, codec)


def _accumulate_importance(node: TreeNode, total_samples: int, acc: np.ndarray) -> None:
    if node.is_leaf:
        return
    acc[node.feature] += (node.n_samples / total_samples) * node.decrease
    _accumulate_importance(node.left, total_samples, acc)
    _accumulate_importance(node.right, total_samples, acc)


def column_importance(forest: Forest, n_columns: int) -> np.ndarray:
    """Mean over trees of sample-weighted impurity decrease per encoded column."""
    acc = np.zeros(n_columns)
    for tree in forest.trees:
        per_tree = np.zeros(n_columns)
        _accumulate_importance(tree, tree.n_samples, per_tree)
        acc += per_tree
    return acc / len(forest.trees)


def feature_importance(forest: Forest) -> list[tuple[str, float]]:
    """Per-attribute Gini importance, one-hot columns aggregated, sum = 1.

    Requires the forest to carry its training codec. Order follows the codec.
    """
    if forest.codec is None:
        raise DataError("forest has no codec; train with codec= to aggregate importance")
    cols = column_importance(forest, forest.codec.width)
    pairs = []
    for block in forest.codec.blocks:
        pairs.append((block.attribute, float(cols[block.start : block.stop].sum())))
    total = sum(w for _, w in pairs)
    if total > 0:
        pairs = [(a, w / total) for a, w in pairs]
    return pairs


# -- companion classifiers ----------------------------------------------------


@dataclass
class LogisticModel:
    W: np.ndarray  # (d, k)
    b: np.ndarray  # (k,)

    def predict_proba(self, X) -> np.ndarray:
        return _softmax(np.asarray(X) @ self.W + self.b)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


def train_logreg(
    X, y, n_classes: int, seed: int = 0, learning_rate: float = 0.5,
    epochs: int = 300, l2: float = 1e-4,
) -> LogisticModel:
    """Multinomial softmax regression by full-batch gradient descent (zero init)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(np.unique(y)) < 2:
        raise DataError("logistic regression needs >=2 classes in training data")
    d = X.shape[1]
    W = np.zeros((d, n_classes))
    b = np.zeros(n_classes)
    for _ in range(epochs):
        logits = X @ W + b
        _, dlogits = softmax_cross_entropy(logits, y)
        W -= learning_rate * (X.T @ dlogits + l2 * W)
        b -= learning_rate * dlogits.sum(axis=0)
    return LogisticModel(W, b)


@dataclass
class MlpClassifier:
    net: MLP

    def predict_proba(self, X) -> np.ndarray:
        logits, _ = forward(self.net, np.asarray(X, dtype=np.float64))
        return _softmax(logits)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


def train_mlp_classifier(
    X, y, n_classes: int, seed: int = 0, hidden: int = 64,
    epochs: int = 200, batch_size: int = 64, learning_rate: float = 1e-3,
) -> MlpClassifier:
    """One hidden relu layer, softmax head, Adam on minibatches."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(np.unique(y)) < 2:
        raise DataError("MLP classifier needs >=2 classes in training data")
    net = init_mlp((X.shape[1], hidden, n_classes), seed=seed, output_activation="identity")
    state = AdamState.for_mlp(net, learning_rate=learning_rate)
    rng = np.random.default_rng(derive_seed(seed, "mlp-batches"))
    for _ in range(epochs):
        for batch in iter_batches(len(X), batch_size, rng):
            logits, cache = forward(net, X[batch])
            _, dlogits = softmax_cross_entropy(logits, y[batch])
            grads, _ = backward(net, cache, dlogits)
            adam_step(net, grads, state)
    return MlpClassifier(net)


@dataclass
class LinearSvm:
    W: np.ndarray  # (d, k) one-vs-rest weights
    b: np.ndarray  # (k,)
    platt: np.ndarray  # (k, 2) logistic link (a, c): p = sigmoid(a * margin + c)

    def margins(self, X) -> np.ndarray:
        return np.asarray(X) @ self.W + self.b

    def predict_proba(self, X) -> np.ndarray:
        m = self.margins(X)
        p = _sigmoid(self.platt[:, 0] * m + self.platt[:, 1])
        total = p.sum(axis=1, keepdims=True)
        total[total == 0] = 1.0
        return p / total

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.margins(X), axis=1)


def _fit_platt(margins: np.ndarray, targets: np.ndarray, iters: int = 200, lr: float = 0.1):
    a, c = 1.0, 0.0
    n = len(margins)
    for _ in range(iters):
        p = 1.0 / (1.0 + np.exp(-(a * margins + c)))
        grad = p - targets
        a -= lr * float((grad * margins).mean())
        c -= lr * float(grad.mean())
    return a, c


def train_linear_svm(
    X, y, n_classes: int, seed: int = 0, epochs: int = 30,
    batch_size: int = 32, learning_rate: float = 0.1, l2: float = 1e-3,
) -> LinearSvm:
    """One-vs-rest linear hinge loss by stochastic subgradient descent, with a
    logistic link fitted on the margins so predict_proba is available."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(np.unique(y)) < 2:
        raise DataError("SVM needs >=2 classes in training data")
    d = X.shape[1]
    W = np.zeros((d, n_classes))
    b = np.zeros(n_classes)
    for c in range(n_classes):
        sign = np.where(y == c, 1.0, -1.0)
        rng = np.random.default_rng(derive_seed(seed, f"svm-{c}"))
        w_c = np.zeros(d)
        b_c = 0.0
        for _ in range(epochs):
            for batch in iter_batches(len(X), batch_size, rng):
                margin = sign[batch] * (X[batch] @ w_c + b_c)
                viol = margin < 1.0
                grad_w = l2 * w_c
                grad_b = 0.0
                if viol.any():
                    grad_w = grad_w - (sign[batch][viol, None] * X[batch][viol]).mean(axis=0)
                    grad_b = -float(sign[batch][viol].mean())
                w_c -= learning_rate * grad_w
                b_c -= learning_rate * grad_b
        W[:, c] = w_c
        b[c] = b_c
    platt = np.zeros((n_classes, 2))
    all_margins = X @ W + b
    for c in range(n_classes):
        platt[c] = _fit_platt(all_margins[:, c], (y == c).astype(np.float64))
    return LinearSvm(W, b, platt)


def _rf_trainer(X, y, n_classes, seed):
    return train_forest(X, y, ForestConfig(n_classes=n_classes), seed=seed)


def _dt_trainer(X, y, n_classes, seed):
    tree = train_tree(X, y, TreeConfig(n_classes=n_classes), seed=seed)
    return _TreeModel(tree)


@dataclass
class _TreeModel:
    tree: TreeNode

    def predict_proba(self, X) -> np.ndarray:
        return tree_predict_proba(self.tree, X)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


CLASSIFIERS = {
    "lr": train_logreg,
    "dt": _dt_trainer,
    "rf": _rf_trainer,
    "mlp": train_mlp_classifier,
    "svm": train_linear_svm,
}
