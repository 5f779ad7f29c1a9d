"""Missing-data repair and the imputation benchmark harness.

Three built-in imputers:

- STA: column mode (categorical, ties to the earliest declared code) or
  column mean (numeric).
- MICE: STA initialization, then chained sweeps regressing each incomplete
  column on all the others (one-vs-rest logistic for categoricals,
  least squares for numerics), re-predicting only the originally-missing cells.
- GAIN: a generator predicts every cell from the noised row plus its mask; a
  discriminator, shown a hint vector that reveals a random subset of the true
  mask, learns to tell observed from imputed entries; the generator is trained
  to fool it on missing entries while reconstructing observed ones.

The benchmark scores a method by how far classifier metrics move when models
are retrained on imputed instead of pristine data. Accuracy and F1 deltas are
reported in percentage points, AUC deltas in raw units. F1 is the
support-weighted mean over classes: with several near-empty classes in a
520-row benchmark, the unweighted mean is dominated by single-row flips and
would drown the signal the benchmark is after.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .classify import CLASSIFIERS
from .encoding import Codec, EncodedMatrix, build_codec, decode, encode, expand_mask, label_indices
from .errors import CodecError, DataError, TrainingDiverged
from .metrics import Metrics, compute_metrics
from .nn import (
    MLP,
    AdamState,
    adam_step,
    backward,
    binary_cross_entropy,
    forward,
    init_mlp,
    iter_batches,
    mse,
)
from .schema import CATEGORICAL, Schema
from .seeds import derive_seed
from .table import MaskMatrix, Table, inject_missing, split_stratified


def impute_sta(table: Table, schema: Schema | None = None) -> Table:
    """Mode/mean imputation; observed cells pass through untouched."""
    schema = schema or table.schema
    fills = {}
    for j, attr in enumerate(schema.attributes):
        column = [row[j] for row in table.rows]
        if all(c is not None for c in column):
            continue
        observed = [c for c in column if c is not None]
        if not observed:
            raise DataError(f"attribute {attr.name!r} is entirely missing")
        if attr.kind == CATEGORICAL:
            counts = {code: 0 for code in attr.codes}
            for c in observed:
                counts[c] += 1
            fills[j] = max(attr.codes, key=lambda code: (counts[code], -attr.code_index(code)))
        else:
            fills[j] = float(np.mean(observed))
    if not fills:
        return table
    rows = [
        tuple(fills[j] if cell is None and j in fills else cell for j, cell in enumerate(row))
        for row in table.rows
    ]
    return table.replace_rows(rows)


def _design_matrix(columns, attrs, skip: int):
    """Intercept + one-hot/min-max design from every column except `skip`.

    Constant predictor columns are dropped (with a warning)."""
    parts = [np.ones((len(columns[0]), 1))]
    for j, attr in enumerate(attrs):
        if j == skip:
            continue
        col = columns[j]
        if len(set(col)) < 2:
            warnings.warn(f"predictor {attr.name!r} is constant; dropped from regression")
            continue
        if attr.kind == CATEGORICAL:
            block = np.zeros((len(col), len(attr.codes)))
            for i, code in enumerate(col):
                block[i, attr.code_index(code)] = 1.0
            parts.append(block)
        else:
            arr = np.asarray(col, dtype=np.float64)
            lo, hi = arr.min(), arr.max()
            parts.append(((arr - lo) / (hi - lo)).reshape(-1, 1))
    return np.hstack(parts)


def _logistic_ovr_predict(X_obs, y_codes, X_mis, codes, iters=200, lr=0.3, l2=1e-3):
    """One-vs-rest logistic scores; returns the argmax code per missing row."""
    scores = np.full((len(X_mis), len(codes)), -np.inf)
    for k, code in enumerate(codes):
        target = np.array([1.0 if c == code else 0.0 for c in y_codes])
        if target.sum() == 0:
            continue
        w = np.zeros(X_obs.shape[1])
        for _ in range(iters):
            p = 1.0 / (1.0 + np.exp(-(X_obs @ w)))
            grad = X_obs.T @ (p - target) / len(target) + l2 * w
            w -= lr * grad
        scores[:, k] = X_mis @ w
    return [codes[int(np.argmax(scores[i]))] for i in range(len(X_mis))]


def impute_mice(table: Table, schema: Schema | None = None, rounds: int = 10, seed: int = 0) -> Table:
    """Chained-equation imputation (single chain, point predictions)."""
    if rounds < 1:
        raise DataError(f"rounds must be >= 1, got {rounds}")
    schema = schema or table.schema
    attrs = schema.attributes
    missing = {
        j: [i for i, row in enumerate(table.rows) if row[j] is None]
        for j in range(len(attrs))
    }
    incomplete = [j for j, rows in missing.items() if rows]
    if not incomplete:
        return table
    working = impute_sta(table, schema)
    columns = [list(working.column(a.name)) for a in attrs]
    for _ in range(rounds):
        for j in incomplete:
            attr = attrs[j]
            design = _design_matrix(columns, attrs, skip=j)
            obs = [i for i in range(len(table)) if i not in set(missing[j])]
            mis = missing[j]
            X_obs, X_mis = design[obs], design[mis]
            if attr.kind == CATEGORICAL:
                y_codes = [columns[j][i] for i in obs]
                seen = [c for c in attr.codes if c in set(y_codes)]
                predicted = _logistic_ovr_predict(X_obs, y_codes, X_mis, seen)
            else:
                y = np.array([columns[j][i] for i in obs], dtype=np.float64)
                beta, *_ = np.linalg.lstsq(X_obs, y, rcond=None)
                raw = X_mis @ beta
                predicted = np.clip(raw, y.min(), y.max()).tolist()
            for i, value in zip(mis, predicted):
                columns[j][i] = value
    rows = [tuple(columns[j][i] for j in range(len(attrs))) for i in range(len(table))]
    return table.replace_rows(rows)


# -- GAIN ----------------------------------------------------------------------


@dataclass(frozen=True)
class GainConfig:
    epochs: int = 400
    batch_size: int = 128
    learning_rate: float = 1e-3
    hint_rate: float = 0.9
    alpha: float = 10.0
    hidden: tuple[int, ...] | None = None  # None -> (d, d)


@dataclass
class GainModel:
    generator: MLP
    discriminator: MLP
    codec: Codec
    schema: Schema | None
    hint_rate: float
    alpha: float
    noise_seed: int


def _gain_nets(d: int, spans, hidden, seed: int):
    layers = (2 * d,) + (hidden or (d, d)) + (d,)
    gen = init_mlp(
        layers,
        seed=derive_seed(seed, "generator"),
        hidden_activation="relu",
        output_activation="softmax_blocks",
        output_blocks=tuple(spans),
    )
    disc = init_mlp(
        layers,
        seed=derive_seed(seed, "discriminator"),
        hidden_activation="relu",
        output_activation="sigmoid",
    )
    return gen, disc


def train_gain(
    encoded: EncodedMatrix,
    mask: MaskMatrix,
    config: GainConfig,
    seed: int,
    schema: Schema | None = None,
) -> GainModel:
    """Adversarial imputation training.

    Per batch: noise unobserved inputs with z ~ U(0, 0.01); the generator maps
    (noised row, mask) to a full reconstruction; the discriminator sees the
    imputed row plus a hint vector b*m + 0.5*(1-b) with b ~ Bernoulli(hint_rate)
    per entry, and its cross-entropy counts only concealed (b=0) entries. The
    generator minimizes adversarial loss on missing entries plus
    alpha * masked MSE on observed ones.
    """
    x = encoded.values
    if x.min() < 0 or x.max() > 1:
        raise DataError("encoded values must lie in [0, 1]")
    m = expand_mask(mask, encoded.codec)
    if m.shape != x.shape:
        raise DataError(f"mask shape {m.shape} does not match encoded shape {x.shape}")
    if not 0 < config.hint_rate < 1:
        raise DataError("hint_rate must be in (0, 1)")
    if config.alpha < 0:
        raise DataError("alpha must be >= 0")
    d = x.shape[1]
    gen, disc = _gain_nets(d, encoded.codec.categorical_spans(), config.hidden, seed)
    g_state = AdamState.for_mlp(gen, learning_rate=config.learning_rate)
    d_state = AdamState.for_mlp(disc, learning_rate=config.learning_rate)
    rng = np.random.default_rng(derive_seed(seed, "gain-batches"))
    n = x.shape[0]
    for epoch in range(config.epochs):
        for b_i, batch in enumerate(iter_batches(n, config.batch_size, rng)):
            xb, mb = x[batch], m[batch]
            z = rng.uniform(0.0, 0.01, size=xb.shape)
            x_tilde = mb * xb + (1.0 - mb) * z
            gen_in = np.hstack([x_tilde, mb])
            b_hint = (rng.random(size=xb.shape) < config.hint_rate).astype(np.float64)
            hint = b_hint * mb + 0.5 * (1.0 - b_hint)

            # discriminator update (generator output treated as constant)
            g_out, _ = forward(gen, gen_in)
            x_hat = mb * xb + (1.0 - mb) * g_out
            d_out, d_cache = forward(disc, np.hstack([x_hat, hint]))
            d_loss, d_grad = binary_cross_entropy(d_out, mb, mask=1.0 - b_hint)
            d_grads, _ = backward(disc, d_cache, d_grad)
            adam_step(disc, d_grads, d_state)

            # generator update: fool D on missing entries + reconstruct observed
            g_out, g_cache = forward(gen, gen_in)
            x_hat = mb * xb + (1.0 - mb) * g_out
            d_out, d_cache = forward(disc, np.hstack([x_hat, hint]))
            adv_loss, adv_grad = binary_cross_entropy(
                d_out, np.ones_like(d_out), mask=1.0 - mb
            )
            _, d_input_grad = backward(disc, d_cache, adv_grad)
            rec_loss, rec_grad = mse(g_out, xb, mask=mb)
            g_out_grad = d_input_grad[:, :d] * (1.0 - mb) + config.alpha * rec_grad
            g_grads, _ = backward(gen, g_cache, g_out_grad)
            adam_step(gen, g_grads, g_state)

            if not (np.isfinite(d_loss) and np.isfinite(adv_loss) and np.isfinite(rec_loss)):
                raise TrainingDiverged("non-finite GAIN loss", epoch=epoch, batch=b_i)
    return GainModel(
        generator=gen,
        discriminator=disc,
        codec=encoded.codec,
        schema=schema,
        hint_rate=config.hint_rate,
        alpha=config.alpha,
        noise_seed=derive_seed(seed, "gain-noise"),
    )


def gain_reconstruction(model: GainModel, encoded: EncodedMatrix, mask: MaskMatrix) -> np.ndarray:
    """The imputed matrix x_hat = m*x + (1-m)*G(x_tilde, m)."""
    if encoded.codec.attributes != model.codec.attributes or encoded.codec.width != model.codec.width:
        raise CodecError("encoded matrix codec does not match the trained model codec")
    x = encoded.values
    m = expand_mask(mask, encoded.codec)
    rng = np.random.default_rng(model.noise_seed)
    z = rng.uniform(0.0, 0.01, size=x.shape)
    x_tilde = m * x + (1.0 - m) * z
    g_out, _ = forward(model.generator, np.hstack([x_tilde, m]))
    return m * x + (1.0 - m) * g_out


def impute_gain(model: GainModel, encoded: EncodedMatrix, mask: MaskMatrix) -> Table:
    """Decode the GAIN reconstruction: block argmax for categoricals, clamp and
    un-scale for numerics; observed cells pass through untouched."""
    if model.schema is None:
        raise DataError("model carries no schema; cannot decode to a table")
    x_hat = gain_reconstruction(model, encoded, mask)
    return decode(EncodedMatrix(x_hat, encoded.codec), model.schema)


def gain_impute_table(
    table: Table, config: GainConfig | None = None, seed: int = 0
) -> Table:
    """Train GAIN on the table's own observed cells and fill its gaps."""
    config = config or GainConfig()
    mask = MaskMatrix.from_table(table)
    encoded = encode(table)
    model = train_gain(encoded, mask, config, seed, schema=table.schema)
    return impute_gain(model, encoded, mask)


def save_gain_model(model: GainModel, path) -> None:
    """Version-tagged JSON checkpoint: both networks plus the codec descriptor."""
    import json

    from .encoding import codec_to_dict
    from .nn import mlp_to_dict

    doc = {
        "format": "twkit-gain",
        "version": 1,
        "generator": mlp_to_dict(model.generator),
        "discriminator": mlp_to_dict(model.discriminator),
        "codec": codec_to_dict(model.codec),
        "hint_rate": model.hint_rate,
        "alpha": model.alpha,
        "noise_seed": model.noise_seed,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_gain_model(path, schema: Schema) -> GainModel:
    import json

    from .encoding import codec_from_dict
    from .nn import mlp_from_dict

    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != "twkit-gain":
        raise DataError(f"{path}: not a twkit-gain checkpoint")
    return GainModel(
        generator=mlp_from_dict(doc["generator"]),
        discriminator=mlp_from_dict(doc["discriminator"]),
        codec=codec_from_dict(doc["codec"], schema),
        schema=schema,
        hint_rate=doc["hint_rate"],
        alpha=doc["alpha"],
        noise_seed=doc["noise_seed"],
    )


# -- evaluation harness ---------------------------------------------------------


@dataclass
class ImputationContext:
    """Everything a registered method may use to produce imputed tables."""

    train_missing: Table
    test_missing: Table
    train_mask: MaskMatrix
    test_mask: MaskMatrix
    schema: Schema
    seed: int
    pristine_train: Table
    pristine_test: Table
    gain_config: GainConfig


def _method_sta(ctx: ImputationContext):
    return impute_sta(ctx.train_missing), impute_sta(ctx.test_missing)


def _method_mice(ctx: ImputationContext):
    return (
        impute_mice(ctx.train_missing, rounds=10, seed=derive_seed(ctx.seed, "mice-train")),
        impute_mice(ctx.test_missing, rounds=10, seed=derive_seed(ctx.seed, "mice-test")),
    )


def _method_gain(ctx: ImputationContext):
    codec = build_codec(ctx.train_missing)
    enc_train = encode(ctx.train_missing, codec_source=codec)
    model = train_gain(
        enc_train, ctx.train_mask, ctx.gain_config, derive_seed(ctx.seed, "gain"), ctx.schema
    )
    enc_test = encode(ctx.test_missing, codec_source=codec)
    return (
        impute_gain(model, enc_train, ctx.train_mask),
        impute_gain(model, enc_test, ctx.test_mask),
    )


def _method_oracle(ctx: ImputationContext):
    return ctx.pristine_train, ctx.pristine_test


METHODS = {
    "sta": _method_sta,
    "mice": _method_mice,
    "gain": _method_gain,
    "oracle": _method_oracle,
}


def register_method(name: str, fn) -> None:
    """Plug in an additional imputation method (e.g. other GAN variants)."""
    METHODS[name] = fn


@dataclass(frozen=True)
class MethodScores:
    per_classifier: dict[str, dict[str, float]]
    avg_accuracy_diff: float
    avg_f1_diff: float
    avg_auc_diff: float


@dataclass(frozen=True)
class DiffReport:
    """Classifier-metric movement per imputation method.

    Accuracy and macro-F1 differences are absolute values in percentage
    points; AUC differences are absolute values in raw AUC units.
    """

    pristine: dict[str, dict[str, float]]
    methods: dict[str, MethodScores]
    features: tuple[str, ...]
    rate: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "features": list(self.features),
            "rate": self.rate,
            "seed": self.seed,
            "pristine": self.pristine,
            "methods": {
                name: {
                    "per_classifier": scores.per_classifier,
                    "avg_accuracy_diff": scores.avg_accuracy_diff,
                    "avg_f1_diff": scores.avg_f1_diff,
                    "avg_auc_diff": scores.avg_auc_diff,
                }
                for name, scores in self.methods.items()
            },
        }

    def format_text(self) -> str:
        lines = [f"{'Method':<10} {'Avg Accuracy':>14} {'Avg F1-score':>14} {'Avg AUC':>10}"]
        for name, s in self.methods.items():
            lines.append(
                f"{name:<10} {s.avg_accuracy_diff:>14.3f} {s.avg_f1_diff:>14.3f} {s.avg_auc_diff:>10.3f}"
            )
        return "\n".join(lines)


def _classifier_metrics(train: Table, test: Table, codec, classifiers, seed) -> dict[str, Metrics]:
    X_train = encode(train, codec_source=codec).values
    X_test = encode(test, codec_source=codec).values
    y_train = label_indices(train)
    y_test = label_indices(test)
    classes = train.schema.class_codes
    out = {}
    for name in classifiers:
        model = CLASSIFIERS[name](X_train, y_train, len(classes), derive_seed(seed, f"clf-{name}"))
        proba = model.predict_proba(X_test)
        predicted = [classes[i] for i in np.argmax(proba, axis=1)]
        truth = [classes[i] for i in y_test]
        out[name] = compute_metrics(predicted, proba, truth, classes)
    return out


def evaluate_imputation(
    complete: Table,
    features: list[str],
    rate: float,
    methods: list[str] | None = None,
    classifiers: list[str] | None = None,
    seed: int = 0,
    test_fraction: float = 0.2,
    gain_config: GainConfig | None = None,
) -> DiffReport:
    """Benchmark imputation methods by classifier-metric deltas.

    Splits the pristine table, records pristine metrics, injects missingness
    into both split copies, then per method: impute, retrain identically, and
    report absolute metric differences plus their means over classifiers.
    """
    if not complete.is_complete(tuple(features)):
        raise DataError("the benchmark table must be complete in the injected features")
    methods = list(methods) if methods is not None else ["sta", "mice", "gain"]
    classifiers = list(classifiers) if classifiers is not None else ["lr", "dt", "rf", "mlp", "svm"]
    for name in methods:
        if name not in METHODS:
            raise DataError(f"unknown imputation method {name!r}")
    for name in classifiers:
        if name not in CLASSIFIERS:
            raise DataError(f"unknown classifier {name!r}")

    schema = complete.schema
    train, test = split_stratified(complete, test_fraction, derive_seed(seed, "split"))
    feature_names = tuple(a.name for a in schema.features)
    codec = build_codec(train, attributes=feature_names)
    pristine = _classifier_metrics(train, test, codec, classifiers, seed)

    train_missing, train_mask = inject_missing(train, features, rate, derive_seed(seed, "inject-train"))
    test_missing, test_mask = inject_missing(test, features, rate, derive_seed(seed, "inject-test"))
    ctx = ImputationContext(
        train_missing, test_missing, train_mask, test_mask, schema, seed,
        train, test, gain_config or GainConfig(),
    )

    report_methods: dict[str, MethodScores] = {}
    for name in methods:
        imputed_train, imputed_test = METHODS[name](ctx)
        scores = _classifier_metrics(imputed_train, imputed_test, codec, classifiers, seed)
        per_clf = {}
        acc_diffs, f1_diffs, auc_diffs = [], [], []
        for clf in classifiers:
            p, s = pristine[clf], scores[clf]
            acc = abs(p.accuracy - s.accuracy) * 100.0
            f1 = abs(p.weighted_f1 - s.weighted_f1) * 100.0
            auc = abs(p.macro_auc - s.macro_auc)
            per_clf[clf] = {
                "accuracy": s.accuracy,
                "weighted_f1": s.weighted_f1,
                "macro_auc": s.macro_auc,
                "accuracy_diff": acc,
                "f1_diff": f1,
                "auc_diff": auc,
            }
            acc_diffs.append(acc)
            f1_diffs.append(f1)
            auc_diffs.append(auc)
        report_methods[name] = MethodScores(
            per_classifier=per_clf,
            avg_accuracy_diff=float(np.mean(acc_diffs)),
            avg_f1_diff=float(np.mean(f1_diffs)),
            avg_auc_diff=float(np.mean(auc_diffs)),
        )

    pristine_dict = {
        clf: {"accuracy": m.accuracy, "weighted_f1": m.weighted_f1, "macro_auc": m.macro_auc}
        for clf, m in pristine.items()
    }
    return DiffReport(pristine_dict, report_methods, tuple(features), rate, seed)
