"""Two-stage minority-class augmentation.

Stage 1 (SMOTENC) interpolates new minority rows between same-class
neighbors: numerics move along the segment between the two parents, each
categorical takes the majority vote of the seed row's k nearest same-class
neighbors. Stage 2 (a conditional tabular GAN with generator, discriminator
and an auxiliary classifier that penalizes label-inconsistent samples) tops
classes up to their final targets. Original rows ride through verbatim and
every row carries an origin flag: real, smotenc, or cgan.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .encoding import Codec, EncodedMatrix, decode_cells, encode
from .errors import DataError, TrainingDiverged
from .nn import (
    MLP,
    AdamState,
    adam_step,
    backward,
    binary_cross_entropy,
    forward,
    init_mlp,
    iter_batches,
    softmax_cross_entropy,
)
from .schema import NUMERIC, Code, Schema
from .table import Row, Table
from .seeds import derive_seed

ORIGIN_REAL = "real"
ORIGIN_SMOTENC = "smotenc"
ORIGIN_CGAN = "cgan"


@dataclass(frozen=True)
class SmotencConfig:
    k_neighbors: int = 5


def categorical_penalty(table: Table, cls: Code) -> float:
    """Median of the numeric-feature standard deviations over the class rows.

    Falls back to the table-wide value (then 1.0) when the class is constant
    in every numeric feature, so categorical mismatches keep a nonzero cost.
    """
    numeric = [a.name for a in table.schema.features if a.kind == NUMERIC]
    if not numeric:
        return 1.0
    label_idx = table.schema.label_index
    class_rows = [row for row in table.rows if row[label_idx] == cls]
    for rows in (class_rows, list(table.rows)):
        stds = []
        for name in numeric:
            j = table.schema.index_of(name)
            values = [row[j] for row in rows if row[j] is not None]
            if len(values) > 1:
                stds.append(float(np.std(values)))
        if stds and np.median(stds) > 0:
            return float(np.median(stds))
    return 1.0


def smotenc_distance(a: Row, b: Row, schema: Schema, penalty: float) -> float:
    """Mixed-feature distance: numeric squared differences plus penalty^2 per
    categorical mismatch, square-rooted."""
    total = 0.0
    for attr in schema.features:
        j = schema.index_of(attr.name)
        va, vb = a[j], b[j]
        if va is None or vb is None:
            raise DataError("smotenc_distance requires complete rows")
        if attr.kind == NUMERIC:
            total += (float(va) - float(vb)) ** 2
        elif va != vb:
            total += penalty**2
    return float(np.sqrt(total))


def _class_rows(table: Table, cls: Code) -> list[Row]:
    label_idx = table.schema.label_index
    return [row for row in table.rows if row[label_idx] == cls]


def smotenc_generate(table: Table, cls: Code, n_new: int, k: int, seed: int) -> list[Row]:
    """Synthesize `n_new` rows of class `cls` between existing class members."""
    if cls not in table.schema.class_codes:
        raise DataError(f"unknown class {cls!r}")
    rows = _class_rows(table, cls)
    if len(rows) < 2:
        raise DataError(f"class {cls!r} has {len(rows)} member(s); SMOTENC needs >=2")
    if k > len(rows) - 1:
        warnings.warn(f"k={k} exceeds class size - 1; lowered to {len(rows) - 1}")
        k = len(rows) - 1
    if k < 1:
        raise DataError("k must be >= 1")
    if n_new == 0:
        return []

    schema = table.schema
    penalty = categorical_penalty(table, cls)
    feats = schema.features
    cols = [schema.index_of(a.name) for a in feats]
    numeric_mask = np.array([a.kind == NUMERIC for a in feats])
    num = np.array(
        [[float(r[j]) if numeric_mask[i] else 0.0 for i, j in enumerate(cols)] for r in rows]
    )[:, numeric_mask]
    cat_cols = [j for i, j in enumerate(cols) if not numeric_mask[i]]
    cat = np.array(
        [[schema.attributes[j].code_index(r[j]) for j in cat_cols] for r in rows], dtype=np.int64
    )

    m = len(rows)
    dist2 = ((num[:, None, :] - num[None, :, :]) ** 2).sum(axis=2)
    dist2 += (penalty**2) * (cat[:, None, :] != cat[None, :, :]).sum(axis=2)
    neighbor_lists = []
    for i in range(m):
        order = np.argsort(dist2[i], kind="stable")
        neighbor_lists.append([int(o) for o in order if o != i][:k])

    rng = np.random.default_rng(seed)
    label_idx = schema.label_index
    out: list[Row] = []
    for _ in range(n_new):
        ri = int(rng.integers(0, m))
        neighbors = neighbor_lists[ri]
        si = neighbors[int(rng.integers(0, len(neighbors)))]
        u = float(rng.random())
        r_row, s_row = rows[ri], rows[si]
        cells: list = list(r_row)
        for attr, j in zip(feats, cols):
            if attr.kind == NUMERIC:
                cells[j] = float(r_row[j]) + u * (float(s_row[j]) - float(r_row[j]))
            else:
                votes: dict = {}
                for ni in neighbors:
                    code = rows[ni][j]
                    votes[code] = votes.get(code, 0) + 1
                top = max(votes.values())
                winners = [c for c in attr.codes if votes.get(c, 0) == top]
                # a tie keeps the seed row's value
                cells[j] = winners[0] if len(winners) == 1 else r_row[j]
        cells[label_idx] = cls
        out.append(tuple(cells))
    return out


# -- conditional tabular GAN -----------------------------------------------------


@dataclass(frozen=True)
class CganConfig:
    epochs: int = 300
    batch_size: int = 128
    learning_rate: float = 1e-3
    noise_dim: int = 32
    hidden: tuple[int, int] = (128, 128)
    moment_weight: float = 1.0
    class_weight: float = 1.0


@dataclass
class TableCganModel:
    generator: MLP
    discriminator: MLP
    classifier: MLP
    codec: Codec  # feature columns only
    schema: Schema
    noise_dim: int


def _one_hot(indices: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros((len(indices), k))
    out[np.arange(len(indices)), indices] = 1.0
    return out


def train_table_cgan(
    encoded: EncodedMatrix,
    labels: np.ndarray,
    config: CganConfig,
    seed: int,
    schema: Schema,
) -> TableCganModel:
    """Alternating updates: D learns real-vs-fake conditioned on class; C learns
    classes on real rows; G fools D, matches per-class batch feature means, and
    is penalized when C misclassifies its samples."""
    x = encoded.values
    y = np.asarray(labels, dtype=np.int64)
    k = len(schema.class_codes)
    counts = np.bincount(y, minlength=k)
    lacking = [str(schema.class_codes[i]) for i in range(k) if counts[i] == 1]
    if lacking:
        raise DataError(f"classes present in training data need >=2 rows; lacking: {lacking}")
    d = x.shape[1]
    spans = encoded.codec.categorical_spans()
    gen = init_mlp(
        (config.noise_dim + k,) + config.hidden + (d,),
        seed=derive_seed(seed, "cgan-generator"),
        hidden_activation="tanh",
        output_activation="softmax_blocks",
        output_blocks=tuple(spans),
    )
    disc = init_mlp(
        (d + k,) + config.hidden + (1,),
        seed=derive_seed(seed, "cgan-discriminator"),
        hidden_activation="tanh",
        output_activation="sigmoid",
    )
    clf = init_mlp(
        (d,) + config.hidden + (k,),
        seed=derive_seed(seed, "cgan-classifier"),
        hidden_activation="tanh",
        output_activation="identity",
    )
    g_state = AdamState.for_mlp(gen, learning_rate=config.learning_rate)
    d_state = AdamState.for_mlp(disc, learning_rate=config.learning_rate)
    c_state = AdamState.for_mlp(clf, learning_rate=config.learning_rate)
    rng = np.random.default_rng(derive_seed(seed, "cgan-batches"))
    n = x.shape[0]

    for epoch in range(config.epochs):
        for b_i, batch in enumerate(iter_batches(n, config.batch_size, rng)):
            xb, yb = x[batch], y[batch]
            y1h = _one_hot(yb, k)
            z = rng.standard_normal((len(batch), config.noise_dim))
            gen_in = np.hstack([z, y1h])

            # discriminator
            fake, _ = forward(gen, gen_in)
            d_real, cache_r = forward(disc, np.hstack([xb, y1h]))
            loss_r, grad_r = binary_cross_entropy(d_real, np.ones_like(d_real))
            d_fake, cache_f = forward(disc, np.hstack([fake, y1h]))
            loss_f, grad_f = binary_cross_entropy(d_fake, np.zeros_like(d_fake))
            grads_r, _ = backward(disc, cache_r, 0.5 * grad_r)
            grads_f, _ = backward(disc, cache_f, 0.5 * grad_f)
            adam_step(disc, [(gr + gf, br + bf) for (gr, br), (gf, bf) in zip(grads_r, grads_f)], d_state)

            # classifier on real rows
            logits, cache_c = forward(clf, xb)
            loss_c, dlogits = softmax_cross_entropy(logits, yb)
            grads_c, _ = backward(clf, cache_c, dlogits)
            adam_step(clf, grads_c, c_state)

            # generator
            fake, cache_g = forward(gen, gen_in)
            d_fake, cache_f = forward(disc, np.hstack([fake, y1h]))
            loss_adv, grad_adv = binary_cross_entropy(d_fake, np.ones_like(d_fake))
            _, d_in_grad = backward(disc, cache_f, grad_adv)
            fake_grad = d_in_grad[:, :d].copy()

            # per-class batch mean matching
            loss_moment = 0.0
            present = np.unique(yb)
            for c in present:
                sel = yb == c
                mu_f = fake[sel].mean(axis=0)
                mu_r = xb[sel].mean(axis=0)
                diff = mu_f - mu_r
                loss_moment += float((diff**2).mean())
                fake_grad[sel] += (
                    config.moment_weight * 2.0 * diff / (d * len(present) * int(sel.sum()))
                )
            loss_moment /= len(present)

            # semantic integrity: C should assign the conditioning class
            logits_f, cache_cf = forward(clf, fake)
            loss_sem, dlogits_f = softmax_cross_entropy(logits_f, yb)
            _, c_in_grad = backward(clf, cache_cf, dlogits_f)
            fake_grad += config.class_weight * c_in_grad

            grads_g, _ = backward(gen, cache_g, fake_grad)
            adam_step(gen, grads_g, g_state)

            losses = (loss_r, loss_f, loss_c, loss_adv, loss_moment, loss_sem)
            if not all(np.isfinite(v) for v in losses):
                raise TrainingDiverged("non-finite CGAN loss", epoch=epoch, batch=b_i)

    return TableCganModel(gen, disc, clf, encoded.codec, schema, config.noise_dim)


def sample_table_cgan(model: TableCganModel, cls: Code, n: int, seed: int) -> list[Row]:
    """Generate `n` rows of class `cls` (decoded via block argmax / unscale)."""
    schema = model.schema
    if cls not in schema.class_codes:
        raise DataError(f"unknown class {cls!r}")
    if n == 0:
        return []
    k = len(schema.class_codes)
    cls_idx = schema.class_codes.index(cls)
    rng = np.random.default_rng(derive_seed(seed, f"cgan-sample-{cls}"))
    z = rng.standard_normal((n, model.noise_dim))
    y1h = _one_hot(np.full(n, cls_idx), k)
    fake, _ = forward(model.generator, np.hstack([z, y1h]))
    label_name = schema.label.name
    rows = []
    for cells in decode_cells(fake, model.codec):
        cells[label_name] = cls
        rows.append(tuple(cells[name] for name in schema.names))
    return rows


def cgan_class_agreement(model: TableCganModel, rows_per_class: int = 200, seed: int = 0) -> float:
    """Fraction of generated rows whose auxiliary-classifier argmax equals the
    conditioning class (a training-quality diagnostic)."""
    schema = model.schema
    total = 0
    agree = 0
    for cls in schema.class_codes:
        rows = sample_table_cgan(model, cls, rows_per_class, seed)
        sub = Table(schema, tuple(rows))
        enc = encode(sub, codec_source=model.codec)
        logits, _ = forward(model.classifier, enc.values)
        predicted = np.argmax(logits, axis=1)
        agree += int((predicted == schema.class_codes.index(cls)).sum())
        total += rows_per_class
    return agree / total


# -- plans and the two-stage pipeline ---------------------------------------------


@dataclass(frozen=True)
class AugmentPlan:
    stage1: dict[Code, int]
    stage2: dict[Code, int]

    @property
    def total(self) -> int:
        return sum(self.stage2.values())

    def validate(self, counts: dict[Code, int]) -> None:
        for cls, count in counts.items():
            s1 = self.stage1.get(cls, count)
            s2 = self.stage2.get(cls, count)
            if not (s2 >= s1 >= count):
                raise DataError(
                    f"plan for class {cls!r} must satisfy stage2 >= stage1 >= count "
                    f"({s2} >= {s1} >= {count})"
                )

    def to_dict(self) -> dict:
        return {
            "stage1": {str(c): t for c, t in self.stage1.items()},
            "stage2": {str(c): t for c, t in self.stage2.items()},
        }


def load_plan(path, schema: Schema) -> AugmentPlan:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: {exc}") from exc
    label = schema.label
    return AugmentPlan(
        stage1={label.parse_token(c): int(t) for c, t in doc["stage1"].items()},
        stage2={label.parse_token(c): int(t) for c, t in doc["stage2"].items()},
    )


def default_augment_plan(
    counts: dict[Code, int], class_order, total: int = 1800, smote_cap: int = 200
) -> AugmentPlan:
    """Even stage-2 targets summing to `total`: classes already above their even
    share keep their real counts, the remaining budget spreads evenly over the
    rest (declared order breaks the remainder). Stage 1 lifts each class to
    min(smote_cap, its stage-2 target) via SMOTENC."""
    order = [c for c in class_order]
    pool = list(order)
    budget = total
    stage2: dict[Code, int] = {}
    while pool:
        share = budget // len(pool)
        fixed = [c for c in pool if counts.get(c, 0) > share]
        if not fixed:
            rem = budget - share * len(pool)
            for i, c in enumerate(pool):
                stage2[c] = share + (1 if i < rem else 0)
            break
        for c in fixed:
            stage2[c] = counts[c]
            budget -= counts[c]
            pool.remove(c)
    stage1 = {
        c: max(counts.get(c, 0), min(smote_cap, stage2[c])) for c in order
    }
    return AugmentPlan(stage1=stage1, stage2=stage2)


@dataclass(frozen=True)
class AugmentResult:
    table: Table
    origins: tuple[str, ...]


def two_stage_augment(
    table: Table,
    plan: AugmentPlan | None = None,
    smote_config: SmotencConfig | None = None,
    cgan_config: CganConfig | None = None,
    seed: int = 0,
) -> AugmentResult:
    """SMOTENC to stage-1 targets, then conditional-GAN sampling to stage-2.

    Original rows are preserved verbatim (first, in input order) and flagged
    `real`; synthetic rows are flagged by the stage that produced them.
    """
    schema = table.schema
    counts = {c: 0 for c in schema.class_codes}
    for label in table.labels():
        counts[label] += 1
    if plan is None:
        plan = default_augment_plan(counts, schema.class_codes)
    plan.validate(counts)
    smote_config = smote_config or SmotencConfig()

    rows: list[Row] = list(table.rows)
    origins: list[str] = [ORIGIN_REAL] * len(rows)
    for cls in schema.class_codes:
        need = plan.stage1.get(cls, counts[cls]) - counts[cls]
        if need <= 0:
            continue
        k = min(smote_config.k_neighbors, counts[cls] - 1)
        new_rows = smotenc_generate(table, cls, need, k, derive_seed(seed, f"smote-{cls}"))
        rows.extend(new_rows)
        origins.extend([ORIGIN_SMOTENC] * len(new_rows))

    stage1_table = Table(schema, tuple(rows))
    gaps = {
        cls: plan.stage2.get(cls, counts[cls]) - plan.stage1.get(cls, counts[cls])
        for cls in schema.class_codes
    }
    if any(g > 0 for g in gaps.values()):
        feature_names = tuple(a.name for a in schema.features)
        encoded = encode(stage1_table, attributes=feature_names)
        labels = np.array(
            [schema.class_codes.index(c) for c in stage1_table.labels()], dtype=np.int64
        )
        model = train_table_cgan(
            encoded, labels, cgan_config or CganConfig(), derive_seed(seed, "cgan"), schema
        )
        for cls in schema.class_codes:
            if gaps[cls] <= 0:
                continue
            new_rows = sample_table_cgan(model, cls, gaps[cls], derive_seed(seed, f"cgan-{cls}"))
            rows.extend(new_rows)
            origins.extend([ORIGIN_CGAN] * len(new_rows))

    return AugmentResult(Table(schema, tuple(rows)), tuple(origins))
