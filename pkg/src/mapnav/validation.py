"""Cross-validated accuracy assessment of fitted network models.

Folds are formed from a seeded permutation so every report is reproducible
from its seed. Each fold re-fits the discretization on training rows only;
test rows are binned with clamping, pushed through the fitted tables, and
predicted as the probability-weighted bin midpoint per output.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import bbn
from .discretize import DiscretizationScheme
from .space import VariableSpec


def make_folds(
    n_rows: int, n_folds: int, seed: int
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Split row indices into n_folds (train, test) pairs, seeded and disjoint.

    Rows are permuted once with the seed and dealt round-robin, so fold sizes
    differ by at most one and the union of test sets is exactly the dataset.
    """
    if n_folds < 2:
        raise ValueError(f"need at least 2 folds, got {n_folds}")
    if n_rows < n_folds:
        raise ValueError(f"cannot split {n_rows} rows into {n_folds} folds")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_rows)
    folds = []
    for f in range(n_folds):
        test = np.sort(perm[f::n_folds])
        mask = np.ones(n_rows, dtype=bool)
        mask[test] = False
        folds.append((np.nonzero(mask)[0], test))
    return folds


def nrmse(predicted: Sequence[float], actual: Sequence[float]) -> float:
    """Root mean squared error divided by the population std of the actuals."""
    p = np.asarray(predicted, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or p.ndim != 1 or p.size == 0:
        raise ValueError("predicted and actual must be equal-length 1-d arrays")
    std = float(a.std())
    if std == 0.0:
        raise ValueError("actual values are constant; nrmse is undefined")
    rmse = float(np.sqrt(np.mean((p - a) ** 2)))
    return rmse / std


def mape(predicted: Sequence[float], actual: Sequence[float]) -> float:
    """Mean absolute percentage error as a ratio (0.10 means ten percent)."""
    p = np.asarray(predicted, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or p.ndim != 1 or p.size == 0:
        raise ValueError("predicted and actual must be equal-length 1-d arrays")
    zeros = np.nonzero(a == 0.0)[0]
    if zeros.size:
        raise ValueError(
            f"actual values are zero at indices {zeros.tolist()}; mape is undefined"
        )
    return float(np.mean(np.abs(p - a) / np.abs(a)))


def prediction_accuracy(actual: float, predicted: float) -> float:
    """Accuracy score 100 * predicted / (100 * actual - predicted).

    The formula is reproduced verbatim from its published source, disputed
    dimensionally: a perfect prediction of 50 scores about 1.01, not 100.
    It is reported alongside the standard metrics, never asserted against.
    """
    denom = 100.0 * actual - predicted
    if denom == 0.0:
        return float("inf")
    return 100.0 * predicted / denom


def mean_prediction_accuracy(
    predicted: Sequence[float], actual: Sequence[float]
) -> float:
    p = np.asarray(predicted, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or p.ndim != 1 or p.size == 0:
        raise ValueError("predicted and actual must be equal-length 1-d arrays")
    return float(np.mean([prediction_accuracy(ai, pi) for pi, ai in zip(p, a)]))


@dataclass(frozen=True)
class OutputMetrics:
    nrmse: float
    mape: float
    prediction_accuracy: float

    def to_dict(self) -> dict:
        return {
            "nrmse": self.nrmse,
            "nrmse_percent": 100.0 * self.nrmse,
            "mape": self.mape,
            "mape_percent": 100.0 * self.mape,
            "prediction_accuracy": self.prediction_accuracy,
        }


@dataclass(frozen=True)
class ValidationReport:
    """Pooled and per-fold accuracy of midpoint predictions."""

    output_names: tuple[str, ...]
    pooled: dict[str, OutputMetrics]
    per_fold: list[dict[str, OutputMetrics]]
    histograms: dict[str, dict[str, list]]
    n_rows: int
    n_folds: int
    seed: int
    predictions: dict[str, np.ndarray] = field(repr=False, default_factory=dict)
    actuals: dict[str, np.ndarray] = field(repr=False, default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n_rows": self.n_rows,
            "n_folds": self.n_folds,
            "seed": self.seed,
            "pooled": {k: v.to_dict() for k, v in self.pooled.items()},
            "per_fold": [
                {k: v.to_dict() for k, v in fold.items()} for fold in self.per_fold
            ],
            "histograms": self.histograms,
        }

    def to_text(self) -> str:
        """Fixed-width table of the pooled metrics, one row per output."""
        header = f"{'output':<12} {'nrmse':>10} {'nrmse %':>10} {'mape':>10} {'mape %':>10} {'pred acc':>10}"
        rule = "-" * len(header)
        lines = [
            f"cross-validation: {self.n_rows} rows, {self.n_folds} folds, seed {self.seed}",
            rule,
            header,
            rule,
        ]
        for name in self.output_names:
            m = self.pooled[name]
            lines.append(
                f"{name:<12} {m.nrmse:>10.4f} {100 * m.nrmse:>10.2f} "
                f"{m.mape:>10.4f} {100 * m.mape:>10.2f} {m.prediction_accuracy:>10.4f}"
            )
        lines.append(rule)
        return "\n".join(lines)


def _metrics(predicted: np.ndarray, actual: np.ndarray) -> OutputMetrics:
    return OutputMetrics(
        nrmse=nrmse(predicted, actual),
        mape=mape(predicted, actual),
        prediction_accuracy=mean_prediction_accuracy(predicted, actual),
    )


def predict_expected(
    model: bbn.BbnModel, input_bins: np.ndarray, midpoints: Mapping[str, np.ndarray]
) -> dict[str, np.ndarray]:
    """Expected output values per row: probability-weighted bin midpoints."""
    rows = bbn.forward_rows(model, input_bins)
    return {name: rows[name] @ midpoints[name] for name in rows}


def cross_validate(
    input_specs: Sequence[VariableSpec],
    output_specs: Sequence[VariableSpec],
    input_columns: Mapping[str, np.ndarray],
    output_columns: Mapping[str, np.ndarray],
    n_bins: int,
    n_folds: int,
    seed: int,
    alpha: float = 1.0,
) -> ValidationReport:
    """k-fold assessment of the binned network as a forward predictor.

    Per fold, the discretization and the network are fitted on training rows
    only. Test rows are binned with the training edges (out-of-range values
    clamp to the outer bins) and each output is predicted as the expected bin
    midpoint under the fitted conditional table.
    """
    in_names = [s.name for s in input_specs]
    out_names = [s.name for s in output_specs]
    n = len(next(iter(input_columns.values())))
    for name in in_names + out_names:
        col = input_columns.get(name) if name in input_columns else output_columns.get(name)
        if col is None or len(col) != n:
            raise ValueError(f"column {name!r} missing or wrong length")
    structure = bbn.BbnStructure(inputs=tuple(in_names), outputs=tuple(out_names))
    folds = make_folds(n, n_folds, seed)

    pooled_pred = {name: np.zeros(n) for name in out_names}
    actual = {name: np.asarray(output_columns[name], dtype=float) for name in out_names}
    per_fold: list[dict[str, OutputMetrics]] = []

    for train_idx, test_idx in folds:
        train_in = {k: np.asarray(v)[train_idx] for k, v in input_columns.items()}
        train_out = {k: np.asarray(v)[train_idx] for k, v in output_columns.items()}
        scheme = DiscretizationScheme.fit(
            list(input_specs) + list(output_specs),
            {**train_in, **train_out},
            n_bins=n_bins,
        )
        xb_train = np.column_stack(
            [scheme.bin_column(name, train_in[name]) for name in in_names]
        )
        yb_train = np.column_stack(
            [scheme.bin_column(name, train_out[name]) for name in out_names]
        )
        model = bbn.fit(xb_train, yb_train, structure, scheme, alpha=alpha)
        xb_test = np.column_stack(
            [
                scheme.bin_column(name, np.asarray(input_columns[name])[test_idx])
                for name in in_names
            ]
        )
        midpoints = {
            name: np.array(
                [scheme.representative(name, b) for b in range(scheme.n_bins(name))]
            )
            for name in out_names
        }
        pred = predict_expected(model, xb_test, midpoints)
        fold_metrics = {}
        for name in out_names:
            pooled_pred[name][test_idx] = pred[name]
            fold_metrics[name] = _metrics(pred[name], actual[name][test_idx])
        per_fold.append(fold_metrics)

    pooled = {name: _metrics(pooled_pred[name], actual[name]) for name in out_names}

    # histogram comparison on a scheme fitted to the full dataset
    full_scheme = DiscretizationScheme.fit(
        list(output_specs), {k: np.asarray(v) for k, v in output_columns.items()}, n_bins=n_bins
    )
    histograms = {}
    for name in out_names:
        k = full_scheme.n_bins(name)
        hist_a = np.bincount(full_scheme.bin_column(name, actual[name]), minlength=k)
        hist_p = np.bincount(full_scheme.bin_column(name, pooled_pred[name]), minlength=k)
        histograms[name] = {
            "labels": [full_scheme.label(name, b) for b in range(k)],
            "actual": hist_a.tolist(),
            "predicted": hist_p.tolist(),
        }

    return ValidationReport(
        output_names=tuple(out_names),
        pooled=pooled,
        per_fold=per_fold,
        histograms=histograms,
        n_rows=n,
        n_folds=n_folds,
        seed=seed,
        predictions=pooled_pred,
        actuals=actual,
    )
