"""Variance-based global sensitivity screening.

The sampling scheme evaluates a model on matrices A and B (two independent
space-filling blocks obtained by dimension doubling) plus d pick-one-column
hybrids AB_i. First-order indices use the B * (AB_i - A) estimator; total
order uses the squared-difference form. Both normalize by the variance of
the pooled A and B outputs.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .sobol import unit_samples


@dataclass(frozen=True)
class SaltelliPlan:
    """Evaluation points stacked in canonical order: A, AB_1..AB_d, B.

    points has n_base * (d + 2) rows. Block i of size n_base is:
    row block 0 = A, blocks 1..d = AB_i (A with column i-1 replaced from B),
    block d+1 = B.
    """

    dimension: int
    n_base: int
    points: np.ndarray = field(repr=False)

    @property
    def n_rows(self) -> int:
        return self.n_base * (self.dimension + 2)

    def block(self, i: int) -> np.ndarray:
        """Rows of block i (0 = A, 1..d = AB_i, d+1 = B)."""
        if not (0 <= i <= self.dimension + 1):
            raise IndexError(f"block {i} outside 0..{self.dimension + 1}")
        return self.points[i * self.n_base : (i + 1) * self.n_base]


def saltelli_matrices(dimension: int, n_base: int) -> SaltelliPlan:
    """Build the stacked A, AB_i, B evaluation matrix.

    A and B come from one 2d-dimensional low-discrepancy sequence, so they
    are independent blocks of a single deterministic stream. n_base should
    be a power of two to keep the dyadic balance of the sequence; other
    values work but are warned about.
    """
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    if n_base < 2:
        raise ValueError("n_base must be >= 2")
    if n_base & (n_base - 1):
        warnings.warn(
            f"n_base={n_base} is not a power of two; sample balance degrades",
            stacklevel=2,
        )
    doubled = unit_samples(2 * dimension, n_base, skip_first=False)
    a = doubled[:, :dimension]
    b = doubled[:, dimension:]
    blocks = [a]
    for i in range(dimension):
        ab = a.copy()
        ab[:, i] = b[:, i]
        blocks.append(ab)
    blocks.append(b)
    return SaltelliPlan(dimension=dimension, n_base=n_base, points=np.vstack(blocks))


@dataclass(frozen=True)
class SensitivityResult:
    """First- and total-order indices per variable and output.

    first_order and total_order have shape (d, n_outputs); variance holds the
    pooled A/B output variances. degenerate marks outputs whose pooled
    variance is zero (indices are reported as zeros there).
    """

    first_order: np.ndarray
    total_order: np.ndarray
    variance: np.ndarray
    degenerate: np.ndarray
    n_base: int

    @property
    def dimension(self) -> int:
        return self.first_order.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.first_order.shape[1]


def estimate_indices(plan: SaltelliPlan, outputs: np.ndarray) -> SensitivityResult:
    """Indices from model outputs evaluated on the plan's stacked rows.

    outputs: shape (n_rows,) or (n_rows, n_outputs).
    """
    y = np.asarray(outputs, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if y.shape[0] != plan.n_rows:
        raise ValueError(
            f"outputs has {y.shape[0]} rows, plan expects {plan.n_rows}"
        )
    n, d = plan.n_base, plan.dimension
    q = y.shape[1]
    f_a = y[:n]
    f_b = y[(d + 1) * n :]
    variance = np.var(np.concatenate([f_a, f_b], axis=0), axis=0)
    degenerate = variance == 0.0
    first = np.zeros((d, q))
    total = np.zeros((d, q))
    safe_v = np.where(degenerate, 1.0, variance)
    for i in range(d):
        f_ab = y[(i + 1) * n : (i + 2) * n]
        first[i] = np.mean(f_b * (f_ab - f_a), axis=0) / safe_v
        total[i] = 0.5 * np.mean((f_a - f_ab) ** 2, axis=0) / safe_v
    first[:, degenerate] = 0.0
    total[:, degenerate] = 0.0
    return SensitivityResult(
        first_order=first,
        total_order=total,
        variance=variance,
        degenerate=degenerate,
        n_base=n,
    )


@dataclass(frozen=True)
class ScreeningReport:
    """Ranked influence summary used to pick the variables worth modelling.

    Variables are ordered by their largest total-order index across outputs,
    ties broken by declaration order. explained_share holds, per output, the
    fraction of summed total-order influence captured by the selection.
    """

    names: tuple[str, ...]
    output_names: tuple[str, ...]
    selected: tuple[str, ...]
    order: tuple[int, ...]
    first_order: np.ndarray
    total_order: np.ndarray
    explained_share: tuple[float, ...]
    n_base: int

    def to_dict(self) -> dict:
        ranking = []
        for idx in self.order:
            ranking.append(
                {
                    "variable": self.names[idx],
                    "total_order": [float(v) for v in self.total_order[idx]],
                    "first_order": [float(v) for v in self.first_order[idx]],
                    "selected": self.names[idx] in self.selected,
                }
            )
        return {
            "outputs": list(self.output_names),
            "ranking": ranking,
            "selected": list(self.selected),
            "explained_share": [float(s) for s in self.explained_share],
            "n_base": self.n_base,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScreeningReport":
        names = tuple(entry["variable"] for entry in d["ranking"])
        total = np.array([entry["total_order"] for entry in d["ranking"]])
        first = np.array([entry["first_order"] for entry in d["ranking"]])
        # ranking is stored in rank order; keep it that way
        return cls(
            names=names,
            output_names=tuple(d["outputs"]),
            selected=tuple(d["selected"]),
            order=tuple(range(len(names))),
            first_order=first,
            total_order=total,
            explained_share=tuple(d["explained_share"]),
            n_base=d["n_base"],
        )


def select_top_k(
    result: SensitivityResult,
    names: Sequence[str],
    k: int,
    output_names: Sequence[str] | None = None,
) -> ScreeningReport:
    """Keep the k most influential variables by max-over-outputs total order."""
    d = result.dimension
    if len(names) != d:
        raise ValueError(f"{len(names)} names for {d} variables")
    if not (1 <= k <= d):
        raise ValueError(f"k must be in 1..{d}, got {k}")
    score = result.total_order.max(axis=1)
    order = sorted(range(d), key=lambda i: (-score[i], i))
    selected = tuple(names[i] for i in sorted(order[:k], key=lambda i: i))
    denom = result.total_order.sum(axis=0)
    kept = result.total_order[sorted(order[:k])].sum(axis=0)
    share = tuple(
        float(kept[j] / denom[j]) if denom[j] > 0 else 0.0
        for j in range(result.n_outputs)
    )
    return ScreeningReport(
        names=tuple(names),
        output_names=tuple(output_names or [f"y{j}" for j in range(result.n_outputs)]),
        selected=selected,
        order=tuple(order),
        first_order=result.first_order,
        total_order=result.total_order,
        explained_share=share,
        n_base=result.n_base,
    )
