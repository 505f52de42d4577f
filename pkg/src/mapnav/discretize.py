"""Discretization of continuous variables into labelled bins.

Equal-frequency binning is the default: bin edges sit at the empirical
quantiles so that each bin holds (nearly) the same number of observations.
Edges between neighbouring sorted values use their midpoint, which keeps
the assignment unambiguous for the values actually seen. Equal-width
binning is available as an opt-in alternative.

Categorical variables need no fitting: their categories are their bins.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .space import CATEGORICAL, CONTINUOUS, VariableSpec


class DegenerateBinningError(ValueError):
    """Raised when a variable cannot support the requested number of bins."""


def _format_number(v: float) -> str:
    return f"{v:.4g}"


@dataclass(frozen=True)
class ContinuousBins:
    """Fitted bins for one continuous variable.

    edges has n_bins + 1 strictly increasing entries; bin j covers
    [edges[j], edges[j+1]), with the last bin closed on the right.
    """

    name: str
    edges: tuple[float, ...]
    unit: str = ""

    def __post_init__(self) -> None:
        if len(self.edges) < 3:
            raise DegenerateBinningError(
                f"{self.name}: needs at least 2 bins, got edges {self.edges}"
            )
        e = np.asarray(self.edges, dtype=float)
        if not np.all(np.diff(e) > 0):
            raise ValueError(f"{self.name}: edges must be strictly increasing")

    @property
    def kind(self) -> str:
        return CONTINUOUS

    @property
    def n_bins(self) -> int:
        return len(self.edges) - 1

    def to_bin(self, value: float) -> int:
        """Bin index for a value; out-of-range values clamp to the boundary bins."""
        idx = int(np.searchsorted(self.edges, float(value), side="right")) - 1
        return min(max(idx, 0), self.n_bins - 1)

    def out_of_range(self, value: float) -> bool:
        return not (self.edges[0] <= float(value) <= self.edges[-1])

    def midpoint(self, b: int) -> float:
        self._check_bin(b)
        return (self.edges[b] + self.edges[b + 1]) / 2.0

    def label(self, b: int) -> str:
        self._check_bin(b)
        lo, hi = _format_number(self.edges[b]), _format_number(self.edges[b + 1])
        text = f"[{lo}, {hi}]"
        return f"{text} {self.unit}" if self.unit else text

    def representative(self, b: int) -> float:
        return self.midpoint(b)

    def bins_intersecting(self, lo: float, hi: float) -> list[int]:
        """Bins whose interval intersects the closed range [lo, hi]."""
        if hi < lo:
            raise ValueError(f"{self.name}: empty range [{lo}, {hi}]")
        out = []
        for b in range(self.n_bins):
            left, right = self.edges[b], self.edges[b + 1]
            if right >= lo and left <= hi:
                out.append(b)
        return out

    def _check_bin(self, b: int) -> None:
        if not (0 <= b < self.n_bins):
            raise IndexError(f"{self.name}: bin {b} outside 0..{self.n_bins - 1}")

    def to_dict(self) -> dict:
        d: dict[str, Any] = {
            "variable": self.name,
            "edges": list(self.edges),
            "labels": [self.label(b) for b in range(self.n_bins)],
        }
        if self.unit:
            d["unit"] = self.unit
        return d


@dataclass(frozen=True)
class CategoricalBins:
    """Bins for a categorical variable: one bin per category, in order."""

    name: str
    categories: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.categories:
            raise ValueError(f"{self.name}: needs at least one category")

    @property
    def kind(self) -> str:
        return CATEGORICAL

    @property
    def n_bins(self) -> int:
        return len(self.categories)

    def to_bin(self, value: Any) -> int:
        try:
            return self.categories.index(value)
        except ValueError:
            raise ValueError(
                f"{self.name}: {value!r} is not one of {self.categories}"
            ) from None

    def out_of_range(self, value: Any) -> bool:
        return value not in self.categories

    def label(self, b: int) -> str:
        return self.categories[b]

    def representative(self, b: int) -> str:
        return self.categories[b]

    def to_dict(self) -> dict:
        return {"variable": self.name, "categories": list(self.categories)}


Bins = ContinuousBins | CategoricalBins


def fit_equal_frequency(
    name: str, values: Iterable[float], n_bins: int, unit: str = ""
) -> ContinuousBins:
    """Quantile bins over observed values.

    Interior edges sit at the k quantile positions, each taken as the midpoint
    between the two sorted observations straddling the position. The outer
    edges are the observed min and max. Tied quantile edges are collapsed,
    shrinking the bin count with a warning.
    """
    if n_bins < 2:
        raise ValueError(f"{name}: n_bins must be >= 2, got {n_bins}")
    v = np.sort(np.asarray(list(values), dtype=float))
    if v.size < n_bins:
        raise DegenerateBinningError(
            f"{name}: {v.size} values cannot fill {n_bins} bins"
        )
    if np.unique(v).size < n_bins:
        raise DegenerateBinningError(
            f"{name}: only {np.unique(v).size} distinct values for {n_bins} bins"
        )
    n = v.size
    edges = [float(v[0])]
    for j in range(1, n_bins):
        m = (j * n) // n_bins
        m = min(max(m, 1), n - 1)
        edges.append(float((v[m - 1] + v[m]) / 2.0))
    edges.append(float(v[-1]))
    unique = sorted(set(edges))
    if len(unique) < len(edges):
        warnings.warn(
            f"{name}: tied quantile edges collapsed, {len(unique) - 1} bins instead of "
            f"{n_bins}",
            stacklevel=2,
        )
    if len(unique) < 3:
        raise DegenerateBinningError(
            f"{name}: values too concentrated for 2 or more bins"
        )
    return ContinuousBins(name=name, edges=tuple(unique), unit=unit)


def fit_equal_width(
    name: str, values: Iterable[float], n_bins: int, unit: str = ""
) -> ContinuousBins:
    """Uniform-width bins between the observed min and max."""
    if n_bins < 2:
        raise ValueError(f"{name}: n_bins must be >= 2, got {n_bins}")
    v = np.asarray(list(values), dtype=float)
    lo, hi = float(v.min()), float(v.max())
    if lo == hi:
        raise DegenerateBinningError(f"{name}: constant values cannot be binned")
    edges = np.linspace(lo, hi, n_bins + 1)
    return ContinuousBins(name=name, edges=tuple(float(e) for e in edges), unit=unit)


class DiscretizationScheme:
    """Bins for a set of variables, with lookup by name."""

    def __init__(self, bins: Sequence[Bins]):
        names = [b.name for b in bins]
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable in scheme")
        self._bins: dict[str, Bins] = {b.name: b for b in bins}

    def __contains__(self, name: str) -> bool:
        return name in self._bins

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._bins)

    def bins(self, name: str) -> Bins:
        try:
            return self._bins[name]
        except KeyError:
            raise KeyError(f"no bins fitted for variable {name!r}") from None

    def n_bins(self, name: str) -> int:
        return self.bins(name).n_bins

    def to_bin(self, name: str, value: Any) -> int:
        return self.bins(name).to_bin(value)

    def bin_column(self, name: str, values: Iterable) -> np.ndarray:
        """Bin a whole column at once; continuous columns are vectorized."""
        b = self.bins(name)
        if isinstance(b, ContinuousBins):
            v = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
            idx = np.searchsorted(b.edges, v, side="right") - 1
            return np.clip(idx, 0, b.n_bins - 1).astype(np.int64)
        return np.array([b.to_bin(v) for v in values], dtype=np.int64)

    def out_of_range(self, name: str, value: Any) -> bool:
        return self.bins(name).out_of_range(value)

    def label(self, name: str, b: int) -> str:
        return self.bins(name).label(b)

    def representative(self, name: str, b: int) -> Any:
        return self.bins(name).representative(b)

    # -- fitting ------------------------------------------------------------

    @classmethod
    def fit(
        cls,
        specs: Sequence[VariableSpec],
        columns: Mapping[str, Iterable],
        n_bins: int,
        method: str = "frequency",
    ) -> "DiscretizationScheme":
        """Fit bins for every spec from its observed column.

        Continuous variables are binned by the requested method; categorical
        variables keep their categories as bins.
        """
        if method not in ("frequency", "width"):
            raise ValueError(f"unknown binning method {method!r}")
        fitted: list[Bins] = []
        for spec in specs:
            if spec.kind == CATEGORICAL:
                fitted.append(CategoricalBins(spec.name, spec.categories))
            else:
                fit_fn = fit_equal_frequency if method == "frequency" else fit_equal_width
                fitted.append(fit_fn(spec.name, columns[spec.name], n_bins, spec.unit))
        return cls(fitted)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {"variables": [self._bins[n].to_dict() for n in self._bins]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "DiscretizationScheme":
        fitted: list[Bins] = []
        for entry in d["variables"]:
            if "categories" in entry:
                fitted.append(
                    CategoricalBins(entry["variable"], tuple(entry["categories"]))
                )
            else:
                fitted.append(
                    ContinuousBins(
                        entry["variable"],
                        tuple(float(e) for e in entry["edges"]),
                        entry.get("unit", ""),
                    )
                )
        return cls(fitted)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DiscretizationScheme":
        return cls.from_dict(json.loads(text))
