"""Dataset container and line-delimited JSON persistence.

A dataset file is one header line (space definition plus provenance
metadata) followed by one line per row. Serialization is canonical: keys
sorted, floats written with repr, no timestamps, so identical runs produce
byte-identical files.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .space import CONTINUOUS, DesignSpace


def canonical_json(payload: Any) -> str:
    """Deterministic single-line JSON used for hashing and data rows."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


@dataclass
class Dataset:
    """Decision rows with optional simulated outputs and provenance metadata."""

    space: DesignSpace
    decisions: list[dict[str, Any]]
    outputs: list[dict[str, float]] | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.outputs is not None and len(self.outputs) != len(self.decisions):
            raise ValueError(
                f"{len(self.outputs)} output rows for {len(self.decisions)} decision rows"
            )
        names = set(self.space.decision_names)
        for i, row in enumerate(self.decisions):
            if set(row) != names:
                raise ValueError(f"row {i}: keys do not match the decision variables")

    @property
    def n_rows(self) -> int:
        return len(self.decisions)

    @property
    def has_outputs(self) -> bool:
        return self.outputs is not None

    def column(self, name: str) -> np.ndarray:
        """One variable as an array; continuous columns come back as floats."""
        if name in self.space.decision_names:
            spec = self.space.decision_spec(name)
            values = [row[name] for row in self.decisions]
            if spec.kind == CONTINUOUS:
                return np.asarray(values, dtype=float)
            return np.asarray(values, dtype=object)
        if name in self.space.performance_names:
            if self.outputs is None:
                raise ValueError(f"dataset has no outputs; cannot read {name!r}")
            return np.asarray([row[name] for row in self.outputs], dtype=float)
        raise KeyError(f"unknown variable {name!r}")

    def columns(self, names: Iterable[str]) -> dict[str, np.ndarray]:
        return {name: self.column(name) for name in names}

    def with_outputs(self, outputs: Sequence[Mapping[str, float]]) -> "Dataset":
        rows = [dict(r) for r in outputs]
        names = set(self.space.performance_names)
        for i, row in enumerate(rows):
            if set(row) != names:
                raise ValueError(f"row {i}: keys do not match the performance variables")
        return Dataset(
            space=self.space,
            decisions=self.decisions,
            outputs=rows,
            metadata=dict(self.metadata),
        )

    # -- persistence ---------------------------------------------------------

    def to_jsonl(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            header = {
                "kind": "dataset",
                "space": self.space.to_dict(),
                "metadata": self.metadata,
                "n_rows": self.n_rows,
                "has_outputs": self.has_outputs,
            }
            fh.write(canonical_json(header) + "\n")
            for i in range(self.n_rows):
                row: dict[str, Any] = {"inputs": self.decisions[i]}
                if self.outputs is not None:
                    row["outputs"] = self.outputs[i]
                fh.write(canonical_json(row) + "\n")

    @classmethod
    def from_jsonl(cls, path: str) -> "Dataset":
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip()]
        if not lines:
            raise ValueError(f"{path}: empty dataset file")
        header = json.loads(lines[0])
        if header.get("kind") != "dataset":
            raise ValueError(f"{path}: not a dataset file")
        space = DesignSpace.from_dict(header["space"])
        decisions = []
        outputs: list[dict[str, float]] | None = [] if header.get("has_outputs") else None
        for ln in lines[1:]:
            row = json.loads(ln)
            decisions.append(row["inputs"])
            if outputs is not None:
                outputs.append(row["outputs"])
        ds = cls(
            space=space,
            decisions=decisions,
            outputs=outputs,
            metadata=header.get("metadata", {}),
        )
        if ds.n_rows != header.get("n_rows"):
            raise ValueError(
                f"{path}: header claims {header.get('n_rows')} rows, found {ds.n_rows}"
            )
        return ds
