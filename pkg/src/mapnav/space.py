"""Design-space definitions: variables, vectors, and the unit-cube mapping.

A design space splits its variables into decision variables (the inputs a
designer can set) and performance variables (the outputs a model computes).
All downstream machinery works on the normalized unit cube; this module owns
the mapping between physical values and [0, 1] coordinates.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class VariableSpec:
    """One named variable: continuous with bounds, or categorical with levels.

    Args:
        name: unique identifier within a space.
        kind: ``"continuous"`` or ``"categorical"``.
        lower: inclusive lower bound (continuous only).
        upper: inclusive upper bound (continuous only).
        categories: ordered category labels (categorical only).
        unit: display unit, kept for labels and reports.
    """

    name: str
    kind: str = CONTINUOUS
    lower: float | None = None
    upper: float | None = None
    categories: tuple[str, ...] = ()
    unit: str = ""

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("variable name must be non-empty")
        if self.kind == CONTINUOUS:
            if self.lower is None or self.upper is None:
                raise ValueError(f"{self.name}: continuous variable needs lower and upper")
            lo, hi = float(self.lower), float(self.upper)
            if not (lo < hi):
                raise ValueError(f"{self.name}: lower must be strictly below upper")
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
            if self.categories:
                raise ValueError(f"{self.name}: continuous variable cannot list categories")
        elif self.kind == CATEGORICAL:
            cats = tuple(self.categories)
            if len(cats) < 2:
                raise ValueError(
                    f"{self.name}: categorical variable needs at least two categories"
                )
            if len(set(cats)) != len(cats):
                raise ValueError(f"{self.name}: duplicate categories")
            object.__setattr__(self, "categories", cats)
            if self.lower is not None or self.upper is not None:
                raise ValueError(f"{self.name}: categorical variable cannot have bounds")
        else:
            raise ValueError(f"{self.name}: unknown kind {self.kind!r}")

    # -- value checks -------------------------------------------------------

    def check_value(self, value: Any) -> None:
        """Raise ValueError when ``value`` is not admissible for this variable."""
        if self.kind == CONTINUOUS:
            try:
                v = float(value)
            except (TypeError, ValueError):
                raise ValueError(f"{self.name}: expected a number, got {value!r}") from None
            if not (self.lower <= v <= self.upper):
                raise ValueError(
                    f"{self.name}: value {v} outside [{self.lower}, {self.upper}]"
                )
        else:
            if value not in self.categories:
                raise ValueError(f"{self.name}: {value!r} is not one of {self.categories}")

    # -- unit-cube mapping --------------------------------------------------

    def normalize(self, value: Any) -> float:
        """Map a physical value to [0, 1].

        Continuous values map affinely; categorical values map to the centre
        of the slot assigned to their index, (index + 0.5) / n_categories.
        """
        self.check_value(value)
        if self.kind == CONTINUOUS:
            return (float(value) - self.lower) / (self.upper - self.lower)
        idx = self.categories.index(value)
        return (idx + 0.5) / len(self.categories)

    def denormalize(self, u: float) -> Any:
        """Map a unit-cube coordinate back to a physical value."""
        if not (0.0 <= u <= 1.0):
            raise ValueError(f"{self.name}: coordinate {u} outside [0, 1]")
        if self.kind == CONTINUOUS:
            return self.lower + u * (self.upper - self.lower)
        k = len(self.categories)
        idx = min(int(u * k), k - 1)
        return self.categories[idx]

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"name": self.name, "kind": self.kind}
        if self.kind == CONTINUOUS:
            d["lower"] = self.lower
            d["upper"] = self.upper
        else:
            d["categories"] = list(self.categories)
        if self.unit:
            d["unit"] = self.unit
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "VariableSpec":
        return cls(
            name=d["name"],
            kind=d.get("kind", CONTINUOUS),
            lower=d.get("lower"),
            upper=d.get("upper"),
            categories=tuple(d.get("categories", ())),
            unit=d.get("unit", ""),
        )


@dataclass(frozen=True)
class DesignSpace:
    """Decision variables plus performance variables, with disjoint names.

    Performance variables must be continuous: they are model outputs with
    physical ranges, never labels.
    """

    decision: tuple[VariableSpec, ...]
    performance: tuple[VariableSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "decision", tuple(self.decision))
        object.__setattr__(self, "performance", tuple(self.performance))
        if not self.decision:
            raise ValueError("design space needs at least one decision variable")
        if not self.performance:
            raise ValueError("design space needs at least one performance variable")
        for spec in self.performance:
            if spec.kind != CONTINUOUS:
                raise ValueError(f"performance variable {spec.name} must be continuous")
        names = [s.name for s in self.decision] + [s.name for s in self.performance]
        if len(set(names)) != len(names):
            raise ValueError("decision and performance names must be unique and disjoint")

    # -- lookups ------------------------------------------------------------

    @property
    def decision_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.decision)

    @property
    def performance_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.performance)

    @property
    def dimension(self) -> int:
        return len(self.decision)

    def decision_spec(self, name: str) -> VariableSpec:
        for s in self.decision:
            if s.name == name:
                return s
        raise KeyError(f"no decision variable named {name!r}")

    def performance_spec(self, name: str) -> VariableSpec:
        for s in self.performance:
            if s.name == name:
                return s
        raise KeyError(f"no performance variable named {name!r}")

    def spec(self, name: str) -> VariableSpec:
        for s in self.decision + self.performance:
            if s.name == name:
                return s
        raise KeyError(f"no variable named {name!r}")

    # -- vectors ------------------------------------------------------------

    def check_decision(self, x: Mapping[str, Any]) -> None:
        """Validate a decision vector: every variable present and admissible."""
        missing = [s.name for s in self.decision if s.name not in x]
        if missing:
            raise ValueError(f"decision vector missing {missing}")
        extra = sorted(set(x) - set(self.decision_names))
        if extra:
            raise ValueError(f"decision vector has unknown variables {extra}")
        for s in self.decision:
            s.check_value(x[s.name])

    def normalize(self, x: Mapping[str, Any]) -> list[float]:
        """Decision vector -> unit-cube coordinates in declaration order."""
        self.check_decision(x)
        return [s.normalize(x[s.name]) for s in self.decision]

    def denormalize(self, u: Iterable[float]) -> dict[str, Any]:
        """Unit-cube coordinates (declaration order) -> decision vector."""
        u = list(u)
        if len(u) != len(self.decision):
            raise ValueError(f"expected {len(self.decision)} coordinates, got {len(u)}")
        return {s.name: s.denormalize(ui) for s, ui in zip(self.decision, u)}

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "decision": [s.to_dict() for s in self.decision],
            "performance": [s.to_dict() for s in self.performance],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "DesignSpace":
        return cls(
            decision=tuple(VariableSpec.from_dict(s) for s in d["decision"]),
            performance=tuple(VariableSpec.from_dict(s) for s in d["performance"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DesignSpace":
        return cls.from_dict(json.loads(text))
