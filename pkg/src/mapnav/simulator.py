"""Ground-truth models: the interface and a synthetic building-energy stand-in.

The synthetic model is a documented closed-form caricature of an annual
building energy calculation. It exists so the whole toolchain can be
exercised end to end with a fast, fully reproducible oracle; the real
calculation engines it stands in for are proprietary and far larger. Twenty
inputs (two of them categorical, six deliberately inert) map to three
performance outputs:

    beng1  heating demand intensity    [kWh/m2y]
    beng2  net primary energy use      [kWh/m2y]
    beng3  renewable share             [%]

Closed form (annual balance):

    loss    = sum(U_i * A_i) * H / 1000            over roof, walls, floor, windows
    gains   = g * A_win * I * orient_factor
    demand  = max(loss - gains, 0) * (1 + infiltration_rate)
    beng1   = demand / A_floor
    pv      = Area_PV * (P_PV / 1000) * I * r_pv / A_floor
    cons    = beng1 / eta_heat(system_type) + aux
    beng2   = max(cons * p_e - pv, 0)
    beng3   = 100 * pv / (pv + cons)     (0 when pv == 0)

The per-system efficiencies are tuned so beng2 stays strictly positive over
the sampled box (several downstream relative-error metrics are undefined at
zero); the heat-pump value is therefore a modest primary-energy-style factor,
not a physical COP.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Mapping, Sequence

import numpy as np

from .space import CATEGORICAL, CONTINUOUS, DesignSpace, VariableSpec

# model constants
HEATING_DEGREE_HOURS = 70_000.0      # H, Kh/y
PRIMARY_ENERGY_FACTOR = 1.45         # p_e, kWh primary per kWh delivered
SOLAR_GAIN_FACTOR = 0.35             # g
PV_PERFORMANCE_RATIO = 0.75          # r_pv
REFERENCE_IRRADIATION = 1000.0       # I, kWh/m2y

ORIENTATION_FACTOR = {"N": 0.4, "E": 0.7, "S": 1.0, "W": 0.7}
SYSTEM_EFFICIENCY = {"gas_boiler": 0.90, "heat_pump": 1.40, "district": 1.10}

N_DUMMIES = 6


class GroundTruthModel(ABC):
    """Anything that maps a decision vector to a performance vector."""

    @property
    @abstractmethod
    def space(self) -> DesignSpace: ...

    @abstractmethod
    def evaluate(self, x: Mapping) -> dict:
        """One decision vector -> one performance vector."""

    def evaluate_batch(self, xs: Sequence[Mapping]) -> list[dict]:
        """Row-wise evaluation; must match evaluate element for element."""
        out = []
        for i, x in enumerate(xs):
            try:
                out.append(self.evaluate(x))
            except ValueError as exc:
                raise ValueError(f"row {i}: {exc}") from exc
        return out


def build_space() -> DesignSpace:
    """The synthetic model's twenty decision variables and three outputs."""
    decision = [
        VariableSpec("A_floor", CONTINUOUS, 80.0, 150.0, unit="m2"),
        VariableSpec("A_roof", CONTINUOUS, 60.0, 100.0, unit="m2"),
        VariableSpec("A_wall", CONTINUOUS, 90.0, 140.0, unit="m2"),
        VariableSpec("A_win", CONTINUOUS, 6.0, 11.0, unit="m2"),
        VariableSpec("U_roof", CONTINUOUS, 0.55, 0.90, unit="W/m2K"),
        VariableSpec("U_wall", CONTINUOUS, 0.65, 1.20, unit="W/m2K"),
        VariableSpec("U_floor", CONTINUOUS, 0.55, 0.90, unit="W/m2K"),
        VariableSpec("U_win", CONTINUOUS, 1.70, 2.60, unit="W/m2K"),
        VariableSpec("orientation", CATEGORICAL, categories=("N", "E", "S", "W")),
        VariableSpec("infiltration_rate", CONTINUOUS, 0.10, 0.30),
        VariableSpec(
            "system_type", CATEGORICAL, categories=("gas_boiler", "heat_pump", "district")
        ),
        VariableSpec("aux", CONTINUOUS, 6.0, 14.0, unit="kWh/m2y"),
        VariableSpec("Area_PV", CONTINUOUS, 0.0, 28.0, unit="m2"),
        VariableSpec("P_PV", CONTINUOUS, 55.0, 280.0, unit="W/m2"),
    ]
    for i in range(1, N_DUMMIES + 1):
        decision.append(VariableSpec(f"dummy_{i}", CONTINUOUS, 0.0, 1.0))
    performance = [
        VariableSpec("beng1", CONTINUOUS, 0.0, 400.0, unit="kWh/m2y"),
        VariableSpec("beng2", CONTINUOUS, 0.0, 600.0, unit="kWh/m2y"),
        VariableSpec("beng3", CONTINUOUS, 0.0, 100.0, unit="%"),
    ]
    return DesignSpace(decision=tuple(decision), performance=tuple(performance))


class SyntheticEnergyModel(GroundTruthModel):
    """Deterministic closed-form stand-in for an annual energy calculation."""

    def __init__(self) -> None:
        self._space = build_space()
        self._orient = np.array([ORIENTATION_FACTOR[c] for c in ("N", "E", "S", "W")])
        self._eta = np.array(
            [SYSTEM_EFFICIENCY[c] for c in ("gas_boiler", "heat_pump", "district")]
        )

    @property
    def space(self) -> DesignSpace:
        return self._space

    def evaluate(self, x: Mapping) -> dict:
        return self.evaluate_batch([x])[0]

    def evaluate_batch(self, xs: Sequence[Mapping]) -> list[dict]:
        for i, x in enumerate(xs):
            try:
                self._space.check_decision(x)
            except ValueError as exc:
                raise ValueError(f"row {i}: {exc}") from exc
        if not xs:
            return []
        cols = {
            name: np.array([x[name] for x in xs], dtype=np.float64)
            for name in self._space.decision_names
            if name not in ("orientation", "system_type")
        }
        orient_idx = np.array([("N", "E", "S", "W").index(x["orientation"]) for x in xs])
        system_idx = np.array(
            [("gas_boiler", "heat_pump", "district").index(x["system_type"]) for x in xs]
        )
        b1, b2, b3 = self._kernel(cols, orient_idx, system_idx)
        return [
            {"beng1": float(b1[i]), "beng2": float(b2[i]), "beng3": float(b3[i])}
            for i in range(len(xs))
        ]

    def _kernel(
        self, c: Mapping[str, np.ndarray], orient_idx: np.ndarray, system_idx: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        loss = (
            c["U_roof"] * c["A_roof"]
            + c["U_wall"] * c["A_wall"]
            + c["U_floor"] * c["A_floor"]
            + c["U_win"] * c["A_win"]
        ) * HEATING_DEGREE_HOURS / 1000.0
        gains = SOLAR_GAIN_FACTOR * c["A_win"] * REFERENCE_IRRADIATION * self._orient[orient_idx]
        demand = np.maximum(loss - gains, 0.0) * (1.0 + c["infiltration_rate"])
        beng1 = demand / c["A_floor"]
        pv = (
            c["Area_PV"]
            * (c["P_PV"] / 1000.0)
            * REFERENCE_IRRADIATION
            * PV_PERFORMANCE_RATIO
            / c["A_floor"]
        )
        cons = beng1 / self._eta[system_idx] + c["aux"]
        beng2 = np.maximum(cons * PRIMARY_ENERGY_FACTOR - pv, 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            beng3 = np.where(pv > 0.0, 100.0 * pv / (pv + cons), 0.0)
        return beng1, beng2, beng3


SIMULATORS = {"synthetic-energy": SyntheticEnergyModel}


def get_simulator(name: str) -> GroundTruthModel:
    try:
        return SIMULATORS[name]()
    except KeyError:
        raise ValueError(
            f"unknown simulator {name!r}; available: {sorted(SIMULATORS)}"
        ) from None
