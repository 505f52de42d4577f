"""End-to-end orchestration: sample, simulate, screen, train, validate.

Every step writes its artifact before the next step starts, so a failing run
leaves the completed artifacts in place for inspection. All artifacts embed
the configuration hash, and a rerun with the same configuration reproduces
every file byte for byte.
"""
from __future__ import annotations

import hashlib
import json
import os
import warnings
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from . import bbn, sensitivity, sobol, validation
from .data import Dataset, canonical_json
from .discretize import DiscretizationScheme
from .simulator import get_simulator
from .space import CONTINUOUS

MIN_ROWS_PER_SELECTED = 50


class PipelineError(RuntimeError):
    """A step failed; carries the step name for reporting."""

    def __init__(self, step: str, message: str):
        super().__init__(f"step {step!r} failed: {message}")
        self.step = step


class SparseTrainingWarning(UserWarning):
    """Training data is thin relative to the selected variable count."""


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs for one full mapping run. Defaults give the desk-scale study."""

    n_samples: int = 5000
    top_k: int = 6
    bins_per_variable: int = 5
    alpha: float = 1.0
    folds: int = 10
    seed: int = 0
    simulator: str = "synthetic-energy"
    sensitivity_base: int = 1024
    output_dir: str = "artifacts"

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.bins_per_variable < 2:
            raise ValueError("bins_per_variable must be >= 2")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.sensitivity_base < 2:
            raise ValueError("sensitivity_base must be >= 2")

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "top_k": self.top_k,
            "bins_per_variable": self.bins_per_variable,
            "alpha": self.alpha,
            "folds": self.folds,
            "seed": self.seed,
            "simulator": self.simulator,
            "sensitivity_base": self.sensitivity_base,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path: str) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def config_hash(config: PipelineConfig) -> str:
    """Stable fingerprint of everything that shapes the artifacts."""
    return hashlib.sha256(canonical_json(config.to_dict()).encode()).hexdigest()


@dataclass
class PipelineResult:
    config: PipelineConfig
    config_digest: str
    dataset: Dataset
    screening: sensitivity.ScreeningReport
    scheme: DiscretizationScheme
    model: bbn.BbnModel
    report: validation.ValidationReport
    artifacts: dict[str, str] = field(default_factory=dict)


def _write_json(path: str, payload: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """Execute all five steps, persisting one artifact per step.

    Steps: sample the decision space, simulate the samples, screen inputs by
    total-order sensitivity, train the binned network on the selected inputs,
    cross-validate the fit. A failure raises PipelineError naming the step;
    artifacts already written stay on disk.
    """
    os.makedirs(config.output_dir, exist_ok=True)
    digest = config_hash(config)
    artifacts: dict[str, str] = {}

    def path_of(filename: str) -> str:
        return os.path.join(config.output_dir, filename)

    _write_json(path_of("config.json"), {**config.to_dict(), "config_hash": digest})
    artifacts["config"] = path_of("config.json")

    step = "sample"
    try:
        model_fn = get_simulator(config.simulator)
        space = model_fn.space
        plan = sobol.SamplePlan(space=space, n_samples=config.n_samples)
        decisions = sobol.sample(plan)
        dataset = Dataset(
            space=space,
            decisions=decisions,
            metadata={"config_hash": digest, "simulator": config.simulator},
        )
        dataset.to_jsonl(path_of("samples.jsonl"))
        artifacts[step] = path_of("samples.jsonl")
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(step, str(exc)) from exc

    step = "simulate"
    try:
        outputs = model_fn.evaluate_batch(decisions)
        dataset = dataset.with_outputs(outputs)
        dataset.to_jsonl(path_of("dataset.jsonl"))
        artifacts[step] = path_of("dataset.jsonl")
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(step, str(exc)) from exc

    step = "sensitivity"
    try:
        plan_s = sensitivity.saltelli_matrices(space.dimension, config.sensitivity_base)
        rows = [space.denormalize(u) for u in plan_s.points]
        sim_out = model_fn.evaluate_batch(rows)
        out_names = space.performance_names
        yy = np.array([[r[name] for name in out_names] for r in sim_out])
        indices = sensitivity.estimate_indices(plan_s, yy)
        screening = sensitivity.select_top_k(
            indices, space.decision_names, config.top_k, out_names
        )
        _write_json(path_of("sensitivity.json"), screening.to_dict())
        artifacts[step] = path_of("sensitivity.json")
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(step, str(exc)) from exc

    step = "train"
    try:
        if config.n_samples < config.top_k * MIN_ROWS_PER_SELECTED:
            warnings.warn(
                f"{config.n_samples} rows for {config.top_k} selected variables; "
                f"conditional tables will be sparse below "
                f"{MIN_ROWS_PER_SELECTED} rows per variable",
                SparseTrainingWarning,
                stacklevel=2,
            )
        selected = list(screening.selected)
        in_specs = [space.decision_spec(n) for n in selected]
        out_specs = [space.performance_spec(n) for n in out_names]
        columns = dataset.columns(selected + list(out_names))
        scheme = DiscretizationScheme.fit(
            in_specs + out_specs, columns, n_bins=config.bins_per_variable
        )
        xb = np.column_stack([scheme.bin_column(n, columns[n]) for n in selected])
        yb = np.column_stack([scheme.bin_column(n, columns[n]) for n in out_names])
        structure = bbn.BbnStructure(inputs=tuple(selected), outputs=tuple(out_names))
        model = bbn.fit(
            xb,
            yb,
            structure,
            scheme,
            alpha=config.alpha,
            metadata={"config_hash": digest, "simulator": config.simulator},
        )
        bbn.save_model(model, path_of("model.json"))
        artifacts[step] = path_of("model.json")
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(step, str(exc)) from exc

    step = "validate"
    try:
        report = validation.cross_validate(
            in_specs,
            out_specs,
            {n: columns[n] for n in selected},
            {n: columns[n] for n in out_names},
            n_bins=config.bins_per_variable,
            n_folds=config.folds,
            seed=config.seed,
            alpha=config.alpha,
        )
        _write_json(
            path_of("validation.json"),
            {**report.to_dict(), "config_hash": digest},
        )
        with open(path_of("validation.txt"), "w", encoding="utf-8") as fh:
            fh.write(report.to_text() + "\n")
        artifacts[step] = path_of("validation.json")
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(step, str(exc)) from exc

    return PipelineResult(
        config=config,
        config_digest=digest,
        dataset=dataset,
        screening=screening,
        scheme=scheme,
        model=model,
        report=report,
        artifacts=artifacts,
    )
