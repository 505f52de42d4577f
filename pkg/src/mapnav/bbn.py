"""Discrete belief network over binned variables, bipartite by construction.

Every input node feeds every output node and nothing else. Inputs carry
smoothed marginal priors; each output carries a conditional table keyed by
the observed input configurations only, plus a marginal fallback row for
configurations never seen during fitting. That sparse storage is what keeps
the network fittable when the full configuration space dwarfs the dataset.

Inference is exact. The joint factorizes as prod(priors) * prod(cpts), and
the cpt of a configuration outside the stored support is a constant (the
fallback row), so any marginalization splits into a sum over the stored
support plus a complement term whose prior mass factorizes per input. Both
parts are computed in closed form; no approximation is involved anywhere.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .discretize import DiscretizationScheme

MAX_MAP_STATES = 10_000_000


class InconsistentEvidenceError(ValueError):
    """Evidence with zero probability under the model."""


class StateSpaceTooLargeError(ValueError):
    """Exhaustive search asked for more joint states than the cap allows."""


class ModelFormatError(ValueError):
    """A persisted model file is malformed or inconsistent."""


@dataclass(frozen=True)
class BbnStructure:
    """Input and output node names; edges are the full bipartite set."""

    inputs: tuple[str, ...]
    outputs: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if not self.inputs or not self.outputs:
            raise ValueError("structure needs at least one input and one output")
        names = self.inputs + self.outputs
        if len(set(names)) != len(names):
            raise ValueError("node names must be unique")

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return tuple((i, o) for o in self.outputs for i in self.inputs)


@dataclass(frozen=True)
class Evidence:
    """Hard assignments plus soft (set-valued) restrictions, disjoint by name."""

    hard: dict[str, int] = field(default_factory=dict)
    soft: dict[str, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "hard", dict(self.hard))
        object.__setattr__(
            self, "soft", {k: tuple(dict.fromkeys(v)) for k, v in self.soft.items()}
        )
        overlap = set(self.hard) & set(self.soft)
        if overlap:
            raise ValueError(f"variables in both hard and soft evidence: {sorted(overlap)}")
        for name, bins in self.soft.items():
            if len(bins) == 0:
                raise ValueError(f"{name}: soft evidence needs at least one bin")

    @property
    def names(self) -> set[str]:
        return set(self.hard) | set(self.soft)


@dataclass(frozen=True)
class InferenceResult:
    posteriors: dict[str, np.ndarray]
    evidence_probability: float


@dataclass(frozen=True)
class NavigationResult:
    posteriors: dict[str, np.ndarray]
    recommended: dict[str, int]
    labels: dict[str, str]
    evidence_probability: float


@dataclass(frozen=True)
class MapResult:
    assignment: dict[str, int]
    probability: float


class BbnModel:
    """Fitted network: priors, sparse conditional tables, and the bin scheme."""

    def __init__(
        self,
        structure: BbnStructure,
        priors: Mapping[str, np.ndarray],
        support: np.ndarray,
        cpt: Mapping[str, np.ndarray],
        fallback: Mapping[str, np.ndarray],
        scheme: DiscretizationScheme,
        alpha: float,
        n_rows: int,
        metadata: Mapping[str, Any] | None = None,
    ):
        self.structure = structure
        self.priors = {k: np.asarray(v, dtype=float) for k, v in priors.items()}
        self.support = np.asarray(support, dtype=np.int64)
        self.cpt = {k: np.asarray(v, dtype=float) for k, v in cpt.items()}
        self.fallback = {k: np.asarray(v, dtype=float) for k, v in fallback.items()}
        self.scheme = scheme
        self.alpha = float(alpha)
        self.n_rows = int(n_rows)
        self.metadata = dict(metadata or {})
        self._support_index = {tuple(row): i for i, row in enumerate(self.support.tolist())}
        self._validate()

    def _validate(self) -> None:
        st = self.structure
        if set(self.priors) != set(st.inputs):
            raise ValueError("priors must cover exactly the input nodes")
        if set(self.cpt) != set(st.outputs) or set(self.fallback) != set(st.outputs):
            raise ValueError("cpts and fallbacks must cover exactly the output nodes")
        for name in st.inputs + st.outputs:
            if name not in self.scheme:
                raise ValueError(f"scheme has no bins for node {name}")
        if self.support.ndim != 2 or self.support.shape[1] != len(st.inputs):
            raise ValueError("support must be (n_configs, n_inputs)")
        for name in st.inputs:
            if self.priors[name].shape != (self.card(name),):
                raise ValueError(f"{name}: prior length differs from bin count")
        for name in st.outputs:
            if self.cpt[name].shape != (len(self.support), self.card(name)):
                raise ValueError(f"{name}: cpt shape mismatch")
            if self.fallback[name].shape != (self.card(name),):
                raise ValueError(f"{name}: fallback length differs from bin count")

    # -- basic lookups ------------------------------------------------------

    def card(self, name: str) -> int:
        return self.scheme.n_bins(name)

    def is_input(self, name: str) -> bool:
        return name in self.structure.inputs

    def is_output(self, name: str) -> bool:
        return name in self.structure.outputs

    def cpt_row(self, output: str, config: Sequence[int]) -> np.ndarray:
        """Stored conditional row for a full input configuration, or the fallback."""
        idx = self._support_index.get(tuple(int(c) for c in config))
        if idx is None:
            return self.fallback[output]
        return self.cpt[output][idx]

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "structure": {
                "inputs": list(self.structure.inputs),
                "outputs": list(self.structure.outputs),
            },
            "priors": {k: v.tolist() for k, v in self.priors.items()},
            "cpts": {
                out: {
                    "configurations": [
                        ",".join(str(c) for c in row) for row in self.support.tolist()
                    ],
                    "rows": self.cpt[out].tolist(),
                    "fallback": self.fallback[out].tolist(),
                }
                for out in self.structure.outputs
            },
            "scheme": self.scheme.to_dict(),
            "metadata": {
                **self.metadata,
                "alpha": self.alpha,
                "n_rows": self.n_rows,
            },
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "BbnModel":
        for key in ("structure", "priors", "cpts", "scheme", "metadata"):
            if key not in d:
                raise ModelFormatError(f"model file missing section {key!r}")
        try:
            structure = BbnStructure(
                inputs=tuple(d["structure"]["inputs"]),
                outputs=tuple(d["structure"]["outputs"]),
            )
            scheme = DiscretizationScheme.from_dict(d["scheme"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"malformed model file: {exc}") from exc
        cpts = d["cpts"]
        support: list[list[int]] | None = None
        cpt: dict[str, np.ndarray] = {}
        fallback: dict[str, np.ndarray] = {}
        for out in structure.outputs:
            if out not in cpts:
                raise ModelFormatError(f"model file missing cpt for node {out!r}")
            entry = cpts[out]
            configs = [
                [int(c) for c in key.split(",")] for key in entry["configurations"]
            ]
            if support is None:
                support = configs
            elif configs != support:
                raise ModelFormatError("cpt configuration keys differ between outputs")
            cpt[out] = np.array(entry["rows"], dtype=float)
            fallback[out] = np.array(entry["fallback"], dtype=float)
        meta = dict(d["metadata"])
        alpha = meta.pop("alpha", 0.0)
        n_rows = meta.pop("n_rows", 0)
        model = cls(
            structure=structure,
            priors={k: np.array(v, dtype=float) for k, v in d["priors"].items()},
            support=np.array(support if support else [], dtype=np.int64).reshape(
                len(support or []), len(structure.inputs)
            ),
            cpt=cpt,
            fallback=fallback,
            scheme=scheme,
            alpha=alpha,
            n_rows=n_rows,
            metadata=meta,
        )
        model.check_normalization()
        return model

    def check_normalization(self, tol: float = 1e-9) -> None:
        """Verify every stored probability vector sums to one."""
        for name, vec in self.priors.items():
            if abs(vec.sum() - 1.0) > tol:
                raise ModelFormatError(f"prior of node {name!r} sums to {vec.sum()!r}")
        for name in self.structure.outputs:
            sums = self.cpt[name].sum(axis=1) if len(self.cpt[name]) else np.array([])
            bad = np.nonzero(np.abs(sums - 1.0) > tol)[0]
            if bad.size:
                raise ModelFormatError(
                    f"cpt rows of node {name!r} do not sum to 1 (first bad row "
                    f"{int(bad[0])})"
                )
            if abs(self.fallback[name].sum() - 1.0) > tol:
                raise ModelFormatError(f"fallback of node {name!r} does not sum to 1")


def fit(
    input_bins: np.ndarray,
    output_bins: np.ndarray,
    structure: BbnStructure,
    scheme: DiscretizationScheme,
    alpha: float = 1.0,
    metadata: Mapping[str, Any] | None = None,
) -> BbnModel:
    """Fit priors and sparse conditional tables from binned rows.

    Counts are smoothed additively: probability (count + alpha) / (n + alpha*k).
    alpha 0 gives plain maximum likelihood; never-observed configurations are
    answered by the smoothed marginal fallback row.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    xb = np.asarray(input_bins, dtype=np.int64)
    yb = np.asarray(output_bins, dtype=np.int64)
    if xb.ndim != 2 or xb.shape[1] != len(structure.inputs):
        raise ValueError("input_bins must be (n_rows, n_inputs)")
    if yb.ndim != 2 or yb.shape[1] != len(structure.outputs):
        raise ValueError("output_bins must be (n_rows, n_outputs)")
    n = xb.shape[0]
    if n < 1 or yb.shape[0] != n:
        raise ValueError("need at least one row, with matching input/output lengths")
    cards_in = [scheme.n_bins(name) for name in structure.inputs]
    cards_out = [scheme.n_bins(name) for name in structure.outputs]
    for j, name in enumerate(structure.inputs):
        col = xb[:, j]
        if col.min() < 0 or col.max() >= cards_in[j]:
            raise ValueError(f"{name}: bin index outside 0..{cards_in[j] - 1}")
    for j, name in enumerate(structure.outputs):
        col = yb[:, j]
        if col.min() < 0 or col.max() >= cards_out[j]:
            raise ValueError(f"{name}: bin index outside 0..{cards_out[j] - 1}")

    priors = {}
    for j, name in enumerate(structure.inputs):
        counts = np.bincount(xb[:, j], minlength=cards_in[j]).astype(float)
        priors[name] = (counts + alpha) / (n + alpha * cards_in[j])

    support, inverse = np.unique(xb, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    config_counts = np.bincount(inverse, minlength=len(support)).astype(float)
    cpt = {}
    fallback = {}
    for j, name in enumerate(structure.outputs):
        k = cards_out[j]
        counts = np.zeros((len(support), k))
        np.add.at(counts, (inverse, yb[:, j]), 1.0)
        cpt[name] = (counts + alpha) / (config_counts[:, None] + alpha * k)
        marginal = np.bincount(yb[:, j], minlength=k).astype(float)
        fallback[name] = (marginal + alpha) / (n + alpha * k)

    return BbnModel(
        structure=structure,
        priors=priors,
        support=support,
        cpt=cpt,
        fallback=fallback,
        scheme=scheme,
        alpha=alpha,
        n_rows=n,
        metadata=metadata,
    )


def joint_probability(model: BbnModel, assignment: Mapping[str, int]) -> float:
    """Probability of one full assignment over all nodes."""
    st = model.structure
    missing = [n for n in st.inputs + st.outputs if n not in assignment]
    if missing:
        raise ValueError(f"assignment missing {missing}")
    config = [int(assignment[n]) for n in st.inputs]
    for name, b in assignment.items():
        if not (0 <= int(b) < model.card(name)):
            raise ValueError(f"{name}: bin {b} outside 0..{model.card(name) - 1}")
    p = 1.0
    for j, name in enumerate(st.inputs):
        p *= model.priors[name][config[j]]
    for name in st.outputs:
        p *= model.cpt_row(name, config)[int(assignment[name])]
    return float(p)


def _evidence_masks(model: BbnModel, evidence: Evidence) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Masked priors per input and 0/1 likelihood vectors per output."""
    st = model.structure
    for name in evidence.names:
        if not (model.is_input(name) or model.is_output(name)):
            raise ValueError(f"evidence names unknown variable {name!r}")
    for name, b in evidence.hard.items():
        if not (0 <= int(b) < model.card(name)):
            raise ValueError(f"{name}: bin {b} outside 0..{model.card(name) - 1}")
    for name, bins in evidence.soft.items():
        for b in bins:
            if not (0 <= int(b) < model.card(name)):
                raise ValueError(f"{name}: bin {b} outside 0..{model.card(name) - 1}")
    masked = []
    for name in st.inputs:
        w = model.priors[name].copy()
        if name in evidence.hard:
            keep = np.zeros_like(w)
            keep[evidence.hard[name]] = w[evidence.hard[name]]
            w = keep
        elif name in evidence.soft:
            keep = np.zeros_like(w)
            idx = list(evidence.soft[name])
            keep[idx] = w[idx]
            w = keep
        masked.append(w)
    likes = []
    for name in st.outputs:
        like = np.ones(model.card(name))
        if name in evidence.hard:
            like = np.zeros(model.card(name))
            like[evidence.hard[name]] = 1.0
        elif name in evidence.soft:
            like = np.zeros(model.card(name))
            like[list(evidence.soft[name])] = 1.0
        likes.append(like)
    return masked, likes


def infer(
    model: BbnModel,
    evidence: Evidence | None = None,
    query: Sequence[str] | None = None,
) -> InferenceResult:
    """Exact posterior marginals for the query variables, plus P(evidence).

    Soft evidence enters as an indicator likelihood over its admissible bins.
    Query variables default to everything not fixed by hard evidence.
    """
    evidence = evidence or Evidence()
    st = model.structure
    if query is None:
        query = [n for n in st.inputs + st.outputs if n not in evidence.hard]
    query = list(query)
    if not query:
        raise ValueError("query must name at least one variable")
    seen = set()
    for name in query:
        if not (model.is_input(name) or model.is_output(name)):
            raise ValueError(f"query names unknown variable {name!r}")
        if name in evidence.hard:
            raise ValueError(f"query variable {name!r} is fixed by hard evidence")
        if name in seen:
            raise ValueError(f"query repeats variable {name!r}")
        seen.add(name)

    masked, likes = _evidence_masks(model, evidence)
    n_in, n_out = len(st.inputs), len(st.outputs)
    support = model.support

    # per-support-config prior weight and per-output evidence likelihood
    if len(support):
        w_rows = np.ones(len(support))
        for j in range(n_in):
            w_rows *= masked[j][support[:, j]]
        like_rows = []  # per output: (S,) likelihood of that output's evidence
        masked_rows = []  # per output: (S, k) cpt row * indicator
        for j, out in enumerate(st.outputs):
            rows = model.cpt[out] * likes[j][None, :]
            masked_rows.append(rows)
            like_rows.append(rows.sum(axis=1))
    else:
        w_rows = np.zeros(0)
        like_rows = [np.zeros(0) for _ in st.outputs]
        masked_rows = [np.zeros((0, model.card(out))) for out in st.outputs]

    in_sums = np.array([m.sum() for m in masked])
    total_in = float(np.prod(in_sums))
    support_mass = float(w_rows.sum())
    complement_mass = max(total_in - support_mass, 0.0)

    fb_masked = [model.fallback[out] * likes[j] for j, out in enumerate(st.outputs)]
    fb_sums = np.array([v.sum() for v in fb_masked])
    like_fb = float(np.prod(fb_sums))

    like_all = np.ones(len(support))
    for j in range(n_out):
        like_all = like_all * like_rows[j]
    z = float((w_rows * like_all).sum() + complement_mass * like_fb)
    if z <= 0.0:
        raise InconsistentEvidenceError(
            "evidence has zero probability under the model"
        )

    # leave-one-out helpers
    def loo_input_total(j: int) -> float:
        others = np.delete(in_sums, j)
        return float(np.prod(others)) if others.size else 1.0

    def loo_output_like(j: int) -> np.ndarray:
        out = np.ones(len(support))
        for jj in range(n_out):
            if jj != j:
                out = out * like_rows[jj]
        return out

    def loo_fb(j: int) -> float:
        others = np.delete(fb_sums, j)
        return float(np.prod(others)) if others.size else 1.0

    posteriors: dict[str, np.ndarray] = {}
    for name in query:
        if model.is_input(name):
            j = st.inputs.index(name)
            k = model.card(name)
            sup = np.zeros(k)
            sup_w = np.zeros(k)
            if len(support):
                sup = np.bincount(
                    support[:, j], weights=w_rows * like_all, minlength=k
                )
                sup_w = np.bincount(support[:, j], weights=w_rows, minlength=k)
            comp_vec = np.clip(masked[j] * loo_input_total(j) - sup_w, 0.0, None)
            vec = sup + comp_vec * like_fb
        else:
            j = st.outputs.index(name)
            contrib = w_rows * loo_output_like(j)
            sup = contrib @ masked_rows[j] if len(support) else np.zeros(model.card(name))
            vec = sup + complement_mass * loo_fb(j) * fb_masked[j]
        s = vec.sum()
        if s <= 0.0:
            raise InconsistentEvidenceError(
                f"evidence leaves no probability mass for {name!r}"
            )
        posteriors[name] = vec / s
    return InferenceResult(posteriors=posteriors, evidence_probability=z)


def navigate(
    model: BbnModel,
    targets: Mapping[str, Sequence[int]],
    fixed: Mapping[str, int] | None = None,
) -> NavigationResult:
    """Backward query: condition outputs on target bins, read input posteriors.

    targets: admissible bin sets per output variable (soft evidence).
    fixed: hard bin assignments for inputs pinned by earlier decisions.
    Recommends the posterior argmax per free input, ties to the lower bin.
    """
    fixed = dict(fixed or {})
    if not targets:
        raise ValueError("targets must name at least one output variable")
    for name in targets:
        if not model.is_output(name):
            raise ValueError(f"target {name!r} is not an output variable")
    for name in fixed:
        if not model.is_input(name):
            raise ValueError(f"fixed variable {name!r} is not an input variable")
    evidence = Evidence(hard=fixed, soft={k: tuple(v) for k, v in targets.items()})
    free_inputs = [n for n in model.structure.inputs if n not in fixed]
    if not free_inputs:
        raise ValueError("every input is fixed; nothing to recommend")
    result = infer(model, evidence, query=free_inputs)
    recommended = {
        name: int(np.argmax(result.posteriors[name])) for name in free_inputs
    }
    labels = {
        name: model.scheme.label(name, b) for name, b in recommended.items()
    }
    return NavigationResult(
        posteriors=result.posteriors,
        recommended=recommended,
        labels=labels,
        evidence_probability=result.evidence_probability,
    )


def most_probable_configuration(
    model: BbnModel, evidence: Evidence | None = None
) -> MapResult:
    """Exhaustive argmax of the joint probability consistent with the evidence.

    Deterministic tie-break: the lexicographically first assignment (by bin
    index, variables in declaration order, inputs before outputs) wins.
    """
    evidence = evidence or Evidence()
    masked, likes = _evidence_masks(model, evidence)
    st = model.structure

    n_states = 1
    for j, name in enumerate(st.inputs):
        if name not in evidence.hard:
            n_states *= len(evidence.soft.get(name, range(model.card(name))))
    for j, name in enumerate(st.outputs):
        if name not in evidence.hard:
            n_states *= len(evidence.soft.get(name, range(model.card(name))))
    if n_states > MAX_MAP_STATES:
        raise StateSpaceTooLargeError(
            f"joint state count {n_states} exceeds the cap of {MAX_MAP_STATES}"
        )

    input_choices = []
    for j, name in enumerate(st.inputs):
        if name in evidence.hard:
            input_choices.append((evidence.hard[name],))
        elif name in evidence.soft:
            input_choices.append(tuple(sorted(evidence.soft[name])))
        else:
            input_choices.append(tuple(range(model.card(name))))
    out_allowed = []
    for j, name in enumerate(st.outputs):
        if name in evidence.hard:
            out_allowed.append((evidence.hard[name],))
        elif name in evidence.soft:
            out_allowed.append(tuple(sorted(evidence.soft[name])))
        else:
            out_allowed.append(tuple(range(model.card(name))))

    import itertools

    best_p = -1.0
    best_assignment: dict[str, int] | None = None
    for config in itertools.product(*input_choices):
        w = 1.0
        for j in range(len(st.inputs)):
            w *= model.priors[st.inputs[j]][config[j]]
        if w == 0.0 and best_p >= 0.0:
            continue
        p = w
        outs = []
        for j, name in enumerate(st.outputs):
            row = model.cpt_row(name, config)
            allowed = out_allowed[j]
            best_b = allowed[0]
            best_v = row[allowed[0]]
            for b in allowed[1:]:
                if row[b] > best_v:
                    best_b, best_v = b, row[b]
            outs.append(best_b)
            p *= best_v
        if p > best_p:
            best_p = p
            best_assignment = {
                **{st.inputs[j]: int(config[j]) for j in range(len(st.inputs))},
                **{st.outputs[j]: int(outs[j]) for j in range(len(st.outputs))},
            }
    assert best_assignment is not None
    return MapResult(assignment=best_assignment, probability=float(best_p))


def forward_rows(model: BbnModel, input_bins: np.ndarray) -> dict[str, np.ndarray]:
    """Conditional output distributions for many full input configurations.

    Returns, per output, an (n_rows, n_bins) matrix: the stored cpt row where
    the configuration was seen in fitting, the fallback row otherwise. This is
    what infer() returns under full hard input evidence; kept as a bulk path
    because validation sweeps call it once per dataset row.
    """
    xb = np.asarray(input_bins, dtype=np.int64)
    if xb.ndim != 2 or xb.shape[1] != len(model.structure.inputs):
        raise ValueError("input_bins must be (n_rows, n_inputs)")
    idx = np.array(
        [model._support_index.get(tuple(row), -1) for row in xb.tolist()],
        dtype=np.int64,
    )
    out = {}
    for name in model.structure.outputs:
        rows = np.where(
            (idx >= 0)[:, None],
            model.cpt[name][np.maximum(idx, 0)],
            model.fallback[name][None, :],
        )
        out[name] = rows
    return out


def save_model(model: BbnModel, path: str) -> None:
    """Write the model as one canonical JSON document."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_model(path: str) -> BbnModel:
    """Read and validate a model written by save_model."""
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    return BbnModel.from_dict(payload)
