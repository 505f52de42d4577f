"""HTTP access to a trained model: inspection, inference, navigation.

The request handlers are plain functions over plain dicts so the command
line and the HTTP service share one code path and produce identical JSON.
The FastAPI app is a thin adapter: it parses the body, delegates, and maps
ValueError to a structured 400 and inconsistent evidence to a structured 409.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Any, Mapping

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response

from . import bbn
from .discretize import CategoricalBins, ContinuousBins


def dumps_canonical(payload: Any) -> str:
    """The one serialization used for every response body."""
    return json.dumps(payload, sort_keys=True, indent=1) + "\n"


class RequestError(ValueError):
    """Malformed or unsatisfiable request; carries an error code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _require_mapping(value: Any, what: str) -> Mapping:
    if not isinstance(value, Mapping):
        raise RequestError("malformed", f"{what} must be a JSON object")
    return value


def _optional_mapping(parent: Mapping, key: str) -> Mapping:
    value = parent.get(key)
    return _require_mapping({} if value is None else value, key)


def _as_bin(value: Any, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise RequestError("malformed", f"{what} must be an integer bin index")
    return value


def handle_infer(model: bbn.BbnModel, payload: Mapping) -> dict:
    """Posterior marginals for a bin-level evidence specification.

    payload: {"evidence": {"hard": {var: bin}, "soft": {var: [bins]}},
              "query": [names]}. All parts optional; query defaults to every
    variable not fixed by hard evidence.
    """
    payload = _require_mapping(payload, "request body")
    unknown = set(payload) - {"evidence", "query"}
    if unknown:
        raise RequestError("malformed", f"unknown request keys: {sorted(unknown)}")
    ev_spec = _optional_mapping(payload, "evidence")
    unknown = set(ev_spec) - {"hard", "soft"}
    if unknown:
        raise RequestError("malformed", f"unknown evidence keys: {sorted(unknown)}")
    hard_raw = _optional_mapping(ev_spec, "hard")
    soft_raw = _optional_mapping(ev_spec, "soft")
    hard = {str(k): _as_bin(v, f"evidence.hard[{k!r}]") for k, v in hard_raw.items()}
    soft = {}
    for k, v in soft_raw.items():
        if not isinstance(v, (list, tuple)) or not v:
            raise RequestError(
                "malformed", f"evidence.soft[{k!r}] must be a non-empty list of bins"
            )
        soft[str(k)] = tuple(_as_bin(b, f"evidence.soft[{k!r}]") for b in v)
    query = payload.get("query")
    if query is not None:
        if not isinstance(query, (list, tuple)) or not all(
            isinstance(q, str) for q in query
        ):
            raise RequestError("malformed", "query must be a list of variable names")
        query = list(query)
    try:
        evidence = bbn.Evidence(hard=hard, soft=soft)
        result = bbn.infer(model, evidence, query=query)
    except bbn.InconsistentEvidenceError:
        raise
    except ValueError as exc:
        raise RequestError("invalid_request", str(exc)) from exc
    return {
        "posteriors": {k: v.tolist() for k, v in result.posteriors.items()},
        "evidence_probability": result.evidence_probability,
    }


def _resolve_target_bins(model: bbn.BbnModel, name: str, rng: Any) -> list[int]:
    if not model.is_output(name):
        raise RequestError("invalid_request", f"target {name!r} is not an output variable")
    b = model.scheme.bins(name)
    if not isinstance(b, ContinuousBins):
        raise RequestError("invalid_request", f"target {name!r} has no numeric range")
    if (
        not isinstance(rng, (list, tuple))
        or len(rng) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in rng)
    ):
        raise RequestError(
            "malformed", f"target {name!r} must be a [low, high] number pair"
        )
    lo, hi = float(rng[0]), float(rng[1])
    if hi < lo:
        raise RequestError("malformed", f"target {name!r}: low must not exceed high")
    bins = b.bins_intersecting(lo, hi)
    if not bins:
        raise RequestError(
            "invalid_request",
            f"target range [{lo}, {hi}] for {name!r} lies outside the modeled span "
            f"[{b.edges[0]}, {b.edges[-1]}]",
        )
    return bins


def _resolve_fixed_bin(model: bbn.BbnModel, name: str, value: Any) -> int:
    if not model.is_input(name):
        raise RequestError("invalid_request", f"fixed variable {name!r} is not an input")
    b = model.scheme.bins(name)
    if isinstance(b, CategoricalBins):
        try:
            return b.to_bin(value)
        except ValueError as exc:
            raise RequestError("invalid_request", str(exc)) from exc
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise RequestError("malformed", f"fixed value for {name!r} must be a number")
    if b.out_of_range(value):
        raise RequestError(
            "invalid_request",
            f"fixed value {value} for {name!r} lies outside the modeled span "
            f"[{b.edges[0]}, {b.edges[-1]}]",
        )
    return b.to_bin(value)


def handle_navigate(model: bbn.BbnModel, payload: Mapping) -> dict:
    """Backward navigation from physical target ranges to input settings.

    payload: {"targets": {output: [low, high]}, "fixed": {input: value}}.
    Ranges and fixed values are physical; ranges resolve to every bin whose
    interval intersects them, fixed values to their containing bin.
    """
    payload = _require_mapping(payload, "request body")
    unknown = set(payload) - {"targets", "fixed"}
    if unknown:
        raise RequestError("malformed", f"unknown request keys: {sorted(unknown)}")
    targets_raw = _optional_mapping(payload, "targets")
    if not targets_raw:
        raise RequestError("malformed", "targets must name at least one output")
    fixed_raw = _optional_mapping(payload, "fixed")
    targets = {
        str(k): _resolve_target_bins(model, str(k), v) for k, v in targets_raw.items()
    }
    fixed = {str(k): _resolve_fixed_bin(model, str(k), v) for k, v in fixed_raw.items()}
    try:
        result = bbn.navigate(model, targets=targets, fixed=fixed)
    except bbn.InconsistentEvidenceError:
        raise
    except ValueError as exc:
        raise RequestError("invalid_request", str(exc)) from exc
    return {
        "posteriors": {k: v.tolist() for k, v in result.posteriors.items()},
        "recommendations": {
            name: {"bin": b, "range_label": result.labels[name]}
            for name, b in result.recommended.items()
        },
        "targets_resolved": {k: list(v) for k, v in targets.items()},
        "evidence_probability": result.evidence_probability,
    }


def model_summary(model: bbn.BbnModel) -> dict:
    return model.to_dict()


def bins_summary(model: bbn.BbnModel) -> dict:
    return model.scheme.to_dict()


@dataclass
class ServiceState:
    model: bbn.BbnModel
    sensitivity: dict | None


def load_state(artifact_dir: str) -> ServiceState:
    model_path = os.path.join(artifact_dir, "model.json")
    if not os.path.exists(model_path):
        raise FileNotFoundError(f"no model.json under {artifact_dir}")
    model = bbn.load_model(model_path)
    sens_path = os.path.join(artifact_dir, "sensitivity.json")
    sens = None
    if os.path.exists(sens_path):
        with open(sens_path, encoding="utf-8") as fh:
            sens = json.load(fh)
    return ServiceState(model=model, sensitivity=sens)


def create_app(artifact_dir: str) -> FastAPI:
    """Build the FastAPI app serving one trained model directory."""
    state = load_state(artifact_dir)
    app = FastAPI(title="design space navigator", docs_url=None, redoc_url=None)
    # The explorer UI is typically served from a separate static server.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["content-type"],
    )

    def respond(payload: Any, status: int = 200) -> Response:
        return Response(
            content=dumps_canonical(payload),
            status_code=status,
            media_type="application/json",
        )

    def error(status: int, code: str, message: str) -> Response:
        return respond({"error": {"code": code, "message": message}}, status)

    @app.exception_handler(RequestError)
    async def on_request_error(_req: Request, exc: RequestError):
        return error(400, exc.code, str(exc))

    @app.exception_handler(bbn.InconsistentEvidenceError)
    async def on_inconsistent(_req: Request, exc: bbn.InconsistentEvidenceError):
        return error(409, "inconsistent_evidence", str(exc))

    @app.get("/model")
    async def get_model():
        return respond(model_summary(state.model))

    @app.get("/bins")
    async def get_bins():
        return respond(bins_summary(state.model))

    @app.get("/sensitivity")
    async def get_sensitivity():
        if state.sensitivity is None:
            return error(404, "not_found", "no sensitivity report in this artifact set")
        return respond(state.sensitivity)

    @app.post("/infer")
    async def post_infer(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return error(400, "malformed", "request body is not valid JSON")
        return respond(handle_infer(state.model, payload))

    @app.post("/navigate")
    async def post_navigate(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return error(400, "malformed", "request body is not valid JSON")
        return respond(handle_navigate(state.model, payload))

    return app
