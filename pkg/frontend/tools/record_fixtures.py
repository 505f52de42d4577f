"""Record service fixtures for the explorer test suite.

Trains a small but real model, serves it with the actual service app, and
captures request/response pairs verbatim. Rerun after any service change:

    python3 tools/record_fixtures.py

Requires the mapnav package (pip install -e ..) on the path.
"""
import json
import os
import tempfile

import numpy as np
from fastapi.testclient import TestClient

from mapnav import bbn
from mapnav.bbn import BbnModel, BbnStructure
from mapnav.discretize import ContinuousBins, DiscretizationScheme
from mapnav.pipeline import PipelineConfig, run_pipeline
from mapnav.service import create_app

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "test", "fixtures")

FIXTURE_CONFIG = dict(
    n_samples=400, top_k=4, bins_per_variable=5, folds=3, seed=0
)


def save(name: str, payload: dict) -> None:
    path = os.path.join(OUT, name)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"wrote {os.path.relpath(path, HERE)}")


def get(client: TestClient, path: str) -> dict:
    resp = client.get(path)
    return {"method": "GET", "path": path, "status": resp.status_code,
            "body": resp.json()}


def post(client: TestClient, path: str, request: dict, extra: dict | None = None) -> dict:
    resp = client.post(path, json=request)
    record = {"method": "POST", "path": path, "request": request,
              "status": resp.status_code, "body": resp.json()}
    if extra:
        record.update(extra)
    return record


def main() -> None:
    os.makedirs(OUT, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        result = run_pipeline(PipelineConfig(output_dir=tmp, **FIXTURE_CONFIG))
        model = result.model
        selected = list(model.structure.inputs)
        outputs = list(model.structure.outputs)
        print(f"fixture model inputs: {selected}, outputs: {outputs}")
        assert not any(n.startswith("dummy_") for n in selected)

        with TestClient(create_app(tmp)) as client:
            save("bins.json", get(client, "/bins"))
            save("sensitivity.json", get(client, "/sensitivity"))

            save("infer_no_pins.json", post(client, "/infer", {}))

            full_pins = {name: 1 for name in selected}
            save("infer_full_pins.json", post(
                client, "/infer", {"evidence": {"hard": full_pins}}
            ))

            # a session as the user would enter it: physical values, snapped
            entries = [
                {"variable": "Area_PV", "entry": 5.0},
                {"variable": "system_type", "entry": "heat_pump"},
            ]
            hard = {
                e["variable"]: model.scheme.to_bin(e["variable"], e["entry"])
                for e in entries
            }
            save("infer_partial.json", post(
                client, "/infer", {"evidence": {"hard": hard}},
                extra={"session": {"pins": entries}},
            ))

            save("infer_error.json", post(
                client, "/infer", {"evidence": {"hard": {"U_roof": 0}}}
            ))

            edges = model.scheme.bins("beng3").edges
            save("navigate_vacuous.json", post(
                client, "/navigate",
                {"targets": {"beng3": [edges[0], edges[-1]]}},
            ))

            save("navigate_target.json", post(
                client, "/navigate",
                {
                    "targets": {"beng3": [edges[3], edges[5]]},
                    "fixed": {e["variable"]: e["entry"] for e in entries},
                },
                extra={"session": {
                    "pins": entries,
                    "target": {"variable": "beng3",
                               "range": [edges[3], edges[5]]},
                }},
            ))

    # a model with a structurally impossible bin, for the infeasible banner
    with tempfile.TemporaryDirectory() as tmp:
        structure = BbnStructure(inputs=("a", "b"), outputs=("y",))
        scheme = DiscretizationScheme([
            ContinuousBins(name="a", edges=(0.0, 1.0, 2.0)),
            ContinuousBins(name="b", edges=(0.0, 1.0, 2.0)),
            ContinuousBins(name="y", edges=(0.0, 1.0, 2.0)),
        ])
        sparse = BbnModel(
            structure=structure,
            priors={"a": np.array([1.0, 0.0]), "b": np.array([0.5, 0.5])},
            support=np.array([[0, 0]]),
            cpt={"y": np.array([[1.0, 0.0]])},
            fallback={"y": np.array([0.5, 0.5])},
            scheme=scheme,
            alpha=0.0,
            n_rows=4,
        )
        bbn.save_model(sparse, os.path.join(tmp, "model.json"))
        with TestClient(create_app(tmp)) as client:
            save("navigate_infeasible.json", post(
                client, "/navigate",
                {"targets": {"y": [0.0, 2.0]}, "fixed": {"a": 1.5}},
            ))


if __name__ == "__main__":
    main()
