"""Command line interface: every pipeline step standalone, plus serving.

Subcommands that answer model queries (infer, navigate) print exactly the
JSON the HTTP service would return for the same request, byte for byte.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bbn, linear, sensitivity, service, sobol, validation
from .data import Dataset
from .discretize import DiscretizationScheme
from .pipeline import PipelineConfig, config_hash, run_pipeline
from .service import dumps_canonical, handle_infer, handle_navigate
from .simulator import get_simulator


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    if getattr(args, "config", None):
        cfg = PipelineConfig.from_file(args.config)
    else:
        cfg = PipelineConfig()
    overrides = {}
    for attr, key in [
        ("n_samples", "n_samples"),
        ("seed", "seed"),
        ("out", "output_dir"),
        ("bins", "bins_per_variable"),
        ("top_k", "top_k"),
        ("alpha", "alpha"),
        ("folds", "folds"),
        ("simulator", "simulator"),
        ("sensitivity_base", "sensitivity_base"),
    ]:
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides)
    return cfg


def _load_json_arg(text: str):
    """Parse an inline JSON argument, or @path to read it from a file."""
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            return json.load(fh)
    return json.loads(text)


def _selected_names(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        report = json.load(fh)
    return list(report["selected"])


def cmd_sample(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    model = get_simulator(cfg.simulator)
    plan = sobol.SamplePlan(space=model.space, n_samples=cfg.n_samples)
    ds = Dataset(
        space=model.space,
        decisions=sobol.sample(plan),
        metadata={"config_hash": config_hash(cfg), "simulator": cfg.simulator},
    )
    ds.to_jsonl(args.out_file)
    print(f"wrote {ds.n_rows} samples to {args.out_file}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    ds = Dataset.from_jsonl(args.data)
    name = args.simulator or ds.metadata.get("simulator")
    if not name:
        print("error: dataset names no simulator; pass --simulator", file=sys.stderr)
        return 2
    model = get_simulator(name)
    ds = ds.with_outputs(model.evaluate_batch(ds.decisions))
    ds.to_jsonl(args.out_file)
    print(f"wrote {ds.n_rows} simulated rows to {args.out_file}")
    return 0


def cmd_sensitivity(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    model = get_simulator(cfg.simulator)
    space = model.space
    plan = sensitivity.saltelli_matrices(space.dimension, cfg.sensitivity_base)
    rows = [space.denormalize(u) for u in plan.points]
    outputs = model.evaluate_batch(rows)
    yy = np.array([[r[n] for n in space.performance_names] for r in outputs])
    indices = sensitivity.estimate_indices(plan, yy)
    report = sensitivity.select_top_k(
        indices, space.decision_names, cfg.top_k, space.performance_names
    )
    with open(args.out_file, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(report.to_dict()))
    print(f"selected {list(report.selected)}")
    print(f"wrote screening report to {args.out_file}")
    return 0


def cmd_bin(args: argparse.Namespace) -> int:
    ds = Dataset.from_jsonl(args.data)
    names = args.variables or list(ds.space.decision_names) + list(
        ds.space.performance_names
    )
    specs = [ds.space.spec(n) for n in names]
    scheme = DiscretizationScheme.fit(specs, ds.columns(names), n_bins=args.bins or 5)
    with open(args.out_file, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(scheme.to_dict()))
    print(f"wrote bins for {len(names)} variables to {args.out_file}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    ds = Dataset.from_jsonl(args.data)
    selected = _selected_names(args.sensitivity)
    out_names = list(ds.space.performance_names)
    specs = [ds.space.spec(n) for n in selected + out_names]
    columns = ds.columns(selected + out_names)
    scheme = DiscretizationScheme.fit(specs, columns, n_bins=cfg.bins_per_variable)
    xb = np.column_stack([scheme.bin_column(n, columns[n]) for n in selected])
    yb = np.column_stack([scheme.bin_column(n, columns[n]) for n in out_names])
    structure = bbn.BbnStructure(inputs=tuple(selected), outputs=tuple(out_names))
    model = bbn.fit(
        xb, yb, structure, scheme, alpha=cfg.alpha,
        metadata={"simulator": ds.metadata.get("simulator", "")},
    )
    bbn.save_model(model, args.out_file)
    print(f"trained on {ds.n_rows} rows; wrote model to {args.out_file}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    ds = Dataset.from_jsonl(args.data)
    selected = _selected_names(args.sensitivity)
    out_names = list(ds.space.performance_names)
    report = validation.cross_validate(
        [ds.space.spec(n) for n in selected],
        [ds.space.spec(n) for n in out_names],
        ds.columns(selected),
        ds.columns(out_names),
        n_bins=cfg.bins_per_variable,
        n_folds=cfg.folds,
        seed=cfg.seed,
        alpha=cfg.alpha,
    )
    if args.out_file:
        with open(args.out_file, "w", encoding="utf-8") as fh:
            fh.write(dumps_canonical(report.to_dict()))
    print(report.to_text())
    return 0


def cmd_infer(args: argparse.Namespace) -> int:
    model = bbn.load_model(args.model)
    payload = _load_json_arg(args.request)
    sys.stdout.write(dumps_canonical(handle_infer(model, payload)))
    return 0


def cmd_navigate(args: argparse.Namespace) -> int:
    model = bbn.load_model(args.model)
    payload = _load_json_arg(args.request)
    sys.stdout.write(dumps_canonical(handle_navigate(model, payload)))
    return 0


def cmd_navigate_linear(args: argparse.Namespace) -> int:
    sim = get_simulator(args.simulator)
    space = sim.space
    func, cat = linear.simulator_function(sim)
    if args.at:
        point = _load_json_arg(args.at)
        space.check_decision(point)
        x0 = np.array(space.normalize(point))
    else:
        x0 = np.full(space.dimension, 0.5)
    deltas = _load_json_arg(args.delta)
    out_names = space.performance_names
    unknown = set(deltas) - set(out_names)
    if unknown:
        print(f"error: unknown outputs {sorted(unknown)}", file=sys.stderr)
        return 2
    delta_vec = np.array([float(deltas.get(n, 0.0)) for n in out_names])
    jac = linear.estimate_jacobian(func, x0, categorical=cat)
    step = linear.navigate_linear(jac, delta_vec)
    proposal = space.denormalize(step.x_new)
    payload = {
        "proposal": proposal,
        "clamped": step.clamped,
        "degenerate": step.degenerate,
        "rank": step.rank,
        "categorical_held": [space.decision_names[i] for i in jac.zero_columns],
    }
    sys.stdout.write(dumps_canonical(payload))
    return 0


def cmd_pipeline(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    result = run_pipeline(cfg)
    print(f"configuration hash {result.config_digest}")
    for step, path in result.artifacts.items():
        print(f"  {step}: {path}")
    print(result.report.to_text())
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    app = service.create_app(args.artifacts)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mapnav",
        description="map a design space, train a navigable model, serve it",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="pipeline configuration JSON file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--n-samples", dest="n_samples", type=int, default=None)
        p.add_argument("--bins", type=int, default=None)
        p.add_argument("--top-k", dest="top_k", type=int, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--folds", type=int, default=None)
        p.add_argument("--simulator", default=None)
        p.add_argument(
            "--sensitivity-base", dest="sensitivity_base", type=int, default=None
        )

    p = sub.add_parser("sample", help="draw low-discrepancy decision samples")
    add_config_args(p)
    p.add_argument("--out", dest="out_file", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("simulate", help="evaluate sampled decisions")
    p.add_argument("--data", required=True, help="samples file")
    p.add_argument("--simulator", default=None)
    p.add_argument("--out", dest="out_file", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sensitivity", help="screen inputs by influence")
    add_config_args(p)
    p.add_argument("--out", dest="out_file", required=True)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("bin", help="fit bins over a simulated dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--bins", type=int, default=None)
    p.add_argument("--variables", nargs="*", default=None)
    p.add_argument("--out", dest="out_file", required=True)
    p.set_defaults(func=cmd_bin)

    p = sub.add_parser("train", help="fit the network on a simulated dataset")
    add_config_args(p)
    p.add_argument("--data", required=True)
    p.add_argument("--sensitivity", required=True, help="screening report file")
    p.add_argument("--out", dest="out_file", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("validate", help="cross-validate the network fit")
    add_config_args(p)
    p.add_argument("--data", required=True)
    p.add_argument("--sensitivity", required=True)
    p.add_argument("--out", dest="out_file", default=None)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("infer", help="posterior marginals for bin-level evidence")
    p.add_argument("--model", required=True)
    p.add_argument("--request", required=True, help="JSON body, or @file")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("navigate", help="inputs that reach physical target ranges")
    p.add_argument("--model", required=True)
    p.add_argument("--request", required=True, help="JSON body, or @file")
    p.set_defaults(func=cmd_navigate)

    p = sub.add_parser(
        "navigate-linear", help="local pseudo-inverse step toward output changes"
    )
    p.add_argument("--simulator", default="synthetic-energy")
    p.add_argument("--at", default=None, help="base decision point JSON, or @file")
    p.add_argument("--delta", required=True, help="output changes JSON, or @file")
    p.set_defaults(func=cmd_navigate_linear)

    p = sub.add_parser("pipeline", help="run all steps and persist artifacts")
    add_config_args(p)
    p.add_argument("--out", dest="out", default=None, help="artifact directory")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("serve", help="serve a trained artifact directory over HTTP")
    p.add_argument("--artifacts", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except bbn.InconsistentEvidenceError as exc:
        sys.stderr.write(
            dumps_canonical({"error": {"code": "inconsistent_evidence", "message": str(exc)}})
        )
        return 1
    except service.RequestError as exc:
        sys.stderr.write(
            dumps_canonical({"error": {"code": exc.code, "message": str(exc)}})
        )
        return 1
    except (ValueError, FileNotFoundError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
