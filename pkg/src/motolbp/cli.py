"""Command-line front end.

Exit codes: 0 success, 1 runtime failure, 2 validation failure.
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
import tempfile
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import harness
from .ingest import (DatasetManifest, DecodeError, MeshSpec, POSITIVE, build_manifest, extract_frames,
                     frame_files, load_gray, read_manifest, resolve, save_gray, write_manifest)
from .lbp import LbpParams, lbp_feature, read_features, write_features
from .svm import (ConvergenceWarning, DimensionError, SvmScenario, load_model,
                  positive_score, predict, save_model, train, with_feature_params)

EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION = 0, 1, 2


class ValidationError(ValueError):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="run configuration JSON")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--out", type=Path, help="output file or directory")
    return p


def _lbp_flags(p):
    p.add_argument("--points", type=int, default=None, help="LBP neighbor count (default 24)")
    p.add_argument("--radius", type=float, default=None, help="LBP radius in pixels (default 3)")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="motolbp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[common], help="cut frames into mesh cells")
    p.add_argument("frames_dir", type=Path)
    p.add_argument("--cell-width", type=int, default=210)
    p.add_argument("--cell-height", type=int, default=120)
    p.add_argument("--rows", type=int, default=3)
    p.add_argument("--cols", type=int, default=8)
    p.add_argument("--origin-x", type=int, default=0)
    p.add_argument("--origin-y", type=int, default=0)

    p = sub.add_parser("manifest", parents=[common], help="index a two-class image directory")
    p.add_argument("root_dir", type=Path)
    p.add_argument("--positive", default=POSITIVE, help="name of the positive class directory")

    p = sub.add_parser("featurize", parents=[common], help="LBP histogram per manifest entry")
    p.add_argument("manifest", type=Path)
    _lbp_flags(p)

    sub.add_parser("sweep", parents=[common], help="run the scenario sweep from --config")

    p = sub.add_parser("train", parents=[common], help="train one model on a feature file")
    p.add_argument("features", type=Path)
    p.add_argument("--scenario", default="S0", help="table id (S0..S19) or a JSON object")

    p = sub.add_parser("evaluate", parents=[common], help="score a model on a labeled feature file")
    p.add_argument("model", type=Path)
    p.add_argument("features", type=Path)

    p = sub.add_parser("predict", parents=[common], help="label one image or feature row")
    p.add_argument("model", type=Path)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--image", type=Path)
    src.add_argument("--features", type=Path, help="feature CSV with sidecar; every row is scored")
    src.add_argument("--vector", help="comma-separated feature values")
    return parser


def _need(path: Path | None, what: str) -> Path:
    if path is None:
        raise ValidationError(f"{what} is required")
    if not path.exists():
        raise ValidationError(f"{what} not found: {path}")
    return path


def _lbp_from(args, config=None) -> LbpParams:
    base = config.lbp if config is not None else LbpParams()
    return LbpParams(args.points if args.points is not None else base.points,
                     args.radius if args.radius is not None else base.radius)


def _featurize(manifest_path: Path, manifest: DatasetManifest, params: LbpParams) -> np.ndarray:
    rows, failures = [], []
    for entry in manifest:
        try:
            rows.append(lbp_feature(load_gray(resolve(manifest_path, entry)), params))
        except DecodeError as exc:
            failures.extend(exc.failures)
    if failures:
        raise DecodeError(failures)
    return np.array(rows).reshape(len(rows), params.n_bins)


def cmd_extract(args) -> int:
    frames_dir = _need(args.frames_dir, "frames directory")
    out = args.out or Path("cells")
    spec = MeshSpec(args.cell_width, args.cell_height, args.rows, args.cols, args.origin_x, args.origin_y)
    files = frame_files(frames_dir)
    if not files:
        raise ValidationError(f"no PNG/JPEG frames in {frames_dir}")
    frames = [(f.stem, load_gray(f)) for f in files]
    for _, frame in frames:
        spec.check_fits(frame.shape[1], frame.shape[0])
    out.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".extract-", dir=out))
    try:
        cells = extract_frames(frames, spec)
        for entry, cell in cells:
            save_gray(staging / entry.path, cell)
        manifest = DatasetManifest([e for e, _ in cells], mesh=spec)
        write_manifest(manifest, staging / "manifest.csv")
        for item in sorted(staging.iterdir()):
            item.replace(out / item.name)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    print(f"wrote {len(cells)} cells from {len(frames)} frames to {out}")
    return EXIT_OK


def cmd_manifest(args) -> int:
    root = _need(args.root_dir, "dataset directory")
    manifest = build_manifest(root, positive=args.positive)
    out = args.out or root / "manifest.csv"
    if out.is_dir():
        out = out / "manifest.csv"
    # entry paths are stored relative to wherever the manifest itself lives
    base = os.path.relpath(root.resolve(), out.resolve().parent)
    if base != ".":
        manifest = DatasetManifest([replace(e, path=Path(base, e.path).as_posix()) for e in manifest],
                                   mesh=manifest.mesh)
    write_manifest(manifest, out)
    print(f"{len(manifest)} entries ({manifest.count(POSITIVE)} positive) -> {out}")
    return EXIT_OK


def cmd_featurize(args) -> int:
    manifest_path = _need(args.manifest, "manifest")
    manifest = read_manifest(manifest_path)
    if len(manifest) == 0:
        raise ValidationError("manifest has no entries")
    config = harness.load_config(args.config) if args.config else None
    params = _lbp_from(args, config)
    out = args.out or manifest_path.with_name("features.csv")
    if out.is_dir():
        out = out / "features.csv"
    X = _featurize(manifest_path, manifest, params)
    write_features(out, [e.label or "" for e in manifest], X, params)
    print(f"{X.shape[0]} rows x {X.shape[1]} features -> {out}")
    return EXIT_OK


def _sweep_inputs(config: harness.RunConfig):
    if config.features:
        labels, X, params = read_features(_need(Path(config.features), "features file"))
        if params != config.lbp:
            raise ValidationError(f"feature file parameters {params} differ from config lbp {config.lbp}")
        return labels, X
    manifest_path = _need(Path(config.manifest) if config.manifest else None, "config 'features' or 'manifest'")
    manifest = read_manifest(manifest_path)
    return manifest.labels, _featurize(manifest_path, manifest, config.lbp)


def cmd_sweep(args) -> int:
    config = harness.load_config(_need(args.config, "--config"))
    if args.seed is not None:
        config.master_seed = args.seed
    out = args.out or Path("sweep_out")
    labels, X = _sweep_inputs(config)
    samples = harness.build_samples(labels, X, config.samples, config.master_seed, config.per_class_size,
                                    config.train_per_class, config.test_per_class)
    report = harness.run_sweep(samples, config.scenarios, config.scenario_names)
    report.write(out, config.master_seed, config.to_dict())
    print(f"{len(report.records)} records -> {out}; best scenario {report.best_scenario()}")
    return EXIT_OK


def _parse_scenario(text: str) -> SvmScenario:
    if text.lstrip().startswith("{"):
        return SvmScenario(**json.loads(text))
    scenarios, _ = harness.parse_scenarios([text])
    return scenarios[0]


def cmd_train(args) -> int:
    labels, X, params = read_features(_need(args.features, "features file"))
    scenario = _parse_scenario(args.scenario)
    if args.seed is not None:
        scenario = SvmScenario(**{**scenario.to_dict(), "random_state": args.seed})
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        model = train(X, np.array(labels, dtype=object), scenario,
                      classes=("negative", "positive") if set(labels) <= {"negative", "positive"} else None)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    model = with_feature_params(model, params.sidecar())
    out = args.out or args.features.with_name("model.json")
    save_model(model, out)
    d = model.diagnostics
    print(f"model -> {out} (iterations {d['iterations']}, converged {d['converged']}, "
          f"objective {d['final_objective']:.6g})")
    return EXIT_OK


def _check_params(model, params: LbpParams):
    recorded = model.feature_params
    if recorded is not None and LbpParams.from_sidecar(recorded) != params:
        raise DimensionError(f"feature parameters {params.sidecar()} differ from the model's {recorded}")


def cmd_evaluate(args) -> int:
    model = load_model(_need(args.model, "model file"))
    labels, X, params = read_features(_need(args.features, "features file"))
    _check_params(model, params)
    rec = harness.evaluate_model(model, X, labels)
    row = {"scenario_id": "model", "sample_id": "", **rec}
    text = harness.rows_to_csv([row], harness.RECORD_FIELDS)
    if args.out:
        out = args.out / "metrics.csv" if args.out.is_dir() else args.out
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(_need(args.model, "model file"))
    if args.image is not None:
        if model.feature_params is None:
            raise ValidationError("model records no LBP parameters; cannot featurize an image")
        params = LbpParams.from_sidecar(model.feature_params)
        X = lbp_feature(load_gray(_need(args.image, "image")), params)[None, :]
    elif args.features is not None:
        _, X, params = read_features(_need(args.features, "features file"))
        _check_params(model, params)
    else:
        X = np.array([[float(v) for v in args.vector.split(",")]])
    if X.shape[1] != model.n_features:
        raise DimensionError(f"input has {X.shape[1]} features, model expects {model.n_features}")
    labels = predict(model, X)
    scores = positive_score(model, X)
    for lab, s in zip(labels, np.atleast_1d(scores)):
        print(f"{lab} {s:.6g}")
    return EXIT_OK


COMMANDS = {"extract": cmd_extract, "manifest": cmd_manifest, "featurize": cmd_featurize,
            "sweep": cmd_sweep, "train": cmd_train, "evaluate": cmd_evaluate, "predict": cmd_predict}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, IndexError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # runtime failures, including SweepError and DecodeError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
