"""Bootstrap samples, stratified splits and the 20-scenario sweep.

All randomness comes from one master seed. Per-purpose seeds are derived
with ``numpy.random.SeedSequence(master_seed, spawn_key=(purpose, sample_id))``
where ``purpose`` is 1 for sampling, 2 for splitting and 3 for the solver's
coordinate shuffle. The solver seed does not depend on the scenario, so
scenarios that differ only in the ``dual`` flag run the identical solver.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .ingest import DatasetManifest, InvalidInputError, NEGATIVE, POSITIVE
from .lbp import LbpParams
from .metrics import metrics_record
from .svm import ConvergenceWarning, SvmScenario, positive_score, predict, train

SEED_SAMPLE, SEED_SPLIT, SEED_SOLVER = 1, 2, 3

RECORD_FIELDS = ("scenario_id", "sample_id", "tp", "fp", "fn", "tn", "tpr", "fpr", "tnr",
                 "precision", "accuracy", "auc")
RATE_FIELDS = ("tpr", "fpr", "tnr", "precision", "accuracy", "auc")


class SweepError(RuntimeError):
    def __init__(self, scenario_id, sample_id, cause):
        self.scenario_id, self.sample_id = scenario_id, sample_id
        super().__init__(f"training failed for scenario {scenario_id}, sample {sample_id}: {cause}")


def derive_seed(master_seed: int, purpose: int, sample_id: int) -> int:
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(purpose), int(sample_id)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def scenario_table() -> list[SvmScenario]:
    """The twenty calibration scenarios S0..S19 in table order."""
    variants = [
        {},
        {"multi_class": "crammer_singer"},
        {"loss": "hinge"},
        {"dual": False},
        {"penalty": "l1", "dual": False},
    ]
    return [SvmScenario(C=C, tol=tol, **v)
            for tol in (1e-4, 1e-2)
            for C in (1.0, 150.0)
            for v in variants]


@dataclass(frozen=True)
class SampleSpec:
    sample_id: int = 1
    per_class_size: int = 721
    train_per_class: int = 505
    test_per_class: int = 216
    seed: int = 0

    def __post_init__(self):
        if self.per_class_size <= 0:
            raise InvalidInputError("per_class_size must be positive")
        if self.train_per_class < 1 or self.test_per_class < 1:
            raise InvalidInputError("train and test sizes must be positive")
        if self.train_per_class + self.test_per_class != self.per_class_size:
            raise InvalidInputError("train_per_class + test_per_class must equal per_class_size")


def _pool_labels(pool) -> list:
    return pool.labels if isinstance(pool, DatasetManifest) else list(pool)


def draw_sample(pool, spec: SampleSpec) -> np.ndarray:
    """Indices into ``pool`` (a manifest or a label sequence) for one balanced sample.

    Positives come first: all of them, in pool order, when the pool holds
    exactly ``per_class_size``; otherwise a uniform draw without
    replacement. Negatives are drawn uniformly with replacement.
    """
    labels = _pool_labels(pool)
    pos = np.flatnonzero([lab == POSITIVE for lab in labels])
    neg = np.flatnonzero([lab == NEGATIVE for lab in labels])
    if neg.size == 0:
        raise InvalidInputError("negative pool is empty")
    if pos.size < spec.per_class_size:
        raise InvalidInputError(f"positive pool has {pos.size} entries, need {spec.per_class_size}")
    rng = np.random.default_rng(derive_seed(spec.seed, SEED_SAMPLE, spec.sample_id))
    if pos.size == spec.per_class_size:
        chosen_pos = pos
    else:
        chosen_pos = np.sort(rng.choice(pos, size=spec.per_class_size, replace=False))
    chosen_neg = rng.choice(neg, size=spec.per_class_size, replace=True)
    return np.concatenate([chosen_pos, chosen_neg])


def split(sample_labels: Sequence, spec: SampleSpec) -> tuple[np.ndarray, np.ndarray]:
    """Stratified train/test positions into a sample."""
    labels = list(sample_labels)
    train_parts, test_parts = [], []
    rng = np.random.default_rng(derive_seed(spec.seed, SEED_SPLIT, spec.sample_id))
    for cls in (POSITIVE, NEGATIVE):
        positions = np.flatnonzero([lab == cls for lab in labels])
        if positions.size != spec.per_class_size:
            raise InvalidInputError(f"sample holds {positions.size} {cls} entries, expected {spec.per_class_size}")
        perm = rng.permutation(positions)
        train_parts.append(np.sort(perm[:spec.train_per_class]))
        test_parts.append(np.sort(perm[spec.train_per_class:]))
    return np.concatenate(train_parts), np.concatenate(test_parts)


@dataclass
class SampleData:
    sample_id: int
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    solver_seed: int | None = None
    pool_index: np.ndarray | None = None


def build_samples(labels: Sequence, X, n_samples: int = 5, master_seed: int = 0,
                  per_class_size: int = 721, train_per_class: int = 505,
                  test_per_class: int = 216) -> list[SampleData]:
    """Draw and split ``n_samples`` samples from a labeled feature pool."""
    X = np.asarray(X, dtype=np.float64)
    labels = list(labels)
    if len(labels) != X.shape[0]:
        raise InvalidInputError("labels and features differ in length")
    out = []
    for sid in range(1, n_samples + 1):
        spec = SampleSpec(sid, per_class_size, train_per_class, test_per_class, master_seed)
        idx = draw_sample(labels, spec)
        sample_labels = [labels[i] for i in idx]
        tr, te = split(sample_labels, spec)
        y = np.array(sample_labels, dtype=object)
        out.append(SampleData(sid, X[idx[tr]], y[tr], X[idx[te]], y[te],
                              derive_seed(master_seed, SEED_SOLVER, sid), idx))
    return out


def scenario_ids(scenarios: Sequence[SvmScenario]) -> list[str]:
    return [f"S{i}" for i in range(len(scenarios))]


@dataclass
class SweepReport:
    records: list[dict]
    scenario_ids: list[str]
    scenarios: list[SvmScenario]
    sample_ids: list[int]
    non_converged: list[tuple[str, int]] = field(default_factory=list)

    def __post_init__(self):
        self.records.sort(key=lambda r: (self.scenario_ids.index(r["scenario_id"]), r["sample_id"]))

    def record(self, scenario_id, sample_id) -> dict:
        for r in self.records:
            if r["scenario_id"] == scenario_id and r["sample_id"] == sample_id:
                return r
        raise KeyError((scenario_id, sample_id))

    def scenario_means(self) -> dict[str, dict]:
        out = {}
        for sid in self.scenario_ids:
            rows = [r for r in self.records if r["scenario_id"] == sid]
            out[sid] = {k: float(np.mean([r[k] for r in rows])) for k in RATE_FIELDS}
        return out

    def sample_auc_extremes(self) -> dict[int, tuple[float, float]]:
        out = {}
        for s in self.sample_ids:
            aucs = [r["auc"] for r in self.records if r["sample_id"] == s]
            out[s] = (max(aucs), min(aucs))
        return out

    def table3_rows(self) -> list[dict]:
        means = self.scenario_means()
        return [{"scenario_id": sid, "C": sc.C, "tol": sc.tol, "tpr": means[sid]["tpr"], "fpr": means[sid]["fpr"]}
                for sid, sc in zip(self.scenario_ids, self.scenarios)]

    def table4_rows(self) -> list[dict]:
        means = self.scenario_means()
        rows = []
        for sid in self.scenario_ids:
            row = {"scenario_id": sid}
            for s in self.sample_ids:
                row[f"auc_sample_{s}"] = self.record(sid, s)["auc"]
            row["mean_auc"] = means[sid]["auc"]
            for k in ("tpr", "fpr", "precision", "accuracy", "tnr"):
                row[k] = means[sid][k]
            rows.append(row)
        return rows

    def best_scenario(self) -> str:
        means = self.scenario_means()
        rows = [{"scenario_id": sid, "mean_auc": means[sid]["auc"], "fpr": means[sid]["fpr"]}
                for sid in self.scenario_ids]
        return select_best(rows)

    def write(self, out_dir, master_seed: int | None = None, config: dict | None = None) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_text(out / "records.csv", rows_to_csv(self.records, RECORD_FIELDS))
        _write_text(out / "table3.csv", rows_to_csv(self.table3_rows(), ("scenario_id", "C", "tol", "tpr", "fpr")))
        t4 = self.table4_rows()
        t4_fields = ["scenario_id"] + [f"auc_sample_{s}" for s in self.sample_ids] + [
            "mean_auc", "tpr", "fpr", "precision", "accuracy", "tnr"]
        extremes = self.sample_auc_extremes()
        for name, pick in (("MAX", 0), ("MIN", 1)):
            t4.append({"scenario_id": name, **{f"auc_sample_{s}": extremes[s][pick] for s in self.sample_ids}})
        _write_text(out / "table4.csv", rows_to_csv(t4, t4_fields))
        _write_text(out / "summary.txt", self.summary(master_seed, config))

    def summary(self, master_seed=None, config=None) -> str:
        means = self.scenario_means()
        best = self.best_scenario()
        lines = [
            f"generated: {datetime.now(timezone.utc).isoformat(timespec='seconds')}",
            f"master_seed: {master_seed}",
            f"scenarios: {len(self.scenario_ids)}  samples: {len(self.sample_ids)}  records: {len(self.records)}",
            f"best scenario: {best} (mean AUC {fmt(means[best]['auc'])}, "
            f"mean FPR {fmt(means[best]['fpr'])}, accuracy {fmt(means[best]['accuracy'])})",
        ]
        if self.non_converged:
            cells = ", ".join(f"{a}/sample{b}" for a, b in self.non_converged)
            lines.append(f"hit max_iter: {cells}")
        if config is not None:
            lines.append("config: " + json.dumps(config, sort_keys=True))
        lines.append("")
        lines.append(f"{'scenario':<9}{'mean_auc':>10}{'tpr':>8}{'fpr':>8}{'prec':>8}{'acc':>8}")
        for sid in self.scenario_ids:
            m = means[sid]
            lines.append(f"{sid:<9}{m['auc']:>10.3f}{m['tpr']:>8.3f}{m['fpr']:>8.3f}"
                         f"{m['precision']:>8.3f}{m['accuracy']:>8.3f}")
        return "\n".join(lines) + "\n"


def select_best(rows: Sequence[dict]) -> str:
    """Highest ``mean_auc``; ties go to lower ``fpr``, then to the earlier row."""
    def key(item):
        i, r = item
        auc = r["mean_auc"]
        return (-(auc if not math.isnan(auc) else -math.inf), r["fpr"], i)
    return min(enumerate(rows), key=key)[1]["scenario_id"]


def evaluate_model(model, X_test, y_test) -> dict:
    scores = positive_score(model, X_test, POSITIVE)
    predicted = predict(model, X_test)
    return metrics_record(scores, list(predicted), list(y_test), POSITIVE)


def run_sweep(samples: Sequence[SampleData], scenarios: Sequence[SvmScenario] | None = None,
              ids: Sequence[str] | None = None,
              progress: Callable[[str, int], None] | None = None) -> SweepReport:
    """Train and score one model per (scenario, sample) cell."""
    scenarios = list(scenarios) if scenarios is not None else scenario_table()
    if not scenarios:
        raise InvalidInputError("scenario list is empty")
    if not samples:
        raise InvalidInputError("no samples to sweep")
    ids = list(ids) if ids is not None else scenario_ids(scenarios)
    records, non_converged = [], []
    for sample in samples:
        for sid, sc in zip(ids, scenarios):
            if progress:
                progress(sid, sample.sample_id)
            if sample.solver_seed is not None and sc.random_state is None:
                sc = replace(sc, random_state=sample.solver_seed)
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", ConvergenceWarning)
                    model = train(sample.X_train, sample.y_train, sc, classes=(NEGATIVE, POSITIVE))
                rec = evaluate_model(model, sample.X_test, sample.y_test)
            except Exception as exc:
                raise SweepError(sid, sample.sample_id, exc) from exc
            if not model.diagnostics["converged"]:
                non_converged.append((sid, sample.sample_id))
            records.append({"scenario_id": sid, "sample_id": sample.sample_id, **rec})
    return SweepReport(records, ids, scenarios, [s.sample_id for s in samples], non_converged)


# -- run configuration ------------------------------------------------------------

@dataclass
class RunConfig:
    master_seed: int = 0
    samples: int = 5
    per_class_size: int = 721
    train_per_class: int = 505
    test_per_class: int = 216
    lbp: LbpParams = field(default_factory=LbpParams)
    scenarios: list[SvmScenario] = field(default_factory=scenario_table)
    scenario_names: list[str] | None = None
    features: str | None = None
    manifest: str | None = None

    def __post_init__(self):
        if self.samples < 1:
            raise InvalidInputError("samples must be >= 1")
        if not self.scenarios:
            raise InvalidInputError("scenario list is empty")
        SampleSpec(1, self.per_class_size, self.train_per_class, self.test_per_class, self.master_seed)
        if self.scenario_names is None:
            self.scenario_names = scenario_ids(self.scenarios)

    @classmethod
    def from_dict(cls, d: dict, base_dir=None) -> "RunConfig":
        d = dict(d)
        known = {"master_seed", "samples", "per_class_size", "train_per_class", "test_per_class",
                 "lbp", "scenarios", "features", "manifest"}
        unknown = set(d) - known
        if unknown:
            raise InvalidInputError(f"unknown config keys {sorted(unknown)}")
        if "master_seed" not in d:
            raise InvalidInputError("config needs a master_seed")
        lbp = d.pop("lbp", None)
        lbp = LbpParams(int(lbp.get("points", 24)), float(lbp.get("radius", 3.0))) if lbp else LbpParams()
        scenarios, names = parse_scenarios(d.pop("scenarios", "paper20"))
        for key in ("features", "manifest"):
            if d.get(key) and base_dir is not None and not Path(d[key]).is_absolute():
                d[key] = str(Path(base_dir) / d[key])
        return cls(lbp=lbp, scenarios=scenarios, scenario_names=names, **d)

    def to_dict(self) -> dict:
        return {"master_seed": self.master_seed, "samples": self.samples,
                "per_class_size": self.per_class_size, "train_per_class": self.train_per_class,
                "test_per_class": self.test_per_class,
                "lbp": {"points": self.lbp.points, "radius": self.lbp.radius},
                "scenarios": self.scenario_names}


def parse_scenarios(spec) -> tuple[list[SvmScenario], list[str]]:
    """``"paper20"``, or a list whose items are table ids (``"S9"``) or scenario dicts."""
    table = scenario_table()
    if spec == "paper20":
        return table, scenario_ids(table)
    if not isinstance(spec, list) or not spec:
        raise InvalidInputError("scenarios must be 'paper20' or a non-empty list")
    scenarios, names = [], []
    for i, item in enumerate(spec):
        if isinstance(item, str):
            if not (item.startswith("S") and item[1:].isdigit() and int(item[1:]) < len(table)):
                raise InvalidInputError(f"unknown scenario id {item!r}")
            scenarios.append(table[int(item[1:])])
            names.append(item)
        elif isinstance(item, dict):
            item = dict(item)
            names.append(str(item.pop("id", f"S{i}")))
            scenarios.append(SvmScenario(**item))
        else:
            raise InvalidInputError(f"bad scenario entry {item!r}")
    if len(set(names)) != len(names):
        raise InvalidInputError("scenario ids must be unique")
    return scenarios, names


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return RunConfig.from_dict(json.load(fh), base_dir=Path(path).parent)


# -- csv helpers --------------------------------------------------------------

def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else f"{float(v):.6g}"
    return "" if v is None else str(v)


def rows_to_csv(rows: Sequence[dict], fields: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for r in rows:
        writer.writerow([fmt(r.get(f)) for f in fields])
    return buf.getvalue()


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
