"""Circular uniform local binary patterns and their normalized histograms.

A neighbor sets its bit only when it is *strictly* brighter than the
center pixel, so a flat image codes to 0 everywhere (implementations that
threshold with ``>=`` code it to P instead). Neighbors off the pixel
lattice are bilinearly interpolated and coordinates past the border are
clamped to the edge, so the code map has the shape of the input image.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .ingest import InvalidInputError, as_gray_image

SNAP_TOL = 1e-8
# Interpolated differences smaller than this (in gray levels) count as ties.
TIE_TOL = 1e-9


@dataclass(frozen=True)
class LbpParams:
    points: int = 24
    radius: float = 3.0
    method: str = "uniform"

    def __post_init__(self):
        if int(self.points) != self.points or self.points < 4:
            raise ValueError(f"points must be an integer >= 4, got {self.points}")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.method != "uniform":
            raise ValueError(f"only method='uniform' is supported, got {self.method!r}")
        object.__setattr__(self, "points", int(self.points))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def n_bins(self) -> int:
        return self.points + 2

    def sidecar(self) -> dict:
        return {"points": self.points, "radius": self.radius, "method": self.method,
                "threshold": "strict-greater", "border": "clamp"}

    @classmethod
    def from_sidecar(cls, meta: dict) -> "LbpParams":
        if meta.get("threshold", "strict-greater") != "strict-greater" or meta.get("border", "clamp") != "clamp":
            raise ValueError(f"unsupported LBP variant in sidecar: {meta}")
        return cls(int(meta["points"]), float(meta["radius"]), meta.get("method", "uniform"))


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    params: LbpParams


def _snap(v: float) -> float:
    r = round(v)
    return float(r) if abs(v - r) < SNAP_TOL else v


def neighbor_offsets(params: LbpParams) -> list[tuple[float, float]]:
    """``(drow, dcol)`` of each circular neighbor, starting east and turning toward +row."""
    P, R = params.points, params.radius
    return [(_snap(R * math.sin(2 * math.pi * k / P)), _snap(R * math.cos(2 * math.pi * k / P)))
            for k in range(P)]


def _bilinear(img: np.ndarray, rows, cols, center=0.0):
    """Bilinear sample of ``img - center`` with edge-clamped coordinates."""
    h, w = img.shape
    rows = np.clip(rows, 0.0, h - 1.0)
    cols = np.clip(cols, 0.0, w - 1.0)
    r0 = np.floor(rows).astype(np.intp)
    c0 = np.floor(cols).astype(np.intp)
    r1 = np.minimum(r0 + 1, h - 1)
    c1 = np.minimum(c0 + 1, w - 1)
    fr = rows - r0
    fc = cols - c0
    f = img.astype(np.float64)
    center = np.asarray(center, dtype=np.float64)
    return ((1 - fr) * (1 - fc) * (f[r0, c0] - center)
            + (1 - fr) * fc * (f[r0, c1] - center)
            + fr * (1 - fc) * (f[r1, c0] - center)
            + fr * fc * (f[r1, c1] - center))


def sample_neighbor(img, row: float, col: float) -> float:
    img = as_gray_image(img)
    return float(_bilinear(img, np.float64(row), np.float64(col)))


def uniform_code(bits) -> int:
    """Map a circular bit string to its uniform LBP code in ``[0, P+1]``."""
    bits = np.asarray(bits, dtype=bool)
    transitions = int(np.count_nonzero(bits != np.roll(bits, -1)))
    return int(bits.sum()) if transitions <= 2 else bits.size + 1


def _padded(img: np.ndarray, params: LbpParams) -> tuple[np.ndarray, int]:
    # Bilinear sampling of an edge-replicated image equals sampling with
    # edge-clamped coordinates.
    pad = int(math.ceil(params.radius)) + 1
    return np.pad(img.astype(np.float64), pad, mode="edge"), pad


def _offset_terms(params: LbpParams):
    """Integer shift and bilinear weights of each neighbor offset."""
    out = []
    for dr, dc in neighbor_offsets(params):
        ir, ic = math.floor(dr), math.floor(dc)
        fr, fc = dr - ir, dc - ic
        out.append((ir, ic, ((1 - fr) * (1 - fc), (1 - fr) * fc, fr * (1 - fc), fr * fc)))
    return out


def _diff(padded, pad, rows, cols, ir, ic, weights, center):
    r = rows + pad + ir
    c = cols + pad + ic
    w00, w01, w10, w11 = weights
    return (w00 * (padded[r, c] - center) + w01 * (padded[r, c + 1] - center)
            + w10 * (padded[r + 1, c] - center) + w11 * (padded[r + 1, c + 1] - center))


def neighbor_bits(img, center_row: int, center_col: int, params: LbpParams) -> np.ndarray:
    img = as_gray_image(img)
    padded, pad = _padded(img, params)
    center = float(img[center_row, center_col])
    return np.array([_diff(padded, pad, center_row, center_col, ir, ic, wts, center) > TIE_TOL
                     for ir, ic, wts in _offset_terms(params)])


def lbp_code(img, center_row: int, center_col: int, params: LbpParams | None = None) -> int:
    params = params or LbpParams()
    img = as_gray_image(img)
    h, w = img.shape
    if not (0 <= center_row < h and 0 <= center_col < w):
        raise IndexError(f"center ({center_row}, {center_col}) outside a {h}x{w} image")
    return uniform_code(neighbor_bits(img, center_row, center_col, params))


def lbp_map(img, params: LbpParams | None = None) -> np.ndarray:
    """Uniform code of every pixel, as an int array shaped like ``img``."""
    params = params or LbpParams()
    img = as_gray_image(img)
    h, w = img.shape
    padded, pad = _padded(img, params)
    center = img.astype(np.float64)
    ones = np.zeros((h, w), dtype=np.int32)
    transitions = np.zeros((h, w), dtype=np.int32)
    first = prev = None
    for ir, ic, wts in _offset_terms(params):
        sl = lambda dr, dc: padded[pad + ir + dr:pad + ir + dr + h, pad + ic + dc:pad + ic + dc + w]
        w00, w01, w10, w11 = wts
        d = (w00 * (sl(0, 0) - center) + w01 * (sl(0, 1) - center)
             + w10 * (sl(1, 0) - center) + w11 * (sl(1, 1) - center))
        bit = d > TIE_TOL
        ones += bit
        if prev is None:
            first = bit
        else:
            transitions += bit != prev
        prev = bit
    transitions += prev != first
    return np.where(transitions <= 2, ones, params.points + 1).astype(np.int32)


def histogram_feature(codes, params: LbpParams | None = None) -> FeatureVector:
    params = params or LbpParams()
    codes = np.asarray(codes)
    if codes.size == 0:
        raise InvalidInputError("cannot histogram an empty code map")
    if codes.min() < 0 or codes.max() > params.points + 1:
        raise InvalidInputError(f"codes outside [0, {params.points + 1}]")
    counts = np.bincount(codes.ravel().astype(np.intp), minlength=params.n_bins)
    return FeatureVector(counts / codes.size, params)


def lbp_feature(img, params: LbpParams | None = None) -> np.ndarray:
    """Shortcut: image -> normalized uniform-LBP histogram values."""
    params = params or LbpParams()
    return histogram_feature(lbp_map(img, params), params).values


# -- feature files --------------------------------------------------------

def sidecar_path(features_path) -> Path:
    return Path(features_path).with_suffix(".json")


def features_to_csv(labels, X, params: LbpParams) -> str:
    X = np.asarray(X, dtype=np.float64)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label"] + [f"f{i}" for i in range(params.n_bins)])
    for label, row in zip(labels, X):
        writer.writerow([label] + [f"{v:.6g}" for v in row])
    return buf.getvalue()


def write_features(path, labels, X, params: LbpParams) -> None:
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] != params.n_bins:
        raise InvalidInputError(f"feature matrix must have {params.n_bins} columns")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(features_to_csv(labels, X, params))
    with open(sidecar_path(path), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(params.sidecar(), fh, sort_keys=True)
        fh.write("\n")


def read_sidecar(path) -> LbpParams:
    with open(sidecar_path(path), encoding="utf-8") as fh:
        return LbpParams.from_sidecar(json.load(fh))


def read_features(path) -> tuple[list[str], np.ndarray, LbpParams]:
    params = read_sidecar(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = ["label"] + [f"f{i}" for i in range(params.n_bins)]
        if header != expected:
            raise InvalidInputError(f"{path}: header does not match sidecar parameters {asdict(params)}")
        labels, rows = [], []
        for row in reader:
            if row:
                labels.append(row[0])
                rows.append([float(v) for v in row[1:]])
    X = np.array(rows, dtype=np.float64).reshape(len(rows), params.n_bins)
    return labels, X, params
