"""Frame to cell extraction and labeled dataset manifests.

Gray images are plain ``numpy.uint8`` arrays of shape ``(height, width)``.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

POSITIVE = "positive"
NEGATIVE = "negative"
LABELS = (POSITIVE, NEGATIVE)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")
MANIFEST_HEADER = ("path", "label", "source_id", "frame_index", "cell_row", "cell_col")


class InvalidInputError(ValueError):
    """Raised for malformed rasters or empty inputs."""


class InvalidMeshError(ValueError):
    """Raised when a mesh does not fit inside its frame."""


class LayoutError(ValueError):
    """Raised when a dataset directory does not have the two-class layout."""


class DecodeError(RuntimeError):
    """Raised when one or more image files cannot be decoded.

    ``failures`` holds ``(path, reason)`` pairs for every bad file.
    """

    def __init__(self, failures):
        self.failures = list(failures)
        lines = "\n".join(f"  {p}: {why}" for p, why in self.failures)
        super().__init__(f"{len(self.failures)} undecodable image(s):\n{lines}")


def as_gray_image(pixels) -> np.ndarray:
    """Validate and return a 2-D uint8 array."""
    arr = np.asarray(pixels)
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidInputError(f"gray image must be a non-empty 2-D array, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if np.any(arr < 0) or np.any(arr > 255) or not np.all(np.isfinite(arr)):
            raise InvalidInputError("gray intensities must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def to_grayscale(frame) -> np.ndarray:
    """Convert an ``(h, w, 3)`` 8-bit RGB raster to gray with BT.601 weights.

    Rounds half up, using integer arithmetic so that ``R == G == B`` maps
    back to the common value exactly.
    """
    rgb = np.asarray(frame)
    if rgb.ndim == 2:
        return as_gray_image(rgb)
    if rgb.ndim != 3 or rgb.shape[2] < 3 or rgb.shape[0] == 0 or rgb.shape[1] == 0:
        raise InvalidInputError(f"expected an (h, w, 3) raster, got shape {rgb.shape}")
    rgb = rgb[..., :3].astype(np.int64)
    if rgb.min() < 0 or rgb.max() > 255:
        raise InvalidInputError("channel values must lie in [0, 255]")
    weighted = 299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2]
    return np.clip((weighted + 500) // 1000, 0, 255).astype(np.uint8)


class CellRect(NamedTuple):
    x: int
    y: int
    width: int
    height: int
    row: int
    col: int


@dataclass(frozen=True)
class MeshSpec:
    cell_width: int = 210
    cell_height: int = 120
    rows: int = 3
    cols: int = 8
    origin_x: int = 0
    origin_y: int = 0

    def __post_init__(self):
        for name in ("cell_width", "cell_height", "rows", "cols"):
            if getattr(self, name) <= 0:
                raise InvalidMeshError(f"{name} must be positive")
        if self.origin_x < 0 or self.origin_y < 0:
            raise InvalidMeshError("mesh origin must be non-negative")

    @property
    def extent(self) -> tuple[int, int]:
        """Right and bottom edge (exclusive) covered by the mesh."""
        return (self.origin_x + self.cols * self.cell_width,
                self.origin_y + self.rows * self.cell_height)

    def check_fits(self, frame_width: int, frame_height: int) -> None:
        right, bottom = self.extent
        if right > frame_width or bottom > frame_height:
            raise InvalidMeshError(
                f"mesh covers {right}x{bottom} px but the frame is {frame_width}x{frame_height}")


def mesh_cells(spec: MeshSpec, frame_size: tuple[int, int] | None = None) -> list[CellRect]:
    """Row-major list of the mesh rectangles.

    ``frame_size`` is ``(width, height)``; when given the mesh is checked
    against it.
    """
    if frame_size is not None:
        spec.check_fits(*frame_size)
    return [
        CellRect(spec.origin_x + c * spec.cell_width, spec.origin_y + r * spec.cell_height,
                 spec.cell_width, spec.cell_height, r, c)
        for r in range(spec.rows)
        for c in range(spec.cols)
    ]


def extract_cell(frame, spec: MeshSpec, row: int, col: int) -> np.ndarray:
    img = as_gray_image(frame)
    spec.check_fits(img.shape[1], img.shape[0])
    if not (0 <= row < spec.rows and 0 <= col < spec.cols):
        raise IndexError(f"cell ({row}, {col}) outside a {spec.rows}x{spec.cols} mesh")
    x = spec.origin_x + col * spec.cell_width
    y = spec.origin_y + row * spec.cell_height
    return img[y:y + spec.cell_height, x:x + spec.cell_width].copy()


def load_gray(path) -> np.ndarray:
    """Decode a PNG/JPEG file into a gray image."""
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("L", "P", "1", "I;16", "I"):
                arr = np.asarray(im.convert("L"))
            else:
                arr = np.asarray(im.convert("RGB"))
    except (UnidentifiedImageError, OSError) as exc:
        raise DecodeError([(str(path), str(exc))]) from exc
    return to_grayscale(arr)


def save_gray(path, img) -> None:
    Image.fromarray(as_gray_image(img), mode="L").save(path)


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: str | None = None
    source_id: str = ""
    frame_index: int | None = None
    cell_row: int | None = None
    cell_col: int | None = None


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry] = field(default_factory=list)
    mesh: MeshSpec | None = None

    def __post_init__(self):
        self.validate()

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def labels(self) -> list[str | None]:
        return [e.label for e in self.entries]

    def validate(self) -> None:
        paths = [e.path for e in self.entries]
        if len(set(paths)) != len(paths):
            raise InvalidInputError("manifest paths must be unique")
        bad = {e.label for e in self.entries} - {POSITIVE, NEGATIVE, None}
        if bad:
            raise InvalidInputError(f"unknown labels {sorted(bad)}")
        if self.mesh is not None:
            for e in self.entries:
                if e.cell_row is not None and not 0 <= e.cell_row < self.mesh.rows:
                    raise InvalidInputError(f"{e.path}: cell_row out of mesh bounds")
                if e.cell_col is not None and not 0 <= e.cell_col < self.mesh.cols:
                    raise InvalidInputError(f"{e.path}: cell_col out of mesh bounds")

    def count(self, label: str) -> int:
        return sum(e.label == label for e in self.entries)


def _list_images(directory: Path) -> list[Path]:
    return sorted(p for p in directory.iterdir()
                  if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def build_manifest(root_dir, positive: str = POSITIVE, check_decode: bool = True) -> DatasetManifest:
    """Index a directory holding exactly two class subdirectories.

    ``positive`` names the subdirectory whose images are the positive
    class; the other one is negative. Paths are stored relative to
    ``root_dir`` with forward slashes and entries are sorted by path.
    """
    root = Path(root_dir)
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if len(class_dirs) != 2:
        raise LayoutError(f"expected exactly 2 class directories in {root}, found {len(class_dirs)}")
    names = [p.name for p in class_dirs]
    if positive not in names:
        raise LayoutError(f"positive class directory {positive!r} not among {names}")

    entries, failures = [], []
    for d in class_dirs:
        files = _list_images(d)
        if not files:
            raise LayoutError(f"class directory {d} holds no images")
        label = POSITIVE if d.name == positive else NEGATIVE
        for f in files:
            if check_decode:
                try:
                    with Image.open(f) as im:
                        im.verify()
                except (UnidentifiedImageError, OSError) as exc:
                    failures.append((str(f), str(exc)))
                    continue
            entries.append(ManifestEntry(f.relative_to(root).as_posix(), label, source_id=f.stem))
    if failures:
        raise DecodeError(failures)
    entries.sort(key=lambda e: e.path)
    return DatasetManifest(entries)


def _opt_int(text: str) -> int | None:
    return int(text) if text != "" else None


def _fmt_opt(value) -> str:
    return "" if value is None else str(value)


def manifest_to_csv(manifest: DatasetManifest) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MANIFEST_HEADER)
    for e in manifest.entries:
        writer.writerow([e.path, _fmt_opt(e.label), e.source_id, _fmt_opt(e.frame_index),
                         _fmt_opt(e.cell_row), _fmt_opt(e.cell_col)])
    return buf.getvalue()


def write_manifest(manifest: DatasetManifest, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(manifest_to_csv(manifest))


def read_manifest(path) -> DatasetManifest:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != MANIFEST_HEADER:
            raise InvalidInputError(f"{path}: bad manifest header {header}")
        entries = [
            ManifestEntry(row[0], row[1] or None, row[2], _opt_int(row[3]),
                          _opt_int(row[4]), _opt_int(row[5]))
            for row in reader if row
        ]
    return DatasetManifest(entries)


def resolve(manifest_path, entry: ManifestEntry) -> Path:
    """Absolute location of an entry, relative paths being taken from the manifest's directory."""
    p = Path(entry.path)
    return p if p.is_absolute() else Path(os.path.dirname(os.path.abspath(manifest_path))) / p


def extract_frames(frames: Iterable[tuple[str, np.ndarray]], spec: MeshSpec) -> list[tuple[ManifestEntry, np.ndarray]]:
    """Cut every frame of ``(source_id, frame)`` pairs into mesh cells.

    Returns ``(entry, cell)`` pairs; entry paths follow
    ``<source_id>_r<row>_c<col>.png`` and labels are left empty.
    """
    out = []
    for index, (source_id, frame) in enumerate(frames):
        img = as_gray_image(frame)
        for rect in mesh_cells(spec, (img.shape[1], img.shape[0])):
            cell = img[rect.y:rect.y + rect.height, rect.x:rect.x + rect.width].copy()
            entry = ManifestEntry(f"{source_id}_r{rect.row}_c{rect.col}.png", None, source_id,
                                  index, rect.row, rect.col)
            out.append((entry, cell))
    return out


def frame_files(frames_dir) -> Sequence[Path]:
    return _list_images(Path(frames_dir))
