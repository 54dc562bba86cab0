"""
Cutting a frame into mesh cells
===============================

A 3 x 8 mesh of 210 x 120 cells covers the top-left 1680 x 360 region of a
full-HD frame. Each cell becomes one grayscale image plus a manifest row.
"""

import tempfile
from pathlib import Path

import numpy as np

from motolbp import MeshSpec, extract_frames, mesh_cells
from motolbp.ingest import DatasetManifest, save_gray, write_manifest

spec = MeshSpec()
cells = mesh_cells(spec, frame_size=(1920, 1080))
print(len(cells), "cells; last one:", cells[-1])

rng = np.random.default_rng(0)
frames = [(f"frame{i}", rng.integers(0, 256, (1080, 1920), dtype=np.uint8)) for i in range(2)]
pairs = extract_frames(frames, spec)

out = Path(tempfile.mkdtemp(prefix="cells-"))
for entry, cell in pairs:
    save_gray(out / entry.path, cell)
write_manifest(DatasetManifest([e for e, _ in pairs], mesh=spec), out / "manifest.csv")
print(len(pairs), "cell images written to", out)
print((out / "manifest.csv").read_text().splitlines()[:3])
