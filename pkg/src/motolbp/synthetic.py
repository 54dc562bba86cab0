"""Reproducible two-class texture corpus used in place of real traffic cells.

Positive patches are smooth intensity ramps with mild sensor noise;
negative patches are high-frequency noise around a random mean.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .ingest import NEGATIVE, POSITIVE, save_gray


def smooth_gradient(rng: np.random.Generator, width: int = 210, height: int = 120) -> np.ndarray:
    theta = rng.uniform(0, 2 * np.pi)
    span = rng.uniform(60, 200)
    base = rng.uniform(20, 235 - span)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    proj = np.cos(theta) * xx / width + np.sin(theta) * yy / height
    proj = (proj - proj.min()) / max(np.ptp(proj), 1e-12)
    img = base + span * proj + rng.normal(0.0, 1.0, size=(height, width))
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def high_frequency_noise(rng: np.random.Generator, width: int = 210, height: int = 120) -> np.ndarray:
    mean = rng.uniform(60, 190)
    spread = rng.uniform(15, 60)
    img = mean + rng.normal(0.0, spread, size=(height, width))
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def texture_corpus(n_per_class: int = 800, seed: int = 0, width: int = 210, height: int = 120):
    """Return ``(images, labels)`` with positives first."""
    rng = np.random.default_rng(seed)
    images = [smooth_gradient(rng, width, height) for _ in range(n_per_class)]
    images += [high_frequency_noise(rng, width, height) for _ in range(n_per_class)]
    labels = [POSITIVE] * n_per_class + [NEGATIVE] * n_per_class
    return images, labels


def write_corpus(root, n_per_class: int = 800, seed: int = 0, width: int = 210, height: int = 120) -> Path:
    """Write the corpus as ``root/positive/*.png`` and ``root/negative/*.png``."""
    root = Path(root)
    images, labels = texture_corpus(n_per_class, seed, width, height)
    counters = {POSITIVE: 0, NEGATIVE: 0}
    for img, label in zip(images, labels):
        d = root / label
        d.mkdir(parents=True, exist_ok=True)
        save_gray(d / f"{label}_{counters[label]:05d}.png", img)
        counters[label] += 1
    return root
