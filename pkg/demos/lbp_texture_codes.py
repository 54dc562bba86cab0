"""
Uniform LBP codes on two textures
=================================

A smooth ramp and a patch of noise give clearly different uniform LBP
histograms. That difference is all the downstream linear SVM gets to see.
"""

import numpy as np

from motolbp import LbpParams, lbp_feature, lbp_map
from motolbp.synthetic import high_frequency_noise, smooth_gradient

rng = np.random.default_rng(0)
ramp = smooth_gradient(rng)
noise = high_frequency_noise(rng)
print("cell shape (height, width):", ramp.shape)

# The code map keeps the cell's size; borders are sampled with clamp-to-edge.
codes = lbp_map(ramp)
print("map shape:", codes.shape, "codes used:", np.unique(codes).size)

# The feature is the normalized histogram over P + 2 = 26 bins.
params = LbpParams()
h_ramp = lbp_feature(ramp, params)
h_noise = lbp_feature(noise, params)
print("ramp  histogram:", np.round(h_ramp[:6], 3), "...")
print("noise histogram:", np.round(h_noise[:6], 3), "...")
print("L1 distance between the two:", round(float(np.abs(h_ramp - h_noise).sum()), 3))

# Thresholding is strict, so a flat cell codes to 0 everywhere and adding a
# constant brightness leaves every code unchanged.
flat = np.full((120, 210), 128, np.uint8)
print("flat cell codes all zero:", bool(np.all(lbp_map(flat) == 0)))
brighter = (ramp.astype(int) + 20).clip(0, 255).astype(np.uint8)
unclipped = ramp.max() <= 235
print("shifted ramp gives the same map:", unclipped and np.array_equal(lbp_map(brighter), codes))
