"""Spectral data of a few potentials, printed next to the free values."""
import numpy as np

from sturmspec import make_grid_function, spectral_map

for spec in ["zero", "x", "0.3*cos(2t)", "steps:[1,-1]"]:
    data = spectral_map(make_grid_function(spec, 512), 6)
    print(f"{spec:>14}  lambda = {np.round(data.lambdas, 6)}")
    print(f"{'':>14}  alpha  = {np.round(data.alphas, 6)}")
