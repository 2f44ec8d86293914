"""Move one eigenvalue with a Darboux step, then rebuild the same potential by GLM."""
import numpy as np

from sturmspec import make_grid_function, spectral_map
from sturmspec.inverse import darboux_eigenvalue, glm_reconstruct
from sturmspec.seqspace import SpectralData

sigma = make_grid_function("0.3*cos(2t)", 512)
before = spectral_map(sigma, 6)
step = darboux_eigenvalue(sigma, 2, 0.8)
after = spectral_map(step.sigma_out, 6)
print("lambda before", np.round(before.lambdas, 8))
print("lambda after ", np.round(after.lambdas, 8))

lams = before.lambdas.copy()
lams[1] += 0.8
tau = glm_reconstruct(sigma, SpectralData.from_pairs(lams, before.alphas))
d = tau.samples - step.sigma_out.samples
print("max |GLM - Darboux| =", float(np.max(np.abs(d - d.mean()))))
