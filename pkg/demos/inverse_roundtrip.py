"""Truncated data -> potential -> data, with both reconstruction methods."""
from sturmspec import make_grid_function, spectral_map
from sturmspec.inverse import reconstruct, roundtrip_error

data = spectral_map(make_grid_function("0.4*cos(3t)-0.2*x", 512), 6)
for method in ("glm", "seq"):
    sigma = reconstruct(data, method)
    print(f"{method}: round-trip error {roundtrip_error(data, sigma):.2e}")
