"""Direct and inverse Dirichlet spectral maps for Sturm-Liouville operators
with distributional potentials q = sigma'."""
from .direct import (
                        EigenSystem,
                        NumericalError,
                        ShootingSolution,
                        eigensystem,
                        eigenvalues,
                        norming_constants,
                        solve_u,
                        solve_z,
                        spectral_map,
)
from .funcspace import (
                        GridFunction,
                        InputError,
                        ParameterError,
                        SobolevParams,
                        ddx,
                        integrate,
                        l2_inner,
                        make_grid_function,
                        sobolev_norm,
)
from .seqspace import (
                        DomainError,
                        LdDecomposition,
                        SpectralData,
                        check_omega,
                        check_omega_hat,
                        e_sequence,
                        ld_decompose,
                        ld_norm,
                        shift_data,
)

__version__ = "0.1.0"

__all__ = [
                        "DomainError",
                        "EigenSystem",
                        "GridFunction",
                        "InputError",
                        "LdDecomposition",
                        "NumericalError",
                        "ParameterError",
                        "ShootingSolution",
                        "SobolevParams",
                        "SpectralData",
                        "check_omega",
                        "check_omega_hat",
                        "ddx",
                        "e_sequence",
                        "eigensystem",
                        "eigenvalues",
                        "integrate",
                        "l2_inner",
                        "ld_decompose",
                        "ld_norm",
                        "make_grid_function",
                        "norming_constants",
                        "shift_data",
                        "sobolev_norm",
                        "solve_u",
                        "solve_z",
                        "spectral_map",
]
