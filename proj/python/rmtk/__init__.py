"""Random-matrix toolkit: Gaussian ensembles with a rank-one channel coupling.

Samples GOE/GUE spectra, applies the rank-one eigen-update through the
secular equation, and evaluates the closed-form width statistics (the
energy-dependent Porter-Thomas parameter l(E), the separated collective
state, windowed moments and full-window distributions).
"""

from rmtk._core import (  # noqa: F401
    DomainError,
    RmtkError,
    __version__,
    bessel_i1,
    bulk_density,
    collective_state,
    experiment_names,
    fullwindow_factor,
    fullwindow_factor_series,
    gaussian_fit,
    ks_statistic,
    ks_two_sample,
    l_of_energy,
    lagrange_mu,
    modified_pt_cdf,
    modified_pt_pdf,
    overlap_coefficients,
    overlap_matrix,
    perturb,
    perturbed_weights,
    run_experiment,
    sample_spectrum,
    secular_solve,
    trace_identities,
    wigner_count,
    wigner_density,
    window_moment,
    window_pdf,
)

__all__ = [
    "DomainError",
    "RmtkError",
    "bessel_i1",
    "bulk_density",
    "collective_state",
    "experiment_names",
    "fullwindow_factor",
    "fullwindow_factor_series",
    "gaussian_fit",
    "ks_statistic",
    "ks_two_sample",
    "l_of_energy",
    "lagrange_mu",
    "modified_pt_cdf",
    "modified_pt_pdf",
    "overlap_coefficients",
    "overlap_matrix",
    "perturb",
    "perturbed_weights",
    "run_experiment",
    "sample_spectrum",
    "secular_solve",
    "trace_identities",
    "wigner_count",
    "wigner_density",
    "window_moment",
    "window_pdf",
]
