"""framelift: deterministic measurement frames for phase retrieval and
low-rank PSD matrix recovery via convex feasibility."""

from .bench import (ExperimentConfig, LinearityReport, StabilityReport,
                    run_linearity_sweep, run_stability_experiment)
from .completeness import (CompletenessCertificate, certify_structural,
                           discrimination_oracle, kernel_spectral_check)
from .frames import (MeasurementEnsemble, antidiag_pair, banded_basis,
                     build_ensemble, cos_sin_matrices, ensemble_from_dict,
                     ensemble_to_dict, example_n4, phase_vector,
                     rank_one_frame, general_ensemble, vandermonde_ensemble)
from .hermitian import (EigSpectrum, antidiag_include, antidiag_len,
                        eig_ordered, hs_inner, hs_norm, hunvec, hvec,
                        psd_project, signed_eig_counts)
from .measurement import (KernelBasis, MeasurementOperator, adjoint, apply,
                          build_operator, kernel_basis_numeric,
                          kernel_basis_structural)
from .nonsingular import TNSReport, all_minors_nonzero, tns_complement
from .recovery import (RecoveryResult, StabilityEstimate, align_phase,
                       estimate_stability, extract_signal, recover_noiseless,
                       recover_noisy)

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig", "LinearityReport", "StabilityReport",
    "run_linearity_sweep", "run_stability_experiment",
    "CompletenessCertificate", "certify_structural", "discrimination_oracle",
    "kernel_spectral_check",
    "MeasurementEnsemble", "antidiag_pair", "banded_basis", "build_ensemble",
    "cos_sin_matrices", "ensemble_from_dict", "ensemble_to_dict",
    "example_n4", "phase_vector", "rank_one_frame", "general_ensemble",
    "vandermonde_ensemble",
    "EigSpectrum", "antidiag_include", "antidiag_len", "eig_ordered",
    "hs_inner", "hs_norm", "hunvec", "hvec", "psd_project",
    "signed_eig_counts",
    "KernelBasis", "MeasurementOperator", "adjoint", "apply",
    "build_operator", "kernel_basis_numeric", "kernel_basis_structural",
    "TNSReport", "all_minors_nonzero", "tns_complement",
    "RecoveryResult", "StabilityEstimate", "align_phase",
    "estimate_stability", "extract_signal", "recover_noiseless",
    "recover_noisy",
    "__version__",
]
