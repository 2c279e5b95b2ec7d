"""Expected first-return times of iterated open quantum walks."""

from .builders import (
    StarGraphSpec,
    basis_state,
    build_channel,
    cue_unitary,
    dark_states,
    loop_transfer,
    make_rng,
    plus_minus_states,
    population_transfer,
    random_disk_hamiltonian,
    random_star_spec,
    sample_disk,
    star_channel,
    star_hamiltonian,
    uniform_decoherence,
)
from .channel import (
    QuantumChannel,
    ValidationReport,
    apply,
    compose,
    dual,
    identity_channel,
    is_unital_on,
    load_channel,
    measurement_filter,
    restrict,
    save_channel,
    to_superoperator_matrix,
    unitary_channel,
    validate,
)
from .ensemble import EnsembleSpec, EnsembleStats, decile_band_width, run_ensemble
from .errors import *  # noqa: F401,F403
from .numerics import (
    Tolerance,
    eig_general,
    extend_orthonormal_basis,
    support_projector,
    unitary_from_hamiltonian,
)
from .recurrence import (
    ReturnAnalysis,
    SpectralData,
    classical_kac_oracle,
    conditional_step,
    expected_return_partial,
    expected_return_spectral,
    quantization_verdict,
    relevant_subspace,
    return_series,
    tilde_rho,
)

__version__ = "0.1.0"
