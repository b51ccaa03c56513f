"""Compatible Poisson brackets on the GL(n,C) phase space, their reduction
by the two-sided unitary action, and the resulting hyperbolic Sutherland
models coupled to two spins, with numerical verification throughout."""

from .linalg import (
    CartanFactors,
    FactorizationError,
    IrregularPointError,
    adq_apply,
    cartan_decompose,
    cartan_reconstruct,
    coth_map,
    hermitian_split,
    ldu,
    matrix_exp,
    pairing,
    r_map,
    r_minus,
    r_plus,
    triangular_split,
    udl,
)
from .observables import (
    FuncObservable,
    GradientBundle,
    Observable,
    PhasePoint,
    TraceWords,
    conjugate_momentum,
    g_entry,
    hamiltonian,
    momentum_component,
    parse_observable,
    phase_point,
    trace_word,
)
from .brackets import (
    CANONICAL,
    QUADRATIC,
    BracketSelector,
    jacobi_residual,
    lie_derivative_bracket,
    pb,
    pb1,
    pb2,
    shift_derivation,
)
from .flows import (
    FlowSpec,
    conservation_report,
    convergence_order,
    explicit_flow,
    flow_spec,
    numeric_flow,
    spectral_numeric_flow,
)
from .reduction import (
    ReducedObservable,
    ReducedPoint,
    SliceObservable,
    SpectralReduced,
    TangentUpdate,
    antihermitian_flow_field,
    embed,
    extend_invariant,
    gauge_field,
    hermitian_flow_field,
    lifted_gradient,
    minus_pb1,
    minus_pb2,
    power_flow_field,
    project_to_slice,
    red_pb1,
    red_pb2,
    reduced_point,
    reduced_vector_field,
    restrict_minus,
    restrict_plus,
)
from .spin import (
    SpinCoordinates,
    SpinFunction,
    from_spin,
    gauge_transform,
    spin_coordinates,
    spin_hamiltonian_1,
    spin_hamiltonian_2,
    spin_pb1,
    to_spin,
)
from .double import (
    DoublePoint,
    double_pb,
    double_point,
    psi_inverse,
    psi_map,
    rho,
    verify_transport,
)
from .verify import VerificationConfig, VerificationReport, run_suite

__version__ = "0.1.0"
