"""Quantitative invariants of Lagrangian links on surfaces.

Library + CLI for the computable layer of link spectral invariants:
exact monotonicity arithmetic, disc-class bookkeeping, disc potentials and
their critical points, Hamiltonian quadrature on sphere/disc models,
axiom-derived interval bounds for the spectral invariants, and the derived
quasimorphism quantities (defects, scl and fragmentation lower bounds).
"""

from .surface_link import (
    Surface,
    Circle,
    Region,
    SurfaceLink,
    ValidationReport,
    MonotonicityReport,
    LinkError,
    validate_link,
    check_monotone,
    infer_eta,
    lambda_closed_form,
    build_parallel_link,
    build_equidistributed_sequence,
    random_valid_link,
    link_to_dict,
    link_from_dict,
)
from .homology import (
    DiscClass,
    ClassInvariants,
    CoverData,
    class_invariants,
    check_monotonicity_identity,
    riemann_hurwitz,
)
from .potential import (
    DiscPotential,
    Monomial,
    CriticalPoint,
    build_potential,
    eval_grad_hess,
    find_critical_points,
    handleslide,
    handleslide_point,
    clifford_potential,
)
from .hamiltonian import (
    Hamiltonian,
    PLHamiltonian,
    PiecewiseLinearProfile,
    CallableZProfile,
    RadialHamiltonian,
    GridHamiltonian,
    HamiltonianError,
    ResolutionError,
    integrate,
    integrate_exact,
    mean_normalize,
    hofer_norm,
    compose,
    compose_iterate,
    bar,
    TwistProfile,
    power_cutoff_profile,
    twist_truncations,
    twist_hamiltonian,
    embed_in_cap,
    ham_to_dict,
    ham_from_dict,
)
from .spectral import (
    SpectralBound,
    DerivationStep,
    NotLinkAdapted,
    exact_link_adapted,
    bound,
    subadditivity_refine,
    hofer_consistency,
    calabi_property_table,
    zeta_divergence_table,
)
from .quasimorphism import (
    DefectBound,
    defect_bound,
    QuasiValue,
    homogenize,
    duality_check,
    scl_lower_bound,
    band_hamiltonian,
    independence_witness,
    quasicalabi_check,
    fragmentation_links,
    fragmentation_difference,
)

__version__ = "0.1.0"
