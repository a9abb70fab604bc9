"""Exact topological recursion and WKB quantization on rational spectral curves.

The package computes the symmetric correlation differentials of the residue
recursion on a rationally parametrized double cover, integrates them to
their potentials, assembles the all-order WKB expansion, and certifies that
the resulting operator annihilates the formal solution -- everything in
exact rational arithmetic, so every identity is checked with zero tolerance.
"""

from ._rat import INF, Q, rat, rat_str
from .algebra import (
    LaurentSeries,
    Mobius,
    Polynomial,
    RationalFunction,
    antiderivative,
    evaluate,
    newton_local_inverse,
    normalize,
    partial_fractions,
    residue_at,
    residue_at_infinity,
    series_expand,
)
from .curve import (
    EXACT,
    SERIES,
    OneForm,
    RamificationPoint,
    SpectralCurve,
    bergman_sigma_diagonal,
    bergman_value,
    build_curve,
    cauchy_kernel,
    recursion_kernel,
)
from .engine import (
    ComputeResult,
    CurveConfig,
    load_config,
    run_compute,
    run_verify,
    write_outputs,
)
from .errors import SpectralRecError
from .expressions import parse_expression
from .free_energy import (
    FreeEnergy,
    FreeEnergyTable,
    df_via_differential_recursion,
    diagonal_specialize,
    integrate_correlator,
    verify_free_energies,
)
from .recursion import (
    Correlator,
    CorrelatorTable,
    compute_w03,
    compute_w11,
    compute_wgn,
    pole_order_bound,
    stable_pairs,
    unstable_forms,
    verify_correlators,
)
from .wkb import (
    QuantumCurveReport,
    WKBExpansion,
    build_wkb_expansion,
    leading_wkb_forms,
    ode_series_oracle,
    rational_preimage,
    schrodinger_potential,
    verify_schrodinger,
    wkb_term_from_free_energies,
    wkb_term_recursion_step,
    xchart_series,
)

__version__ = "0.1.0"
