"""Exact-arithmetic workbench for truncated p-adic period rings.

The package provides, bottom up:

- padic: capped relative precision arithmetic over Q_p(zeta_p)
- witt: p-typical Witt vectors over small perfect bases
- series: truncated model rings B_n = F[[t]]/t^n and divided-power algebras
- complexes: Koszul complexes and cohomology over B_n
- correspond: the small Riemann-Hilbert functors between Higgs modules,
  connections, and semilinear group actions at finite truncation
- monoids: finitely generated commutative monoids, exactification, and the
  logarithmic chart bookkeeping
- cli: JSON-speaking command line front end
"""

from .padic import FieldConfig, PAdicScalar, INFINITY
from .errors import (WorkbenchError, ConfigMismatch, PrecisionExhausted,
                     DivergentSeries, TruncationOverflow, CommutationFailure,
                     NotSmall, SizeLimit)
from .witt import (WittVector, FiniteField, IntegerRing, MonomialAlgebra,
                   witt_zero, witt_one, teichmueller, witt_structure)
from .series import (ModelRing, TruncatedSeries, PDElement, PDForm,
                     pd_zero, pd_one, pd_variable, pd_multiply,
                     form_from_element, form_differential, poincare_solve)
from .complexes import (CappedMatrix, CohomologyReport, ComparisonVerdict,
                        koszul_build, cohomology_compute, complex_compare,
                        commutation_defect, dvr_smith)
from .correspond import (HiggsDatum, ConnectionDatum, GammaRepDatum,
                         HitchinPoint, SmallnessVerdict, RoundTripReport,
                         DevissageVerdict, AnnihilationVerdict,
                         hitchin_invariants, check_small_higgs,
                         check_small_rep, higgs_to_rep_closed, mic_to_rep,
                         rep_to_mic, roundtrip_check, gamma_cohomology,
                         de_rham_cohomology, compare_cohomology,
                         horizontal_poincare_solve, rep_coboundary_solve,
                         devissage_lift, annihilation_check,
                         random_higgs, random_connection, random_rep,
                         instance_to_json, instance_from_json)
from .monoids import (FGMonoid, MonoidMap, Exactification, ChartDescriptor,
                      LogBasis, free_monoid, is_integral, is_saturated,
                      surjectivity_witnesses, exactify, omega_log_basis)

__all__ = [
    "FieldConfig", "PAdicScalar", "INFINITY",
    "WorkbenchError", "ConfigMismatch", "PrecisionExhausted",
    "DivergentSeries", "TruncationOverflow", "CommutationFailure",
    "NotSmall", "SizeLimit",
    "WittVector", "FiniteField", "IntegerRing", "MonomialAlgebra",
    "witt_zero", "witt_one", "teichmueller", "witt_structure",
    "ModelRing", "TruncatedSeries", "PDElement", "PDForm",
    "pd_zero", "pd_one", "pd_variable", "pd_multiply",
    "form_from_element", "form_differential", "poincare_solve",
    "CappedMatrix", "CohomologyReport", "ComparisonVerdict",
    "koszul_build", "cohomology_compute", "complex_compare",
    "commutation_defect", "dvr_smith",
    "HiggsDatum", "ConnectionDatum", "GammaRepDatum", "HitchinPoint",
    "SmallnessVerdict", "RoundTripReport", "DevissageVerdict",
    "AnnihilationVerdict", "hitchin_invariants", "check_small_higgs",
    "check_small_rep", "higgs_to_rep_closed", "mic_to_rep", "rep_to_mic",
    "roundtrip_check", "gamma_cohomology", "de_rham_cohomology",
    "compare_cohomology", "horizontal_poincare_solve",
    "rep_coboundary_solve", "devissage_lift", "annihilation_check",
    "random_higgs", "random_connection", "random_rep",
    "instance_to_json", "instance_from_json",
    "FGMonoid", "MonoidMap", "Exactification", "ChartDescriptor",
    "LogBasis", "free_monoid", "is_integral", "is_saturated",
    "surjectivity_witnesses", "exactify", "omega_log_basis",
]

__version__ = "0.1.0"
