"""Numerical laboratory for period-doubling cascades of one-dimensional maps."""
from .bifurcation import (DELTA, DELTA_QUARTIC, BifurcationEvent, BifurcationSequence,
                          CascadeNotFound, DeltaReport, InvalidBracket, LostOrbit, ParamPath,
                          TineWidths, accumulation_ratio, alpha_rank, bifurcation_sequence,
                          delta_report, directional_bifurcations, feigenvalue_for_degree,
                          find_bifurcation, superstable_sequence, tine_widths,
                          width_ratio_table)
from .catalog import catalog, feigenmap, names, picture10
from .dynamics import (Chaotic, CriticalPoint, Escaped, LocalScanReport, Periodic, Unresolved,
                       classify_attractor, find_critical_points, geometric_mean,
                       lyapunov_estimate, principal_critical_point, scan_local_attractors)
from .expr import ParseError, UnknownIdentifier, parse, to_source
from .family import (FamilyError, MapFamily, TransformKind, eval_jet, parse_family, parse_map,
                     transform)
from .harness import (CaseResult, PermeabilityCase, SuiteReport, multimax_report,
                      parse_suite, permeability_test, random_unimodal_family, run_suite,
                      universality_scan)
from .jets import DomainFault, Jet3
from .schwarzian import (ReadinessReport, SchwarzianPole, SignProfile,
                         check_bifurcation_readiness, schwarzian_at, sign_profile)

__version__ = "0.1.0"
