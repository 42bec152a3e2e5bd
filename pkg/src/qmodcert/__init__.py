"""Positivity certificates, norm brackets and representation search for
quadratic modules in free and group *-algebras."""
from .certify import extract_certificate, hull_project_membership, member_eps, norm_bracket, norm_upper, ucp_check
from .freealg import FreePoly, MatrixTuple, Signature, evaluate, format_poly, parse_poly
from .qmodule import ModuleDescription, module_from_dict, preset, truncate
from .repsearch import SearchConfig, search, search_lower
from .sdp import SdpProblem, solve

__version__ = "0.1.0"

__all__ = [
    "FreePoly", "MatrixTuple", "Signature", "evaluate", "format_poly", "parse_poly",
    "ModuleDescription", "module_from_dict", "preset", "truncate",
    "SdpProblem", "solve",
    "member_eps", "norm_upper", "norm_bracket", "extract_certificate", "ucp_check", "hull_project_membership",
    "SearchConfig", "search", "search_lower",
]
