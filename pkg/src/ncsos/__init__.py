"""Gram-matrix membership tests for the cones of sums of hermitian squares and
their cyclic closure, with exact rational certificates for ``S_{m,k}(X^2, Y^2)``."""
from .ncpoly import Poly, cyc_equiv, cyclic_reduce, format_poly, min_rotation, parse_poly
from .smk import eval_poly, random_psd, s_mk, s_mk_squares, trace_smk
from .gram import SIGMA2, THETA2, GramBasis, assemble, build_basis, extract_sos, fold_block, general_basis
from .sdp import SdpProblem, SdpSolution, Status, solve_sdp
from .exact import RatMatrix, char_poly_exact, project_affine_exact, psd_check_exact, rationalize
from .certificate import Certificate, Nonmembership, Report, verify_certificate, verify_nonmembership
from .certify import CertifyOptions, Inconclusive, certify, check_poly
from .bmvtable import StatusTable, descent_closure, load_known, render_table
from .variational import MinimizerState, grad_trace, lagrange_residuals, minimize_sphere
from .reproduce import reproduce_paper

__all__ = [
    "Poly", "cyc_equiv", "cyclic_reduce", "format_poly", "min_rotation", "parse_poly", "eval_poly",
    "random_psd", "s_mk", "s_mk_squares", "trace_smk", "SIGMA2", "THETA2", "GramBasis", "assemble",
    "build_basis", "extract_sos", "fold_block", "general_basis", "SdpProblem", "SdpSolution",
    "Status", "solve_sdp", "RatMatrix", "char_poly_exact", "project_affine_exact",
    "psd_check_exact", "rationalize", "Certificate", "Nonmembership", "Report",
    "verify_certificate", "verify_nonmembership", "CertifyOptions", "Inconclusive", "certify",
    "check_poly", "StatusTable", "descent_closure", "load_known", "render_table", "MinimizerState",
    "grad_trace", "lagrange_residuals", "minimize_sphere", "reproduce_paper",
]

__version__ = "0.1.0"
