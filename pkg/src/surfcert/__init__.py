"""Exact certification of a conic-bundle surface over an elliptic curve.

Modules: exact_arith (Q, Q(sqrt d), F_p), poly (polynomials, resultants,
elimination), elliptic (group law, torsion), pencil (conic pencils, maps to
P^1, branch loci, the surface), local_points (local certificates and the
weak approximation witness), and config/pipeline/report/cli (the runner).
"""

from .config import PipelineConfig, builtin_config, parse_config
from .pipeline import run_pipeline
from .report import VerificationReport, emit_report

__all__ = ["PipelineConfig", "VerificationReport", "builtin_config", "emit_report", "parse_config", "run_pipeline"]
__version__ = "0.1.0"
