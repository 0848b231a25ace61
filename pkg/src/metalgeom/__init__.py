"""Chart-level verification of metallic structures, Codazzi couplings and conjugate connections."""

from .fields import parse_expression, evaluate, diff_expression, jet_at, Jet1
from .kernel import MetallicParams
from .numeric import FLOAT, RATIONAL, TolerancePolicy, get_backend

__all__ = [
    "parse_expression", "evaluate", "diff_expression", "jet_at", "Jet1",
    "MetallicParams", "FLOAT", "RATIONAL", "TolerancePolicy", "get_backend",
]
__version__ = "0.1.0"
