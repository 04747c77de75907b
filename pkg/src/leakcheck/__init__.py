"""Static detection of leaked heap items via ownership constraint solving."""

from .encoder import analyze_adt_defs, encode_type, encoded_length, destructor_rtoken
from .ir import Program, load_program, parse_program, validate_program
from .pipeline import analyze_program
from .solver import solve

__version__ = "0.1.0"

__all__ = [
    "Program",
    "analyze_adt_defs",
    "analyze_program",
    "destructor_rtoken",
    "encode_type",
    "encoded_length",
    "load_program",
    "parse_program",
    "solve",
    "validate_program",
]
