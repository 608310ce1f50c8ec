"""FRAT proof toolkit: parse, elaborate to LRAT/LPR, convert and check."""

__version__ = "0.1.0"

from .clauses import FormatError, InputFormula, parse_dimacs, write_dimacs
from .frat import Step, iter_steps, iter_steps_backward, parse_steps, write_steps
from .checker import CheckFailure, ClauseDB, check_hint, propagate, prove_pr, prove_rup
from .elaborate import ElaborationError, Report, elaborate, elaborate_bytes
from .convert import ConversionError, dpr_to_frat, from_pr, strip_frat, transcode
from .lrat import Verdict, check_lrat, check_lrat_files

__all__ = [
    "FormatError", "InputFormula", "parse_dimacs", "write_dimacs",
    "Step", "iter_steps", "iter_steps_backward", "parse_steps", "write_steps",
    "CheckFailure", "ClauseDB", "check_hint", "propagate", "prove_pr", "prove_rup",
    "ElaborationError", "Report", "elaborate", "elaborate_bytes",
    "ConversionError", "dpr_to_frat", "from_pr", "strip_frat", "transcode",
    "Verdict", "check_lrat", "check_lrat_files",
]
