"""LF-to-hereditary-Harrop compiler and execution toolkit.

The pieces, in dependency order:

* `lfsyntax` / `parser` / `lfcheck`: dependently typed signatures --
  terms, contexts, normalization, and the type checker.
* `hohh` / `translate` / `printer`: the simply typed target logic, the
  two signature translations, and concrete program output.
* `engine`: depth-first proof search with backtracking and pattern
  unification over the translated programs.
* `extract` / `pipeline` / `bench` / `cli`: turning answers back into
  checked objects, and the batch front ends.

The names re-exported here cover the common load-translate-solve-verify
loop; everything else is a direct module import away.
"""

from lf2hh.lfcheck import check_context, check_object, infer_kind, infer_type
from lf2hh.lfsyntax import LfContext, beta_normalize, canonicalize, is_canonical, to_str
from lf2hh.parser import parse_query, parse_signature
from lf2hh.pipeline import (
    LoadedSignature,
    PipelineError,
    QueryOutcome,
    WitnessResult,
    load_signature,
    prepare_query,
    solve_query,
)
from lf2hh.printer import print_formula, print_program, print_term
from lf2hh.extract import DecodeError, decode, verify_witness
from lf2hh.translate import (
    TranslateOptions,
    TranslationResult,
    simplify_top,
    translate_query,
    translate_signature,
)

__version__ = "0.1.0"

__all__ = [
    "DecodeError",
    "LfContext",
    "LoadedSignature",
    "PipelineError",
    "QueryOutcome",
    "TranslateOptions",
    "TranslationResult",
    "WitnessResult",
    "beta_normalize",
    "canonicalize",
    "check_context",
    "check_object",
    "decode",
    "infer_kind",
    "infer_type",
    "is_canonical",
    "load_signature",
    "parse_query",
    "parse_signature",
    "prepare_query",
    "print_formula",
    "print_program",
    "print_term",
    "simplify_top",
    "solve_query",
    "to_str",
    "translate_query",
    "translate_signature",
    "verify_witness",
]
