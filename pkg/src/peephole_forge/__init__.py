"""Author peephole optimizations as before/after patterns.

From one pattern file the package emits C++ matcher snippets, IR-shape
tests, semantic fuzz reports and pairwise shadowing verdicts.
"""
from .codegen import emit_matcher_snippet, emit_pass_file
from .errors import ForgeError, LexError, PatternError, PatternSyntaxError, SolverError, UnsupportedPattern
from .metrics import ComplexityCount, Language, count_characters, count_identifiers
from .parser import parse_pattern, parse_pattern_file, parse_patterns
from .rewrite import apply_first, match_expr, semantic_fuzz_check
from .shadow import (
    ShadowVerdict,
    Verdict,
    brute_force_counterexample,
    determine_shadow,
    encode_shadow_smt,
    shadow_matrix,
)
from .testgen import derive_ir_annotations, emit_ir_test

__version__ = "0.1.0"
