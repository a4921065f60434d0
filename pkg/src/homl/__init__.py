"""Finite-model workbench for higher-order modal logic with positive properties."""

from .syntax import (
    HomlError, ParseError, TypeCheckError, Theory, Claim, Definition, parse_formula,
    parse_theory, parse_type, to_text, typecheck, expand_definitions, alpha_equal,
)
from .semantics import (
    BoundExceeded, Bounds, KripkeModel, evaluate, holds_globally, load_model, save_model,
    truth_set, reduce_conj_of_set,
)
from .filters import (
    count_partial_ultrafilters, hauptfilter, instantiate_filter, instantiate_ultrafilter,
)
from .corpus import VariantId, builtin_theory, builtin_theories, run_suite
from .modelfind import (
    AtWorld, Refuted, SearchConfig, SearchResult, Status, Verdict, check_bounded_validity,
    config_for, find_model, find_theory_model, verify_model, verify_proof_net,
)
from .thf_export import ThfOptions, export_thf, read_thf

__version__ = "0.1.0"
