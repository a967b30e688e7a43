"""A workbench for finite first-order model theory at desk scale:
signatures and finite structures, a formula language with a model checker,
embedding search, bounded model classes, amalgamation with machine-checked
certificates, existential completeness, and the zig-zag machinery that
combines two theories over a shared base language.

Everything is decided only up to explicit size bounds and reported as such.
"""

from .core import (
    DiagramLiteral,
    EMPTY_SIGNATURE,
    FinStructure,
    Signature,
    are_isomorphic,
    atomic_diagram,
    canonical_form,
    expand,
    permute,
    reduct,
    sig_intersect,
    sig_minus,
    sig_union,
    transport,
)
from .logic import (
    Formula,
    Theory,
    classify,
    evaluate,
    existentialize,
    models_theory,
    parse_formula,
    parse_sentence,
    pretty,
    theory_union,
)
from .morphisms import (
    Morphism,
    automorphisms,
    compose,
    enumerate_embeddings,
    identity,
    squares_commute,
    verify_embedding,
)
from .classes import ModelClass, contains, enumerate_models, iterate
from .amalgamation import (
    AmalgamCertificate,
    SubcompatibleWitness,
    AmalgamationSpan,
    check_ap,
    check_ap_over_pushouts,
    check_superamalgamation,
    enumerate_quintuples,
    find_amalgam,
    find_pushout_extending_amalgam,
    find_subcompatible_witness,
    is_strong,
    image_union_amalgam,
    base_expansion_amalgam,
    pushout_extension_amalgam,
    pushout_empty,
    pushout_relational,
    verify_certificate,
)
from .ec import EcVerdict, check_ec_compatibility, ec_closure, is_ec
from .chain import (
    ChainState,
    FusionResult,
    detect_stabilization,
    fuse,
    combine_over_base,
    saturate_ec,
    union_ec_extension,
    amalgamate_union,
    zigzag_step,
)
from .verdicts import Bounds, ClosureFailure, Inapplicable, NoneUpTo, NotYet

__version__ = "0.1.0"
