"""Skeleton-driven model checking, bisimulation and standard translation for atomic and molecular logics."""

from .bisim import (
    BisimFamily,
    Clause,
    ClauseSet,
    DirectedPair,
    bisimilar,
    generate_clauses,
    maximal_bisimulation,
    per_vertex_preserves,
    preserves,
    verify_family,
)
from .fol import associated_structure, fol_eval, st_translate
from .presets import PRESET_NAMES, preset
from .semantics import CModel, Evaluator, PointedModel, complement_check, interpret, satisfies
from .skeletons import (
    AtomicSkeleton,
    ConnectiveSet,
    MolecularConnective,
    Permutation,
    associated_atomics,
    boolean_negation,
    decomposition_tree,
    is_complete_for_conj_disj,
    is_uniform,
    validate_skeleton,
)
from .specfile import format_spec, parse_spec
from .syntax import enumerate_formulas, negate, parse, pretty

__version__ = "0.1.0"
