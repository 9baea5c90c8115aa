"""Matching-dependency language: rules, matching functions and analyses."""

from .analysis import (MDAnalysis, SfaiQuery, SfaiVerdict, alhs, analyze, arhs, build_sfai_queries,
                       interactions, is_interaction_free, is_sfai, sfai_by_enumeration)
from .cq import ConjunctiveQuery, Filter, evaluate, homomorphisms
from .datalog import ModeMismatch, emit_datalog
from .mfs import (ClosureBudgetExceeded, MatchingFunctionDef, MFRegistry, MissingTableEntry, check_mf_laws,
                  closure, is_similarity_preserving, lift, subset_lattice_mf, table_mf, union_values)
from .model import (EQ, Atom, DisconnectedContext, IdentityOutsideLeadingAtoms, MatchDependency, MdError,
                    MdSyntaxError, SchemaMismatch, SimAtom, UnboundVariable, check_against, load_rules,
                    parse_md, parse_rules, render_md, render_rules)
