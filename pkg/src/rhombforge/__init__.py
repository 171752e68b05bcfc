"""Exact rhomb substitution tilings built from edge sequences."""

from .cyclotomic import CycloInt, DomainError, make_cos_combo
from .edge import EdgeSequence, EdgeSequenceError, validate
from .geometry import Patch, SignedTile, build_substitution_tile, expand_edge, grow, signed_coverage, substitute

__version__ = "0.1.0"
