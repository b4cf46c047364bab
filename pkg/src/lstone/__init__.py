"""Finite concept classes and the algorithmic characterizations of Littlestone classes."""
from .core import (
    ConceptClass, Domain, FiniteDistribution, LabeledExample, as_sequence,
    make_powerset, make_random, make_singletons, make_thresholds,
    class_from_spec, restrict, loss, is_realizable_seq, is_realizable_dist,
    read_class, write_class,
)
from .dims import ldim, vc_dim, threshold_dim, pattern_count, ldim_certificate, dualize
from .errors import InvalidArgument, ParseError, ProtocolError, ResourceLimit, Unrealizable

__version__ = "0.1.0"
