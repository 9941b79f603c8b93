"""Quantum network coding over cluster and named networks."""

from .conversion import CGate, ConversionError, ConvertedCircuitSpec, convert_network, realize_converted, spec_unitary
from .deciders import (
    IMPLEMENTABLE,
    NOT_IMPLEMENTABLE,
    UNDECIDED,
    Decision,
    decide_ladder,
    decide_probabilistic,
    four_qubit_schmidt_set,
    theorem1_form_check,
)
from .gflow import GflowResult, brute_force_focused_gflow, check_focused_gflow, find_focused_gflow
from .graphs import NetworkGraph, ResourceState, build_cluster, build_generalized, build_named, build_resource_state
from .protocols import butterfly_unitary_protocol, grail_unitary_protocol, kobayashi_butterfly, u_global

__all__ = [
    "CGate",
    "ConversionError",
    "ConvertedCircuitSpec",
    "Decision",
    "GflowResult",
    "IMPLEMENTABLE",
    "NOT_IMPLEMENTABLE",
    "NetworkGraph",
    "ResourceState",
    "UNDECIDED",
    "brute_force_focused_gflow",
    "build_cluster",
    "build_generalized",
    "build_named",
    "build_resource_state",
    "butterfly_unitary_protocol",
    "check_focused_gflow",
    "convert_network",
    "decide_ladder",
    "decide_probabilistic",
    "find_focused_gflow",
    "four_qubit_schmidt_set",
    "grail_unitary_protocol",
    "kobayashi_butterfly",
    "realize_converted",
    "spec_unitary",
    "theorem1_form_check",
    "u_global",
]
