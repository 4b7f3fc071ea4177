"""Type, structural and dimensional synthesis of tree-topology robotic hands."""

__version__ = "0.1.0"

from .enumeration import Atlas, EnumerationQuery, required_joints, topology_search
from .fk import Task, build_fk, generate_task
from .solvability import contact_mobility, is_solvable
from .synthesis import SolverConfig, SynthesisResult, solve, verify
from .topology import TreeTopology, canonical_form, format_notation, parse_notation

__all__ = [
    "Atlas",
    "EnumerationQuery",
    "SolverConfig",
    "SynthesisResult",
    "Task",
    "TreeTopology",
    "build_fk",
    "canonical_form",
    "contact_mobility",
    "format_notation",
    "generate_task",
    "is_solvable",
    "parse_notation",
    "required_joints",
    "solve",
    "topology_search",
    "verify",
]
