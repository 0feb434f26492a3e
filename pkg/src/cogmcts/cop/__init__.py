from .instances import (
    PROBLEMS,
    MAXIMIZE,
    Dataset,
    KPInstance,
    TSPInstance,
    OPInstance,
    CVRPInstance,
    MKPInstance,
    generate_instances,
    load_dataset,
    save_dataset,
)
from .aco import ACOParams, aco_solve
from .gls import GLSParams, gls_solve, two_opt
from .kp import kp_construct, baseline_gc, gc_scorer
from .oracle import oracle_exact

__all__ = [
    "PROBLEMS", "MAXIMIZE", "Dataset", "KPInstance", "TSPInstance",
    "OPInstance", "CVRPInstance", "MKPInstance", "generate_instances",
    "load_dataset", "save_dataset", "ACOParams", "aco_solve", "GLSParams",
    "gls_solve", "two_opt", "kp_construct", "baseline_gc", "gc_scorer",
    "oracle_exact",
]
