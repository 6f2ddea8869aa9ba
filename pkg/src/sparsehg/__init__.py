"""Relative counting measures, uniformity seminorms and removal experiments
on finite k-uniform hypergraphs."""

from .counting import count_hom, hom_density, iter_homs, relative_density
from .errors import InconsistencyError, ValidationError
from .functions import TupleFunction, constant, cylinder, edge_indicator
from .hypergraph import Hypergraph, build, complete, empty, random_gnp
from .measures import (RelativeMeasure, fubini_worst_deviation, integrate, iterated_integrate,
                       measure_of_set, support_count)
from .regularity import (CoordinatePartitionFamily, RemovalConfig, StepFunction,
                         conditional_expectation, energy_increment, greedy_removal,
                         removal_experiment)
from .seminorms import (CubeSystem, box_integral, gowers_multi_upper, gowers_norm,
                        gowers_norm_partial)
from .templates import Copy, IndexFamily, Template, double, minus, perp, restrict, wedge
from .audit import audit, canonicity_suite, worst_partition_deviation

__all__ = [
    "Copy", "CoordinatePartitionFamily", "CubeSystem", "Hypergraph", "InconsistencyError",
    "IndexFamily", "RelativeMeasure", "RemovalConfig", "StepFunction", "Template", "TupleFunction",
    "ValidationError", "audit", "box_integral", "build", "canonicity_suite", "complete",
    "conditional_expectation", "constant", "count_hom", "cylinder", "double", "edge_indicator",
    "empty", "energy_increment", "fubini_worst_deviation", "gowers_multi_upper", "gowers_norm",
    "gowers_norm_partial", "greedy_removal", "hom_density", "integrate", "iter_homs",
    "iterated_integrate", "measure_of_set", "minus", "perp", "random_gnp", "relative_density",
    "removal_experiment", "restrict", "support_count", "wedge", "worst_partition_deviation",
]

__version__ = "0.1.0"
