"""Hypergraph models and balanced partitioning for sparse matrix products.

The package models the work of multiplying two sparse {0,1} structures as a
hypergraph whose nets are matrix nonzeros, partitions that hypergraph under
a load-balance tolerance, and evaluates the interprocessor or memory-level
communication each partition implies.
"""

from .errors import (BalanceError, ConfigError, DimensionError, Error,
                     GuardError, MaskError, ParseError)
from .hypergraph import (Hypergraph, Net, Partition, Vertex, read_hgr,
                         validate, write_hgr)
from .metrics import (CONNECTIVITY, MAX_CUT, CommReport, IoTrace,
                      ScheduleTrace, comm_report, cut_sets,
                      evaluate_objective, sequential_lb, simulate_parallel,
                      simulate_sequential_blocked)
from .models import (CoarseningMap, ModelSpec, build_fine_grained,
                     build_masked, build_model, build_restricted,
                     build_spmv_finegrain, classify_parallelization, coarsen,
                     restriction_map)
from .partitioner import (PartitionConfig, geometric_partition,
                          part_weight_cap, partition_bruteforce,
                          partition_multilevel, refine_fm)
from .sparse import (MultTripleSet, NonzeroStructure, dump_matrix_market,
                     gen_erdos_renyi, gen_sa_prolongator, gen_stencil27,
                     iter_mult_triples, load_matrix_market, strip_empty,
                     symbolic_multiply, symbolic_output, transpose)

__version__ = "0.1.0"
