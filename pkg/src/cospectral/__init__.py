"""Exact multivariate spectra for graphs, with similarity certificates.

The package decides cospectrality of graphs and digraphs under a family of
determinantal pencils, reconstructs the orthogonal or unitary similarity
behind a positive verdict whenever one exists, and searches labeled graph
families for mates.  Arithmetic is exact wherever a verdict depends on it;
floating point appears only in the constructive reconstruction path, which
reports its residuals.
"""

from .exact import (
    ExactMatrix,
    GaussianRational,
    InconsistentSystemError,
    RankDeficientError,
    char_poly,
    det,
    level,
    rank,
    solve_exact,
)
from .graphs import (
    Digraph,
    Graph,
    GraphFormatError,
    VertexPartition,
    adjacency,
    complement,
    degree_partition,
    encode_digraph6,
    encode_graph6,
    hermitian_adjacency,
    parse_digraph6,
    parse_graph6,
    parse_graph_line,
    permutation_matrix,
)
from .pencils import (
    BudgetExceededError,
    CospectralityResult,
    Pencil,
    SpectrumRelation,
    are_cospectral,
    build_pencil,
    cospectrality_check,
    fingerprint,
    pencil_equal,
)
from .similarity import (
    ReconstructionResult,
    SimilarityCertificate,
    extended_walk_matrix,
    orthogonal_similarity_exists,
    quotient_graph,
    reconstruct_q_constructive,
    reconstruct_q_exact,
    verify_claim_diagnostics,
)
from .snf import SmithDecomposition, last_invariant_factor, smith_normal_form
from .search import (
    MateRecord,
    SearchConfig,
    SearchReport,
    TheoremContradiction,
    bucket_and_match,
    digraph_offdiagonal_probe,
    enumerate_graphs,
    is_isomorphic,
    run_search,
    verify_theorem_equivalence,
    write_mates_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ExactMatrix",
    "GaussianRational",
    "InconsistentSystemError",
    "RankDeficientError",
    "char_poly",
    "det",
    "level",
    "rank",
    "solve_exact",
    "Digraph",
    "Graph",
    "GraphFormatError",
    "VertexPartition",
    "adjacency",
    "complement",
    "degree_partition",
    "encode_digraph6",
    "encode_graph6",
    "hermitian_adjacency",
    "parse_digraph6",
    "parse_graph6",
    "parse_graph_line",
    "permutation_matrix",
    "BudgetExceededError",
    "CospectralityResult",
    "Pencil",
    "SpectrumRelation",
    "are_cospectral",
    "build_pencil",
    "cospectrality_check",
    "fingerprint",
    "pencil_equal",
    "ReconstructionResult",
    "SimilarityCertificate",
    "extended_walk_matrix",
    "orthogonal_similarity_exists",
    "quotient_graph",
    "reconstruct_q_constructive",
    "reconstruct_q_exact",
    "verify_claim_diagnostics",
    "SmithDecomposition",
    "last_invariant_factor",
    "smith_normal_form",
    "MateRecord",
    "SearchConfig",
    "SearchReport",
    "TheoremContradiction",
    "bucket_and_match",
    "digraph_offdiagonal_probe",
    "enumerate_graphs",
    "is_isomorphic",
    "run_search",
    "verify_theorem_equivalence",
    "write_mates_csv",
    "__version__",
]
