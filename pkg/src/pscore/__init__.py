"""Reputation scores for venues, research groups, and authors.

The model takes nothing but the publication records of a chosen set of
reference groups. Reputation flows around a two-block Markov chain:
venues split their mass among the groups publishing there, and groups
spread theirs over venues by a mix of publication volume and publication
breadth. Venue scores are the stationary flow into each venue; groups and
arbitrary author sets are ranked against those scores.
"""

from .chain import (
    ConnectivityReport,
    ReputationChain,
    build_alpha,
    build_beta,
    build_chain,
    build_reduced,
    check_irreducible,
)
from .counts import CountsTable, aggregate, parse_author_counts
from .errors import (
    ChainError,
    ConvergenceError,
    DatasetError,
    DegenerateInputError,
    DisconnectedChainError,
    InternalError,
    ParameterError,
    ParseError,
    PScoreError,
    ValidationError,
)
from .records import (
    Dataset,
    PublicationRecord,
    build_dataset,
    filter_by_year,
    normalize_name,
    parse_records,
    serialize_records,
)
from .scoring import (
    Ranking,
    RankEntry,
    ScoreVector,
    author_score,
    group_consistency_check,
    make_ranking,
    normalize_max_one,
    rank_authors,
    rank_groups,
    ranking_to_json,
    ranking_to_tsv,
    venue_scores,
)
from .solver import StationaryDistribution, gth_steady_state, power_iteration

__version__ = "0.1.0"

__all__ = [
    "ChainError",
    "ConnectivityReport",
    "ConvergenceError",
    "CountsTable",
    "Dataset",
    "DatasetError",
    "DegenerateInputError",
    "DisconnectedChainError",
    "InternalError",
    "ParameterError",
    "ParseError",
    "PScoreError",
    "PublicationRecord",
    "RankEntry",
    "Ranking",
    "ReputationChain",
    "ScoreVector",
    "StationaryDistribution",
    "ValidationError",
    "__version__",
    "aggregate",
    "author_score",
    "build_alpha",
    "build_beta",
    "build_chain",
    "build_dataset",
    "build_reduced",
    "check_irreducible",
    "filter_by_year",
    "group_consistency_check",
    "gth_steady_state",
    "make_ranking",
    "normalize_max_one",
    "normalize_name",
    "parse_author_counts",
    "parse_records",
    "power_iteration",
    "rank_authors",
    "rank_groups",
    "ranking_to_json",
    "ranking_to_tsv",
    "serialize_records",
    "venue_scores",
]
