"""Event logic graph toolkit.

Builds a directed cyclic graph of events from dependency-parsed text:
extraction of (subject, predicate, object) event tuples, ordered
co-occurrence statistics and transition probabilities, supervised
sequential-relation classification, rule-based causal mention extraction,
similarity merging, narrative cloze evaluation, and a read-only query
service.
"""

from .corpus import Document, ParsedCorpus, ParsedSentence, Token, load_corpus, save_corpus
from .errors import (
    ConfigError,
    DataError,
    ElgError,
    EmptyCorpusError,
    GraphFormatError,
    MissingArtifactError,
    TrainingDivergedError,
)
from .events import EventOccurrence, EventTuple, extract_corpus_events, extract_events
from .graph import ElgGraph, EventNode, TypedEdge, load_graph, save_graph
from .pairstats import (
    FeatureVector,
    PairCounts,
    build_feature_vector,
    count_pairs,
    gather_contexts,
    pmi,
    transition_probability,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "Document",
    "ElgError",
    "ElgGraph",
    "EmptyCorpusError",
    "EventNode",
    "EventOccurrence",
    "EventTuple",
    "FeatureVector",
    "GraphFormatError",
    "MissingArtifactError",
    "PairCounts",
    "ParsedCorpus",
    "ParsedSentence",
    "Token",
    "TrainingDivergedError",
    "TypedEdge",
    "build_feature_vector",
    "count_pairs",
    "extract_corpus_events",
    "extract_events",
    "gather_contexts",
    "load_corpus",
    "load_graph",
    "pmi",
    "save_corpus",
    "save_graph",
    "transition_probability",
    "__version__",
]
