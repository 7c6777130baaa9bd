"""Taxonomy text classification with joint explicit/implicit models."""

from .corpus import (
    Category,
    Document,
    Taxonomy,
    TokenizerConfig,
    build_taxonomy,
    load_documents,
    load_taxonomy,
    prune_taxonomy,
    save_documents,
    tokenize,
)
from .vectorize import CorpusStats, SparseVector, TfIdfModel, cosine, fit
from .centroids import (
    CentroidModel,
    build_centroids,
    classify_cosine,
    merge_descendants,
)
from .embeddings import (
    EmbeddingStore,
    TrainConfig,
    TrainResult,
    category_key,
    load_word2vec_text,
    ns_pair_loss,
    ns_pair_loss_and_grads,
    save_word2vec_text,
    train_skipgram,
    word_cosine,
)
from .category_vectors import (
    ComposedVector,
    all_category_vectors,
    category_vector_algebraic,
    document_vector_algebraic,
    nearest_words,
)
from .category_embedding import (
    CandidateIndex,
    build_candidate_index,
    disambiguate,
    train_category_embedding,
)
from .similarity import (
    Measure,
    NeighborIndex,
    SimilarityClassifier,
    SimilarityConfig,
    phi,
    sim_category_word,
    sim_dirac,
    sim_word,
)
from .evaluation import (
    AblationBundle,
    EvalReport,
    RelevanceJudgments,
    ablation_run,
    evaluate_macro,
    format_table,
    precision_at_k,
)

__version__ = "0.1.0"

__all__ = [
    "AblationBundle",
    "CandidateIndex",
    "Category",
    "CentroidModel",
    "ComposedVector",
    "CorpusStats",
    "Document",
    "EmbeddingStore",
    "EvalReport",
    "Measure",
    "NeighborIndex",
    "RelevanceJudgments",
    "SimilarityClassifier",
    "SimilarityConfig",
    "SparseVector",
    "Taxonomy",
    "TfIdfModel",
    "TokenizerConfig",
    "TrainConfig",
    "TrainResult",
    "ablation_run",
    "all_category_vectors",
    "build_candidate_index",
    "build_centroids",
    "build_taxonomy",
    "category_key",
    "category_vector_algebraic",
    "classify_cosine",
    "cosine",
    "disambiguate",
    "document_vector_algebraic",
    "evaluate_macro",
    "fit",
    "format_table",
    "load_documents",
    "load_taxonomy",
    "load_word2vec_text",
    "merge_descendants",
    "nearest_words",
    "ns_pair_loss",
    "ns_pair_loss_and_grads",
    "phi",
    "precision_at_k",
    "prune_taxonomy",
    "save_documents",
    "save_word2vec_text",
    "sim_category_word",
    "sim_dirac",
    "sim_word",
    "tokenize",
    "train_category_embedding",
    "train_skipgram",
    "word_cosine",
]
