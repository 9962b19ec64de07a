"""Keyphrase indexing with readability-based text denoising."""

from .textkit import (
    Document,
    Sentence,
    Token,
    count_syllables,
    document_from_sentences,
    document_from_text,
    is_complex_word,
    segment_sentences,
    stem,
    tokenize,
)
from .denoiser import DenoisePartition, ScoredSentence, denoise, denoise_corpus, fog_score
from .vocab import Vocabulary, VocabTerm, generality, load_vocabulary, match_phrase, node_degree
from .candidates import (
    CandidatePhrase,
    CandidateSet,
    generate_candidates,
    merge_document_frequencies,
)
from .features import (
    FEATURE_NAMES,
    FeatureVector,
    KeyphrasenessTable,
    build_keyphraseness_table,
    compute_features,
)
from .model import (
    ModelConfig,
    RankedKeyphrase,
    TrainedModel,
    extract_top_k,
    load_model,
    rank_candidates,
    save_model,
    train,
)
from .evaluation import (
    EvaluationReport,
    FoldResult,
    MatchResult,
    SweepResult,
    TTestResult,
    agreement_scores,
    cross_validate,
    error_rate,
    make_folds,
    match_keyphrases,
    paired_t_test,
    precision_recall_f,
    threshold_sweep,
)
from .cli import load_corpus, main

__version__ = "0.1.0"

__all__ = [
    "Document",
    "Sentence",
    "Token",
    "count_syllables",
    "document_from_sentences",
    "document_from_text",
    "is_complex_word",
    "segment_sentences",
    "stem",
    "tokenize",
    "DenoisePartition",
    "ScoredSentence",
    "denoise",
    "denoise_corpus",
    "fog_score",
    "Vocabulary",
    "VocabTerm",
    "generality",
    "load_vocabulary",
    "match_phrase",
    "node_degree",
    "CandidatePhrase",
    "CandidateSet",
    "generate_candidates",
    "merge_document_frequencies",
    "FEATURE_NAMES",
    "FeatureVector",
    "KeyphrasenessTable",
    "build_keyphraseness_table",
    "compute_features",
    "ModelConfig",
    "RankedKeyphrase",
    "TrainedModel",
    "extract_top_k",
    "load_model",
    "rank_candidates",
    "save_model",
    "train",
    "EvaluationReport",
    "FoldResult",
    "MatchResult",
    "SweepResult",
    "TTestResult",
    "agreement_scores",
    "cross_validate",
    "error_rate",
    "make_folds",
    "match_keyphrases",
    "paired_t_test",
    "precision_recall_f",
    "threshold_sweep",
    "load_corpus",
    "main",
    "__version__",
]
