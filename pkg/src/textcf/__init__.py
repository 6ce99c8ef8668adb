"""Counterfactual explanations for text classifiers by guided token editing.

Given a classifier and an input text, the engine searches for minimal,
plausible, diverse edits that flip the prediction to a target class: token
importance chooses where to edit, a mask filler proposes what to write
there, and a cost balancing target probability against semantic distance
ranks the candidates in a best-first tree search.
"""

from .backends import ModelSuite, build_demo_suite, build_suite
from .corpus import CorpusInstance, load_corpus
from .errors import (CapabilityError, DegenerateEmbeddingError,
                     EmptyProposalError, GatewayError, InputError,
                     TextcfError)
from .gateways import (ClassifierGateway, EmbedderGateway,
                       FluencyScorerGateway, GatewayCapabilities,
                       HashedBagEmbedder, MaskFillerGateway,
                       NgramFluencyScorer, ReferenceLinearClassifier,
                       ReferenceUnigramFiller)
from .importance import (AttentionImportance, ImportanceProvider,
                         ImportanceVector, OcclusionImportance,
                         PrecomputedImportance, RandomImportance,
                         SampledShapleyImportance, compute_importance,
                         make_provider)
from .metrics import (InstanceOutcome, RunReport, aggregate, diversity,
                      ppl_ratio, proximity, sparsity, word_levenshtein,
                      write_report_csv, write_report_json)
from .mli import mask_language_inference
from .objective import (Candidate, SearchConfig, cost, cost_from_parts,
                        is_accepted, resolve_target)
from .oracle import brute_force_depth1
from .search import (CandidateQueue, SearchResult, TraceEdge, export_trace,
                     run_search)
from .semantics import SimilaritySource, distance, similarity
from .sweep import SweepSpace, best_trial, run_sweep
from .tokenizer import TokenSequence, detokenize, tokenize

__version__ = "0.1.0"

__all__ = [
    "AttentionImportance", "Candidate", "CandidateQueue", "CapabilityError",
    "ClassifierGateway", "CorpusInstance", "DegenerateEmbeddingError",
    "EmbedderGateway", "EmptyProposalError", "FluencyScorerGateway",
    "GatewayCapabilities", "GatewayError", "HashedBagEmbedder",
    "ImportanceProvider", "ImportanceVector", "InputError",
    "InstanceOutcome", "MaskFillerGateway", "ModelSuite",
    "NgramFluencyScorer", "OcclusionImportance", "PrecomputedImportance",
    "RandomImportance", "ReferenceLinearClassifier", "ReferenceUnigramFiller",
    "RunReport", "SampledShapleyImportance", "SearchConfig", "SearchResult",
    "SimilaritySource", "SweepSpace", "TextcfError", "TokenSequence",
    "TraceEdge", "aggregate", "best_trial", "brute_force_depth1",
    "build_demo_suite", "build_suite", "compute_importance", "cost",
    "cost_from_parts", "detokenize", "distance", "diversity", "export_trace",
    "is_accepted", "load_corpus", "make_provider",
    "mask_language_inference", "ppl_ratio", "proximity", "resolve_target",
    "run_search", "run_sweep", "similarity", "sparsity", "tokenize",
    "word_levenshtein", "write_report_csv", "write_report_json",
]
