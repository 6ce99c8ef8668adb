"""Evaluation metrics for counterfactual batches and their aggregation.

Five quantities per instance: success (a counterfactual was found at all,
plus a strict variant for a full quota), sparsity (normalized word-level
edit distance), similarity (embedding cosine to the origin), a perplexity
ratio as a fluency proxy, and diversity (determinant of an inverse-distance
kernel over the instance's counterfactual set).

Reporting always measures similarity through the sentence embedder, even
when the search itself scored distance through the classifier's own
embedding: the report should not depend on the model under explanation.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateEmbeddingError, GatewayError, InputError
from .gateways import EmbedderGateway, FluencyScorerGateway
from .semantics import SimilaritySource, distance, similarity

log = logging.getLogger(__name__)

CSV_COLUMNS = ("id", "n_counterfactuals", "success", "strict_success",
               "sparsity", "similarity", "best_similarity", "ppl_ratio",
               "diversity", "evaluations_used", "terminated_by")


def word_levenshtein(a: Sequence[str], b: Sequence[str]) -> int:
    """Edit distance over word sequences, unit-cost ins/del/sub."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, word_a in enumerate(a, start=1):
        current = [i]
        for j, word_b in enumerate(b, start=1):
            cost = 0 if word_a == word_b else 1
            current.append(min(previous[j] + 1,
                               current[j - 1] + 1,
                               previous[j - 1] + cost))
        previous = current
    return previous[-1]


def sparsity(origin: str, counterfactual: str) -> float:
    """Word-level edit distance divided by the origin's word count."""
    origin_words = origin.split()
    if not origin_words:
        raise InputError("sparsity needs a nonempty origin text")
    return word_levenshtein(origin_words, counterfactual.split()) / len(origin_words)


def proximity(origin: str, counterfactual: str,
              embedder: EmbedderGateway) -> float:
    """Cosine similarity of the two texts under the sentence embedder."""
    return similarity(origin, counterfactual, SimilaritySource.from_embedder(embedder))


def ppl_ratio(origin: str, counterfactual: str,
              scorer: FluencyScorerGateway) -> float:
    """perplexity(counterfactual) / perplexity(origin)."""
    base = scorer.perplexity(origin)
    if base <= 0:
        raise InputError(f"origin perplexity must be positive, got {base}")
    return scorer.perplexity(counterfactual) / base


def diversity(counterfactuals: Sequence[str], embedder: EmbedderGateway,
              lam: float = 1.0) -> float:
    """det(K) with K_ij = 1 / (lam + d(x_i, x_j)).

    Any duplicate text makes K rank-deficient, so that case returns 0.0
    exactly without touching the embedder. The diagonal is set to 1/lam
    directly (d(x, x) = 0 by definition, sparing a cosine round trip).
    """
    texts = list(counterfactuals)
    if not texts:
        raise InputError("diversity needs at least one counterfactual")
    if lam <= 0:
        raise InputError(f"lambda must be positive, got {lam}")
    if len(set(texts)) < len(texts):
        return 0.0
    source = SimilaritySource.from_embedder(embedder)
    kernel = np.empty((len(texts), len(texts)))
    for i, text_i in enumerate(texts):
        kernel[i, i] = 1.0 / lam
        for j in range(i + 1, len(texts)):
            value = 1.0 / (lam + distance(text_i, texts[j], source))
            kernel[i, j] = value
            kernel[j, i] = value
    return float(np.linalg.det(kernel))


@dataclass
class InstanceOutcome:
    """What one search produced, reduced to plain data for evaluation."""

    id: str
    origin: str
    counterfactuals: list[str]
    evaluations_used: int = 0
    terminated_by: str = ""

    @classmethod
    def from_search_result(cls, result, id: str | None = None) -> "InstanceOutcome":
        texts = [getattr(c, "text", c) for c in result.counterfactuals]
        return cls(id=id if id is not None else result.origin,
                   origin=result.origin, counterfactuals=texts,
                   evaluations_used=result.evaluations_used,
                   terminated_by=result.terminated_by)


@dataclass
class RunReport:
    """Aggregate metrics over a batch, plus the per-instance breakdown.

    Aggregates are means over instances that produced at least one
    counterfactual; they are None when no instance did. Within an instance,
    sparsity/similarity/ppl_ratio average over its counterfactuals and
    diversity is computed over the full set.
    """

    n_instances: int
    n_with_counterfactuals: int
    success_rate: float
    strict_success_rate: float
    mean_sparsity: Optional[float]
    mean_similarity: Optional[float]
    mean_best_similarity: Optional[float]
    mean_ppl_ratio: Optional[float]
    mean_diversity: Optional[float]
    per_instance: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


def _mean(values: list[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


def aggregate(outcomes: Sequence, embedder: EmbedderGateway,
              scorer: FluencyScorerGateway, lam: float = 1.0,
              requested_p: int | None = None) -> RunReport:
    """Evaluate a batch of outcomes (InstanceOutcome or SearchResult).

    Strict success means the requested quota was met: |counterfactuals| >= p
    when ``requested_p`` is given, else terminated_by == "found_p". A
    degenerate embedding or a scorer failure excludes that value with a
    logged warning instead of failing the batch.
    """
    if not outcomes:
        raise InputError("aggregate needs at least one instance")
    normalized = [item if isinstance(item, InstanceOutcome)
                  else InstanceOutcome.from_search_result(item, id=str(index))
                  for index, item in enumerate(outcomes)]

    source = SimilaritySource.from_embedder(embedder)
    per_instance: list[dict] = []
    sparsities, similarities, best_similarities = [], [], []
    ppl_ratios, diversities = [], []

    for outcome in normalized:
        texts = outcome.counterfactuals
        success = len(texts) >= 1
        if requested_p is not None:
            strict = len(texts) >= requested_p
        else:
            strict = outcome.terminated_by == "found_p"
        record = {"id": outcome.id, "n_counterfactuals": len(texts),
                  "success": success, "strict_success": strict,
                  "sparsity": None, "similarity": None,
                  "best_similarity": None, "ppl_ratio": None,
                  "diversity": None,
                  "evaluations_used": outcome.evaluations_used,
                  "terminated_by": outcome.terminated_by}
        if success:
            record["sparsity"] = float(np.mean(
                [sparsity(outcome.origin, text) for text in texts]))
            sparsities.append(record["sparsity"])

            cf_similarities = []
            for text in texts:
                try:
                    cf_similarities.append(similarity(outcome.origin, text, source))
                except DegenerateEmbeddingError as error:
                    log.warning("instance %s: similarity excluded (%s)", outcome.id, error)
            if cf_similarities:
                record["similarity"] = float(np.mean(cf_similarities))
                record["best_similarity"] = float(max(cf_similarities))
                similarities.append(record["similarity"])
                best_similarities.append(record["best_similarity"])

            ratios = []
            for text in texts:
                try:
                    ratios.append(ppl_ratio(outcome.origin, text, scorer))
                except (GatewayError, InputError) as error:
                    log.warning("instance %s: ppl_ratio excluded (%s)", outcome.id, error)
            if ratios:
                record["ppl_ratio"] = float(np.mean(ratios))
                ppl_ratios.append(record["ppl_ratio"])

            try:
                record["diversity"] = diversity(texts, embedder, lam=lam)
                diversities.append(record["diversity"])
            except DegenerateEmbeddingError as error:
                log.warning("instance %s: diversity excluded (%s)", outcome.id, error)
        per_instance.append(record)

    n_success = sum(1 for record in per_instance if record["success"])
    n_strict = sum(1 for record in per_instance if record["strict_success"])
    return RunReport(
        n_instances=len(per_instance),
        n_with_counterfactuals=n_success,
        success_rate=n_success / len(per_instance),
        strict_success_rate=n_strict / len(per_instance),
        mean_sparsity=_mean(sparsities),
        mean_similarity=_mean(similarities),
        mean_best_similarity=_mean(best_similarities),
        mean_ppl_ratio=_mean(ppl_ratios),
        mean_diversity=_mean(diversities),
        per_instance=per_instance,
    )


def write_report_json(report: RunReport, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(report.to_dict(), handle, ensure_ascii=False, indent=2)
        handle.write("\n")


def write_report_csv(report: RunReport, path) -> None:
    """One row per instance; aggregate values live in the JSON report."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for record in report.per_instance:
            writer.writerow(["" if record[column] is None else record[column]
                             for column in CSV_COLUMNS])
