"""Seeded random search over the hyperparameter space.

Each trial draws a full SearchConfig from the space (fixed draw order, so a
seed pins the whole trial sequence), generates counterfactuals for every
corpus instance, and records the aggregate metrics. The best trial minimizes
the rank sum over four objectives: success rate, similarity, and diversity
maximized, sparsity minimized. Ties share the average rank; a missing metric
(no counterfactual found anywhere) ranks worst.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backends import ModelSuite
from .corpus import CorpusInstance
from .errors import InputError, TextcfError
from .importance import make_provider
from .metrics import InstanceOutcome, aggregate
from .objective import SearchConfig
from .search import run_search
from .semantics import CLASSIFIER_CLS_EMBEDDING, SENTENCE_EMBEDDER

OBJECTIVES = (("success_rate", "max"), ("mean_similarity", "max"),
              ("mean_diversity", "max"), ("mean_sparsity", "min"))
_OVERRIDABLE = {"p", "early_stop"}


@dataclass(frozen=True)
class SweepSpace:
    """Ranges (inclusive) and choice sets the sampler draws from."""

    alpha: tuple[float, float] = (0.0, 1.0)
    topk: tuple[int, int] = (10, 100)
    beam_width: tuple[int, int] = (2, 6)
    mask_div: tuple[int, int] = (1, 4)
    margin: tuple[float, float] = (0.05, 0.3)
    strategy: tuple[str, ...] = ("static", "evolutive")
    importance: tuple[str, ...] = ("random", "attention")
    filler: tuple[str, ...] = ("pretrained", "finetuned")
    similarity_source: tuple[str, ...] = (SENTENCE_EMBEDDER,
                                          CLASSIFIER_CLS_EMBEDDING)

    def validate(self) -> None:
        for name in ("alpha", "topk", "beam_width", "mask_div", "margin"):
            low, high = getattr(self, name)
            if low > high:
                raise InputError(f"sweep range {name} is empty: {low} > {high}")
        if self.alpha[0] < 0.0 or self.alpha[1] > 1.0:
            raise InputError("alpha range must stay within [0, 1]")
        if self.margin[0] < 0.0:
            raise InputError("margin range must be nonnegative")
        for name in ("topk", "beam_width", "mask_div"):
            if getattr(self, name)[0] < 1:
                raise InputError(f"{name} range must start at >= 1")
        # mask_div <= topk must hold for every possible draw, not on average.
        if self.mask_div[1] > self.topk[0]:
            raise InputError(f"mask_div upper bound {self.mask_div[1]} exceeds "
                             f"topk lower bound {self.topk[0]}")
        for name in ("strategy", "importance", "filler", "similarity_source"):
            if not getattr(self, name):
                raise InputError(f"choice set {name} is empty")

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpace":
        data = dict(data)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown sweep space keys: {sorted(unknown)}")
        kwargs = {key: tuple(value) for key, value in data.items()}
        space = cls(**kwargs)
        space.validate()
        return space

    def sample(self, rng: np.random.Generator) -> SearchConfig:
        """One config; the draw order is fixed and part of the format."""
        config = SearchConfig(
            alpha=float(rng.uniform(*self.alpha)),
            topk=int(rng.integers(self.topk[0], self.topk[1] + 1)),
            beam_width=int(rng.integers(self.beam_width[0], self.beam_width[1] + 1)),
            mask_div=int(rng.integers(self.mask_div[0], self.mask_div[1] + 1)),
            margin=float(rng.uniform(*self.margin)),
            strategy=self.strategy[int(rng.integers(len(self.strategy)))],
            importance_provider=self.importance[int(rng.integers(len(self.importance)))],
            filler=self.filler[int(rng.integers(len(self.filler)))],
            similarity_source=self.similarity_source[
                int(rng.integers(len(self.similarity_source)))],
            seed=int(rng.integers(0, 2 ** 31 - 1)),
        )
        config.validate()
        return config


def _rank(values: list[float]) -> list[float]:
    """Ascending ranks starting at 0; equal values share the average rank."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for t in range(i, j + 1):
            ranks[order[t]] = (i + j) / 2
        i = j + 1
    return ranks


def rank_sums(trial_metrics: list[dict]) -> list[float]:
    """Rank sum per trial over OBJECTIVES; lower is better."""
    sums = [0.0] * len(trial_metrics)
    for name, sense in OBJECTIVES:
        values = []
        for metrics in trial_metrics:
            value = metrics.get(name)
            if value is None:
                values.append(float("inf"))
            else:
                values.append(-value if sense == "max" else value)
        for index, rank in enumerate(_rank(values)):
            sums[index] += rank
    return sums


def best_trial(trial_metrics: list[dict]) -> int:
    """Index of the minimum rank sum; ties go to the earliest trial."""
    sums = rank_sums(trial_metrics)
    return min(range(len(sums)), key=lambda i: (sums[i], i))


def run_sweep(instances: list[CorpusInstance], suite: ModelSuite,
              space: SweepSpace, trials: int, seed: int,
              lam: float = 1.0, overrides: dict | None = None) -> dict:
    """Run ``trials`` sampled configs over the corpus.

    ``overrides`` may pin the non-sampled fields p and early_stop after
    sampling (handy for bounding desk-scale sweeps); any other key is an
    error because it would silently leave the declared space.

    Returns {"trials": [...], "best_trial": index, "rank_sums": [...]}.
    """
    if trials < 1:
        raise InputError(f"trials must be >= 1, got {trials}")
    if not instances:
        raise InputError("empty corpus")
    overrides = dict(overrides or {})
    bad = set(overrides) - _OVERRIDABLE
    if bad:
        raise InputError(f"only {sorted(_OVERRIDABLE)} may be overridden, "
                         f"got {sorted(bad)}")
    space.validate()

    rng = np.random.default_rng(seed)
    records = []
    for trial in range(trials):
        config = space.sample(rng)
        for key, value in overrides.items():
            setattr(config, key, value)
        config.validate_for(suite.classifier.num_classes)
        provider = make_provider(config.importance_provider,
                                 mask_token=suite.filler_for(config).mask_token)
        source = suite.similarity_source_for(config)
        outcomes = []
        for instance in instances:
            try:
                result = run_search(instance.text, suite.classifier,
                                    suite.filler_for(config), provider, config,
                                    source, target=instance.target,
                                    record_trace=False)
            except TextcfError:
                # e.g. a degenerate embedding under this trial's similarity
                # source: that instance fails for this trial, the sweep goes on
                outcomes.append(InstanceOutcome(id=instance.id,
                                                origin=instance.text,
                                                counterfactuals=[],
                                                terminated_by="error"))
                continue
            outcomes.append(InstanceOutcome.from_search_result(result,
                                                               id=instance.id))
        report = aggregate(outcomes, suite.embedder, suite.fluency,
                           lam=lam, requested_p=config.p)
        records.append({"trial": trial, "config": config.to_dict(),
                        "metrics": {
                            "success_rate": report.success_rate,
                            "strict_success_rate": report.strict_success_rate,
                            "mean_sparsity": report.mean_sparsity,
                            "mean_similarity": report.mean_similarity,
                            "mean_best_similarity": report.mean_best_similarity,
                            "mean_ppl_ratio": report.mean_ppl_ratio,
                            "mean_diversity": report.mean_diversity,
                        }})
    metrics = [record["metrics"] for record in records]
    return {"trials": records, "best_trial": best_trial(metrics),
            "rank_sums": rank_sums(metrics)}
