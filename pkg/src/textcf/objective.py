"""Cost function, acceptance test, and target-class resolution.

A candidate's cost is -(p(target | candidate) - alpha * d(candidate, origin)):
lower is better, the probability term pulls toward the target class, the
distance term pulls back toward the origin. A candidate is accepted when the
classifier actually flips to the target class AND the target probability
clears 1/k + margin.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InputError
from .gateways import ClassifierGateway
from .semantics import SENTENCE_EMBEDDER, SOURCE_KINDS, SimilaritySource, distance
from .tokenizer import TokenSequence

STRATEGIES = ("static", "evolutive")
IMPORTANCE_PROVIDERS = ("attention", "agnostic", "random")
FILLER_CHOICES = ("pretrained", "finetuned")


@dataclass
class SearchConfig:
    """All hyperparameters of one counterfactual search run.

    Defaults are the tuned desk-scale settings; ``relaxed()`` trades margin
    and alpha down for harder classification tasks.
    """

    alpha: float = 0.3
    topk: int = 50
    beam_width: int = 4
    mask_div: int = 4
    margin: float = 0.15
    strategy: str = "evolutive"
    early_stop: int = 1000
    p: int = 3
    seed: int = 0
    similarity_source: str = SENTENCE_EMBEDDER
    importance_provider: str = "attention"
    filler: str = "pretrained"

    def validate(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise InputError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.topk < 1:
            raise InputError(f"topk must be >= 1, got {self.topk}")
        if self.beam_width < 1:
            raise InputError(f"beam_width must be >= 1, got {self.beam_width}")
        if self.mask_div < 1:
            raise InputError(f"mask_div must be >= 1, got {self.mask_div}")
        if self.mask_div > self.topk:
            raise InputError(f"mask_div ({self.mask_div}) cannot exceed topk ({self.topk})")
        if self.margin < 0.0:
            raise InputError(f"margin must be >= 0, got {self.margin}")
        if self.strategy not in STRATEGIES:
            raise InputError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.early_stop < 0:
            raise InputError(f"early_stop must be >= 0, got {self.early_stop}")
        if self.p < 1:
            raise InputError(f"p must be >= 1, got {self.p}")
        if self.similarity_source not in SOURCE_KINDS:
            raise InputError(f"similarity_source must be one of {SOURCE_KINDS}, "
                             f"got {self.similarity_source!r}")
        if self.importance_provider not in IMPORTANCE_PROVIDERS:
            raise InputError(f"importance_provider must be one of {IMPORTANCE_PROVIDERS}, "
                             f"got {self.importance_provider!r}")
        if self.filler not in FILLER_CHOICES:
            raise InputError(f"filler must be one of {FILLER_CHOICES}, got {self.filler!r}")

    def validate_for(self, num_classes: int) -> None:
        """Full validation including the classifier-dependent margin bound."""
        self.validate()
        bound = (num_classes - 1) / num_classes
        if self.margin > bound:
            raise InputError(f"margin {self.margin} exceeds (k-1)/k = {bound} "
                             f"for k = {num_classes}")

    @classmethod
    def relaxed(cls, **overrides) -> "SearchConfig":
        """Preset for harder tasks: margin 0.05, alpha 0.15."""
        base = {"margin": 0.05, "alpha": 0.15}
        base.update(overrides)
        return cls(**base)

    @classmethod
    def from_dict(cls, data: dict) -> "SearchConfig":
        """Build from a config mapping; unknown keys are hard errors.

        A silent typo in a hyperparameter name would invalidate a whole
        sweep, so nothing is ignored. The optional ``profile`` key selects
        the base preset ("default" or "relaxed") before overrides apply.
        """
        data = dict(data)
        profile = data.pop("profile", "default")
        if profile == "default":
            config = cls()
        elif profile == "relaxed":
            config = cls.relaxed()
        else:
            raise InputError(f"unknown profile {profile!r}; use 'default' or 'relaxed'")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        for key, value in data.items():
            setattr(config, key, value)
        config.validate()
        return config

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


@dataclass(eq=False)
class Candidate:
    """A node of the search tree: an edited text with its evaluation.

    ``cost`` always equals -(target_prob - alpha * dist) under the run's
    config; ``depth`` counts edits from the root (the origin text itself has
    depth 0 and no parent).
    """

    text: str
    tokens: TokenSequence
    probs: np.ndarray
    target_prob: float
    dist: float
    cost: float
    depth: int
    edited_positions: frozenset[int] = field(default_factory=frozenset)
    parent: Optional["Candidate"] = None


def resolve_target(classifier: ClassifierGateway, origin: str,
                   requested: int | None = None) -> int:
    """Pick the target class: the request if given, else the runner-up class.

    Raises:
        InputError: if the request is out of range or equals the predicted
            class of the origin (a counterfactual must change the label).
    """
    probs = classifier.predict_proba(origin)
    predicted = int(np.argmax(probs))
    if requested is not None:
        if not 0 <= requested < classifier.num_classes:
            raise InputError(f"target {requested} out of range for "
                             f"{classifier.num_classes} classes")
        if requested == predicted:
            raise InputError(f"target {requested} equals the predicted class of the origin")
        return int(requested)
    order = np.argsort(-probs, kind="stable")
    return int(order[1])


def cost_from_parts(target_prob: float, dist: float, alpha: float) -> float:
    return -(target_prob - alpha * dist)


def cost(candidate_text: str, origin: str, target: int, alpha: float,
         source: SimilaritySource, classifier: ClassifierGateway) -> float:
    """-(p(target | candidate) - alpha * d(candidate, origin))."""
    prob = float(classifier.predict_proba(candidate_text)[target])
    return cost_from_parts(prob, distance(candidate_text, origin, source), alpha)


def is_accepted_probs(probs: np.ndarray, target: int, margin: float) -> bool:
    """Acceptance from a precomputed probability vector."""
    threshold = 1.0 / len(probs) + margin
    return int(np.argmax(probs)) == target and float(probs[target]) >= threshold


def is_accepted(candidate_text: str, target: int, margin: float,
                classifier: ClassifierGateway) -> bool:
    """True iff the label flips to ``target`` with probability >= 1/k + margin."""
    return is_accepted_probs(classifier.predict_proba(candidate_text), target, margin)
