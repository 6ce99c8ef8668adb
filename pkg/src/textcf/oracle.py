"""Exhaustive single-edit baseline used to cross-check the search."""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .gateways import ClassifierGateway, MaskFillerGateway
from .objective import (Candidate, SearchConfig, cost_from_parts,
                        is_accepted_probs, resolve_target)
from .semantics import SimilaritySource, distance
from .tokenizer import tokenize

MAX_ORACLE_TOKENS = 12


def brute_force_depth1(origin: str, classifier: ClassifierGateway,
                       filler: MaskFillerGateway, config: SearchConfig,
                       source: SimilaritySource,
                       target: int | None = None,
                       max_tokens: int = MAX_ORACLE_TOKENS) -> Candidate | None:
    """Cheapest acceptable single-token substitution, or None.

    Scores every (position, topk proposal) pair exhaustively; the winner
    minimizes cost with ties broken by position, then vocabulary index.
    Enumeration is capped at ``max_tokens`` tokens to keep it a test-scale
    tool.

    Raises:
        InputError: when the origin exceeds the token cap.
    """
    tokens = tokenize(origin)
    if len(tokens) > max_tokens:
        raise InputError(f"oracle capped at {max_tokens} tokens, "
                         f"got {len(tokens)}")
    target = resolve_target(classifier, origin, target)

    best: Candidate | None = None
    best_key: tuple[float, int, int] | None = None
    for position in range(len(tokens)):
        original = tokens.tokens[position]
        masked = tokens.substitute(position, filler.mask_token)
        for token, _score in filler.top_candidates(masked, config.topk):
            if token == original:
                continue
            sequence = tokens.substitute(position, token)
            probs = np.asarray(classifier.predict_proba(sequence.text), dtype=float)
            if not is_accepted_probs(probs, target, config.margin):
                continue
            dist = distance(sequence.text, origin, source)
            cost = cost_from_parts(float(probs[target]), dist, config.alpha)
            key = (cost, position, filler.vocabulary_index(token))
            if best_key is None or key < best_key:
                best_key = key
                best = Candidate(text=sequence.text, tokens=sequence,
                                 probs=probs, target_prob=float(probs[target]),
                                 dist=dist, cost=cost, depth=1,
                                 edited_positions=frozenset({position}))
    return best
