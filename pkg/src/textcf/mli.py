"""Mask language inference: one masked position, scored substitute proposals.

Masks a single token of the parent candidate, asks the filler for the topk
most likely substitutes, scores every resulting full text with the cost
function, and keeps the mask_div cheapest as child candidates. The original
token is excluded (it would create a zero-progress child), and so is any
text the current run has already evaluated.
"""

from __future__ import annotations

import numpy as np

from .errors import EmptyProposalError, InputError
from .gateways import ClassifierGateway, MaskFillerGateway
from .objective import Candidate, SearchConfig, cost_from_parts
from .semantics import SimilaritySource, distance
from .tokenizer import TokenSequence


def apply_substitution(tokens: TokenSequence, position: int,
                       replacement: str) -> TokenSequence:
    """Replace one token, keeping length and the original spacing."""
    return tokens.substitute(position, replacement)


def mask_language_inference(parent: Candidate, position: int,
                            classifier: ClassifierGateway,
                            filler: MaskFillerGateway,
                            config: SearchConfig,
                            origin: str, target: int,
                            source: SimilaritySource,
                            visited: set[str] | None = None) -> list[Candidate]:
    """Children of ``parent`` that differ at exactly ``position``.

    Returns at most ``config.mask_div`` candidates in nondecreasing cost
    order; cost ties are broken by filler score (higher first) and then
    vocabulary index, which is exactly the proposal rank order. Texts in
    ``visited`` are skipped and the set is extended with every text scored
    here, so no string is cost-evaluated twice in a run.

    Raises:
        InputError: for an invalid position or mask_div > topk.
        EmptyProposalError: if the exclusions leave nothing to score; the
            caller skips this position.
    """
    tokens = parent.tokens
    if not 0 <= position < len(tokens):
        raise InputError(f"position {position} out of range for {len(tokens)} tokens")
    if config.mask_div > config.topk:
        raise InputError("mask_div cannot exceed topk")

    original = tokens.tokens[position]
    masked = tokens.substitute(position, filler.mask_token)
    proposals = filler.top_candidates(masked, config.topk)

    kept: list[tuple[int, str, TokenSequence, str]] = []
    for rank, (token, _score) in enumerate(proposals):
        if token == original:
            continue
        sequence = apply_substitution(tokens, position, token)
        text = sequence.text
        if visited is not None and text in visited:
            continue
        kept.append((rank, token, sequence, text))
    if not kept:
        raise EmptyProposalError(position)
    if visited is not None:
        visited.update(text for _, _, _, text in kept)

    probs = classifier.predict_proba_batch([text for _, _, _, text in kept])
    scored = []
    for (rank, token, sequence, text), prob_vec in zip(kept, probs):
        target_prob = float(prob_vec[target])
        dist = distance(text, origin, source)
        scored.append((cost_from_parts(target_prob, dist, config.alpha), rank,
                       token, sequence, text, prob_vec, target_prob, dist))
    scored.sort(key=lambda entry: (entry[0], entry[1]))

    children = []
    for cost, _rank, _token, sequence, text, prob_vec, target_prob, dist in scored[:config.mask_div]:
        children.append(Candidate(
            text=text,
            tokens=sequence,
            probs=np.asarray(prob_vec, dtype=float),
            target_prob=target_prob,
            dist=dist,
            cost=cost,
            depth=parent.depth + 1,
            edited_positions=parent.edited_positions | {position},
            parent=parent,
        ))
    return children
