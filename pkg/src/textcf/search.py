"""Best-first search over single-token edits of an origin text.

A min-cost priority queue holds unexpanded candidates. Each iteration pops
the cheapest, orders its token positions by importance, and runs mask
inference on the beam_width most important ones. Accepted children (label
flipped to the target with enough probability mass) are collected; rejected
ones go back on the queue. The run stops once p counterfactuals are found,
the evaluation budget is spent, or the queue drains.

Importance is either computed once on the origin and reused positionally
(static; edits preserve token count, so positions stay aligned) or
recomputed for every popped candidate (evolutive). No position is frozen
after an edit: re-editing is allowed, and the visited set is what prevents
the same text from being scored twice.
"""

from __future__ import annotations

import heapq
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyProposalError, InputError
from .gateways import ClassifierGateway, MaskFillerGateway
from .importance import ImportanceProvider, ImportanceVector
from .mli import mask_language_inference
from .objective import (Candidate, SearchConfig, cost_from_parts,
                        is_accepted_probs, resolve_target)
from .semantics import SimilaritySource
from .tokenizer import tokenize

TERMINATION_REASONS = ("found_p", "early_stop", "queue_exhausted")


class CandidateQueue:
    """Min-cost priority queue; equal costs pop in insertion order."""

    def __init__(self):
        self._heap: list[tuple[float, int, Candidate]] = []
        self._counter = itertools.count()

    def __len__(self) -> int:
        return len(self._heap)

    def push(self, candidate: Candidate) -> None:
        heapq.heappush(self._heap, (candidate.cost, next(self._counter), candidate))

    def pop(self) -> Candidate:
        if not self._heap:
            raise InputError("pop from an empty candidate queue")
        return heapq.heappop(self._heap)[2]


@dataclass(frozen=True)
class TraceEdge:
    """One explored edit: parent text -> child text at one position."""

    parent: str
    child: str
    position: int
    token: str
    cost: float
    accepted: bool


@dataclass
class SearchResult:
    origin: str
    target: int
    root: Candidate
    counterfactuals: list[Candidate]
    evaluations_used: int
    terminated_by: str
    trace: list[TraceEdge] = field(default_factory=list)


def order_positions(candidate: Candidate, provider: ImportanceProvider,
                    strategy: str, root_importance: ImportanceVector | None,
                    classifier: ClassifierGateway, target: int,
                    seed: int = 0) -> list[int]:
    """All token positions of ``candidate``, most important first.

    Ties resolve to the lower index. Static reuses the root's scores (edits
    preserve length, so the alignment is positional identity); evolutive
    recomputes on the candidate's own text.
    """
    if strategy == "static":
        if root_importance is None:
            raise InputError("static strategy requires the root importance vector")
        scores = np.asarray(root_importance.scores, dtype=float)
    else:
        scores = np.asarray(provider.compute(candidate.tokens, classifier,
                                             target, seed=seed).scores, dtype=float)
    if len(scores) != len(candidate.tokens):
        raise InputError(f"importance length {len(scores)} does not match "
                         f"{len(candidate.tokens)} tokens")
    return [int(i) for i in np.argsort(-scores, kind="stable")]


def run_search(origin: str, classifier: ClassifierGateway,
               filler: MaskFillerGateway, provider: ImportanceProvider,
               config: SearchConfig, source: SimilaritySource,
               target: int | None = None, seed: int | None = None,
               record_trace: bool = True) -> SearchResult:
    """Search for up to ``config.p`` counterfactuals of ``origin``.

    ``evaluations_used`` counts mask-inference invocations, one per
    (parent, position) pair, and never exceeds ``config.early_stop``; the
    budget is checked before every invocation. Termination reasons are
    checked in the order found_p, early_stop, queue_exhausted, so a run that
    fills its quota on the same expansion that spends its budget reports
    found_p. Returned counterfactuals are the p cheapest accepted, in
    nondecreasing cost order.
    """
    config.validate_for(classifier.num_classes)
    if source.kind != config.similarity_source:
        raise InputError(f"similarity source {source.kind!r} does not match "
                         f"config {config.similarity_source!r}")
    run_seed = config.seed if seed is None else seed

    tokens = tokenize(origin)
    target = resolve_target(classifier, origin, target)
    probs = np.asarray(classifier.predict_proba(origin), dtype=float)
    root = Candidate(
        text=origin,
        tokens=tokens,
        probs=probs,
        target_prob=float(probs[target]),
        dist=0.0,
        cost=cost_from_parts(float(probs[target]), 0.0, config.alpha),
        depth=0,
    )

    root_importance = None
    if config.strategy == "static":
        root_importance = provider.compute(tokens, classifier, target, seed=run_seed)

    queue = CandidateQueue()
    queue.push(root)
    visited = {origin}
    found: list[Candidate] = []
    trace: list[TraceEdge] = []
    evaluations_used = 0

    while True:
        if len(found) >= config.p:
            terminated_by = "found_p"
            break
        if evaluations_used >= config.early_stop:
            terminated_by = "early_stop"
            break
        if not queue:
            terminated_by = "queue_exhausted"
            break
        parent = queue.pop()
        positions = order_positions(parent, provider, config.strategy,
                                    root_importance, classifier, target,
                                    seed=run_seed)
        for position in positions[:config.beam_width]:
            if evaluations_used >= config.early_stop:
                break
            evaluations_used += 1
            try:
                children = mask_language_inference(parent, position, classifier,
                                                   filler, config, origin, target,
                                                   source, visited)
            except EmptyProposalError:
                continue
            for child in children:
                accepted = is_accepted_probs(child.probs, target, config.margin)
                if record_trace:
                    trace.append(TraceEdge(parent.text, child.text, position,
                                           child.tokens.tokens[position],
                                           child.cost, accepted))
                if accepted:
                    found.append(child)
                else:
                    queue.push(child)

    found.sort(key=lambda candidate: candidate.cost)
    return SearchResult(origin=origin, target=target, root=root,
                        counterfactuals=found[:config.p],
                        evaluations_used=evaluations_used,
                        terminated_by=terminated_by, trace=trace)


def export_trace(result: SearchResult, path) -> None:
    """Write the explored edges as JSONL, one edge per line."""
    with open(path, "w", encoding="utf-8") as handle:
        for edge in result.trace:
            record = {"parent": edge.parent, "child": edge.child,
                      "position": edge.position, "token": edge.token,
                      "cost": edge.cost, "accepted": edge.accepted}
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
