"""Reference wire backend: serves the demo model suite over stdio.

Run as ``python -m textcf.wire_server``; pair it with the wire client by
using that command line as the endpoint. One JSON request per input line,
one JSON response per output line (see wire.py for the field reference).
Intended for protocol tests and as a template for real backends.
"""

from __future__ import annotations

import argparse
import json
import sys

from .backends import ModelSuite, build_demo_suite
from .tokenizer import TokenSequence


def _handle(suite: ModelSuite, request: dict) -> dict:
    op = request.get("op")
    if op == "info":
        classifier = suite.classifier
        return {"num_classes": classifier.num_classes,
                "mask_token": suite.filler_pretrained.mask_token,
                "dimension": suite.embedder.dimension,
                "capabilities": {
                    "attention": classifier.capabilities.exposes_attention,
                    "cls_embedding": classifier.capabilities.exposes_cls_embedding,
                },
                "vocabulary": list(suite.filler_pretrained.vocabulary)}
    if op == "predict_proba":
        if "texts" in request:
            probs = suite.classifier.predict_proba_batch(request["texts"])
            return {"probs": [[float(p) for p in row] for row in probs]}
        probs = suite.classifier.predict_proba(request["text"])
        return {"probs": [float(p) for p in probs]}
    if op == "fill_mask":
        masked = TokenSequence.from_tokens(request["tokens"])
        pairs = suite.filler_pretrained.top_candidates(masked, int(request["k"]))
        return {"candidates": [[token, float(score)] for token, score in pairs]}
    if op == "embed":
        vector = suite.embedder.embed(request["text"])
        return {"vector": [float(v) for v in vector]}
    if op == "perplexity":
        return {"value": float(suite.fluency.perplexity(request["text"]))}
    if op == "attention":
        weights = suite.classifier.attention(TokenSequence.from_tokens(request["tokens"]))
        return {"weights": [float(w) for w in weights]}
    if op == "cls_embedding":
        vector = suite.classifier.cls_embedding(request["text"])
        return {"vector": [float(v) for v in vector]}
    raise ValueError(f"unknown op {op!r}")


def serve(suite: ModelSuite, reader, writer) -> None:
    """Answer requests from ``reader`` on ``writer`` until EOF."""
    for line in reader:
        if not line.strip():
            continue
        request_id = None
        try:
            request = json.loads(line)
            request_id = request.get("id")
            response = {"id": request_id, "result": _handle(suite, request)}
        except Exception as error:  # protocol surface: report, do not die
            response = {"id": request_id, "error": str(error)}
        writer.write(json.dumps(response, ensure_ascii=False) + "\n")
        writer.flush()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="serve the reference model suite over stdio")
    parser.add_argument("--corpus", help="plain-text or JSONL corpus to fit "
                                         "the fluency scorer and filler on")
    args = parser.parse_args(argv)
    texts = None
    if args.corpus:
        from .corpus import load_corpus
        texts = [instance.text for instance in load_corpus(args.corpus)]
    serve(build_demo_suite(texts), sys.stdin, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
