"""Wire adapter: gateways backed by an external model process.

Protocol: newline-delimited JSON over a subprocess pipe or a TCP socket.
Each request is one line {"id": n, "op": name, ...params}; the response
echoes the id and carries either "result" or "error". Text fields travel
as raw UTF-8 (never ASCII-escaped), so any unicode round-trips losslessly.

Ops and their fields:
    info            {}                        -> {num_classes, mask_token,
                                                  dimension, capabilities:
                                                  {attention, cls_embedding},
                                                  vocabulary?: [token, ...]}
    predict_proba   {text} or {texts: [...]}  -> {probs: [...] or [[...], ...]}
    fill_mask       {tokens: [...], text, k}  -> {candidates: [[token, score], ...]}
    embed           {text}                    -> {vector: [...]}
    perplexity      {text}                    -> {value: float}
    attention       {tokens: [...], text}     -> {weights: [...]}
    cls_embedding   {text}                    -> {vector: [...]}

Endpoints: "tcp://host:port" connects a socket; anything else is run as a
command line whose stdin/stdout carry the protocol.
"""

from __future__ import annotations

import itertools
import json
import shlex
import socket
import subprocess
import threading

import numpy as np

from .errors import GatewayError, InputError
from .gateways import (ClassifierGateway, EmbedderGateway,
                       FluencyScorerGateway, GatewayCapabilities,
                       MaskFillerGateway)
from .tokenizer import TokenSequence


class WireClient:
    """One connection to a backend process; safe for concurrent callers."""

    def __init__(self, endpoint: str):
        self._endpoint = endpoint
        self._lock = threading.Lock()
        self._ids = itertools.count(1)
        self._proc = None
        self._sock = None
        self._info: dict | None = None
        try:
            if endpoint.startswith("tcp://"):
                host, _, port = endpoint[len("tcp://"):].partition(":")
                if not host or not port:
                    raise InputError(f"bad tcp endpoint {endpoint!r}, "
                                     "expected tcp://host:port")
                self._sock = socket.create_connection((host, int(port)))
                self._reader = self._sock.makefile("r", encoding="utf-8", newline="\n")
                self._writer = self._sock.makefile("w", encoding="utf-8", newline="\n")
            else:
                self._proc = subprocess.Popen(
                    shlex.split(endpoint), stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE, text=True, encoding="utf-8",
                    bufsize=1)
                self._reader = self._proc.stdout
                self._writer = self._proc.stdin
        except InputError:
            raise
        except (OSError, ValueError) as error:
            raise GatewayError(f"cannot reach backend {endpoint!r}: {error}") from error

    def request(self, op: str, **params) -> dict:
        with self._lock:
            request_id = next(self._ids)
            line = json.dumps({"id": request_id, "op": op, **params},
                              ensure_ascii=False)
            try:
                self._writer.write(line + "\n")
                self._writer.flush()
                response_line = self._reader.readline()
            except (OSError, ValueError, BrokenPipeError) as error:
                raise GatewayError(f"backend transport failed: {error}") from error
        if not response_line:
            raise GatewayError("backend closed the stream")
        try:
            response = json.loads(response_line)
        except json.JSONDecodeError as error:
            raise GatewayError(f"backend sent invalid JSON: {error}") from error
        if response.get("id") != request_id:
            raise GatewayError(f"backend answered id {response.get('id')!r} "
                               f"to request {request_id}")
        if "error" in response:
            raise GatewayError(f"backend error: {response['error']}")
        if "result" not in response:
            raise GatewayError("backend response has neither result nor error")
        return response["result"]

    def info(self) -> dict:
        if self._info is None:
            self._info = self.request("info")
        return self._info

    def close(self) -> None:
        if self._sock is not None:
            self._sock.close()
        if self._proc is not None:
            if self._proc.stdin:
                self._proc.stdin.close()
            self._proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class WireClassifier(ClassifierGateway):
    def __init__(self, client: WireClient):
        self._client = client
        info = client.info()
        self._k = int(info["num_classes"])
        flags = info.get("capabilities", {})
        self._capabilities = GatewayCapabilities(
            exposes_attention=bool(flags.get("attention", False)),
            exposes_cls_embedding=bool(flags.get("cls_embedding", False)))

    @property
    def num_classes(self) -> int:
        return self._k

    @property
    def capabilities(self) -> GatewayCapabilities:
        return self._capabilities

    def predict_proba(self, text: str) -> np.ndarray:
        result = self._client.request("predict_proba", text=text)
        return np.asarray(result["probs"], dtype=float)

    def predict_proba_batch(self, texts: list[str]) -> np.ndarray:
        result = self._client.request("predict_proba", texts=list(texts))
        return np.asarray(result["probs"], dtype=float)

    def attention(self, tokens: TokenSequence) -> np.ndarray:
        result = self._client.request("attention", tokens=list(tokens.tokens),
                                      text=tokens.text)
        return np.asarray(result["weights"], dtype=float)

    def cls_embedding(self, text: str) -> np.ndarray:
        result = self._client.request("cls_embedding", text=text)
        return np.asarray(result["vector"], dtype=float)


class WireMaskFiller(MaskFillerGateway):
    def __init__(self, client: WireClient):
        self._client = client
        info = client.info()
        self._mask_token = str(info["mask_token"])
        self._vocab = tuple(info.get("vocabulary") or ())
        self._index = {token: i for i, token in enumerate(self._vocab)}

    @property
    def mask_token(self) -> str:
        return self._mask_token

    @property
    def vocabulary(self) -> tuple[str, ...]:
        return self._vocab

    def vocabulary_index(self, token: str) -> int:
        return self._index.get(token, len(self._vocab))

    def top_candidates(self, masked: TokenSequence, k: int) -> list[tuple[str, float]]:
        if k < 1:
            raise InputError("k must be >= 1")
        n_masks = sum(1 for t in masked.tokens if t == self._mask_token)
        if n_masks != 1:
            raise InputError(f"expected exactly one mask sentinel, found {n_masks}")
        result = self._client.request("fill_mask", tokens=list(masked.tokens),
                                      text=masked.text, k=int(k))
        return [(str(token), float(score)) for token, score in result["candidates"]]


class WireEmbedder(EmbedderGateway):
    def __init__(self, client: WireClient):
        self._client = client
        self._dim = int(client.info()["dimension"])

    @property
    def dimension(self) -> int:
        return self._dim

    def embed(self, text: str) -> np.ndarray:
        result = self._client.request("embed", text=text)
        return np.asarray(result["vector"], dtype=float)


class WireFluencyScorer(FluencyScorerGateway):
    def __init__(self, client: WireClient):
        self._client = client

    def perplexity(self, text: str) -> float:
        return float(self._client.request("perplexity", text=text)["value"])


def wire_suite(endpoint: str):
    """A full ModelSuite speaking to one backend process.

    The backend decides what "pretrained" versus "finetuned" means; both
    filler slots point at the same wire filler.
    """
    from .backends import ModelSuite
    client = WireClient(endpoint)
    filler = WireMaskFiller(client)
    return ModelSuite(classifier=WireClassifier(client),
                      filler_pretrained=filler,
                      filler_finetuned=filler,
                      embedder=WireEmbedder(client),
                      fluency=WireFluencyScorer(client))
