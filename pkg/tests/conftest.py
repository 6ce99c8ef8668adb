import numpy as np
import pytest

from textcf.gateways import (EmbedderGateway, HashedBagEmbedder,
                             NgramFluencyScorer, ReferenceLinearClassifier,
                             ReferenceUnigramFiller)


class OneHotEmbedder(EmbedderGateway):
    """Collision-free test embedder: each known token gets its own axis.

    Unknown tokens share the last axis, so fixtures should list their full
    vocabulary. Makes cosine values exact rational numbers.
    """

    def __init__(self, vocabulary):
        self._axes = {token: i for i, token in enumerate(vocabulary)}
        self._dim = len(self._axes) + 1

    @property
    def dimension(self):
        return self._dim

    def embed(self, text):
        vec = np.zeros(self._dim)
        for token in text.split():
            vec[self._axes.get(token, self._dim - 1)] += 1.0
        return vec


class CountingProvider:
    """Wraps an importance provider and counts compute() calls."""

    def __init__(self, inner):
        self.inner = inner
        self.provider_id = inner.provider_id
        self.calls = 0

    def compute(self, tokens, classifier, target, seed=0):
        self.calls += 1
        return self.inner.compute(tokens, classifier, target, seed=seed)


def make_random_fixture(rng, vocab_size=12, n_tokens=None, scale=2.0):
    """Random linear 2-class fixture: classifier, filler, and an origin text.

    Weights are antisymmetric ([w, -w]) so single tokens carry clear class
    signal and many single-token flips exist.
    """
    vocab = [f"w{i}" for i in range(vocab_size)]
    weights = {}
    for token in vocab:
        w = float(rng.normal(0.0, scale))
        weights[token] = [w, -w]
    classifier = ReferenceLinearClassifier(weights)
    frequencies = {token: float(rng.uniform(0.1, 1.0)) for token in vocab}
    filler = ReferenceUnigramFiller(frequencies)
    if n_tokens is None:
        n_tokens = int(rng.integers(3, 9))
    text = " ".join(vocab[int(rng.integers(vocab_size))] for _ in range(n_tokens))
    return classifier, filler, text


def make_scenario_fixture():
    """Hand-verified sentiment fixture for the trace-shape test.

    "i hate this movie" classifies negative; replacing "hate" with "love"
    flips it decisively, with "watch" landing close below the acceptance
    threshold so it becomes the cheapest rejected node.
    """
    classifier = ReferenceLinearClassifier({
        "hate": [2.0, -2.0],
        "love": [-2.2, 2.2],
        "watch": [-0.4, 0.4],
        "like": [-0.3, 0.3],
        "movie": [0.1, -0.1],
    })
    filler = ReferenceUnigramFiller({
        "love": 0.30, "watch": 0.25, "like": 0.20, "film": 0.15, "movie": 0.10,
    })
    embedder = OneHotEmbedder(
        ("i", "hate", "this", "movie", "love", "watch", "like", "film"))
    return classifier, filler, embedder


@pytest.fixture
def linear_classifier():
    return ReferenceLinearClassifier({
        "good": [-1.5, 1.5],
        "bad": [1.5, -1.5],
        "great": [-2.0, 2.0],
        "awful": [2.0, -2.0],
        "fine": [-0.5, 0.5],
    })


@pytest.fixture
def unigram_filler():
    return ReferenceUnigramFiller(
        {"good": 0.4, "bad": 0.3, "great": 0.2, "awful": 0.1})


@pytest.fixture
def embedder():
    return HashedBagEmbedder(64)


@pytest.fixture
def scorer():
    return NgramFluencyScorer(corpus=["the movie was good",
                                      "the movie was bad",
                                      "a good movie"])
