import numpy as np
import pytest

from textcf.errors import (CapabilityError, DegenerateEmbeddingError,
                           InputError)
from textcf.gateways import (EmbedderGateway, GatewayCapabilities,
                             ReferenceLinearClassifier)
from textcf.semantics import (CLASSIFIER_CLS_EMBEDDING, SENTENCE_EMBEDDER,
                              SimilaritySource, distance, similarity)


class TableEmbedder(EmbedderGateway):
    def __init__(self, table):
        self.table = {k: np.asarray(v, dtype=float) for k, v in table.items()}
        self.calls = 0

    @property
    def dimension(self):
        return len(next(iter(self.table.values())))

    def embed(self, text):
        self.calls += 1
        return self.table[text]


def source_for(table):
    return SimilaritySource.from_embedder(TableEmbedder(table))


def test_self_similarity_is_one():
    source = source_for({"x": [1.0, 2.0, 3.0]})
    assert similarity("x", "x", source) == 1.0
    assert distance("x", "x", source) == 0.0


def test_orthogonal_and_antipodal():
    source = source_for({"a": [1.0, 0.0], "b": [0.0, 1.0], "c": [-1.0, 0.0]})
    assert abs(similarity("a", "b", source)) < 1e-12
    assert abs(distance("a", "b", source) - 0.5) < 1e-12
    assert similarity("a", "c", source) == -1.0
    assert distance("a", "c", source) == 1.0


def test_cosine_is_scale_invariant():
    source = source_for({"a": [2.0, 1.0], "b": [4.0, 2.0]})
    assert abs(similarity("a", "b", source) - 1.0) < 1e-12


def test_cosine_clamped_to_unit_interval():
    # parallel vectors can give 1 + eps in floating point; must stay <= 1
    source = source_for({"a": [0.1, 0.2, 0.3], "b": [0.3, 0.6, 0.9]})
    assert -1.0 <= similarity("a", "b", source) <= 1.0


def test_zero_norm_embedding_is_an_error():
    source = source_for({"a": [1.0, 0.0], "z": [0.0, 0.0]})
    with pytest.raises(DegenerateEmbeddingError):
        similarity("a", "z", source)


def test_embeddings_are_cached():
    embedder = TableEmbedder({"a": [1.0, 0.0], "b": [0.0, 1.0]})
    source = SimilaritySource.from_embedder(embedder)
    similarity("a", "b", source)
    similarity("a", "b", source)
    similarity("b", "a", source)
    assert embedder.calls == 2


def test_cls_source_uses_classifier_logits():
    clf = ReferenceLinearClassifier({"good": [0.0, 2.0], "bad": [2.0, 0.0]})
    source = SimilaritySource.from_classifier(clf)
    assert source.kind == CLASSIFIER_CLS_EMBEDDING
    # logits("good") = [0, 2], logits("bad") = [2, 0] -> cosine 0
    assert abs(similarity("good", "bad", source)) < 1e-12


def test_cls_source_requires_capability():
    class NoCls(ReferenceLinearClassifier):
        @property
        def capabilities(self):
            return GatewayCapabilities(exposes_attention=True,
                                       exposes_cls_embedding=False)

    with pytest.raises(CapabilityError):
        SimilaritySource.from_classifier(NoCls({"a": [0.1, -0.1]}))


def test_source_constructor_validation(embedder):
    with pytest.raises(InputError):
        SimilaritySource("nonsense", embedder=embedder)
    with pytest.raises(InputError):
        SimilaritySource(SENTENCE_EMBEDDER)
    with pytest.raises(InputError):
        SimilaritySource(CLASSIFIER_CLS_EMBEDDING)


def test_distance_halves_the_cosine_gap():
    rng = np.random.default_rng(3)
    for _ in range(100):
        table = {"a": rng.normal(size=5), "b": rng.normal(size=5)}
        source = source_for(table)
        s = similarity("a", "b", source)
        assert abs(distance("a", "b", source) - 0.5 * (1.0 - s)) < 1e-12
        assert 0.0 <= distance("a", "b", source) <= 1.0
