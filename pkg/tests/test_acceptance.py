"""Acceptance gate: one test per criterion, one printed line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the PASS/FAIL lines
(without -s pytest shows them only for failures). Criterion 9 needs an
external backend on TEXTCF_WIRE_ENDPOINT and is skipped otherwise; it is
directional, not a formula check, so its thresholds depend on the quality
of whatever backend is attached.
"""

import json
import math
import os
import time
from contextlib import contextmanager

import numpy as np
import pytest

import textcf.search as search_module
from textcf.backends import build_suite
from textcf.cli import main
from textcf.errors import DegenerateEmbeddingError
from textcf.gateways import (EmbedderGateway, NgramFluencyScorer,
                             ReferenceLinearClassifier)
from textcf.importance import (AttentionImportance, make_provider,
                               occlusion_importance, sampled_shapley)
from textcf.metrics import (diversity, ppl_ratio, proximity, sparsity,
                            word_levenshtein)
from textcf.objective import (SearchConfig, cost, cost_from_parts,
                              is_accepted_probs)
from textcf.oracle import brute_force_depth1
from textcf.search import export_trace, run_search
from textcf.semantics import SimilaritySource, distance, similarity
from textcf.tokenizer import tokenize

from conftest import (CountingProvider, OneHotEmbedder, make_random_fixture,
                      make_scenario_fixture)

TOL = 1e-9


@contextmanager
def criterion(number, label):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number} {label}: FAIL")
        raise
    print(f"ACCEPTANCE {number} {label}: PASS")


class _VectorEmbedder(EmbedderGateway):
    def __init__(self, table):
        self._table = {k: np.asarray(v, dtype=float) for k, v in table.items()}
        self._dim = len(next(iter(self._table.values())))

    @property
    def dimension(self):
        return self._dim

    def embed(self, text):
        return self._table[text]


def test_criterion_1_formula_exactness():
    with criterion(1, "formula exactness"):
        start = time.perf_counter()

        embedder = _VectorEmbedder({"base": [1.0, 0.0], "same": [2.0, 0.0],
                                    "orth": [0.0, 1.0], "anti": [-1.0, 0.0],
                                    "tilt": [1.0, 1.0]})
        source = SimilaritySource.from_embedder(embedder)

        # similarity and distance
        assert abs(similarity("base", "same", source) - 1.0) < TOL
        assert abs(similarity("base", "orth", source) - 0.0) < TOL
        assert abs(similarity("base", "anti", source) - (-1.0)) < TOL
        assert abs(distance("base", "same", source) - 0.0) < TOL
        assert abs(distance("base", "orth", source) - 0.5) < TOL
        assert abs(distance("base", "anti", source) - 1.0) < TOL
        s_tilt = 1.0 / math.sqrt(2.0)
        assert abs(distance("base", "tilt", source) - 0.5 * (1 - s_tilt)) < TOL

        # cost, both from parts and end to end
        assert abs(cost_from_parts(0.9, 0.2, 0.3) - (-(0.9 - 0.3 * 0.2))) < TOL
        clf = ReferenceLinearClassifier({"base": [1.0, -1.0],
                                         "anti": [-1.0, 1.0]})
        p1 = float(clf.predict_proba("anti")[1])
        want = -(p1 - 0.3 * 1.0)
        assert abs(cost("anti", "base", 1, 0.3, source, clf) - want) < TOL

        # acceptance threshold: argmax AND probability >= 1/k + margin
        assert is_accepted_probs(np.array([0.3, 0.7]), 1, 0.2)
        assert not is_accepted_probs(np.array([0.31, 0.69]), 1, 0.2)
        assert not is_accepted_probs(np.array([0.8, 0.2]), 1, 0.1)
        assert is_accepted_probs(np.array([0.2, 0.5, 0.3]), 1,
                                 0.5 - 1.0 / 3.0 - 1e-12)

        # sparsity
        assert abs(sparsity("I love this movie", "I love this movie")) < TOL
        assert abs(sparsity("I love this movie", "I hate this movie") - 0.25) < TOL
        assert abs(sparsity("a b c", "a b c d") - 1.0 / 3.0) < TOL

        # proximity through an embedder gateway
        assert abs(proximity("base", "same", embedder) - 1.0) < TOL
        assert abs(proximity("base", "orth", embedder)) < TOL
        assert abs(proximity("base", "anti", embedder) + 1.0) < TOL

        # perplexity ratio: identity, and order invariance under a
        # uniform (unigram) scorer
        scorer = NgramFluencyScorer(corpus=["the movie was good"])
        assert abs(ppl_ratio("the movie was good", "the movie was good",
                             scorer) - 1.0) < TOL
        uniform = NgramFluencyScorer(vocabulary={"a", "b", "c"})
        assert abs(ppl_ratio("a b c", "c b a", uniform) - 1.0) < TOL

        # diversity determinant
        assert abs(diversity(["base"], embedder) - 1.0) < TOL
        assert abs(diversity(["base", "base"], embedder) - 0.0) < TOL
        assert abs(diversity(["base", "anti"], embedder) - 0.75) < TOL

        elapsed = time.perf_counter() - start
        assert elapsed < 1.0, f"criterion 1 took {elapsed:.2f}s"


def test_criterion_2_soundness_200_searches():
    with criterion(2, "soundness of 200 seeded searches"):
        start = time.perf_counter()
        rng = np.random.default_rng(2024)
        config = SearchConfig(alpha=0.3, topk=8, beam_width=3, mask_div=3,
                              margin=0.1, p=3, early_stop=30)
        provider = make_provider("agnostic")
        checked = 0
        budgets_respected = True
        for _ in range(200):
            classifier, filler, text = make_random_fixture(
                rng, vocab_size=int(rng.integers(6, 13)))
            embedder = OneHotEmbedder(tuple(filler.vocabulary))
            source = SimilaritySource.from_embedder(embedder)
            result = run_search(text, classifier, filler, provider, config,
                                source, record_trace=False)
            budgets_respected &= result.evaluations_used <= config.early_stop
            threshold = 1.0 / classifier.num_classes + config.margin
            for candidate in result.counterfactuals:
                fresh = classifier.predict_proba(candidate.text)
                assert int(np.argmax(fresh)) == result.target
                assert float(fresh[result.target]) >= threshold
                checked += 1
        assert budgets_respected
        assert checked > 100, f"only {checked} counterfactuals to verify"
        elapsed = time.perf_counter() - start
        assert elapsed < 30.0, f"criterion 2 took {elapsed:.2f}s"


def test_criterion_3_depth1_oracle_equivalence():
    with criterion(3, "depth-1 oracle equivalence on 50 fixtures"):
        start = time.perf_counter()
        rng = np.random.default_rng(31)
        agreements = 0
        for _ in range(50):
            vocab_size = int(rng.integers(4, 21))
            n_tokens = int(rng.integers(3, 9))
            classifier, filler, text = make_random_fixture(
                rng, vocab_size=vocab_size, n_tokens=n_tokens)
            embedder = OneHotEmbedder(tuple(filler.vocabulary))
            source = SimilaritySource.from_embedder(embedder)
            config = SearchConfig(alpha=0.3, margin=0.1, p=1,
                                  topk=vocab_size, mask_div=vocab_size,
                                  beam_width=n_tokens, early_stop=n_tokens)
            oracle = brute_force_depth1(text, classifier, filler, config,
                                        source)
            result = run_search(text, classifier, filler,
                                make_provider("agnostic"), config, source,
                                record_trace=False)
            if oracle is None:
                assert result.counterfactuals == []
            else:
                assert result.counterfactuals, \
                    f"oracle found a flip for {text!r} but the search did not"
                assert result.counterfactuals[0].cost == oracle.cost
                agreements += 1
        assert agreements >= 10, f"only {agreements}/50 fixtures had flips"
        elapsed = time.perf_counter() - start
        assert elapsed < 60.0, f"criterion 3 took {elapsed:.2f}s"


def test_criterion_4_budget_and_byte_determinism(tmp_path):
    with criterion(4, "budget ceiling and byte-identical outputs"):
        # budget ceiling across a spread of budgets on the scenario fixture
        classifier, filler, embedder = make_scenario_fixture()
        source = SimilaritySource.from_embedder(embedder)
        for budget in (0, 1, 2, 3, 7, 50):
            config = SearchConfig(alpha=0.3, topk=5, beam_width=2, mask_div=2,
                                  margin=0.2, p=4, early_stop=budget)
            result = run_search("i hate this movie", classifier, filler,
                                AttentionImportance(), config, source,
                                target=1, record_trace=False)
            assert result.evaluations_used <= budget

        # byte-identical generate, evaluate, and sweep outputs
        corpus = tmp_path / "corpus.jsonl"
        corpus.write_text(
            '{"id": "a", "text": "i hate this movie"}\n'
            '{"id": "b", "text": "the plot was terrible and boring"}\n',
            encoding="utf-8")
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(
            {"p": 2, "early_stop": 40, "topk": 20, "beam_width": 2,
             "mask_div": 2, "margin": 0.05, "seed": 1}), encoding="utf-8")
        space_path = tmp_path / "space.json"
        space_path.write_text(json.dumps(
            {"space": {"alpha": [0.1, 0.5], "topk": [10, 15],
                       "beam_width": [2, 2], "mask_div": [1, 2],
                       "margin": [0.05, 0.1],
                       "similarity_source": ["sentence_embedder"]},
             "overrides": {"p": 1, "early_stop": 10}}), encoding="utf-8")

        for run in ("r1", "r2"):
            base = tmp_path / run
            base.mkdir()
            assert main(["generate", "--corpus", str(corpus),
                         "--config", str(config_path),
                         "--out", str(base / "gen.jsonl")]) == 0
            assert main(["evaluate", "--generation", str(base / "gen.jsonl"),
                         "--corpus", str(corpus),
                         "--out", str(base / "report")]) == 0
            assert main(["sweep", "--corpus", str(corpus),
                         "--space", str(space_path),
                         "--trials", "2", "--seed", "9",
                         "--out", str(base / "sweep")]) == 0

        names = ("gen.jsonl", "report.json", "report.csv", "report.png",
                 "sweep.jsonl", "sweep.json", "sweep.png")
        for name in names:
            first = (tmp_path / "r1" / name).read_bytes()
            second = (tmp_path / "r2" / name).read_bytes()
            assert first == second, f"{name} differs between identical runs"


def test_criterion_5_scenario_trace_reconstruction(tmp_path):
    with criterion(5, "hand-built scenario trace reconstruction"):
        classifier, filler, embedder = make_scenario_fixture()
        config = SearchConfig(alpha=0.3, topk=5, beam_width=2, mask_div=2,
                              margin=0.2, p=2, early_stop=1000,
                              importance_provider="attention")
        result = run_search("i hate this movie", classifier, filler,
                            AttentionImportance(), config,
                            SimilaritySource.from_embedder(embedder),
                            target=1)
        path = tmp_path / "trace.jsonl"
        export_trace(result, path)
        edges = [json.loads(line) for line in
                 path.read_text(encoding="utf-8").splitlines()]

        # the flip to "i love this movie" is accepted at margin 0.2
        first_accepted = next(e for e in edges if e["accepted"])
        assert first_accepted["child"] == "i love this movie"
        assert first_accepted["parent"] == "i hate this movie"

        # the next expansion starts from the lowest-cost rejected node
        parents = []
        for edge in edges:
            if edge["parent"] not in parents:
                parents.append(edge["parent"])
        assert len(parents) >= 2
        round1_rejected = [e for e in edges
                           if e["parent"] == "i hate this movie"
                           and not e["accepted"]]
        cheapest = min(round1_rejected, key=lambda e: e["cost"])
        assert parents[1] == cheapest["child"] == "i watch this movie"

        assert result.terminated_by == "found_p"
        assert [c.text for c in result.counterfactuals] == \
            ["i love this movie", "i watch this love"]


def test_criterion_6_attribution_sanity():
    with criterion(6, "occlusion top-1 and exact Shapley"):
        # occlusion top-1 against the analytic linear top-1
        rng = np.random.default_rng(66)
        matches = 0
        for _ in range(100):
            classifier, _, text = make_random_fixture(rng)
            tokens = tokenize(text)
            probs = classifier.predict_proba(text)
            predicted = int(np.argmax(probs))
            other = 1 - predicted
            margins = [classifier.token_weight(t)[predicted]
                       - classifier.token_weight(t)[other]
                       for t in tokens.tokens]
            vector = occlusion_importance(tokens, classifier, target=other)
            if margins[int(np.argmax(vector.scores))] == max(margins):
                matches += 1
        assert matches >= 99, f"occlusion matched only {matches}/100"

        # exhaustive sampled Shapley equals the exact two-token formula
        for trial in range(20):
            classifier, _, _ = make_random_fixture(rng, vocab_size=6,
                                                   n_tokens=2)
            text = "w0 w1"
            tokens = tokenize(text)
            predicted = int(np.argmax(classifier.predict_proba(text)))

            def value(candidate):
                return float(classifier.predict_proba(candidate)[predicted])

            v_full = value("w0 w1")
            v_a = value("w0 [MASK]")
            v_b = value("[MASK] w1")
            v_none = value("[MASK] [MASK]")
            exact = [0.5 * ((v_a - v_none) + (v_full - v_b)),
                     0.5 * ((v_b - v_none) + (v_full - v_a))]
            vector = sampled_shapley(tokens, classifier,
                                     target=1 - predicted,
                                     num_permutations=2, seed=trial)
            assert abs(vector.scores[0] - exact[0]) < TOL
            assert abs(vector.scores[1] - exact[1]) < TOL


def test_criterion_7_strategy_call_counts():
    with criterion(7, "importance strategy call counts"):
        pops = {"n": 0}
        original_pop = search_module.CandidateQueue.pop

        def counting_pop(self):
            pops["n"] += 1
            return original_pop(self)

        search_module.CandidateQueue.pop = counting_pop
        try:
            classifier, filler, embedder = make_scenario_fixture()
            source = SimilaritySource.from_embedder(embedder)
            for strategy, budget in (("static", 6), ("static", 0),
                                     ("evolutive", 6), ("evolutive", 2)):
                pops["n"] = 0
                provider = CountingProvider(AttentionImportance())
                config = SearchConfig(alpha=0.3, topk=5, beam_width=2,
                                      mask_div=2, margin=0.2, p=5,
                                      strategy=strategy, early_stop=budget,
                                      importance_provider="attention")
                run_search("i hate this movie", classifier, filler, provider,
                           config, source, target=1, record_trace=False)
                if strategy == "static":
                    assert provider.calls == 1, \
                        f"static called the provider {provider.calls} times"
                else:
                    assert provider.calls == pops["n"], \
                        (f"evolutive called the provider {provider.calls} "
                         f"times over {pops['n']} pops")
                    assert provider.calls >= 1
        finally:
            search_module.CandidateQueue.pop = original_pop


def test_criterion_8_metric_properties():
    with criterion(8, "metric properties"):
        rng = np.random.default_rng(88)
        vocab = ["a", "b", "c", "d"]

        def sample():
            return [vocab[int(rng.integers(len(vocab)))]
                    for _ in range(int(rng.integers(0, 8)))]

        for _ in range(1000):
            x, y, z = sample(), sample(), sample()
            assert word_levenshtein(x, z) <= \
                word_levenshtein(x, y) + word_levenshtein(y, z)

        embedder = _VectorEmbedder({"p": [1.0, 0.0], "q": [0.0, 1.0],
                                    "anti": [-1.0, 0.0]})
        assert diversity(["p", "q", "p"], embedder) == 0.0
        assert diversity(["p", "p"], embedder) == 0.0
        assert abs(diversity(["p", "anti"], embedder) - 0.75) < TOL


SMOKE_SENTENCES = [
    "i hate this movie and i want my money back",
    "the acting was terrible and the plot made no sense",
    "this film is a boring waste of two long hours",
    "what an awful script with flat and lifeless characters",
    "the worst movie i have seen this entire year",
    "i love this movie and its wonderful warm story",
    "the acting was brilliant and the plot kept me hooked",
    "this film is a delightful surprise from start to finish",
    "what a great script with sharp and funny dialogue",
    "the best movie i have seen this entire year",
    "i hate how dull and slow the second half gets",
    "a terrible sequel that ruins everything good about the original",
    "the love story felt fake and the ending was bad",
    "great photography but the story is boring and far too long",
    "an awful soundtrack drowns out some otherwise fine acting",
    "i like this movie despite its strange and messy plot",
    "a wonderful cast makes this simple story feel truly special",
    "the film is fine but the book was far better",
    "a bad movie saved only by one great comic scene",
    "this director makes the worst and laziest films around",
]


def test_criterion_9_wire_smoke_optional():
    endpoint = os.environ.get("TEXTCF_WIRE_ENDPOINT")
    if not endpoint:
        print("ACCEPTANCE 9 wire smoke (optional): SKIP "
              "(TEXTCF_WIRE_ENDPOINT not set)")
        pytest.skip("no wire backend attached")
    with criterion(9, "wire smoke (optional, non-binding)"):
        suite = build_suite({"backend": "wire", "endpoint": endpoint}, [])
        config = SearchConfig(alpha=0.3, topk=40, beam_width=3, mask_div=3,
                              margin=0.05, p=1, early_stop=200)
        provider = make_provider(
            "agnostic", mask_token=suite.filler_pretrained.mask_token)
        source = SimilaritySource.from_embedder(suite.embedder)
        successes = 0
        sparsities = []
        for text in SMOKE_SENTENCES:
            try:
                result = run_search(text, suite.classifier,
                                    suite.filler_pretrained, provider,
                                    config, source, record_trace=False)
            except DegenerateEmbeddingError:
                continue
            if result.counterfactuals:
                successes += 1
                sparsities.append(sparsity(text,
                                           result.counterfactuals[0].text))
        rate = successes / len(SMOKE_SENTENCES)
        mean_sparsity = float(np.mean(sparsities)) if sparsities else 1.0
        assert rate >= 0.8, f"success rate {rate:.2f} < 0.8"
        assert mean_sparsity <= 0.15, f"mean sparsity {mean_sparsity:.3f} > 0.15"
