import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from apmbench.errors import DimensionMismatchError, EmptyInputError, NoPreferenceError, TrainingError
from apmbench.personalizers import (
    Neighbor, PreferencePair, RetrievalIndex, RouterModel, RoutingLabel, build_context,
    build_preference_pair, class_to_label, generate, generate_candidates, instruction_for, judge_vector,
    label_to_class, margin_label, one_sided_label, oracle_route, regression_label, regression_targets, route,
    split_targets, train_router, two_sided_label, user_principle_scores,
)
from oracles import brute_force_margin_label, brute_force_topk

# labels use 0-based principle indices


def test_margin_label_examples():
    assert margin_label([2, 0], [0, 5]) == RoutingLabel(1, -1)
    zero = margin_label([4, 4], [4, 4])
    assert (zero.principle, zero.direction, zero.degenerate) == (0, 1, True)
    assert margin_label([5, 5], [2, 2]) == RoutingLabel(0, 1)


def test_two_sided_examples():
    assert two_sided_label([9, 4], [2, 7]) == RoutingLabel(0, 1)
    assert two_sided_label([5, 5], [5, 9]) == RoutingLabel(1, -1)
    assert two_sided_label([3, 3], [3, 3]).degenerate


def test_one_sided_examples():
    assert one_sided_label([9, 3, 6]) == RoutingLabel(0, 1)
    assert one_sided_label([5, 2]) == RoutingLabel(1, -1)
    assert one_sided_label([5.5, 5.5]).degenerate
    assert one_sided_label([5.5, 6]) == RoutingLabel(1, 1)


def test_regression_targets_order_and_round_trip():
    assert regression_targets([8], [3]).tolist() == [8, 3]
    t = regression_targets(np.arange(10), np.arange(10) + 100)
    assert t.size == 20
    sp, sm = split_targets(t)
    assert sp.tolist() == list(range(10)) and sm.tolist() == list(range(100, 110))
    assert regression_label([5, 1, 5, 5]) == RoutingLabel(0, 1)
    assert regression_label([5, 5, 5, 5]).degenerate


def test_class_mapping_round_trip():
    for c in range(20):
        lab = class_to_label(c)
        assert label_to_class(lab.principle, lab.direction) == c


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_margin_matches_brute_force(m, seed):
    rng = np.random.default_rng(seed)
    plus, minus = rng.integers(1, 11, m), rng.integers(1, 11, m)
    lab = margin_label(plus, minus)
    assert (lab.principle, lab.direction) == brute_force_margin_label(plus.tolist(), minus.tolist())


def test_user_principle_scores():
    assert user_principle_scores([1, -1, 0], [8, 8, 8]).tolist() == [8, 3, 5.5]


def test_label_dimension_checks():
    with pytest.raises(DimensionMismatchError):
        margin_label([1, 2], [1])


# -- preference pairs and oracle ----------------------------------------------

def test_preference_pair_examples():
    pair = build_preference_pair("x", ["a", "b", "c"], [3, 9, 1])
    assert (pair.preferred, pair.dispreferred, pair.degenerate) == ("b", "c", False)
    tie = build_preference_pair("x", ["a", "b"], [4, 4])
    assert (tie.preferred, tie.dispreferred, tie.degenerate) == ("a", "b", True)
    assert PreferencePair.from_record(pair.to_record()) == pair


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-30, 30), min_size=2, max_size=20))
def test_preference_pair_bounds(rewards):
    pair = build_preference_pair("x", [str(i) for i in range(len(rewards))], rewards)
    assert all(rewards[pair.best] >= r >= rewards[pair.worst] for r in rewards)
    assert pair.best != pair.worst


def test_oracle_route(gateway):
    cat = gateway.catalog
    ins = oracle_route([0.2, -0.9, 0, 0], cat)
    assert (ins.principle, ins.direction) == (1, -1) and ins.text == cat.principles[1].avoid
    with pytest.raises(NoPreferenceError):
        oracle_route([0, 0], cat)


# -- router -------------------------------------------------------------------

def test_router_separable_full_accuracy():
    rng = np.random.default_rng(0)
    x = np.vstack([rng.normal([2, 0], 0.3, (50, 2)), rng.normal([-2, 0], 0.3, (50, 2))])
    labels = [RoutingLabel(0, 1)] * 50 + [RoutingLabel(0, -1)] * 50
    model = train_router(x, labels, mode="classify", n_classes=4)
    pred = model.predict(x)
    assert [p.class_index for p in pred] == [lab.class_index for lab in labels]
    trace = model.meta["loss_trace"]
    assert all(b <= a for a, b in zip(trace, trace[1:]))


def test_router_random_labels_near_chance():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((2000, 8))
    labels = [class_to_label(c) for c in rng.integers(0, 4, 2000)]
    model = train_router(x[:1000], labels[:1000], mode="classify", n_classes=8, epochs=200)
    acc = np.mean([p.class_index == l.class_index for p, l in zip(model.predict(x[1000:]), labels[1000:])])
    assert abs(acc - 0.25) < 0.06


def test_router_regression_exact_linear():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((60, 5))
    w, b = rng.standard_normal((5, 6)), rng.standard_normal(6)
    model = train_router(x, x @ w + b, mode="regress")
    assert model.meta["max_residual"] < 1e-6
    assert np.max(np.abs(model.scores(x) - (x @ w + b))) < 1e-6


def test_router_save_load(tmp_path):
    model = RouterModel("classify", np.arange(6.0).reshape(3, 2), [0.5, -0.5], {"epochs": 1})
    model.save(tmp_path / "r.json")
    back = RouterModel.load(tmp_path / "r.json")
    assert np.array_equal(back.weights, model.weights) and back.to_record() == model.to_record()


def test_router_rejects_nonfinite():
    with pytest.raises(TrainingError):
        RouterModel("classify", np.array([[np.nan]]), [0.0])


def test_route_instruction_text(gateway):
    cat = gateway.catalog
    model = RouterModel("classify", np.zeros((2, 8)), np.eye(8)[6], {})
    ins = route(np.ones(2), model, cat)
    assert (ins.principle, ins.direction, ins.text) == (3, 1, cat.principles[3].follow)


# -- retrieval ----------------------------------------------------------------

def test_retrieval_examples():
    v = np.eye(3)
    idx = RetrievalIndex(["u2", "u0", "u1"], v, ["p2", "p0", "p1"])
    top, flag = idx.search(np.array([0, 1.0, 0]), k=1)
    assert top[0].user_id == "u0" and top[0].similarity == pytest.approx(1) and not flag
    idx2 = RetrievalIndex(["a", "b"], np.array([[1.0, 0], [1.0, 0]]))
    assert [n.similarity for n in idx2.search(np.array([0, 1.0]), 2)[0]] == [0, 0]
    _, flag = idx.search(np.ones(3), k=5)
    assert flag
    ties = RetrievalIndex(["b", "a", "c"], np.ones((3, 2)))
    assert [n.user_id for n in ties.search(np.array([1.0, 1.0]), 3)[0]] == ["a", "b", "c"]


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 30), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_retrieval_matches_brute_force(n, k, seed):
    rng = np.random.default_rng(seed)
    vecs = rng.standard_normal((n, 6))
    ids = [f"u{i:03d}" for i in rng.permutation(n)]
    q = rng.standard_normal(6)
    got = [nb.user_id for nb in RetrievalIndex(ids, vecs).search(q, k)[0]]
    assert got == brute_force_topk(vecs, ids, q, k)


def test_retrieval_errors():
    with pytest.raises(EmptyInputError):
        RetrievalIndex([], np.zeros((0, 3))).search(np.ones(3))
    with pytest.raises(DimensionMismatchError):
        RetrievalIndex(["a"], np.ones((1, 3))).search(np.ones(2))


def test_style_tokens_retrieve_same_style(gateway):
    texts = {"a1": "How do I bake bread? #very-verbose", "a2": "Why do we dream? #very-verbose",
             "b1": "How do I bake bread? #not-anxious", "b2": "Why do we dream? #not-anxious"}
    ids = list(texts)
    idx = RetrievalIndex(ids, np.array(gateway.embed_many([texts[i] for i in ids])))
    q = gateway.embed("What is inflation? #very-verbose")
    assert {n.user_id for n in idx.search(q, 2)[0]} == {"a1", "a2"}


# -- generation and context ---------------------------------------------------

def test_candidates_count_and_markers(gateway):
    cands = generate_candidates(gateway, "How do tides work?", 4)
    assert len(cands) == 8
    assert [(c.principle, c.direction) for c in cands[:2]] == [(0, 1), (0, -1)]
    assert all(gateway.catalog.principles[c.principle].name in c.text for c in cands)
    one = generate_candidates(gateway, "How do tides work?", 1)
    assert [(c.principle, c.direction) for c in one] == [(0, 1), (0, -1)]


def test_noise_free_best_candidate_matches_preference(tmp_path):
    from conftest import make_synthetic_gateway
    gw = make_synthetic_gateway(tmp_path, m=3, noise_sd=0.0, gain=2.0, response_sd=0.0)
    cands = generate_candidates(gw, "Why is the sky blue?", 3)
    scores = np.array([judge_vector(gw, c.text, 3) for c in cands])
    for j, d in itertools.product(range(3), (1, -1)):
        p = np.zeros(3)
        p[j] = d
        pair = build_preference_pair("x", cands, scores @ p)
        assert (cands[pair.best].principle, cands[pair.best].direction) == (j, d)


def test_context_rendering(gateway):
    t = gateway.templates
    pairs = [PreferencePair("q1", "good", "bad", [1, 0], 0, 1)]
    nbs = [Neighbor(f"u{i}", 1 - i / 10, pairs) for i in range(3)]
    ctx = build_context(nbs, "exemplar", t)
    assert ctx.count("Preferred response: good") == 3 and ctx.index("Example 1") < ctx.index("Example 3")
    summ = build_context([Neighbor("u", 1, "likes short answers")] * 3, "summary", t)
    assert summ.count("Note ") == 3 and "Preferred response" not in summ
    assert build_context([], "summary", t) is None
    with pytest.raises(EmptyInputError):
        build_context([Neighbor("u", 1, None)], "summary", t)


def test_generation_with_exemplar_context_adopts_preferred_style(gateway):
    cat = gateway.catalog
    good = generate(gateway, "q", instruction_for(cat, 2, 1))
    bad = generate(gateway, "q", instruction_for(cat, 2, -1))
    ctx = build_context([Neighbor("u", 1.0, [PreferencePair("q", good, bad, [1, 0], 0, 1)])], "exemplar",
                        gateway.templates)
    y = generate(gateway, "other question", context=ctx)
    assert y.endswith(f"<<{cat.principles[2].name}:+>>")
