import json
import math
import random

import numpy as np
import pytest

from modalconv.core import TaskType
from modalconv.classifier import (
    DegenerateLabels,
    DimensionMismatch,
    EmptyCorpus,
    EmptyTrainingSet,
    InvalidFraction,
    KTooLarge,
    LabeledDataset,
    ModelBundle,
    Vocabulary,
    embed,
    fit_tfidf,
    knn_predict,
    load_model,
    predict,
    save_model,
    split_dataset,
    tokenize,
    train_logreg,
)
from modalconv.classifier.linear import _loss_and_grad
from modalconv.evalharness import DatasetVersion, generate_synthetic_fixture


# --- tokenizer / tf-idf ------------------------------------------------------


def test_tokenize_lowercase_alnum_runs():
    assert tokenize("Hello, WORLD-42!") == ["hello", "world", "42"]
    assert tokenize("") == []
    assert tokenize("___") == []


def test_tokenize_deterministic():
    text = "Read This ALOUD, please: chapter 12."
    assert tokenize(text) == tokenize(text)


def _oracle_idf(corpus):
    # Independent re-derivation: document frequency by plain dict counting.
    df = {}
    for doc in corpus:
        for tok in set(tokenize(doc)):
            df[tok] = df.get(tok, 0) + 1
    n = len(corpus)
    return {t: math.log((1 + n) / (1 + c)) + 1.0 for t, c in df.items()}


def test_idf_two_document_example():
    m = fit_tfidf(["a b", "a"])
    idx = m.vocabulary.index
    assert m.idf[idx["a"]] == pytest.approx(1.0, abs=1e-12)
    assert m.idf[idx["b"]] == pytest.approx(math.log(3 / 2) + 1.0, abs=1e-12)
    # frozen value for the smoothed formula on df=1, N=2
    assert m.idf[idx["b"]] == pytest.approx(1.4054651081081644, abs=1e-12)


def test_idf_single_document():
    m = fit_tfidf(["x"])
    assert m.idf[m.vocabulary.index["x"]] == pytest.approx(1.0, abs=1e-12)


def test_idf_matches_oracle_on_random_corpora():
    rng = random.Random(11)
    words = [f"w{i}" for i in range(12)]
    for _ in range(25):
        corpus = [
            " ".join(rng.choices(words, k=rng.randint(1, 8)))
            for _ in range(rng.randint(1, 15))
        ]
        m = fit_tfidf(corpus)
        oracle = _oracle_idf(corpus)
        assert set(m.vocabulary.tokens) == set(oracle)
        for tok, val in oracle.items():
            assert m.idf[m.vocabulary.index[tok]] == pytest.approx(val, abs=1e-12)


def test_fit_rejects_empty_corpus():
    with pytest.raises(EmptyCorpus):
        fit_tfidf([])


def test_embed_two_doc_hand_computation():
    m = fit_tfidf(["a b", "a"])
    vec = embed(m, "a a b")
    ia, ib = m.vocabulary.index["a"], m.vocabulary.index["b"]
    raw_a = 2 * 1.0
    raw_b = 1 * (math.log(3 / 2) + 1.0)
    norm = math.sqrt(raw_a**2 + raw_b**2)
    assert vec[ia] == pytest.approx(raw_a / norm, abs=1e-12)
    assert vec[ib] == pytest.approx(raw_b / norm, abs=1e-12)
    assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-12)


def test_embed_oov_and_empty_give_zero_vector():
    m = fit_tfidf(["a b", "a"])
    assert not embed(m, "zzz qqq").any()
    assert not embed(m, "").any()


def test_embed_unit_norm_unless_zero():
    m = fit_tfidf(["read this aloud", "caption the image", "subtitle the video"])
    for prompt in ["read the image", "caption aloud video", "this"]:
        vec = embed(m, prompt)
        assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-12)


def test_embed_bit_for_bit_deterministic():
    m = fit_tfidf(["one two three", "two three four"])
    a = embed(m, "two three five")
    b = embed(m, "two three five")
    assert a.tobytes() == b.tobytes()


def test_vocabulary_dense_and_unique():
    v = Vocabulary(["a", "b", "c"])
    assert [v.index[t] for t in v.tokens] == [0, 1, 2]
    with pytest.raises(ValueError):
        Vocabulary(["a", "a"])


# --- logistic regression -----------------------------------------------------


def _toy_separable():
    # Disjoint vocabularies per class: trivially separable.
    rows = [
        ("alpha beta", TaskType.TTS),
        ("alpha gamma", TaskType.TTS),
        ("delta epsilon", TaskType.STT),
        ("delta zeta", TaskType.STT),
    ]
    ds = LabeledDataset(rows)
    return ds, fit_tfidf(ds.prompts())


def test_logreg_fits_separable_toy():
    ds, m = _toy_separable()
    model = train_logreg(ds, m, epochs=200)
    for ex in ds:
        label, probs = predict(model, m, ex.prompt)
        assert label is ex.label
        assert probs.sum() == pytest.approx(1.0, abs=1e-9)
        assert (probs >= 0).all()


def test_logreg_single_class_rejected():
    ds = LabeledDataset([("a", TaskType.TTS), ("b", TaskType.TTS)])
    with pytest.raises(DegenerateLabels):
        train_logreg(ds, fit_tfidf(ds.prompts()))


def test_zero_epochs_is_uniform_and_tie_breaks_to_first_class():
    ds, m = _toy_separable()
    model = train_logreg(ds, m, epochs=0)
    label, probs = predict(model, m, "alpha beta")
    assert probs == pytest.approx([0.5, 0.5], abs=1e-12)
    assert label is model.classes[0]
    assert model.classes[0] is TaskType.TTS  # first-appearance order


def test_predict_dimension_mismatch():
    ds, m = _toy_separable()
    model = train_logreg(ds, m, epochs=5)
    other = fit_tfidf(["completely different tokens here now"])
    with pytest.raises(DimensionMismatch):
        predict(model, other, "alpha")


def test_gradient_matches_central_differences_small():
    # Fuller 20-instance sweep lives in the acceptance suite.
    rng = np.random.default_rng(3)
    for _ in range(5):
        c = int(rng.integers(2, 6))
        v = int(rng.integers(2, 21))
        n = int(rng.integers(2, 12))
        w = rng.normal(size=(c, v))
        b = rng.normal(size=c)
        x = rng.normal(size=(n, v))
        y = np.zeros((n, c))
        y[np.arange(n), rng.integers(0, c, size=n)] = 1.0
        _, gw, gb = _loss_and_grad(w, b, x, y, 1e-4)

        h = 1e-6
        num_w = np.zeros_like(w)
        for i in range(c):
            for j in range(v):
                wp, wm = w.copy(), w.copy()
                wp[i, j] += h
                wm[i, j] -= h
                lp, _, _ = _loss_and_grad(wp, b, x, y, 1e-4)
                lm, _, _ = _loss_and_grad(wm, b, x, y, 1e-4)
                num_w[i, j] = (lp - lm) / (2 * h)
        rel = np.linalg.norm(gw - num_w) / max(
            np.linalg.norm(gw), np.linalg.norm(num_w), 1e-12
        )
        assert rel < 1e-5


def test_training_is_deterministic():
    ds, m = _toy_separable()
    m1 = train_logreg(ds, m, epochs=50)
    m2 = train_logreg(ds, m, epochs=50)
    assert m1.weights.tobytes() == m2.weights.tobytes()
    assert m1.bias.tobytes() == m2.bias.tobytes()


# --- knn ---------------------------------------------------------------------


def _unit(v):
    arr = np.array(v, dtype=np.float64)
    return arr / np.linalg.norm(arr)


def test_knn_k1_exact_match_returns_its_label():
    vecs = np.stack([_unit([1, 0, 0]), _unit([0, 1, 0]), _unit([0, 0, 1])])
    labels = [TaskType.TTS, TaskType.STT, TaskType.ITT]
    assert knn_predict(vecs, labels, _unit([0, 1, 0]), k=1) is TaskType.STT


def test_knn_global_majority():
    vecs = np.stack([_unit([1, 0]), _unit([1, 1]), _unit([0.9, 0.1]), _unit([0, 1])])
    labels = [TaskType.TTS, TaskType.TTS, TaskType.TTS, TaskType.STT]
    assert knn_predict(vecs, labels, _unit([1, 0.5]), k=4) is TaskType.TTS


def test_knn_similarity_tie_prefers_lower_index():
    # Identical vectors: the stable sort keeps index order, so k=1 sees row 0.
    vecs = np.stack([_unit([1, 1]), _unit([1, 1]), _unit([0, 1])])
    labels = [TaskType.TTS, TaskType.STT, TaskType.ITT]
    # Lexicographic order would prefer STT; index order must win here.
    assert knn_predict(vecs, labels, _unit([1, 1]), k=1) is TaskType.TTS


def test_knn_vote_tie_breaks_lexicographically():
    vecs = np.stack(
        [_unit([1, 0]), _unit([0.9, 0.3]), _unit([0.8, 0.5]), _unit([0.7, 0.6])]
    )
    labels = [TaskType.TTS, TaskType.TTS, TaskType.STT, TaskType.STT]
    assert knn_predict(vecs, labels, _unit([1, 0.1]), k=4) is TaskType.STT


def test_knn_bounds():
    vecs = np.stack([_unit([1, 0]), _unit([0, 1])])
    labels = [TaskType.TTS, TaskType.STT]
    with pytest.raises(KTooLarge):
        knn_predict(vecs, labels, _unit([1, 1]), k=3)
    with pytest.raises(KTooLarge):
        knn_predict(vecs, labels, _unit([1, 1]), k=0)
    with pytest.raises(EmptyTrainingSet):
        knn_predict(np.zeros((0, 2)), [], _unit([1, 1]), k=1)


def test_knn_zero_query_has_zero_similarity_everywhere():
    vecs = np.stack([_unit([1, 0]), _unit([0, 1])])
    labels = [TaskType.STT, TaskType.TTS]
    # All sims 0: top-1 is index 0 by the stable rule.
    assert knn_predict(vecs, labels, np.zeros(2), k=1) is TaskType.STT


# --- split -------------------------------------------------------------------


def test_split_v2_arithmetic():
    ds = generate_synthetic_fixture(7, DatasetVersion.V2)
    train, test = split_dataset(ds, 0.10, seed=0)
    assert len(test) == 60
    counts = test.label_counts()
    assert counts[TaskType.UNK] == 15
    for t in TaskType:
        if t is not TaskType.UNK:
            assert counts[t] == 5
    assert len(train) == 540


def test_split_deterministic_and_partitioning():
    ds = generate_synthetic_fixture(3, DatasetVersion.V1)
    a_train, a_test = split_dataset(ds, 0.2, seed=42)
    b_train, b_test = split_dataset(ds, 0.2, seed=42)
    assert a_train.prompts() == b_train.prompts()
    assert a_test.prompts() == b_test.prompts()
    # partition: disjoint union preserving the label multiset
    assert len(a_train) + len(a_test) == len(ds)
    assert set(a_train.prompts()).isdisjoint(a_test.prompts())
    merged = sorted(a_train.labels() + a_test.labels(), key=lambda t: t.value)
    assert merged == sorted(ds.labels(), key=lambda t: t.value)


def test_split_preserves_row_order_within_sides():
    ds = generate_synthetic_fixture(5, DatasetVersion.V1)
    train, test = split_dataset(ds, 0.3, seed=9)
    positions = {p: i for i, p in enumerate(ds.prompts())}
    train_pos = [positions[p] for p in train.prompts()]
    test_pos = [positions[p] for p in test.prompts()]
    assert train_pos == sorted(train_pos)
    assert test_pos == sorted(test_pos)


def test_split_minimum_one_when_label_has_two_rows():
    ds = LabeledDataset(
        [("p one", TaskType.TTS), ("p two", TaskType.TTS), ("q solo", TaskType.STT)]
    )
    train, test = split_dataset(ds, 0.1, seed=1)
    # TTS has 2 rows: floor(0.2)=0 bumped to 1. STT has 1 row: stays in train.
    assert test.label_counts() == {TaskType.TTS: 1}
    assert train.label_counts() == {TaskType.TTS: 1, TaskType.STT: 1}


@pytest.mark.parametrize("fraction", [0.0, 1.0, 1.2, -0.1])
def test_split_rejects_bad_fraction(fraction):
    ds = LabeledDataset([("a", TaskType.TTS), ("b", TaskType.STT)])
    with pytest.raises(InvalidFraction):
        split_dataset(ds, fraction, seed=0)


# --- persistence -------------------------------------------------------------


def test_logreg_bundle_round_trip(tmp_path):
    ds, m = _toy_separable()
    model = train_logreg(ds, m, epochs=50)
    bundle = ModelBundle(kind="logreg", tfidf=m, linear=model)
    path = tmp_path / "model.json"
    save_model(bundle, path)
    loaded = load_model(path)
    for prompt in ds.prompts():
        assert loaded.predict(prompt) == bundle.predict(prompt)
    # bit-exact round trip: saving the loaded bundle reproduces the bytes
    again = tmp_path / "model2.json"
    save_model(loaded, again)
    assert path.read_bytes() == again.read_bytes()


def test_knn_bundle_round_trip(tmp_path):
    ds, m = _toy_separable()
    vectors = np.stack([embed(m, p) for p in ds.prompts()])
    bundle = ModelBundle(
        kind="knn",
        tfidf=m,
        knn_vectors=vectors,
        knn_labels=tuple(ds.labels()),
        knn_k=1,
    )
    path = tmp_path / "knn.json"
    save_model(bundle, path)
    loaded = load_model(path)
    assert loaded.knn_k == 1
    for ex in ds:
        label, scores = loaded.predict(ex.prompt)
        assert label is ex.label
        assert sum(scores.values()) == pytest.approx(1.0, abs=1e-12)


def test_load_rejects_foreign_files(tmp_path):
    bad = tmp_path / "other.json"
    bad.write_text(json.dumps({"format": "something-else"}))
    with pytest.raises(ValueError):
        load_model(bad)
    versioned = tmp_path / "vers.json"
    versioned.write_text(json.dumps({"format": "modalconv-model", "format_version": 99}))
    with pytest.raises(ValueError):
        load_model(versioned)


def test_bundle_kind_validation():
    m = fit_tfidf(["a"])
    with pytest.raises(ValueError):
        ModelBundle(kind="logreg", tfidf=m)  # missing linear head
    with pytest.raises(ValueError):
        ModelBundle(kind="svm", tfidf=m)
