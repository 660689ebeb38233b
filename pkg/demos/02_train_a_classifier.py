"""
Training the shipped classifier from scratch
============================================

No network, no GPU: tf-idf features and full-batch softmax regression are
enough to separate the seven request families cleanly. The same bundle
format also carries a k-NN head for comparison.
"""

import tempfile
from pathlib import Path

import numpy as np

from modalconv.classifier import (
    ModelBundle,
    embed,
    fit_tfidf,
    load_model,
    save_model,
    split_dataset,
    train_logreg,
)
from modalconv.evalharness import DatasetVersion, generate_synthetic_fixture

# 1. Data. The synthetic fixture has the published shape of the larger
#    dataset: 600 prompts, evenly covering all ten task codes.
data = generate_synthetic_fixture(seed=11, version=DatasetVersion.V2)
train, test = split_dataset(data, test_fraction=0.1, seed=7)
print(f"train={len(train)} test={len(test)}")

# 2. Features. The vectorizer is fit on training prompts only.
tfidf = fit_tfidf([ex.prompt for ex in train])
print(f"vocabulary size: {tfidf.size}")

# 3. One model, two heads.
linear = train_logreg(train, tfidf, epochs=150, seed=0)
logreg = ModelBundle(kind="logreg", tfidf=tfidf, linear=linear)

vectors = np.stack([embed(tfidf, ex.prompt) for ex in train])
knn = ModelBundle(
    kind="knn",
    tfidf=tfidf,
    knn_vectors=vectors,
    knn_labels=tuple(ex.label for ex in train),
    knn_k=5,
)

for name, bundle in (("logreg", logreg), ("knn", knn)):
    hits = sum(1 for ex in test if bundle.predict(ex.prompt)[0] == ex.label)
    print(f"{name} held-out accuracy: {hits / len(test):.3f}")

# 4. Scores come with every prediction; for logreg they are probabilities.
label, scores = logreg.predict("please narrate this chapter for my commute")
top = sorted(scores.items(), key=lambda kv: -kv[1])[:3]
print(label.value, " ".join(f"{c}={s:.2f}" for c, s in top))

# 5. Round trip through the on-disk format. Training is seeded and descent
#    starts at zero, so rebuilding the file is byte-identical.
with tempfile.TemporaryDirectory() as scratch:
    path = Path(scratch) / "model.json"
    save_model(logreg, path)
    again = load_model(path)
    assert again.predict("transcribe the interview")[0].value == "STT"
    print(f"model file: {path.stat().st_size} bytes, reloads fine")
