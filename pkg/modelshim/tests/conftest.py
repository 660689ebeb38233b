import json
from pathlib import Path

import pytest

CORPUS = Path(__file__).resolve().parents[2] / "wire_corpus"


@pytest.fixture(scope="session")
def schemas():
    return json.loads((CORPUS / "schemas.json").read_text())


@pytest.fixture(scope="session")
def samples():
    return json.loads((CORPUS / "samples.json").read_text())


# A hand-written classifier bundle in the persisted-model file format. Four
# marker words, one per class, diagonal weights: each marker decides its
# class outright, and prompts with no marker fall back to the head's first
# class with a uniform score vector.
BUNDLE = {
    "format": "modalconv-model",
    "format_version": 1,
    "kind": "logreg",
    "tfidf": {
        "vocabulary": ["caption", "draw", "narrate", "transcribe"],
        "idf": [1.0, 1.0, 1.0, 1.0],
    },
    "logreg": {
        "classes": ["ITT", "TTI", "TTS", "STT"],
        "weights": [
            [6.0, 0.0, 0.0, 0.0],
            [0.0, 6.0, 0.0, 0.0],
            [0.0, 0.0, 6.0, 0.0],
            [0.0, 0.0, 0.0, 6.0],
        ],
        "bias": [0.0, 0.0, 0.0, 0.0],
        "hyper": {"learning_rate": 0.5, "epochs": 300, "l2_penalty": 0.0001, "seed": 0},
    },
}


@pytest.fixture
def classifier_file(tmp_path):
    path = tmp_path / "classifier.json"
    path.write_text(json.dumps(BUNDLE))
    return path
