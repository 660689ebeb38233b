"""Prompt classification: tf-idf features with logistic regression or KNN heads."""

from modalconv.classifier.dataset import (
    InvalidFraction,
    LabeledDataset,
    LabeledExample,
    split_dataset,
)
from modalconv.classifier.linear import (
    DegenerateLabels,
    DimensionMismatch,
    LinearModel,
    predict,
    train_logreg,
)
from modalconv.classifier.neighbors import (
    DEFAULT_K,
    EmptyTrainingSet,
    KTooLarge,
    cosine_similarities,
    knn_predict,
)
from modalconv.classifier.store import ModelBundle, load_model, save_model
from modalconv.classifier.vectorize import (
    EmptyCorpus,
    TfidfModel,
    Vocabulary,
    embed,
    fit_tfidf,
    tokenize,
)

__all__ = [
    "DEFAULT_K",
    "DegenerateLabels",
    "DimensionMismatch",
    "EmptyCorpus",
    "EmptyTrainingSet",
    "InvalidFraction",
    "KTooLarge",
    "LabeledDataset",
    "LabeledExample",
    "LinearModel",
    "ModelBundle",
    "TfidfModel",
    "Vocabulary",
    "cosine_similarities",
    "embed",
    "fit_tfidf",
    "knn_predict",
    "load_model",
    "predict",
    "save_model",
    "split_dataset",
    "tokenize",
    "train_logreg",
]
