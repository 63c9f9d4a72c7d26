"""sevlab: weak-supervision severity labeling and classical baselines.

Pipeline: ingest long-form posts, normalize them, collect three label
votes per document (questionnaire keyword scoring, an external zero-shot
classifier, a human expert), fuse by majority with expert fallback,
merge rare classes, build stratified SMOTE-balanced datasets, and train
and evaluate four from-scratch classifiers over TF-IDF features.
"""

__version__ = "0.1.0"
