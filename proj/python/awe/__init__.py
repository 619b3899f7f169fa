"""Acoustic word embeddings: feature extraction, corpora, encoder-decoder
training, ABX discrimination evaluation, language probes, experiment sweeps.

Thin wrappers turn dict configs into the JSON strings the core expects.
"""

import json as _json

from ._core import (
    Corpus,
    Model,
    angular_cosine_distance,
    mean_se,
    mfcc,
    permutation_test,
    phone_edit_distance,
    read_awee,
    train_probe,
    write_awee,
)
from . import _core as _c

__all__ = [
    "Corpus",
    "Model",
    "abx_error",
    "angular_cosine_distance",
    "assemble_report",
    "mean_se",
    "mfcc",
    "permutation_test",
    "phone_edit_distance",
    "pretrain",
    "read_awee",
    "run_experiment",
    "synth_corpus",
    "train",
    "train_probe",
    "write_awee",
]


def _as_json(obj):
    return obj if isinstance(obj, str) else _json.dumps(obj)


def synth_corpus(spec, seed=0):
    """Generate a synthetic corpus from a spec (dict or JSON string)."""
    return Corpus.synth(_as_json(spec), seed)


def pretrain(corpora, model=None, train_cfg=None, seed=0):
    """Autoencoder pretraining over all tokens of the given corpora."""
    return _c.pretrain(list(corpora), _as_json(model or {}),
                       _as_json(train_cfg or {}), seed)


def train(model, corpora, n_pairs, train_cfg=None, seed=0,
          cross_speaker_only=False):
    """Correspondence training on sampled same-type pairs, in place."""
    _c.train(model, list(corpora), n_pairs, _as_json(train_cfg or {}), seed,
             cross_speaker_only)


def abx_error(corpus, model, task, seed=0):
    """Sample one discrimination task from the corpus and score the model."""
    return _c.abx_error(corpus, model, _as_json(task), seed)


def run_experiment(config, out_dir, jobs=1, config_dir="."):
    """Full ratio-by-seed sweep with per-cell resume; writes report files."""
    return _c.run_experiment(_as_json(config), out_dir, jobs, config_dir)


def assemble_report(config, out_dir, config_dir="."):
    """Re-assemble report files from completed cells without training."""
    return _c.assemble_report(_as_json(config), out_dir, config_dir)
