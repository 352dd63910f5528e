"""Smallest two-type demo instance: one deterministic question, one pure
noise question, one skewed question.  Used by the test suite and by the
live-session demo mode."""

from __future__ import annotations

import numpy as np

from .catalog import Question, QuestionCatalog
from .model import LatentTable

_BASE_ROWS = {
    "qDet": [[1.0, 0.0], [0.0, 1.0]],
    "qNoise": [[0.5, 0.5], [0.5, 0.5]],
    "qSkew": [[0.8, 0.2], [0.2, 0.8]],
}

_TEXT = {
    "qDet": "Is it type A?",
    "qNoise": "Coin flip?",
    "qSkew": "Does it lean A?",
}


def demo_instance(duplicates: tuple[str, ...] = ()) -> tuple[QuestionCatalog, LatentTable]:
    """Build the two-latent demo table.

    ``duplicates`` names extra questions like ``qDet2`` or ``qSkew2`` that
    copy the likelihood of their base question but count as independent
    observations.
    """
    ids = ["qDet", "qNoise", "qSkew", *duplicates]
    questions = []
    likelihood = {}
    for qid in ids:
        base = qid.rstrip("0123456789")
        if base not in _BASE_ROWS:
            raise ValueError(f"unknown demo question {qid!r}")
        text = _TEXT[base]
        if qid != base:
            # duplicates need distinct text so prompts stay invertible
            text = f"{text} (take {qid[len(base):]})"
        questions.append(Question(qid, text, ["yes", "no"]))
        likelihood[qid] = np.array(_BASE_ROWS[base])
    catalog = QuestionCatalog(questions)
    table = LatentTable(["A", "B"], np.array([0.5, 0.5]), likelihood)
    return catalog, table
