import numpy as np
import pytest

from elicit.demo import demo_instance
from elicit.predictor import TabularPredictor


@pytest.fixture
def r1():
    """Two-latent demo instance with duplicate questions available."""
    catalog, table = demo_instance(("qDet2", "qSkew2", "qNoise2"))
    return catalog, table


@pytest.fixture
def r1_model(r1):
    catalog, table = r1
    return TabularPredictor(table, catalog)


def brute_force_posterior(table, history):
    """Direct joint Bayes over all latent values; the oracle for chained
    posterior updates."""
    w = np.array(table.prior, dtype=float)
    for qid, answer in history:
        w = w * table.likelihood[qid][:, answer]
    total = w.sum()
    assert total > 0, "oracle fed impossible evidence"
    return w / total
