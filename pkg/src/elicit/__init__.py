"""Adaptive information elicitation with an exact finite-latent Bayesian
surrogate: expected-information-gain planning, theory audits, an
evaluation harness, and a live session service."""

from .catalog import History, Question, QuestionCatalog
from .data import Dataset, SplitSpec, SyntheticConfig, generate_synthetic, load_dataset, save_dataset, split_entities
from .infogain import (
    EigEstimate,
    expected_information_gain,
    expected_information_gain_set,
    information_gain,
    simulate_rollout,
)
from .model import (
    Belief,
    Distribution,
    ImpossibleEvidenceError,
    LatentTable,
    SupportCapExceededError,
    entropy,
    fit_tabular,
    joint_target_distribution,
    posterior_update,
    predictive_distribution,
    sequence_log_likelihood,
)
from .policy import MctsConfig, PolicyConfig, select_greedy, select_mcts, select_random, select_similarity
from .predictor import PredictiveModel, TabularPredictor, as_predictor
from .theory import (
    BoundReport,
    brute_force_optimal_set,
    check_greedy_bound,
    check_simulator_bound,
    submodularity_probe,
)

__all__ = [name for name in dir() if not name.startswith("_")]
