"""Reputation-weighted VRF node selection, commit-reveal submission and
Stackelberg fee pricing for a blockchain price oracle."""

from .crypto import KeyPair, VrfOutput, commit, keygen, vrf_evaluate, vrf_verify
from .errors import (
    ConfigError,
    InputError,
    OracleError,
    RegistrationError,
    StateError,
    SubmissionRejected,
)
from .incentive import (
    GameParams,
    PayoffPair,
    alpha_effective,
    equilibrium,
    follower_best_response,
    recommend_fee,
)
from .reputation import ReputationTable, baseline_range, optional_range, reputation_update

__version__ = "0.1.0"
