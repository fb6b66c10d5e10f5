"""Exact-amplitude simulation of the Mirror semiquantum key distribution protocol."""
from .adversary import (
    Attack,
    build_full_attack,
    build_weaker_attack,
    closed_form_rates,
    epsilon_star,
    kappa,
    verify_unitary,
)
from .engine import (
    AttackSpec,
    ScenarioConfig,
    derive_rates,
    detection_test,
    exact_distribution,
    mirror_detectability,
    simulate,
    sweep_epsilon,
)
from .fock import BasisLabel, StateVector, build_state
from .protocol import AliceOp, ProtocolVariant, RoundRecord, sift_round

__version__ = "0.1.0"
