"""Eve's two-stage intercept-resend attacks on the simplified Mirror protocol.

Stage 1 replaces Bob's pulse with a channel state entangled with Eve's
qutrit probe.  Stage 2 is a unitary on Bob's channel and the probe, known
only on the four Bob+Eve kets the protocol can reach; it is stored as that
partial isometry plus an arbitrary orthonormal completion that is never
allowed to act on protocol states.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .fock import (
    DEFAULT_CAP,
    PROBE_LEVELS,
    BasisLabel,
    ContractViolation,
    StateVector,
    build_state,
)

SPAN_TOLERANCE = 1e-9

# Bob+Eve ket (b1, b0, e)
BobEve = tuple[int, int, int]


class SpanError(RuntimeError):
    """Stage 2 was applied to a state outside the specified domain of V."""


def _check_epsilon(eps: float) -> None:
    if not 0.0 <= eps <= 1.0:
        raise ContractViolation(f"epsilon must lie in [0, 1], got {eps}")


def kappa(eps: float) -> float:
    _check_epsilon(eps)
    return math.sqrt((1 - eps**2) / (3 - 2 * eps**2))


@dataclass(frozen=True)
class WeakerParams:
    epsilon: float
    kappa: float
    a: float
    b: float

    @classmethod
    def from_epsilon(cls, eps: float) -> "WeakerParams":
        k = kappa(eps)
        b = math.sqrt(max(0.0, 1 - 2 * k**2)) / math.sqrt(2)
        a = math.sqrt(max(0.0, 1 - k**2 - eps**2)) + b
        return cls(eps, k, a, b)


def closed_form_rates(eps: float) -> tuple[float, float, float]:
    """``(p, R_CTRL, R_SWAPx)`` for the weaker attack.

    ``p`` is the chance Eve's probe reveals the key bit; the two loss rates
    are Bob's no-click rates on CTRL rounds and on SWAP-x rounds where Alice
    saw nothing.
    """
    k2 = kappa(eps) ** 2
    p = k2 / (eps**2 + k2)
    return p, 1 - 2 * eps**2 / 3, 1 - (eps**2 + k2) / 2


def epsilon_star() -> float:
    """The weaker-attack parameter at which both loss rates coincide."""
    return math.sqrt((3 - math.sqrt(3)) / 2)


@dataclass(frozen=True)
class UnitarySpec:
    """Action of V on its specified domain, as Bob+Eve output amplitudes."""

    columns: Mapping[BobEve, Mapping[BobEve, complex]]
    cap: int = DEFAULT_CAP

    def domain(self) -> list[BobEve]:
        return sorted(self.columns)

    def space(self) -> list[BobEve]:
        return [
            (b1, b0, e)
            for b1, b0 in itertools.product(range(self.cap + 1), repeat=2)
            for e in range(PROBE_LEVELS)
        ]

    def column_matrix(self) -> np.ndarray:
        index = {lab: i for i, lab in enumerate(self.space())}
        dom = self.domain()
        m = np.zeros((len(index), len(dom)), dtype=complex)
        for j, d in enumerate(dom):
            for out, amp in self.columns[d].items():
                m[index[out], j] += amp
        return m

    def completed_matrix(self) -> np.ndarray:
        """Full operator on Bob+Eve, columns ordered as :meth:`space`.

        Complement columns come from the left singular vectors of the
        specified block and are assigned to the unspecified kets in order.
        """
        space = self.space()
        cols = self.column_matrix()
        u, _, _ = np.linalg.svd(cols, full_matrices=True)
        complement = u[:, cols.shape[1]:]
        full = np.zeros((len(space), len(space)), dtype=complex)
        dom = set(self.domain())
        spec_i = 0
        comp_i = 0
        for j, lab in enumerate(space):
            if lab in dom:
                full[:, j] = cols[:, spec_i]
                spec_i += 1
            else:
                full[:, j] = complement[:, comp_i]
                comp_i += 1
        return full

    def apply(self, state: StateVector) -> StateVector:
        """Linear extension of the action table; Alice's slots are spectators."""
        out: dict[BasisLabel, complex] = {}
        outside = 0.0
        for label, amp in state.amps.items():
            col = self.columns.get((label.b1, label.b0, label.e))
            if col is None:
                outside += abs(amp) ** 2
                continue
            for (b1, b0, e), c in col.items():
                key = label._replace(b1=b1, b0=b0, e=e)
                out[key] = out.get(key, 0j) + c * amp
        if outside > SPAN_TOLERANCE:
            raise SpanError(f"weight {outside:.3g} outside the specified domain of V")
        return StateVector(out, state.cap)

    def to_records(self) -> list[dict]:
        return [
            {"input": list(d), "output": [[list(k), complex(v).real, complex(v).imag]
                                          for k, v in sorted(self.columns[d].items())]}
            for d in self.domain()
        ]


@dataclass(frozen=True)
class Attack:
    name: str
    stage1_state: StateVector
    stage2: UnitarySpec
    params: Optional[WeakerParams] = None

    def describe(self) -> dict:
        d = {"name": self.name}
        if self.params is not None:
            d.update(epsilon=self.params.epsilon, kappa=self.params.kappa, a=self.params.a, b=self.params.b)
        return d


def stage1_state(cap: int = DEFAULT_CAP) -> StateVector:
    s = 1 / math.sqrt(3)
    return build_state(
        [
            (s, BasisLabel(b1=0, b0=1, e=1)),
            (s, BasisLabel(b1=1, b0=0, e=1)),
            (s, BasisLabel(b1=0, b0=0, e=0)),
        ],
        cap,
    )


def _weaker_columns(eps: float, k: float) -> dict[BobEve, dict[BobEve, complex]]:
    c = math.sqrt(max(0.0, 1 - k**2 - eps**2))
    d = math.sqrt(max(0.0, 1 - 2 * k**2))
    plus = d / math.sqrt(2)

    def col(*terms):
        out: dict[BobEve, complex] = {}
        for amp, lab in terms:
            if amp != 0.0:
                out[lab] = out.get(lab, 0.0) + amp
        return out

    return {
        (0, 1, 1): col((eps, (0, 1, 2)), (-k, (1, 0, 1)), (c, (0, 0, 0))),
        (1, 0, 1): col((-k, (0, 1, 0)), (eps, (1, 0, 2)), (c, (0, 0, 1))),
        (0, 0, 0): col((k, (0, 1, 0)), (k, (1, 0, 1)), (plus, (0, 0, 0)), (plus, (0, 0, 1))),
        (0, 0, 1): col((1.0, (0, 0, 2))),
    }


def build_full_attack(cap: int = DEFAULT_CAP) -> Attack:
    s3 = math.sqrt(1 / 3)
    s23 = math.sqrt(2 / 3)
    h = s3 / math.sqrt(2)
    columns = {
        (0, 1, 1): {(1, 0, 1): -s3, (0, 0, 0): s23},
        (1, 0, 1): {(0, 1, 0): -s3, (0, 0, 1): s23},
        (0, 0, 0): {(0, 1, 0): s3, (1, 0, 1): s3, (0, 0, 0): h, (0, 0, 1): h},
        (0, 0, 1): {(0, 0, 2): 1.0},
    }
    return Attack("full", stage1_state(cap), UnitarySpec(columns, cap))


def build_weaker_attack(eps: float, cap: int = DEFAULT_CAP) -> Attack:
    params = WeakerParams.from_epsilon(eps)
    return Attack("weaker", stage1_state(cap), UnitarySpec(_weaker_columns(eps, params.kappa), cap), params)


def build_attack(name: str, epsilon: Optional[float] = None, cap: int = DEFAULT_CAP) -> Optional[Attack]:
    if name == "none":
        return None
    if name == "full":
        return build_full_attack(cap)
    if name == "weaker":
        if epsilon is None:
            raise ContractViolation("the weaker attack needs an epsilon")
        return build_weaker_attack(epsilon, cap)
    raise ContractViolation(f"unknown attack {name!r}")


@dataclass(frozen=True)
class UnitaryReport:
    max_overlap: float
    max_norm_deviation: float
    completion_defect: float
    tol: float
    passed: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "passed",
            max(self.max_overlap, self.max_norm_deviation, self.completion_defect) <= self.tol,
        )

    @property
    def max_defect(self) -> float:
        return max(self.max_overlap, self.max_norm_deviation, self.completion_defect)


def verify_unitary(attack: Attack, tol: float = 1e-12) -> UnitaryReport:
    cols = attack.stage2.column_matrix()
    gram = cols.conj().T @ cols
    off = gram - np.diag(np.diag(gram))
    max_overlap = float(np.max(np.abs(off))) if off.size else 0.0
    max_norm_dev = float(np.max(np.abs(np.sqrt(np.abs(np.diag(gram))) - 1.0)))
    full = attack.stage2.completed_matrix()
    defect = float(np.max(np.abs(full.conj().T @ full - np.eye(full.shape[0]))))
    return UnitaryReport(max_overlap, max_norm_dev, defect, tol)


def apply_attack_stage(attack: Attack, stage: int, state: StateVector) -> StateVector:
    """Stage 1 discards Bob's pulse and emits Eve's state; stage 2 applies V."""
    if stage == 1:
        alice = {(k.a1, k.a0) for k in state.amps}
        if alice - {(0, 0)}:
            raise ContractViolation("stage 1 acts before Alice touches the channel")
        return attack.stage1_state
    if stage == 2:
        return attack.stage2.apply(state)
    raise ContractViolation(f"attack stage must be 1 or 2, got {stage}")
