"""Round logic of the Mirror and simplified Mirror protocols.

Bob sends ``|+>``; Alice applies one of her classical operations to the
channel and her vacuum ancilla, measures the ancilla, and the channel goes
back to Bob who measures in a random basis.  :func:`sift_round` turns the
public record of a round into key, test, loss, or forbidden outcomes and
:func:`aggregate_rates` reduces many of those into a :class:`RateReport`.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .fock import (
    DEFAULT_CAP,
    Basis,
    BasisLabel,
    ClickPattern,
    ContractViolation,
    StateVector,
    build_state,
)


class AliceOp(Enum):
    CTRL = "CTRL"
    SWAP10 = "SWAP-10"
    SWAP01 = "SWAP-01"
    SWAPALL = "SWAP-ALL"

    @property
    def is_swap_x(self) -> bool:
        return self in (AliceOp.SWAP10, AliceOp.SWAP01)


class Variant(Enum):
    MIRROR = "mirror"
    SIMPLIFIED = "simplified"

    @property
    def ops(self) -> tuple[AliceOp, ...]:
        if self is Variant.MIRROR:
            return tuple(AliceOp)
        return (AliceOp.CTRL, AliceOp.SWAP10, AliceOp.SWAP01)


@dataclass(frozen=True)
class ProtocolVariant:
    kind: Variant = Variant.SIMPLIFIED
    op_probs: tuple[tuple[AliceOp, float], ...] = ()
    hadamard_prob: float = 0.5

    def __post_init__(self):
        if not self.op_probs:
            ops = self.kind.ops
            object.__setattr__(self, "op_probs", tuple((op, 1.0 / len(ops)) for op in ops))
        for op, p in self.op_probs:
            if op not in self.kind.ops:
                raise ContractViolation(f"{op.value} is not admissible in the {self.kind.value} protocol")
            if p < 0:
                raise ContractViolation(f"negative probability for {op.value}")
        if not math.isclose(sum(p for _, p in self.op_probs), 1.0, abs_tol=1e-12):
            raise ContractViolation("operation probabilities must sum to 1")
        if not 0.0 <= self.hadamard_prob <= 1.0:
            raise ContractViolation("Hadamard-basis probability must lie in [0, 1]")

    @classmethod
    def mirror(cls) -> "ProtocolVariant":
        return cls(Variant.MIRROR)

    @classmethod
    def simplified(cls) -> "ProtocolVariant":
        return cls(Variant.SIMPLIFIED)

    def basis_probs(self) -> tuple[tuple[Basis, float], ...]:
        return ((Basis.COMPUTATIONAL, 1.0 - self.hadamard_prob), (Basis.HADAMARD, self.hadamard_prob))


@dataclass(frozen=True)
class RoundRecord:
    """Public transcript of one round plus Eve's private probe reading.

    Bob's clicks are ordered ``(|1>, |0>)`` in the computational basis and
    ``(|->, |+>)`` in the Hadamard basis.
    """

    op: AliceOp
    alice_clicks: ClickPattern
    bob_basis: Basis
    bob_clicks: ClickPattern
    eve_outcome: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "op": self.op.value,
            "alice_clicks": self.alice_clicks.to_list(),
            "bob_basis": self.bob_basis.value,
            "bob_clicks": self.bob_clicks.to_list(),
            "eve_outcome": self.eve_outcome,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RoundRecord":
        return cls(
            AliceOp(d["op"]),
            ClickPattern(tuple(bool(c) for c in d["alice_clicks"])),
            Basis(d["bob_basis"]),
            ClickPattern(tuple(bool(c) for c in d["bob_clicks"])),
            d.get("eve_outcome"),
        )

    def sort_key(self) -> tuple:
        return (
            list(AliceOp).index(self.op),
            self.alice_clicks.clicks,
            self.bob_basis.value,
            self.bob_clicks.clicks,
            -1 if self.eve_outcome is None else self.eve_outcome,
        )


class SiftKind(Enum):
    DISCARD = "discard"
    KEY_BIT = "key_bit"
    CTRL_TEST = "ctrl_test"
    SWAP_TEST = "swap_test"
    FORBIDDEN = "forbidden"
    LOSS = "loss"


@dataclass(frozen=True)
class SiftOutcome:
    kind: SiftKind
    bit: Optional[int] = None
    passed: Optional[bool] = None
    reason: Optional[str] = None


def bob_prepare(cap: int = DEFAULT_CAP) -> StateVector:
    """Bob's ``|0,1>_x`` pulse with Alice's ancilla and Eve's probe idle."""
    amp = 1 / math.sqrt(2)
    return build_state([(amp, BasisLabel(b1=0, b0=1)), (amp, BasisLabel(b1=1, b0=0))], cap)


def _permute(label: BasisLabel, op: AliceOp) -> BasisLabel:
    a1, a0, b1, b0, e = label
    if op is AliceOp.SWAP10 or op is AliceOp.SWAPALL:
        a1, b1 = b1, a1
    if op is AliceOp.SWAP01 or op is AliceOp.SWAPALL:
        a0, b0 = b0, a0
    return BasisLabel(a1, a0, b1, b0, e)


def alice_apply(op: AliceOp, state: StateVector) -> StateVector:
    """Exchange the contents of Alice's and Bob's slots for the modes ``op`` measures."""
    if op is AliceOp.CTRL:
        return state
    return StateVector({_permute(k, op): v for k, v in state.amps.items()}, state.cap)


def sift_round(record: RoundRecord, variant: ProtocolVariant | Variant) -> SiftOutcome:
    kind = variant.kind if isinstance(variant, ProtocolVariant) else variant
    op = record.op
    if op not in kind.ops:
        raise ContractViolation(f"{op.value} cannot occur in the {kind.value} protocol")
    alice_click = record.alice_clicks.any
    bob_click = record.bob_clicks.any
    computational = record.bob_basis is Basis.COMPUTATIONAL

    if alice_click and bob_click:
        return SiftOutcome(SiftKind.FORBIDDEN, reason="both-detect")
    if op is AliceOp.SWAPALL:
        if bob_click:
            return SiftOutcome(SiftKind.FORBIDDEN, reason="swapall-click")
        return SiftOutcome(SiftKind.DISCARD, reason="swapall")
    if alice_click:
        return SiftOutcome(SiftKind.DISCARD, reason="alice-detected")
    if not bob_click:
        return SiftOutcome(SiftKind.LOSS)

    if op is AliceOp.CTRL:
        if computational:
            return SiftOutcome(SiftKind.DISCARD, reason="mismatched")
        minus, _plus = record.bob_clicks
        return SiftOutcome(SiftKind.CTRL_TEST, passed=not minus)

    if not computational:
        return SiftOutcome(SiftKind.DISCARD, reason="mismatched")
    one, zero = record.bob_clicks
    if op is AliceOp.SWAP10 and zero and not one:
        return SiftOutcome(SiftKind.KEY_BIT, bit=0)
    if op is AliceOp.SWAP01 and one and not zero:
        return SiftOutcome(SiftKind.KEY_BIT, bit=1)
    return SiftOutcome(SiftKind.SWAP_TEST, passed=False)


@dataclass(frozen=True)
class RateReport:
    """Conditional rates; ``None`` marks an empty conditioning population."""

    error_rate_swap: Optional[float]
    error_rate_ctrl: Optional[float]
    loss_rate_ctrl: Optional[float]
    loss_rate_swap: Optional[float]
    key_rate: Optional[float]
    eve_info_probability: Optional[float]
    forbidden_event_rate: Optional[float]
    intervals: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


_RATES = {
    # name: (numerator counter, denominator counter)
    "error_rate_swap": ("swap_errors", "swap_tested"),
    "error_rate_ctrl": ("ctrl_errors", "ctrl_tested"),
    "loss_rate_ctrl": ("ctrl_lost", "ctrl_rounds"),
    "loss_rate_swap": ("swap_lost", "swap_no_alice_click"),
    "key_rate": ("key_bits", "rounds"),
    "eve_info_probability": ("eve_correct", "key_bits_probed"),
    "forbidden_event_rate": ("forbidden", "rounds"),
}


def count_outcomes(entries: Iterable[tuple[AliceOp, SiftOutcome, Optional[int], float]]) -> dict:
    """Weighted counters behind every rate; weights are counts or probabilities."""
    c = dict.fromkeys(
        ["rounds", "ctrl_rounds", "ctrl_lost", "ctrl_tested", "ctrl_errors", "swap_no_alice_click",
         "swap_lost", "swap_tested", "swap_errors", "key_bits", "key_bits_probed", "eve_correct",
         "forbidden"],
        0,
    )
    for op, out, eve, w in entries:
        c["rounds"] += w
        if out.kind is SiftKind.FORBIDDEN:
            c["forbidden"] += w
        if op is AliceOp.CTRL:
            c["ctrl_rounds"] += w
            if out.kind is SiftKind.LOSS:
                c["ctrl_lost"] += w
            elif out.kind is SiftKind.CTRL_TEST:
                c["ctrl_tested"] += w
                if not out.passed:
                    c["ctrl_errors"] += w
        elif op.is_swap_x:
            if out.reason == "alice-detected" or out.kind is SiftKind.FORBIDDEN:
                continue
            c["swap_no_alice_click"] += w
            if out.kind is SiftKind.LOSS:
                c["swap_lost"] += w
            elif out.kind is SiftKind.KEY_BIT:
                # key rounds double as the passing half of the SWAP-x test
                c["swap_tested"] += w
                c["key_bits"] += w
                if eve is not None:
                    c["key_bits_probed"] += w
                    if eve == out.bit:
                        c["eve_correct"] += w
            elif out.kind is SiftKind.SWAP_TEST:
                c["swap_tested"] += w
                c["swap_errors"] += w
    return c


def wilson_interval(successes: int, n: int, alpha: float = 0.05) -> tuple[float, float]:
    from statsmodels.stats.proportion import proportion_confint

    lo, hi = proportion_confint(successes, n, alpha=alpha, method="wilson")
    return float(lo), float(hi)


def report_from_counts(counts: dict, with_intervals: bool, alpha: float = 0.05) -> RateReport:
    rates, intervals = {}, {}
    for name, (num, den) in _RATES.items():
        n = counts[den]
        rates[name] = counts[num] / n if n > 0 else None
        if with_intervals and n > 0:
            intervals[name] = wilson_interval(int(counts[num]), int(n), alpha)
    return RateReport(**rates, intervals=intervals, counts=dict(counts))


def aggregate_rates(
    outcomes: Iterable[tuple[AliceOp, SiftOutcome, Optional[int]]],
    alpha: float = 0.05,
) -> RateReport:
    """Rates over sampled rounds, each with a Wilson interval at level ``1 - alpha``."""
    outcomes = list(outcomes)
    if not outcomes:
        raise ContractViolation("aggregate_rates needs at least one round")
    counts = count_outcomes((op, out, eve, 1) for op, out, eve in outcomes)
    return report_from_counts(counts, with_intervals=True, alpha=alpha)
