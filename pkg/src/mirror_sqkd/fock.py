"""Truncated Fock-space states over the Alice / Bob / Eve register layout.

Every basis ket is a :class:`BasisLabel` ``(a1, a0, b1, b0, e)``: photon
counts in Alice's ``|1>``- and ``|0>``-mode slots, the same for Bob's
channel, and the level of Eve's three-dimensional probe.  For a two-mode
register the pair is written ``|m1, m0>`` (``|0,1>`` is one photon in the
``|0>`` mode).  After :func:`hadamard_transform` the Bob pair is read as
``|m-, m+>_x`` instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple

DEFAULT_CAP = 2
PROBE_LEVELS = 3
PRUNE_THRESHOLD = 1e-15


class TruncationError(ValueError):
    """A label or transform result does not fit under the photon cap."""


class ContractViolation(ValueError):
    """An operation was called outside its precondition."""


class BasisLabel(NamedTuple):
    a1: int = 0
    a0: int = 0
    b1: int = 0
    b0: int = 0
    e: int = 0

    def replace(self, **kw: int) -> "BasisLabel":
        return self._replace(**kw)


VACUUM = BasisLabel()


class Subsystem(Enum):
    ALICE = "alice"
    BOB = "bob"
    EVE = "eve"

    @property
    def slots(self) -> tuple[int, ...]:
        return _SLOTS[self]


_SLOTS = {Subsystem.ALICE: (0, 1), Subsystem.BOB: (2, 3), Subsystem.EVE: (4,)}


class Basis(Enum):
    COMPUTATIONAL = "computational"
    HADAMARD = "hadamard"


def check_label(label: BasisLabel, cap: int) -> None:
    if any(n < 0 for n in label):
        raise TruncationError(f"negative occupation in {tuple(label)}")
    if max(label[:4]) > cap:
        raise TruncationError(f"label {tuple(label)} exceeds photon cap {cap}")
    if label.e >= PROBE_LEVELS:
        raise TruncationError(f"probe level {label.e} outside 0..{PROBE_LEVELS - 1}")


def _hypot(amps) -> float:
    """Euclidean norm without under/overflow in the squares."""
    return math.hypot(*(abs(a) for a in amps))


class StateVector:
    """Immutable sparse ket: a mapping from :class:`BasisLabel` to amplitude.

    Nothing is renormalized or pruned implicitly; :meth:`canonical` prunes
    amplitudes whose squared magnitude is below ``1e-15``.
    """

    __slots__ = ("_amps", "_cap")

    def __init__(self, amps: Mapping[BasisLabel, complex], cap: int = DEFAULT_CAP):
        self._amps = {BasisLabel(*k): complex(v) for k, v in amps.items()}
        self._cap = cap

    @property
    def cap(self) -> int:
        return self._cap

    @property
    def amps(self) -> Mapping[BasisLabel, complex]:
        return dict(self._amps)

    def __getitem__(self, label: BasisLabel) -> complex:
        return self._amps.get(BasisLabel(*label), 0j)

    def __iter__(self):
        return iter(sorted(self._amps))

    def __len__(self) -> int:
        return len(self._amps)

    def items(self):
        return sorted(self._amps.items())

    def norm(self) -> float:
        return _hypot(self._amps.values())

    def scaled(self, factor: complex) -> "StateVector":
        return StateVector({k: factor * v for k, v in self._amps.items()}, self._cap)

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ContractViolation("cannot normalize the zero vector")
        return StateVector({k: v / n for k, v in self._amps.items()}, self._cap)

    def __add__(self, other: "StateVector") -> "StateVector":
        out = dict(self._amps)
        for k, v in other._amps.items():
            out[k] = out.get(k, 0j) + v
        return StateVector(out, max(self._cap, other._cap))

    def __sub__(self, other: "StateVector") -> "StateVector":
        return self + other.scaled(-1)

    def canonical(self) -> "StateVector":
        return StateVector(
            {k: v for k, v in self._amps.items() if abs(v) ** 2 >= PRUNE_THRESHOLD},
            self._cap,
        )

    def distance(self, other: "StateVector") -> float:
        """Largest per-amplitude absolute difference."""
        keys = set(self._amps) | set(other._amps)
        return max((abs(self[k] - other[k]) for k in keys), default=0.0)

    def to_records(self) -> list[list]:
        """Canonical serialization: ``[[label], re, im]`` sorted by label."""
        return [[list(k), v.real, v.imag] for k, v in self.canonical().items()]

    @classmethod
    def from_records(cls, records: Iterable, cap: int = DEFAULT_CAP) -> "StateVector":
        return build_state([(complex(re, im), BasisLabel(*lab)) for lab, re, im in records], cap)

    def __repr__(self) -> str:
        terms = " + ".join(f"({v:.6g})|{','.join(map(str, k))}>" for k, v in self.canonical().items())
        return f"StateVector({terms or '0'})"


def build_state(terms: Iterable[tuple[complex, BasisLabel]], cap: int = DEFAULT_CAP) -> StateVector:
    """Superpose ``(amplitude, label)`` terms; duplicate labels are summed."""
    amps: dict[BasisLabel, complex] = {}
    count = 0
    for amp, label in terms:
        label = BasisLabel(*label)
        check_label(label, cap)
        amps[label] = amps.get(label, 0j) + complex(amp)
        count += 1
    if count == 0:
        raise ContractViolation("build_state needs at least one term")
    return StateVector(amps, cap)


def ket(cap: int = DEFAULT_CAP, **occupations: int) -> StateVector:
    return build_state([(1.0, VACUUM.replace(**occupations))], cap)


def inner_product(s1: StateVector, s2: StateVector) -> complex:
    """``<s1|s2>``, conjugate-linear in ``s1``."""
    a, b = s1._amps, s2._amps
    if len(b) < len(a):
        return sum((a[k].conjugate() * v for k, v in b.items() if k in a), 0j)
    return sum((v.conjugate() * b[k] for k, v in a.items() if k in b), 0j)


@lru_cache(maxsize=None)
def _mode_change(m1: int, m0: int) -> tuple[tuple[tuple[int, int], float], ...]:
    # a1^dag = (a+^dag - a-^dag)/sqrt2, a0^dag = (a+^dag + a-^dag)/sqrt2; the
    # same substitution maps +/- labels back, so the map is its own inverse.
    n = m1 + m0
    out: dict[tuple[int, int], float] = {}
    for i in range(m1 + 1):
        for j in range(m0 + 1):
            minus = i + j
            plus = n - minus
            coef = (
                math.comb(m1, i) * math.comb(m0, j) * (-1) ** i
                * math.sqrt(math.factorial(minus) * math.factorial(plus)
                            / (math.factorial(m1) * math.factorial(m0)))
                / 2 ** (n / 2)
            )
            out[(minus, plus)] = out.get((minus, plus), 0.0) + coef
    return tuple((k, v) for k, v in sorted(out.items()) if v != 0.0)


def hadamard_transform(state: StateVector, subsystem: Subsystem = Subsystem.BOB) -> StateVector:
    """Re-express Bob's channel between the ``|0>,|1>`` and ``|->,|+>`` modes.

    Bob's total photon number must not exceed the cap, otherwise the
    rotated state would need more than ``cap`` photons in a single mode.
    """
    if subsystem is not Subsystem.BOB:
        raise ContractViolation("the Hadamard mode change is defined for Bob's channel only")
    out: dict[BasisLabel, complex] = {}
    for label, amp in state._amps.items():
        if label.b1 + label.b0 > state.cap:
            raise TruncationError(
                f"Bob register holds {label.b1 + label.b0} photons, above cap {state.cap}"
            )
        for (minus, plus), coef in _mode_change(label.b1, label.b0):
            key = label._replace(b1=minus, b0=plus)
            out[key] = out.get(key, 0j) + coef * amp
    return StateVector(out, state.cap)


@dataclass(frozen=True)
class ClickPattern:
    """Threshold-detector reading: one flag per measured mode."""

    clicks: tuple[bool, ...]

    @classmethod
    def from_counts(cls, counts: Iterable[int]) -> "ClickPattern":
        return cls(tuple(n >= 1 for n in counts))

    @property
    def any(self) -> bool:
        return any(self.clicks)

    def __iter__(self):
        return iter(self.clicks)

    def __getitem__(self, i: int) -> bool:
        return self.clicks[i]

    def to_list(self) -> list[int]:
        return [int(c) for c in self.clicks]


def to_click_pattern(outcome: Iterable[int]) -> ClickPattern:
    return ClickPattern.from_counts(outcome)


@dataclass(frozen=True)
class Branch:
    outcome: tuple[int, ...]
    probability: float
    post_state: StateVector


def measure_enumerate(
    state: StateVector,
    subsystem: Subsystem,
    basis: Basis = Basis.COMPUTATIONAL,
) -> list[Branch]:
    """All number-resolved outcomes of a projective measurement on one register.

    Hadamard outcomes are ``(m-, m+)`` occupations; post-states are always
    returned in the computational frame.
    """
    if len(state) == 0:
        raise ContractViolation("cannot measure an empty state")
    if basis is Basis.HADAMARD:
        if subsystem is not Subsystem.BOB:
            raise ContractViolation("Hadamard measurement is only defined for Bob's channel")
        state = hadamard_transform(state)
    slots = subsystem.slots
    groups: dict[tuple[int, ...], dict[BasisLabel, complex]] = {}
    for label, amp in state._amps.items():
        groups.setdefault(tuple(label[s] for s in slots), {})[label] = amp
    total = state.norm()
    if total == 0.0:
        raise ContractViolation("cannot measure the zero vector")
    branches = []
    for outcome in sorted(groups):
        group = groups[outcome]
        weight = _hypot(group.values())
        prob = (weight / total) ** 2
        if prob == 0.0:  # includes subnormal amplitudes, which cannot be renormalised
            continue
        # divide rather than scale: 1/weight overflows for subnormal branches
        post = StateVector({k: v / weight for k, v in group.items()}, state.cap)
        if basis is Basis.HADAMARD:
            post = hadamard_transform(post)
        branches.append(Branch(outcome, prob, post))
    return branches


def discard_alice(state: StateVector) -> StateVector:
    """Drop Alice's register once it is a definite product occupation."""
    occupations = {(k.a1, k.a0) for k, v in state._amps.items() if v != 0}
    if len(occupations) > 1:
        raise ContractViolation("Alice's register is entangled; measure it first")
    return StateVector({k._replace(a1=0, a0=0): v for k, v in state._amps.items()}, state.cap)
