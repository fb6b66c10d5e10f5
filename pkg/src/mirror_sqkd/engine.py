"""Scenario execution: exact branch enumeration and seeded Monte Carlo.

A round is a tree of choice points (Alice's op, her number-resolved
outcome, Bob's basis, his outcome, Eve's probe outcome).  The exact path
sums leaf probabilities; the sampler walks the same tree with one
counter-based uniform per choice point, so round ``r`` depends only on
``(seed, r)`` and sharding cannot change the tallies.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from . import sampling
from .adversary import (
    Attack,
    apply_attack_stage,
    build_attack,
    closed_form_rates,
)
from .fock import (
    DEFAULT_CAP,
    ContractViolation,
    Subsystem,
    measure_enumerate,
    to_click_pattern,
)
from .protocol import (
    AliceOp,
    ProtocolVariant,
    RateReport,
    RoundRecord,
    Variant,
    alice_apply,
    bob_prepare,
    count_outcomes,
    report_from_counts,
    sift_round,
)


@dataclass(frozen=True)
class AttackSpec:
    name: str = "none"
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.name not in ("none", "full", "weaker"):
            raise ContractViolation(f"unknown attack {self.name!r}")
        if self.name == "weaker":
            if self.epsilon is None or not 0.0 <= self.epsilon <= 1.0:
                raise ContractViolation(f"weaker attack needs epsilon in [0, 1], got {self.epsilon}")
        elif self.epsilon is not None:
            raise ContractViolation(f"epsilon is only meaningful for the weaker attack, not {self.name!r}")

    def build(self, cap: int = DEFAULT_CAP) -> Optional[Attack]:
        return build_attack(self.name, self.epsilon, cap)


@dataclass(frozen=True)
class ScenarioConfig:
    variant: ProtocolVariant = field(default_factory=ProtocolVariant.simplified)
    attack: AttackSpec = field(default_factory=AttackSpec)
    rounds: int = 100_000
    master_seed: int = 0
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.rounds < 1:
            raise ContractViolation("rounds must be positive")
        if not 0 <= self.master_seed < 2**64:
            raise ContractViolation("master seed must be an unsigned 64-bit integer")
        if self.cap < 1:
            raise ContractViolation("photon cap must be at least 1")

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.kind.value,
            "op_probs": {op.value: p for op, p in self.variant.op_probs},
            "hadamard_prob": self.variant.hadamard_prob,
            "attack": self.attack.name,
            "epsilon": self.attack.epsilon,
            "rounds": self.rounds,
            "seed": self.master_seed,
            "cap": self.cap,
        }


Leaf = RoundRecord


@dataclass
class Node:
    children: list[tuple[float, Union["Node", Leaf]]] = field(default_factory=list)


def round_tree(config: ScenarioConfig, attack: Optional[Attack] = None) -> Node:
    """Branch tree of one round with exact conditional probabilities."""
    if attack is None:
        attack = config.attack.build(config.cap)
    root = Node()
    for op, p_op in config.variant.op_probs:
        if p_op == 0.0:
            continue
        state = bob_prepare(config.cap)
        if attack is not None:
            state = apply_attack_stage(attack, 1, state)
        state = alice_apply(op, state)
        op_node = Node()
        for ab in measure_enumerate(state, Subsystem.ALICE):
            returned = ab.post_state
            if attack is not None:
                returned = apply_attack_stage(attack, 2, returned)
            alice_node = Node()
            for basis, p_basis in config.variant.basis_probs():
                if p_basis == 0.0:
                    continue
                basis_node = Node()
                for bb in measure_enumerate(returned, Subsystem.BOB, basis):
                    record = RoundRecord(op, to_click_pattern(ab.outcome), basis, to_click_pattern(bb.outcome))
                    if attack is None:
                        basis_node.children.append((bb.probability, record))
                        continue
                    eve_node = Node()
                    for eb in measure_enumerate(bb.post_state, Subsystem.EVE):
                        eve_node.children.append(
                            (eb.probability,
                             RoundRecord(op, record.alice_clicks, basis, record.bob_clicks, eb.outcome[0]))
                        )
                    basis_node.children.append((bb.probability, eve_node))
                alice_node.children.append((p_basis, basis_node))
            op_node.children.append((ab.probability, alice_node))
        root.children.append((p_op, op_node))
    return root


def _walk(node: Node, weight: float = 1.0):
    for p, child in node.children:
        if isinstance(child, Node):
            yield from _walk(child, weight * p)
        else:
            yield child, weight * p


class JointDistribution:
    """Probability of every distinguishable round record."""

    def __init__(self, probs: dict[RoundRecord, float], variant: ProtocolVariant):
        self.probs = probs
        self.variant = variant

    def __getitem__(self, record: RoundRecord) -> float:
        return self.probs.get(record, 0.0)

    def items(self):
        return sorted(self.probs.items(), key=lambda kv: kv[0].sort_key())

    def total(self) -> float:
        return math.fsum(self.probs.values())

    def prob(self, predicate) -> float:
        return math.fsum(p for r, p in self.probs.items() if predicate(r))

    def conditional(self, event, given) -> Optional[float]:
        den = self.prob(given)
        if den == 0.0:
            return None
        return self.prob(lambda r: given(r) and event(r)) / den

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.kind.value,
            "outcomes": [dict(r.to_dict(), probability=p) for r, p in self.items()],
        }


def exact_distribution(config: ScenarioConfig, attack: Optional[Attack] = None) -> JointDistribution:
    """Exact outcome probabilities; ``attack`` overrides the config's attack spec."""
    probs: dict[RoundRecord, float] = {}
    for record, p in _walk(round_tree(config, attack)):
        probs[record] = probs.get(record, 0.0) + p
    return JointDistribution(probs, config.variant)


def derive_rates(dist: JointDistribution) -> RateReport:
    entries = ((r.op, sift_round(r, dist.variant), r.eve_outcome, p) for r, p in dist.probs.items())
    return report_from_counts(count_outcomes(entries), with_intervals=False)


@dataclass
class Tally:
    counts: dict[RoundRecord, int]
    rounds: int
    master_seed: int
    variant: ProtocolVariant

    def items(self):
        return sorted(self.counts.items(), key=lambda kv: kv[0].sort_key())

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "seed": self.master_seed,
            "variant": self.variant.kind.value,
            "outcomes": [dict(r.to_dict(), count=n) for r, n in self.items()],
        }


def _flatten(root: Node):
    first_child, n_children, cum, target, leaves = [], [], [], [], []
    leaf_index: dict[RoundRecord, int] = {}
    queue = [root]
    node_ids = {id(root): 0}
    # nodes are numbered in BFS order so the root is 0
    while queue:
        node = queue.pop(0)
        first_child.append(len(cum))
        n_children.append(len(node.children))
        running = 0.0
        for p, child in node.children:
            running += p
            cum.append(running)
            if isinstance(child, Node):
                node_ids[id(child)] = len(node_ids)
                target.append(node_ids[id(child)])
                queue.append(child)
            else:
                if child not in leaf_index:
                    leaf_index[child] = len(leaves)
                    leaves.append(child)
                target.append(-leaf_index[child] - 1)
    return (
        np.asarray(first_child, dtype=np.int64),
        np.asarray(n_children, dtype=np.int64),
        np.asarray(cum, dtype=np.float64),
        np.asarray(target, dtype=np.int64),
        leaves,
    )


def sample_counts(config: ScenarioConfig, workers: int = 1) -> Tally:
    first_child, n_children, cum, target, leaves = _flatten(round_tree(config))
    key = sampling.seed_key(config.master_seed)
    workers = max(1, min(workers, config.rounds))
    bounds = np.linspace(0, config.rounds, workers + 1).astype(np.int64)

    def shard(i):
        return sampling.sample_rounds(
            key, int(bounds[i]), int(bounds[i + 1]), first_child, n_children, cum, target, len(leaves)
        )

    if workers == 1:
        parts = [shard(0)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(shard, range(workers)))
    total = np.sum(parts, axis=0)
    counts = {rec: int(n) for rec, n in zip(leaves, total) if n > 0}
    return Tally(counts, config.rounds, config.master_seed, config.variant)


def tally_rates(tally: Tally, alpha: float = 0.05) -> RateReport:
    entries = ((r.op, sift_round(r, tally.variant), r.eve_outcome, n) for r, n in tally.counts.items())
    return report_from_counts(count_outcomes(entries), with_intervals=True, alpha=alpha)


def simulate(config: ScenarioConfig, workers: int = 1) -> tuple[Tally, RateReport]:
    tally = sample_counts(config, workers)
    return tally, tally_rates(tally)


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    p_closed: float
    r_ctrl_closed: float
    r_swap_closed: float
    p_exact: float
    r_ctrl_exact: float
    r_swap_exact: float


def sweep_epsilon(grid: Iterable[float], variant: Optional[ProtocolVariant] = None) -> list[SweepRow]:
    variant = variant or ProtocolVariant.simplified()
    rows = []
    for eps in grid:
        p, rc, rs = closed_form_rates(eps)
        config = ScenarioConfig(variant, AttackSpec("weaker", eps))
        rep = derive_rates(exact_distribution(config))
        rows.append(SweepRow(eps, p, rc, rs, rep.eve_info_probability, rep.loss_rate_ctrl, rep.loss_rate_swap))
    return rows


@dataclass(frozen=True)
class DetectionReport:
    r_ctrl: Optional[float]
    r_swap: Optional[float]
    ctrl_lost: int
    ctrl_rounds: int
    swap_lost: int
    swap_rounds: int
    z: Optional[float]
    p_value: Optional[float]
    alpha: float
    detected: bool
    degenerate: bool

    def to_dict(self) -> dict:
        return asdict(self)


def detection_test(tally: Tally, alpha: float = 0.01) -> DetectionReport:
    """Two-proportion z-test of CTRL against SWAP-x loss rates."""
    from statsmodels.stats.proportion import proportions_ztest

    c = count_outcomes((r.op, sift_round(r, tally.variant), r.eve_outcome, n) for r, n in tally.counts.items())
    k1, n1, k2, n2 = c["ctrl_lost"], c["ctrl_rounds"], c["swap_lost"], c["swap_no_alice_click"]
    if n1 == 0 or n2 == 0:
        return DetectionReport(None, None, k1, n1, k2, n2, None, None, alpha, False, True)
    r1, r2 = k1 / n1, k2 / n2
    pooled = (k1 + k2) / (n1 + n2)
    if pooled in (0.0, 1.0):
        # zero pooled variance: the proportions are identical
        z, pval = 0.0, 1.0
    else:
        z, pval = proportions_ztest([k1, k2], [n1, n2])
        z, pval = float(z), float(pval)
    return DetectionReport(r1, r2, k1, n1, k2, n2, z, pval, alpha, pval < alpha, False)


def mirror_detectability(attack: Optional[Attack], variant: Optional[ProtocolVariant] = None) -> float:
    """P(Bob clicks | SWAP-ALL round), a forbidden event in the Mirror protocol."""
    variant = variant or ProtocolVariant.mirror()
    if variant.kind is not Variant.MIRROR:
        raise ContractViolation("SWAP-ALL exists only in the Mirror protocol")
    cap = attack.stage1_state.cap if attack is not None else DEFAULT_CAP
    config = ScenarioConfig(variant, cap=cap)
    dist = exact_distribution(config, attack)
    return dist.conditional(lambda r: r.bob_clicks.any, lambda r: r.op is AliceOp.SWAPALL)


def round_half_up(x: float, places: int = 2) -> float:
    """Half-up decimal rounding, as printed tables round."""
    from decimal import ROUND_HALF_UP, Decimal

    return float(Decimal(f"{x:.12f}").quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP))


def parse_grid(spec: Union[str, Sequence[float]]) -> list[float]:
    """``"start:stop:step"`` (inclusive), a comma list, or a sequence."""
    if not isinstance(spec, str):
        return [float(x) for x in spec]
    if ":" in spec:
        start, stop, step = (float(x) for x in spec.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9))
        return [round(start + i * step, 12) for i in range(n + 1)]
    return [float(x) for x in spec.split(",") if x.strip()]
