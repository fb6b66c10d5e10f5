"""Bob(+Eve) states per Alice operation and detection outcome.

These are the states tabulated for the honest protocols and for the two
attacks, produced by running the simulator rather than typed in.
"""
from __future__ import annotations

import csv
import io
from typing import Optional

from .adversary import Attack, apply_attack_stage, build_full_attack, build_weaker_attack
from .engine import round_half_up, sweep_epsilon
from .fock import DEFAULT_CAP, Subsystem, discard_alice, measure_enumerate
from .protocol import Variant, alice_apply, bob_prepare


def alice_branches(variant: Variant, attack: Optional[Attack] = None, apply_v: bool = True,
                   cap: int = DEFAULT_CAP) -> list[dict]:
    rows = []
    for op in variant.ops:
        state = bob_prepare(cap)
        if attack is not None:
            state = apply_attack_stage(attack, 1, state)
        state = alice_apply(op, state)
        for branch in measure_enumerate(state, Subsystem.ALICE):
            out = branch.post_state
            if attack is not None and apply_v:
                out = apply_attack_stage(attack, 2, out)
            row = {
                "op": op.value,
                "alice_detected": any(branch.outcome),
                "probability": branch.probability,
                "state": discard_alice(out).to_records(),
            }
            # which of Alice's detectors fired is not tabulated; fold equal residual states
            for prev in rows:
                if (prev["op"], prev["alice_detected"], prev["state"]) == (row["op"], row["alice_detected"], row["state"]):
                    prev["probability"] += row["probability"]
                    break
            else:
                rows.append(row)
    return rows


def state_tables(epsilon: float, cap: int = DEFAULT_CAP) -> dict:
    """Honest, full-attack and weaker-attack state tables; the weaker one at ``epsilon``."""
    full = build_full_attack(cap)
    return {
        "table1": alice_branches(Variant.MIRROR, cap=cap),
        "table2": alice_branches(Variant.SIMPLIFIED, cap=cap),
        "table3": alice_branches(Variant.SIMPLIFIED, full, apply_v=False, cap=cap),
        "table4": alice_branches(Variant.SIMPLIFIED, full, cap=cap),
        "table5": alice_branches(Variant.SIMPLIFIED, build_weaker_attack(epsilon, cap), cap=cap),
        "table5_epsilon": epsilon,
    }


SWEEP_COLUMNS = [
    "epsilon", "p_closed", "r_ctrl_closed", "r_swap_closed",
    "p_exact", "r_ctrl_exact", "r_swap_exact",
    "p_2dp", "r_ctrl_2dp", "r_swap_2dp",
]


def sweep_records(grid) -> list[dict]:
    out = []
    for row in sweep_epsilon(grid):
        out.append({
            "epsilon": row.epsilon,
            "p_closed": row.p_closed,
            "r_ctrl_closed": row.r_ctrl_closed,
            "r_swap_closed": row.r_swap_closed,
            "p_exact": row.p_exact,
            "r_ctrl_exact": row.r_ctrl_exact,
            "r_swap_exact": row.r_swap_exact,
            "p_2dp": f"{round_half_up(row.p_closed):.2f}",
            "r_ctrl_2dp": f"{round_half_up(row.r_ctrl_closed):.2f}",
            "r_swap_2dp": f"{round_half_up(row.r_swap_closed):.2f}",
        })
    return out


def sweep_csv(records: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in rec.items()})
    return buf.getvalue()
