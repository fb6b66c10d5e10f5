"""Regenerate the golden state tables from the hand-typed oracle states.

Run from the repository root: ``python3 tests/golden/make_golden.py``.
The package itself is not imported, so the files are an independent reference.
"""
import json
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))

from oracles import EPS0, TABLE_1, TABLE_2, TABLE_3, TABLE_4, table_5  # noqa: E402


def rows(table):
    out = []
    for (op, detected), (prob, state) in table.items():
        records = [[[0, 0, b1, b0, e], float(v), 0.0] for (b1, b0, e), v in sorted(state.items())]
        out.append({"op": op, "alice_detected": detected, "probability": prob, "state": records})
    return out


def main():
    tables = {"table1": TABLE_1, "table2": TABLE_2, "table3": TABLE_3, "table4": TABLE_4, "table5": table_5(EPS0)}
    for name, table in tables.items():
        body = {"rows": rows(table)}
        if name == "table5":
            body["epsilon"] = EPS0
        (HERE / f"{name}.json").write_text(json.dumps(body, indent=2) + "\n")


if __name__ == "__main__":
    main()
