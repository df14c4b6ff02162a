#!/usr/bin/env python3
"""Generate frozen LP fixtures solved by scipy.optimize.linprog (HiGHS).

The JSON this emits is committed; the C++ tests replay the instances
through the project solver and compare objectives. Run only when the
fixture set needs to change:  python3 make_lp_fixtures.py > lp_fixtures.json
"""
import json
import sys

import numpy as np
from scipy.optimize import linprog

INF = float("inf")


def main() -> None:
    rng = np.random.default_rng(20250810)
    fixtures = []
    case = 0
    while len(fixtures) < 28:
        case += 1
        n = int(rng.integers(2, 14))
        m = int(rng.integers(1, 18))
        dens = float(rng.uniform(0.3, 0.9))

        cost = np.round(rng.uniform(-10, 10, n), 3)
        lo = np.zeros(n)
        hi = np.full(n, INF)
        for j in range(n):
            r = rng.uniform()
            if r < 0.15:
                lo[j] = -INF  # free below
            elif r < 0.35:
                lo[j] = round(float(rng.uniform(-5, 2)), 3)
            if rng.uniform() < 0.6:
                hi[j] = round(float(max(lo[j] if np.isfinite(lo[j]) else 0, 0) + rng.uniform(0.5, 12)), 3)
        # keep unbounded-below costs rare so most cases are bounded
        for j in range(n):
            if not np.isfinite(hi[j]) and cost[j] < 0 and rng.uniform() < 0.8:
                cost[j] = abs(cost[j])

        rows = []
        A_ub, b_ub, A_eq, b_eq = [], [], [], []
        for i in range(m):
            coefs = np.round(rng.uniform(-4, 4, n) * (rng.uniform(0, 1, n) < dens), 3)
            if not np.any(coefs):
                coefs[int(rng.integers(0, n))] = 1.0
            rhs = round(float(rng.uniform(-10, 20)), 3)
            sense = rng.choice(["le", "ge", "eq"], p=[0.5, 0.3, 0.2])
            rows.append({"sense": str(sense), "rhs": rhs,
                         "coefs": [float(c) for c in coefs]})
            if sense == "le":
                A_ub.append(coefs); b_ub.append(rhs)
            elif sense == "ge":
                A_ub.append(-coefs); b_ub.append(-rhs)
            else:
                A_eq.append(coefs); b_eq.append(rhs)

        res = linprog(
            cost,
            A_ub=np.array(A_ub) if A_ub else None,
            b_ub=np.array(b_ub) if b_ub else None,
            A_eq=np.array(A_eq) if A_eq else None,
            b_eq=np.array(b_eq) if b_eq else None,
            bounds=list(zip(lo, hi)),
            method="highs",
        )
        if res.status == 0:
            status, objective = "optimal", float(res.fun)
        elif res.status == 2:
            status, objective = "infeasible", None
        elif res.status == 3:
            status, objective = "unbounded", None
        else:
            continue  # numerical trouble: skip, draw another

        fixtures.append({
            "name": f"lp{case:03d}",
            "cost": [float(c) for c in cost],
            "lo": [None if not np.isfinite(v) else float(v) for v in lo],
            "hi": [None if not np.isfinite(v) else float(v) for v in hi],
            "rows": rows,
            "status": status,
            "objective": objective,
        })

    json.dump({"fixtures": fixtures}, sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
