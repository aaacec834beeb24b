"""The growth constant c_p on Z^3 by two independent routes.

The law-of-large-numbers route averages U_n / n over long walks.  The
cluster route estimates the capacity of the cluster of the origin by
escape walks.  Both should rise with p and agree within their combined
standard error.

Run with ``python3 demos/cp_scan.py``.
"""
from percwalk import graph_core as gc
from percwalk.capacity import capacity_exact
from percwalk.estimators import combined_se, estimate_cp_cluster, estimate_cp_lln


def main(replicas: int = 100, seed: int = 3):
    g = gc.ZdNearest(3)
    c0 = capacity_exact(g, [(0, 0, 0)])
    print(f"capacity of a point: {c0.value:.5f} +- {c0.uncertainty:.5f}")
    print(f"{'p':>5} {'LLN':>16} {'cluster':>16} {'z':>6}")
    for p in (0.0, 0.05, 0.1, 0.15):
        a = estimate_cp_lln(g, p, 10 ** 5, replicas, seed)
        b = estimate_cp_cluster(g, p, replicas, seed=seed + 1)
        z = (a.value - b.value) / combined_se(a.se, b.se)
        print(f"{p:5.2f} {a.value:8.4f}+-{a.se:.4f} {b.value:8.4f}+-{b.se:.4f} {z:6.2f}")


if __name__ == "__main__":
    main()
