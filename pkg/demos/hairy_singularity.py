"""Hairy half-line: U at the hitting time of an anchor is dominated by hairs.

Anchor a_k carries b_k pendant hairs.  Each hair is open with probability
p, so when the walk first reaches a_k the cluster there already holds
about p b_k vertices, far more than the range.  The script prints, per
anchor, the mean hitting time, the mean range and union at that time, and
the fraction of runs in which U exceeds half the expected hair count.

Run with ``python3 demos/hairy_singularity.py``.
"""
from percwalk import graph_core as gc
from percwalk.experiments import hairy_demo


def main(p: float = 0.3, k: int = 4, replicas: int = 2000, seed: int = 10):
    a, b = gc.hairy_schedule("desk", p, k)
    print(f"desk schedule at p = {p}: anchors {a}, hairs {b}")
    print(f"{'k':>2} {'E[T]':>10} {'R':>8} {'U':>10} {'p b_k':>8} {'P(U > p b_k/2)':>15}")
    for r in hairy_demo("desk", p, k, replicas, seed=seed, percolation_repeats=50):
        print(f"{r.k:2d} {r.hit_time_mean:10.1f} {r.r_mean:8.1f} {r.u_mean:10.1f} "
              f"{r.v_expected:8.1f} {r.exceed_frequency:15.3f}")


if __name__ == "__main__":
    main()
