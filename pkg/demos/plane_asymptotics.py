"""U_n on the plane: sublinear growth and the 1/log n corrections.

On Z^2 the walk is recurrent, so U_n / n tends to zero.  The script
prints U_n (log n) / n against n for a few values of p.  That column
creeps toward pi with corrections of order 1/log n, while U_n / n
itself keeps shrinking.

Run with ``python3 demos/plane_asymptotics.py``.
"""
import math

from percwalk import graph_core as gc
from percwalk.union_process import simulate_batch

N_VALUES = [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6]


def main(replicas: int = 100, seed: int = 1):
    g = gc.ZdNearest(2)
    print(f"{'p':>5} {'n':>9} {'U_n/n':>9} {'U_n log n/n':>12} {'R_n log n/n':>12}")
    for p in (0.0, 0.1, 0.2):
        b = simulate_batch(g, p, N_VALUES, replicas, seed, boundary=False)
        for j, n in enumerate(b.n_values):
            u, r = b.U[:, j].mean(), b.R[:, j].mean()
            print(f"{p:5.2f} {n:9d} {u / n:9.4f} {u * math.log(n) / n:12.4f} "
                  f"{r * math.log(n) / n:12.4f}")


if __name__ == "__main__":
    main()
