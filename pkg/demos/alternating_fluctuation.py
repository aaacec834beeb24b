"""U_n / n on a lattice that alternates between Z^3 and the l-inf lattice.

Shells at radii 6 and 20 split space into a Z^3 core, an l-inf shell and
a Z^3 exterior.  Short windows spend most of their time in the l-inf
shell, long windows mostly outside it, so U_n / n drifts between the
two pure-lattice limits and need not converge.  The run uses a
subcritical p for both lattices.

Run with ``python3 demos/alternating_fluctuation.py``.
"""
from percwalk.experiments import fluctuation_demo


def main(p: float = 0.03, replicas: int = 300, seed: int = 19):
    rep = fluctuation_demo((6, 20), p, (1000, 8000), replicas, seed=seed)
    print(f"p = {p}, shells = {rep.shells}")
    for w, m, s, o in zip(rep.windows, rep.means, rep.ses, rep.linf_occupancy):
        print(f"  n = {w:5d}: U_n/n = {m:.4f} +- {s:.4f}  (time in l-inf: {o:.2f})")
    print(f"  Z^3 reference        {rep.reference_z3.value:.4f} +- {rep.reference_z3.se:.4f}")
    print(f"  l-inf reference      {rep.reference_z3_linf.value:.4f} "
          f"+- {rep.reference_z3_linf.se:.4f}")
    print(f"  window gap {rep.gap:+.4f} ({rep.separation:.1f} SE), "
          f"reference gap {rep.reference_gap:+.4f}, same sign: {rep.same_sign}")


if __name__ == "__main__":
    main()
