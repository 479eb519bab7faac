"""M(rho) against rho^{1/s} (log rho)^{-t/s} for power_log(s, t) over a rho sweep.

Prints the ratio and, for t = 0, the closed form (s/e) rho^{1/s} the ratio
converges to.
"""

import argparse
import math

import numpy as np

from gsh import weights


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cases", default="1:0,1:1,0.5:1,2:0,2:1")
    ap.add_argument("--decades", type=int, default=12)
    args = ap.parse_args()

    for case in args.cases.split(","):
        s, t = (float(v) for v in case.split(":"))
        seq = weights.power_log(s, t)
        print(f"power_log(s={s:g}, t={t:g})")
        print(f"{'rho':>10} {'p*':>14} {'M(rho)':>14} {'ratio':>10} {'s/e':>8}")
        for rho in np.logspace(2, args.decades, args.decades - 1):
            val = weights.associated_fn(seq, rho, p_cap=10**18)
            gauge = rho ** (1 / s) * math.log(rho) ** (-t / s)
            flag = " saturated" if val.saturated else ""
            print(f"{rho:10.1e} {val.p_star:14d} {val.value:14.6g} {val.value / gauge:10.4f} {s / math.e:8.4f}{flag}")
        print()


if __name__ == "__main__":
    main()
