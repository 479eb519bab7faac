"""Where does classify put the boundary for a_n = exp(-M(theta0 sqrt n)) / n^2?

Sweeps theta0 and the box size on a geometric theta grid and prints the
located theta_star next to theta0, for both the squared-weight norm used by
classify and the single-weight falloff norm.
"""

import argparse

import numpy as np

from gsh import spaces, weights
from gsh.fields import CoefficientField


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--thetas", default="0.5,1,2")
    ap.add_argument("--boxes", default="128,256,512")
    ap.add_argument("--grid-points", type=int, default=16)
    args = ap.parse_args()

    seq = weights.gevrey(1.0)
    print(f"{'theta0':>7} {'box':>5} {'star (M^2)':>11} {'star (M)':>9} {'step':>6}")
    for theta0 in map(float, args.thetas.split(",")):
        grid = np.geomspace(theta0 / 4, theta0 * 4, args.grid_points)
        for box in map(int, args.boxes.split(",")):
            n = np.arange(box)
            a = CoefficientField(np.exp(-spaces.envelope(seq, theta0, (box,))) / np.maximum(n, 1) ** 2)
            stars = []
            for power in (2.0, 1.0):
                rep = spaces.classify(a, seq, list(grid), weight_power=power)
                stars.append(rep.theta_star[0] if rep.theta_star else float("nan"))
            print(f"{theta0:7g} {box:5d} {stars[0]:11.4f} {stars[1]:9.4f} {grid[1] / grid[0]:6.3f}")


if __name__ == "__main__":
    main()
