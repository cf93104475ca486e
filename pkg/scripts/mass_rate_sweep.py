"""Frame-equivalence residuals versus the mass growth rate gamma (m1 = e^{gamma t}, m2 = 1)."""

import argparse

import numpy as np

from massframe.dynamics import TimeGrid, equivalence_residual, evolve
from massframe.params import Constant, Exponential, SystemParams
from massframe.quadratic import Pipeline
from massframe.sympl import GaussianState


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--gammas", type=float, nargs="+", default=[0.0, 0.01, 0.05, 0.1, 0.2, 0.4])
    parser.add_argument("--t1", type=float, default=5.0)
    parser.add_argument("--h", type=float, default=1e-3)
    args = parser.parse_args()

    s0 = GaussianState.displaced([1.0, 0.5, 0.0, 0.0])
    g = TimeGrid(0.0, args.t1, args.h)
    pipes = [pl for pl in Pipeline if pl is not Pipeline.DIRECT]
    print("gamma  " + "  ".join(f"{pl.value:>16s}" for pl in pipes))
    for gamma in args.gammas:
        p = SystemParams(Exponential(1.0, gamma), Constant(1.0), Constant(1.0), Constant(1.0),
                         Constant(0.3), (0.0, args.t1))
        lab = evolve(Pipeline.DIRECT, p, s0, g)
        row = [equivalence_residual(pl, p, s0, g, lab)[0] for pl in pipes]
        print(f"{gamma:5.2f}  " + "  ".join(f"{r:16.3e}" for r in row))


if __name__ == "__main__":
    main()
