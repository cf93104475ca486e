"""Equivalence residual under step halving for each transformed frame.

A frame that is an exact canonical reduction shows a ratio near 16 (RK4);
a wrong frame plateaus at an h-independent residual (ratio near 1).
"""

import argparse

from massframe.dynamics import TimeGrid, equivalence_residual
from massframe.params import Constant, Exponential, PowerLaw, SystemParams
from massframe.quadratic import Pipeline
from massframe.sympl import GaussianState


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025])
    args = parser.parse_args()

    p = SystemParams(Exponential(1, 0.2), PowerLaw(1, 0.3, 2), Constant(1), Constant(1), Constant(0.3), (0, 5))
    s0 = GaussianState.displaced([1.0, 0.5, 0.0, 0.0])
    for pl in Pipeline:
        if pl is Pipeline.DIRECT:
            continue
        res = [equivalence_residual(pl, p, s0, TimeGrid(0, 5, h))[0] for h in args.steps]
        ratios = [a / b for a, b in zip(res, res[1:])]
        print(f"{pl.value:16s} " + " ".join(f"{r:.3e}" for r in res) + "  ratios " + " ".join(f"{q:.2f}" for q in ratios))


if __name__ == "__main__":
    main()
