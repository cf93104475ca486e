"""Direct-frame Gaussian moments against truncated two-mode Fock evolution."""

import argparse
import time

import numpy as np

from massframe import fock
from massframe.dynamics import TimeGrid, evolve
from massframe.params import Constant, Exponential, PowerLaw, SystemParams
from massframe.quadratic import Pipeline
from massframe.sympl import GaussianState


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--d", type=int, default=30)
    parser.add_argument("--h", type=float, default=0.01)
    parser.add_argument("--t1", type=float, default=3.0)
    parser.add_argument("--amplitude", type=float, default=0.5, help="scale on the displaced mean (1, 0.5, 0, 0)")
    args = parser.parse_args()

    p = SystemParams(Exponential(1, 0.2), PowerLaw(1, 0.3, 2), Constant(1), Constant(1), Constant(0.3), (0, 5))
    mu0 = args.amplitude * np.array([1.0, 0.5, 0.0, 0.0])
    g = TimeGrid(0.0, args.t1, args.h)
    start = time.perf_counter()
    ftraj = fock.two_mode_evolve(Pipeline.DIRECT, p, fock.TwoModeState.coherent(mu0, args.d), g)
    gtraj = evolve(Pipeline.DIRECT, p, GaussianState.displaced(mu0), g)
    mean_err = np.max(np.abs(ftraj.mus - gtraj.mus), axis=1)
    cov_err = np.max(np.abs(ftraj.sigmas - gtraj.sigmas), axis=(1, 2))
    stride = max(1, len(g.times) // 10)
    print("     t   mean_err    cov_err")
    for t, m, c in zip(g.times[::stride], mean_err[::stride], cov_err[::stride]):
        print(f"{t:6.2f}  {m:9.2e}  {c:9.2e}")
    print(f"max mean {mean_err.max():.2e}, max cov {cov_err.max():.2e}, {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
