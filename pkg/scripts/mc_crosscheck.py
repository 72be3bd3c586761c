"""Fredholm-determinant probabilities against Monte Carlo for several models and events."""

import argparse
import math

import numpy as np

from tasep_pgf.pathkernel import InitialCondition, joint_probability
from tasep_pgf.pgf_model import PGFModel
from tasep_pgf.simulator import simulate

CASES = [
    (PGFModel.continuous_poisson(1.0), 1.0),
    (PGFModel.bernoulli(0.5), 3),
    (PGFModel.geometric(0.4), 2),
]
EVENTS = [((1, 3), (-1, -3)), ((1, 2), (-1, -2)), ((2, 3), (-2, -3))]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=1_000_000)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()
    frm = (-1, -2, -3)
    for model, t in CASES:
        last = simulate(model, frm, t, samples=args.samples, seed=args.seed).positions[-1]
        for ns, a in EVENTS:
            exact = joint_probability(model, InitialCondition(frm), t, ns, a).probability
            p = np.all([last[:, n - 1] > aj for n, aj in zip(ns, a)], axis=0).mean()
            se = math.sqrt(p * (1 - p) / args.samples)
            print(f"{model.label:22s} n={ns} a={a}: det {exact:.6f}  mc {p:.6f} +- {se:.1e}  z={(p - exact) / se:+.2f}")


if __name__ == "__main__":
    main()
