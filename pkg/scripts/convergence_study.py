"""Kernel convergence tables for the built-in models, extended to smaller epsilon.

Writes one CSV per kernel with the error at every (model, point, epsilon)
and prints the fitted log-log slope of error against epsilon.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from tasep_pgf.acceptance import BUILTIN_MODELS, EPI_POINTS, KERNEL_POINTS
from tasep_pgf.asymptotics import convergence_study


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--eps", default="0.1,0.05,0.025,0.0125,0.00625,0.003125")
    parser.add_argument("--out", default="convergence")
    args = parser.parse_args()
    eps = [float(e) for e in args.eps.split(",")]
    out = Path(args.out)
    out.mkdir(exist_ok=True)
    for which in ("A1", "A2", "A3"):
        models = BUILTIN_MODELS[1:2] if which == "A3" else BUILTIN_MODELS
        points = EPI_POINTS if which == "A3" else KERNEL_POINTS
        with open(out / f"{which}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["model", "T", "x", "u", "v", "epsilon", "value", "limit", "error"])
            for model in models:
                for point in points:
                    rows = convergence_study(model, which, [point], eps)
                    for r in rows:
                        writer.writerow([model.label, point.t_cap, point.x_cap, point.u, point.v, r.epsilon,
                                         r.value, r.limit, r.error])
                    errs = np.array([r.error for r in rows])
                    slope = np.polyfit(np.log(eps), np.log(errs), 1)[0]
                    print(f"{which} {model.label:22s} {point}: final {errs[-1]:.4f}, slope {slope:.2f}")


if __name__ == "__main__":
    main()
