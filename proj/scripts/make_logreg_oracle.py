#!/usr/bin/env python3
"""Reference optima for L2-regularized logistic regression.

Writes tests/data/logreg_oracle.json: 25 random problems (n <= 100,
d <= 20) with the minimizer found by scipy's trust-region Newton-CG on

    (1/C) * 0.5 * |w|^2 + sum_i log(1 + exp(-s_i (w.x_i + b))),  s_i = 2y_i - 1

(bias unpenalized), polished by BFGS. The problem data is stored verbatim
so the C++ side never regenerates it.
"""

import argparse
import json
import pathlib

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit


def objective(theta, X, s, C):
    w, b = theta[:-1], theta[-1]
    m = s * (X @ w + b)
    return 0.5 * w @ w / C + np.logaddexp(0.0, -m).sum()


def gradient(theta, X, s, C):
    w, b = theta[:-1], theta[-1]
    m = s * (X @ w + b)
    g = -s * expit(-m)
    return np.concatenate([w / C + X.T @ g, [g.sum()]])


def hessian(theta, X, s, C):
    w, b = theta[:-1], theta[-1]
    p = expit(X @ w + b)
    r = p * (1 - p)
    Xa = np.hstack([X, np.ones((X.shape[0], 1))])
    H = Xa.T @ (Xa * r[:, None])
    H[:-1, :-1] += np.eye(len(w)) / C
    return H


def solve(X, y, C):
    s = 2.0 * y - 1.0
    theta0 = np.zeros(X.shape[1] + 1)
    args = (X, s, C)
    res = minimize(objective, theta0, args=args, jac=gradient, hess=hessian,
                   method="trust-exact", options={"gtol": 1e-11, "maxiter": 1000})
    res = minimize(objective, res.x, args=args, jac=gradient, method="BFGS",
                   options={"gtol": 1e-11, "maxiter": 1000})
    return res.x, objective(res.x, *args), np.abs(gradient(res.x, *args)).max()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("-o", "--output", default="tests/data/logreg_oracle.json")
    ap.add_argument("--seed", type=int, default=20240611)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    problems = []
    for k in range(25):
        n = int(rng.integers(10, 101))
        d = int(rng.integers(1, 21))
        C = float(10.0 ** rng.uniform(-2, 2))
        X = rng.normal(size=(n, d))
        w_true = rng.normal(size=d)
        y = (rng.uniform(size=n) < expit(X @ w_true + rng.normal() * 0.5)).astype(float)
        if y.min() == y.max():
            y[0] = 1.0 - y[0]
        theta, f, gnorm = solve(X, y, C)
        problems.append({
            "n": n, "d": d, "C": C,
            "X": X.tolist(), "y": [int(v) for v in y],
            "weights": theta[:-1].tolist(), "bias": float(theta[-1]),
            "objective": float(f), "gradient_norm": float(gnorm),
        })
        print(f"problem {k}: n={n} d={d} C={C:.4g} f={f:.12g} |g|={gnorm:.2e}")

    out = pathlib.Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({"problems": problems}, indent=1) + "\n")


if __name__ == "__main__":
    main()
