#!/usr/bin/env python3
"""Reference values for the optimizer tests.

- A 2-amplifier x 3-level enumeration of the min-Q objective, using the
  straight-line link evaluation in gn_reference.py.
- A 3-point 1-D Gaussian-process posterior solved by hand-written Gaussian
  elimination.

Writes tests/data/golden_optimizer.json.
"""
import itertools
import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
from gn_reference import SLOTS, transmit  # noqa: E402

NFS = [5.2, 5.8, 4.9, 6.0, 5.5, 4.7]
EXTRAS = [0.4, 1.0, 0.2, 0.8]


def min_real_q(gains):
    active = [s < 20 for s in range(SLOTS)]
    real = [s < 20 and s % 5 == 0 for s in range(SLOTS)]
    snap = transmit(active, real, -18.0, gains, [0.0] * 6, NFS, EXTRAS)
    return min(c["q_factor_db"] for c in snap["channels"] if c["is_real"])


def enumerate_two_amps():
    rows = []
    for g1, g2 in itertools.product([16.0, 18.0, 20.0], repeat=2):
        gains = [18.0, g1, g2, 18.0, 18.0, 18.0]
        rows.append({"gains": gains, "value": min_real_q(gains)})
    best = max(rows, key=lambda r: r["value"])
    return {"nf_db": NFS, "extra_loss_db": EXTRAS, "rows": rows, "best_gains": best["gains"],
            "best_value": best["value"]}


def solve(a, b):
    n = len(b)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for c in range(n):
        p = max(range(c, n), key=lambda r: abs(m[r][c]))
        m[c], m[p] = m[p], m[c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            for k in range(c, n + 1):
                m[r][k] -= f * m[c][k]
    x = [0.0] * n
    for r in reversed(range(n)):
        x[r] = (m[r][n] - sum(m[r][k] * x[k] for k in range(r + 1, n))) / m[r][r]
    return x


def gp_three_points():
    xs = [0.1, 0.4, 0.8]
    ys = [1.0, 2.5, 1.5]
    ell, noise_std = 0.3, 0.1
    mean = sum(ys) / 3.0
    scale = math.sqrt(sum((y - mean) ** 2 for y in ys) / 3.0)
    yt = [(y - mean) / scale for y in ys]
    s2 = (noise_std / scale) ** 2

    def k(a, b):
        return math.exp(-((a - b) ** 2) / (2.0 * ell * ell))

    K = [[k(a, b) + (s2 if i == j else 0.0) for j, b in enumerate(xs)] for i, a in enumerate(xs)]
    alpha = solve(K, yt)
    out = []
    for q in [0.0, 0.25, 0.4, 0.6, 1.0, 3.0]:
        ks = [k(q, x) for x in xs]
        v = solve(K, ks)
        mu = mean + scale * sum(ks[i] * alpha[i] for i in range(3))
        var = scale * scale * (1.0 - sum(ks[i] * v[i] for i in range(3)))
        out.append({"x": q, "mean": mu, "variance": var})
    return {"x": xs, "y": ys, "length_scale": ell, "noise_std": noise_std, "queries": out}


def main():
    out = {"brute_force_2x3": enumerate_two_amps(), "gp_1d_3pt": gp_three_points()}
    here = os.path.dirname(os.path.abspath(__file__))
    path = os.path.join(here, "..", "data", "golden_optimizer.json")
    with open(path, "w") as fh:
        json.dump(out, fh, indent=1)
    print("wrote", os.path.normpath(path))
    print("best", out["brute_force_2x3"]["best_gains"], out["brute_force_2x3"]["best_value"])


if __name__ == "__main__":
    main()
