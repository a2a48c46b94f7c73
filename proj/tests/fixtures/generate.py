"""Regenerates the frozen reference tables in this directory.

Every value is computed here from closed forms with mpmath at 50 digits,
independently of the C++ library.  Run from any directory:

    python3 tests/fixtures/generate.py
"""

import math
from pathlib import Path

import mpmath as mp

mp.mp.dps = 50
HERE = Path(__file__).resolve().parent
Q_VALUES = [-3, -2, -1, -0.5, 0, 0.25, 0.5, 0.75, 1, 1.5, 2, 3]


def fmt(x):
    return repr(float(x))


def write(name, header, rows, note):
    with open(HERE / name, "w", newline="\n") as f:
        f.write(f"# {note}\n")
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(fmt(v) if not isinstance(v, int) else str(v) for v in row) + "\n")


def tau(p, q):
    p = mp.mpf(p)
    return mp.log(p**q + (1 - p) ** q, 2)


def dtau(p, q):
    return mp.diff(lambda s: tau(p, s), q)


def binomial_tau():
    rows = []
    for p in ("0.25", "0.2", "0.4"):
        for q in Q_VALUES:
            rows.append((float(p), q, tau(p, q), dtau(p, q)))
    write("binomial_tau.csv", ["p", "q", "tau", "dtau"], rows,
          "binomial cascade exponent log2(p^q + (1-p)^q) and its q-derivative")


def periodic_beta():
    # families (1/2, 1/2) with ratio 1/4 and (1/3, 1/3, 1/3) with ratio 1/8
    rows = []
    for q in Q_VALUES:
        s = mp.log(2 * mp.mpf(2) ** -q) + mp.log(3 * mp.mpf(3) ** -q)
        rows.append((q, s / (mp.log(4) + mp.log(8))))
    write("periodic_beta.csv", ["q", "beta"], rows, "alternating two-family Moran exponent")


def block_bounds():
    rows = []
    for q in Q_VALUES:
        first = mp.log(mp.mpf("0.25") ** q + mp.mpf("0.75") ** q) / mp.log(4)
        second = mp.log(3 * mp.mpf(3) ** -q) / mp.log(9)
        rows.append((q, first, second))
    write("block_bounds.csv", ["q", "first", "second"], rows,
          "single-family exponents of the two block families")


def binomial_legendre():
    # tau*(alpha) = alpha q + tau(q) at -tau'(q) = alpha, p = 0.25
    p = mp.mpf("0.25")
    rows = []
    for i in range(46, 196, 5):
        alpha = mp.mpf(i) / 100
        q = mp.findroot(lambda s: -dtau(p, s) - alpha, 0)
        rows.append((float(alpha), q, alpha * q + tau(p, q)))
    write("binomial_legendre.csv", ["alpha", "q", "tau_star"], rows,
          "Legendre transform of the p = 0.25 binomial exponent")


def binomial_coarse():
    # generation 16, p = 0.25: a cell with j light children has exponent
    # (2 j + (16 - j) log2(4/3)) / 16 and there are C(16, j) of them
    # bins are closed: [alpha - eps, alpha + eps] in exact decimal arithmetic
    k, eps = 16, mp.mpf("0.05")
    expo = [(2 * j + (k - j) * mp.log(mp.mpf(4) / 3, 2)) / k for j in range(k + 1)]
    rows = []
    for i in range(0, 251):
        alpha = mp.mpf(i) / 100
        count = sum(math.comb(k, j) for j in range(k + 1) if alpha - eps <= expo[j] <= alpha + eps)
        alpha = i / 100
        rows.append((alpha, count, math.log2(count) / k if count else -1.0))
    write("binomial_coarse_k16.csv", ["alpha", "count", "f_hat"], rows,
          "exact level-set counts, p = 0.25, generation 16, half-width 0.05 (f_hat -1 marks empty)")


if __name__ == "__main__":
    binomial_tau()
    periodic_beta()
    block_bounds()
    binomial_legendre()
    binomial_coarse()
