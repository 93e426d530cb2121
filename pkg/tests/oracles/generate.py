"""Regenerate frozen_values.json from high-precision mpmath computations.

Nothing here imports fraccolloc: Lagrange coefficients come from exact
polynomial products at 60 digits, fractional derivatives of analytic
functions from ``mpmath.differint`` (direct quadrature of the definition),
and Gauss-Jacobi rules from root finding on ``mpmath.jacobi``.

Run from the repository root: ``python3 tests/oracles/generate.py``.
"""

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 60
OUT = Path(__file__).with_name("frozen_values.json")


def s(x) -> str:
    return mp.nstr(x, 30)


def gauss_jacobi(a, b, M):
    a, b = mp.mpf(a), mp.mpf(b)
    poly = lambda t: mp.jacobi(M, a, b, t)
    coeffs = mp.taylor(poly, 0, M)[::-1]
    approx = mp.polyroots(coeffs, maxsteps=200, extraprec=200)
    roots = sorted(mp.findroot(poly, mp.re(r)) for r in approx)
    assert all(roots[k + 1] - roots[k] > mp.mpf(10) ** -10 for k in range(M - 1))
    const = (
        2 ** (a + b + 1)
        * mp.gamma(M + a + 1)
        * mp.gamma(M + b + 1)
        / (mp.gamma(M + a + b + 1) * mp.factorial(M))
    )
    weights = []
    for x in roots:
        dp = (M + a + b + 1) / 2 * mp.jacobi(M - 1, a + 1, b + 1, x)
        weights.append(const / ((1 - x * x) * dp * dp))
    return roots, weights


def poly_mul(p, q):
    out = [mp.mpf(0)] * (len(p) + len(q) - 1)
    for i, u in enumerate(p):
        for j, v in enumerate(q):
            out[i + j] += u * v
    return out


def cardinal_coeffs(nodes, i, anchor):
    """Ascending coefficients of l_i in powers of (x - anchor)."""
    poly = [mp.mpf(1)]
    denom = mp.mpf(1)
    for j, xj in enumerate(nodes):
        if j == i:
            continue
        poly = poly_mul(poly, [anchor - xj, mp.mpf(1)])
        denom *= nodes[i] - xj
    return [c / denom for c in poly]


def frac_matrix(nodes, alpha, kind):
    """Matrix of left/right RL or Caputo derivatives of the cardinal functions."""
    a, b = nodes[0], nodes[-1]
    N = len(nodes) - 1
    n = int(mp.ceil(alpha))
    right = kind.endswith("right")
    caputo = kind.startswith("caputo")
    rows = []
    for j, x in enumerate(nodes):
        if (kind == "rl_left" and j == 0) or (kind == "rl_right" and j == N):
            rows.append(None)
            continue
        row = []
        for i in range(N + 1):
            coeffs = cardinal_coeffs(nodes, i, b if right else a)
            total = mp.mpf(0)
            for g, c in enumerate(coeffs):
                if caputo and g < n:
                    continue
                ratio = mp.gamma(g + 1) * mp.rgamma(g + 1 - alpha)
                if right:
                    total += c * (-1) ** g * ratio * (b - x) ** (g - alpha)
                else:
                    total += c * ratio * (x - a) ** (g - alpha)
            row.append(s(total))
        rows.append(row)
    return rows


def left_rl(f, alpha, a, x):
    return mp.differint(f, x, alpha, a)


def right_rl(f, alpha, b, x):
    # right derivative of f at x on [., b] equals the left derivative of
    # f(-y) at -x with anchor -b
    return left_rl(lambda y: f(-y), alpha, -b, -x)


def main():
    out = {}

    rules = {}
    for a, b, M in [(0.0, 0.0, 2), (-0.5, 0.0, 5), (0.3, -0.4, 7), (0.0, -0.7, 12)]:
        nodes, weights = gauss_jacobi(a, b, M)
        rules[f"{a},{b},{M}"] = {"nodes": [s(x) for x in nodes], "weights": [s(w) for w in weights]}
    out["gauss_jacobi"] = rules

    legendre4 = [mp.mpf(-1), -mp.sqrt(mp.mpf(3) / 7), mp.mpf(0), mp.sqrt(mp.mpf(3) / 7), mp.mpf(1)]
    cheb5 = [1 - mp.cos(mp.pi * k / 5) for k in range(6)]  # Chebyshev N=5 on [0, 2]
    matrices = {}
    for label, nodes, alpha in [("legendre4_a1.5", legendre4, mp.mpf("1.5")), ("chebyshev5_0_2_a1.3", cheb5, mp.mpf("1.3"))]:
        for kind in ("rl_left", "rl_right", "caputo_left", "caputo_right"):
            matrices[f"{label}_{kind}"] = frac_matrix(nodes, alpha, kind)
    out["matrices"] = matrices

    cos_pi = lambda x: mp.cos(mp.pi * x) + 1
    exp_sq = lambda x: mp.exp(x * x)
    a15 = mp.mpf("1.5")
    x03 = mp.mpf("0.3")
    out["rl_values"] = {
        "cos_pi_plus_one_left_a1.5_x0.3": s(left_rl(cos_pi, a15, -1, x03)),
        "cos_pi_plus_one_right_a1.5_x0.3": s(right_rl(cos_pi, a15, 1, x03)),
        "sin_right_a1.5_x0.3": s(right_rl(mp.sin, a15, 1, x03)),
        "sin_left_a1.3_x-0.6": s(left_rl(mp.sin, mp.mpf("1.3"), -1, mp.mpf("-0.6"))),
        "exp_square_left_a1.7_x0.3": s(left_rl(exp_sq, mp.mpf("1.7"), -1, x03)),
    }

    # Example 5 source at (0, 0), t = 0: u_t = 0 and u_x = u_y = 0 there, and
    # by symmetry the left and right derivatives of exp(2x^2) agree at 0, so
    # f = -kappa * 2 * D^alpha[exp(2 x^2)](0) * exp(0) for p + q = 1.
    d = left_rl(lambda x: mp.exp(2 * x * x), a15, -1, mp.mpf(0))
    out["example5_source_origin_t0_a1.5"] = s(-2 * d)

    OUT.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
