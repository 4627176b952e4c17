"""Reference values for the unit and acceptance tests, computed with mpmath.

Run from the repository root:  python3 tests/oracle/reference_values.py
Writes tests/data/reference_values.json.
"""
import json
import pathlib

import mpmath as mp

mp.mp.dps = 50


def psi_ml(n, a):
    return -mp.log(1 - mp.mpf(a)) / n


def psi_bayes(n, a):
    return (1 - mp.mpf(a)) ** (-mp.mpf(1) / n) - 1


def beg_pmf(n, N, psi):
    out = []
    for k in range(N + 1):
        s = mp.mpf(0)
        for j in range(N - k + 1):
            s += (-1) ** (N - k - j) * mp.binomial(N - k, j) / (psi * (N - j) + 1) ** n
        out.append(mp.binomial(N, k) * s)
    return out


def moments(p):
    m1 = mp.fsum(k * v for k, v in enumerate(p))
    m2 = mp.fsum(k * k * v for k, v in enumerate(p))
    return m1, m2 - m1 * m1


def gvs_pmf(n, m, N):
    return [mp.binomial(m + k - 1, k) * mp.binomial(n - m + N - k, N - k) / mp.binomial(n + N, N)
            for k in range(N + 1)]


def f(x):
    return float(x)


ref = {}
ref["psi_ml"] = {f"{n},{a}": f(psi_ml(n, a)) for n, a in [(50, 0.99), (10, 0.99), (1, 0.5)]}
ref["psi_bayes"] = {f"{n},{a}": f(psi_bayes(n, a)) for n, a in [(50, 0.99), (100, 0.99), (1, 0.5)]}
ref["expected_ml_50_100"] = f(100 * (1 + psi_ml(50, 0.99)) ** -50)
ref["expected_ml_10_100"] = f(100 * (1 + psi_ml(10, 0.99)) ** -10)

beg = {}
for n, N, method in [(50, 100, "bayes"), (50, 100, "ml"), (100, 100, "bayes"), (100, 100, "ml"),
                     (5, 10, "ml"), (1, 10, "bayes"), (20, 60, "bayes")]:
    psi = psi_bayes(n, 0.99) if method == "bayes" else psi_ml(n, 0.99)
    p = beg_pmf(n, N, psi)
    mean, var = moments(p)
    beg[f"{n},{N},{method}"] = {
        "pmf": [f(v) for v in p],
        "mean": f(mean),
        "variance": f(var),
        "p_gt1": f(1 - p[0] - p[1]),
    }
ref["beg_alpha_0.99"] = beg

g = gvs_pmf(100, 1, 100)
gm, gv = moments(g)
ref["gvs_100_1_100"] = {"pmf": [f(v) for v in g], "mean": f(gm), "variance": f(gv)}

ref["psi_pot_bayes_50_50_0.99"] = f((mp.mpf("50.5") / 50 / mp.mpf("0.01")) ** (mp.mpf(1) / 50) - 1)
ref["psi_pot_ml_50_50_100_0.99"] = f((mp.mpf(50) / 50 * 100 / mp.mpf("0.01")) ** (mp.mpf(1) / 50) - 1)
ref["pot_quantile_example"] = f(mp.exp(10 * mp.mpf(ref["psi_pot_bayes_50_50_0.99"])))
ref["nb_mean_50_50_100"] = f(mp.mpf(50) / 50 * 100 * (1 + mp.mpf(1) / 100))

ref["stdpar_cdf_4"] = f(1 - mp.mpf(4) ** -2)
ref["gev_cdf_0"] = f(mp.exp(-1))

out = pathlib.Path(__file__).resolve().parents[1] / "data" / "reference_values.json"
out.write_text(json.dumps(ref, indent=1) + "\n")
print(f"wrote {out}")
