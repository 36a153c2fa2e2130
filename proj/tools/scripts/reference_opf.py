"""Minimum generation cost AC OPF for a MATPOWER case without transformers.

Writes the optimal bus voltages as {"v_re": [...], "v_im": [...]} in bus-file
order. Used once to produce the reference points under data/reference/.

usage: reference_opf.py case.m out.json
"""
import json
import re
import sys

import numpy as np
import scipy.optimize as so


def block(text, name):
    m = re.search(r"mpc\." + name + r"\s*=\s*\[(.*?)\];", text, re.S)
    rows = []
    for line in m.group(1).split("\n"):
        line = line.split("%")[0].strip().rstrip(";")
        if line:
            rows.append([float(t) for t in line.split()])
    return rows


def main(case_path, out_path):
    text = open(case_path).read()
    base = float(re.search(r"mpc\.baseMVA\s*=\s*([\d.]+)", text).group(1))
    bus, gen, branch, cost = (block(text, n) for n in ("bus", "gen", "branch", "gencost"))
    m, g = len(bus), len(gen)
    idx = {int(r[0]): i for i, r in enumerate(bus)}

    y = np.zeros((m, m), complex)
    for i, r in enumerate(bus):
        y[i, i] += complex(r[4], r[5]) / base
    lines = []
    for r in branch:
        if r[10] == 0:
            continue
        if r[8] not in (0, 1) or r[9] != 0:
            sys.exit("transformers are not supported")
        j, k = idx[int(r[0])], idx[int(r[1])]
        ys = 1 / complex(r[2], r[3])
        y[j, k] -= ys
        y[k, j] -= ys
        y[j, j] += ys + 0.5j * r[4]
        y[k, k] += ys + 0.5j * r[4]
        if r[5] > 0:
            lines.append((j, k, abs(ys), r[5] / base))

    demand = np.array([complex(r[2], r[3]) / base for r in bus])
    gen_bus = [idx[int(r[0])] for r in gen]
    slack = next(i for i, r in enumerate(bus) if r[1] == 3)

    def unpack(x):
        return x[:m] + 1j * x[m:2 * m], x[2 * m:2 * m + g], x[2 * m + g:]

    def objective(x):
        p = unpack(x)[1] * base
        return sum(c[4] * p[i] ** 2 + c[5] * p[i] + c[6] for i, c in enumerate(cost))

    def equalities(x):
        v, pg, qg = unpack(x)
        mismatch = v * np.conj(y @ v) + demand
        for i, b in enumerate(gen_bus):
            mismatch[b] -= pg[i] + 1j * qg[i]
        return np.r_[mismatch.real, mismatch.imag, x[m + slack]]

    def inequalities(x):
        v = unpack(x)[0]
        out = []
        for i, r in enumerate(bus):
            out += [r[11] - abs(v[i]), abs(v[i]) - r[12]]
        out += [lim - ay * abs(v[j] - v[k]) for j, k, ay, lim in lines]
        return np.array(out)

    bounds = ([(None, None)] * (2 * m) + [(r[9] / base, r[8] / base) for r in gen] +
              [(r[4] / base, r[3] / base) for r in gen])
    x0 = np.r_[np.ones(m), np.zeros(m), [r[1] / base for r in gen], np.zeros(g)]
    res = so.minimize(objective, x0, method="SLSQP", bounds=bounds,
                      constraints=[{"type": "eq", "fun": equalities},
                                   {"type": "ineq", "fun": inequalities}],
                      options={"maxiter": 2000, "ftol": 1e-12})
    print(res.message, "cost", res.fun, "min slack", inequalities(res.x).min(),
          "max mismatch", np.abs(equalities(res.x)).max(), file=sys.stderr)
    v = unpack(res.x)[0]
    with open(out_path, "w") as f:
        json.dump({"v_re": list(v.real), "v_im": list(v.imag)}, f, indent=1)


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
