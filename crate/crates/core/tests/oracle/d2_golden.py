"""Brute-force daily simulation of the two-sector desk economy.

Reads the shipped D2 fixture files, applies the first-lockdown labor shock on
S0 and writes one row per day to d2_labor_shock.csv next to this script.
Plain Python lists only, written against the model equations rather than the
Rust sources.

    python3 crates/core/tests/oracle/d2_golden.py
"""

import csv
import json
import math
import os
from datetime import date

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURE = os.path.join(HERE, "..", "..", "..", "..", "data", "fixtures", "d2")
DAYS = 34

RHO = 1.0 - 0.4 / 90.0
DELTA_S = 0.75
L_SHARE = 1.0
TAU = 14.0
GAMMA_F = 28.0
GAMMA_H = 56.0


def read_matrix(name):
    with open(os.path.join(FIXTURE, name)) as fh:
        rows = list(csv.reader(fh))
    return [[float(v) for v in r[1:]] for r in rows[1:]]


def read_states():
    with open(os.path.join(FIXTURE, "initial_states.csv")) as fh:
        return list(csv.DictReader(fh))


states = read_states()
n = len(states)
x0 = [float(r["x0"]) for r in states]
c0 = [float(r["c0"]) for r in states]
f0 = [float(r["f0"]) for r in states]
l0 = [float(r["l0"]) for r in states]
n_days = [float(r["n_days"]) for r in states]
Z = read_matrix("io_table.csv")
crit = read_matrix("criticality.csv")
A = [[Z[i][j] / x0[j] for j in range(n)] for i in range(n)]
target = [[n_days[j] * Z[i][j] for j in range(n)] for i in range(n)]

with open(os.path.join(FIXTURE, "scenario.json")) as fh:
    scen = json.load(fh)
start = date.fromisoformat(scen["start_date"])
lock = next(k for k in scen["key_dates"] if k["event"] == "lockdown_start")
t_lock = (date.fromisoformat(lock["date"]) - start).days
ramp = scen["l1"]
b = scen["b"]
codes = [r["code"] for r in states]
eps_s_full = [scen["shocks"].get(c, {}).get("eps_s_l1", 0.0) for c in codes]


def eps_s(t):
    level = min(max((t - t_lock) / ramp, 0.0), 1.0)
    return [e * level for e in eps_s_full]


def x_inp(S):
    out = []
    for i in range(n):
        v = math.inf
        for k in range(n):
            if A[k][i] <= 0.0:
                continue
            r = S[k][i] / A[k][i]
            if crit[k][i] == 1.0:
                v = min(v, r)
            elif crit[k][i] == 0.5:
                v = min(v, 0.5 * (r + x0[i]))
        out.append(v)
    return out


L0 = sum(l0)
m = sum(c0) / L0
theta = [c / sum(c0) for c in c0]
zeta_l = 1.0 - sum(e * l for e, l in zip(eps_s_full, l0)) / L0

S = [row[:] for row in target]
l = l0[:]
d_prev = x0[:]
c_agg = sum(c0)
zeta = 1.0

rows = []
for t in range(1, DAYS + 1):
    es = eps_s(t)
    if t >= t_lock:
        zeta = zeta_l if t - 1 < t_lock else (
            1 - RHO + RHO * zeta - (1 - RHO) * (1 - zeta_l) / L_SHARE)
    l_tot = sum(l)
    l_comp = l_tot + b * max(L0 - l_tot, 0.0)
    l_perm = zeta * L0
    eps_tilde = 0.0 * DELTA_S
    c_agg = (1 - eps_tilde * (1 - RHO)) * math.exp(
        RHO * math.log(c_agg)
        + (1 - RHO) / 2 * math.log(m * l_comp)
        + (1 - RHO) / 2 * math.log(m * l_perm))

    c_d = [th * c_agg for th in theta]
    f_d = f0[:]
    O_d = [[max(A[i][j] * d_prev[j] + (target[i][j] - S[i][j]) / TAU, 0.0)
            for j in range(n)] for i in range(n)]
    d = [c_d[i] + f_d[i] + sum(O_d[i]) for i in range(n)]
    cap = [min(l[i], (1 - es[i]) * l0[i]) / l0[i] * x0[i] for i in range(n)]
    inp = x_inp(S)
    x = [min(cap[i], inp[i], d[i]) for i in range(n)]
    fill = [x[i] / d[i] if d[i] > 0 else 0.0 for i in range(n)]
    c = [c_d[i] * fill[i] for i in range(n)]
    f = [f_d[i] * fill[i] for i in range(n)]
    O = [[O_d[i][j] * fill[i] for j in range(n)] for i in range(n)]
    S = [[max(S[i][j] + O[i][j] - A[i][j] * x[j], 0.0) for j in range(n)]
         for i in range(n)]
    new_l = []
    for i in range(n):
        gap = l0[i] / x0[i] * (min(inp[i], d[i]) - cap[i])
        step = gap / GAMMA_H if gap >= 0 else gap / GAMMA_F
        new_l.append(min(max(l[i] + step, 0.0), (1 - es[i]) * l0[i]))
    l = new_l
    d_prev = d

    row = [t]
    for i in range(n):
        row += [x[i], d[i], l[i], c[i], f[i], sum(O[i])]
    row += [S[i][j] for i in range(n) for j in range(n)]
    row.append(c_agg)
    rows.append(row)

header = ["t"]
for code in codes:
    header += [f"{v}_{code}" for v in ("x", "d", "l", "c", "f", "b2b")]
header += [f"S_{a}_{b}" for a in codes for b in codes]
header.append("c_agg_d")
with open(os.path.join(HERE, "d2_labor_shock.csv"), "w", newline="") as fh:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([r[0]] + [repr(v) for v in r[1:]])
