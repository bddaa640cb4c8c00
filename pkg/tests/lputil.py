"""Minimal LP-format reader feeding scipy's MILP solver.

Supports exactly the dialect the package emits (Maximize, Subject To,
Binaries, End, backslash comments, wrapped lines), enough to cross-check
emitted models against the native solvers.
"""

import re

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

_NAME_RE = re.compile(r"^[A-Za-z]\w*:")


def parse_linear(text: str) -> dict[str, float]:
    terms: dict[str, float] = {}
    sign = 1.0
    coef: float | None = None
    for tok in text.split():
        if tok == "+":
            sign = 1.0
            continue
        if tok == "-":
            sign = -1.0
            continue
        try:
            coef = float(tok)
            continue
        except ValueError:
            pass
        terms[tok] = terms.get(tok, 0.0) + sign * (1.0 if coef is None else coef)
        sign, coef = 1.0, None
    return terms


def parse_lp(text: str):
    objective_parts: list[str] = []
    chunks: list[str] = []
    binaries: list[str] = []
    section = None
    for raw in text.split("\n"):
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        if line == "Maximize":
            section = "obj"
            continue
        if line == "Subject To":
            section = "con"
            continue
        if line == "Binaries":
            section = "bin"
            continue
        if line == "End":
            break
        if section == "obj":
            objective_parts.append(line)
        elif section == "con":
            if _NAME_RE.match(line):
                chunks.append(line)
            else:
                chunks[-1] += " " + line
        elif section == "bin":
            binaries.extend(line.split())
    obj_text = " ".join(objective_parts).partition(":")[2]
    objective = parse_linear(obj_text)
    constraints = []
    for chunk in chunks:
        name, _, body = chunk.partition(":")
        m = re.search(r"(<=|>=|=)", body)
        op = m.group(1)
        lhs = parse_linear(body[: m.start()])
        rhs = float(body[m.end() :])
        constraints.append((name.strip(), lhs, op, rhs))
    return objective, constraints, binaries


def solve_lp_text(text: str):
    """Optimal (objective, assignment) of an emitted model, via scipy."""
    objective, constraints, binaries = parse_lp(text)
    names: set[str] = set(objective)
    for _, lhs, _, _ in constraints:
        names.update(lhs)
    names.update(binaries)
    order = sorted(names)
    idx = {n: i for i, n in enumerate(order)}
    nvar = len(order)
    c = np.zeros(nvar)
    for n, v in objective.items():
        c[idx[n]] = -v  # milp minimizes
    rows = np.zeros((len(constraints), nvar))
    lo = np.empty(len(constraints))
    hi = np.empty(len(constraints))
    for k, (_, lhs, op, rhs) in enumerate(constraints):
        for n, v in lhs.items():
            rows[k, idx[n]] = v
        lo[k] = -np.inf if op == "<=" else rhs
        hi[k] = np.inf if op == ">=" else rhs
    binset = set(binaries)
    integrality = np.array([1 if n in binset else 0 for n in order])
    upper = np.array([1.0 if n in binset else np.inf for n in order])
    res = milp(
        c=c,
        constraints=LinearConstraint(rows, lo, hi),
        integrality=integrality,
        bounds=Bounds(np.zeros(nvar), upper),
    )
    if not res.success:
        raise RuntimeError(f"milp failed: {res.message}")
    return -res.fun, dict(zip(order, res.x))
