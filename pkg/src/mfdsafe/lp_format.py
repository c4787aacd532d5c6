"""CPLEX LP text writer and solution-file reader for the external bridge."""

from __future__ import annotations

import re

from .mfd_model import MfdModelSpec

_LINE = 12  # terms per output line; LP readers cap line length


def _expr(terms) -> str:
    parts = []
    for n, (name, coef) in enumerate(terms):
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = name if mag == 1 else f"{mag} {name}"
        if n == 0:
            parts.append(f"- {body}" if coef < 0 else body)
        else:
            parts.append(f"{sign} {body}")
    lines = [" ".join(parts[i:i + _LINE]) for i in range(0, len(parts), _LINE)]
    return "\n   ".join(lines) if lines else "0"


def write_lp(spec: MfdModelSpec) -> str:
    out = [f"\\ k={spec.k} graph={spec.graph.graph_id}"]
    if spec.objective:
        out += ["Maximize", " obj: " + _expr(sorted(spec.objective.items()))]
    else:
        # constant objective; some readers reject an empty one
        first = next(iter(spec.variables))
        out += ["Minimize", f" obj: 0 {first}"]
    out.append("Subject To")
    for c in spec.constraints:
        sense = "=" if c.sense == "=" else c.sense
        out.append(f" {c.name}: {_expr(c.terms)} {sense} {c.rhs}")
    out.append("Bounds")
    generals, binaries = [], []
    for var in spec.variables.values():
        if var.kind == "binary":
            binaries.append(var.name)
        else:
            out.append(f" {var.lb} <= {var.name} <= {var.ub}")
            generals.append(var.name)
    if generals:
        out.append("Generals")
        out += [" " + " ".join(generals[i:i + _LINE]) for i in range(0, len(generals), _LINE)]
    if binaries:
        out.append("Binaries")
        out += [" " + " ".join(binaries[i:i + _LINE]) for i in range(0, len(binaries), _LINE)]
    out.append("End")
    return "\n".join(out) + "\n"


_CBC_STATUS = re.compile(r"^(Optimal|Infeasible|Integer infeasible|Unbounded|Stopped[^-]*)\b", re.I)


def parse_solution(text: str) -> tuple[str, dict[str, float]]:
    """Status and variable values from a CBC, HiGHS or ``name value`` file.

    Status is one of ``optimal``, ``infeasible``, ``timeout`` or ``unknown``.
    Variables absent from the file are left out of the mapping.
    """
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        return "unknown", {}
    values: dict[str, float] = {}

    if lines[0].lower().startswith("model status"):
        status_text = lines[1].lower() if len(lines) > 1 else ""
        status = _status_word(status_text)
        try:
            start = next(i for i, ln in enumerate(lines) if ln.startswith("# Columns"))
        except StopIteration:
            return status, values
        count = int(lines[start].split()[-1])
        for ln in lines[start + 1:start + 1 + count]:
            name, val = ln.split()[:2]
            values[name] = float(val)
        return status, values

    m = _CBC_STATUS.match(lines[0])
    if m:
        status = _status_word(m.group(1).lower())
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) >= 3 and parts[0].isdigit():
                values[parts[1]] = float(parts[2])
        return status, values

    status = "optimal"
    for ln in lines:
        if ln.startswith("#"):
            if "infeasible" in ln.lower():
                status = "infeasible"
            continue
        parts = ln.split()
        if len(parts) >= 2:
            values[parts[0]] = float(parts[1])
    return status, values


def _status_word(text: str) -> str:
    if "infeasible" in text:
        return "infeasible"
    if text.startswith("optimal"):
        return "optimal"
    if "stopped" in text or "time" in text:
        return "timeout"
    return "unknown"
