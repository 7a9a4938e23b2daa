"""Canonical serialization of generator sets.

The JSON document is byte-reproducible: keys are emitted in sorted order and
floats with 17 significant digits (exact for doubles), so that
load -> dump round-trips are identities on the byte level.
"""

from __future__ import annotations

import json
from typing import Tuple

from .genrep import GeneratorSet
from .gzbasis import GZPattern, ModuleBasis, TopRow
from .qarith import QPoint, q_from_order


def _fmt_float(x: float) -> str:
    if x != x or x in (float("inf"), float("-inf")):
        raise ValueError("non-finite value cannot be serialized")
    if x == int(x) and abs(x) < 1e15:
        return f"{x:.1f}"
    return format(x, ".17g")


def _canonical(obj) -> str:
    if isinstance(obj, dict):
        items = sorted(obj.items())
        inner = ",".join(f"{json.dumps(str(k))}:{_canonical(v)}" for k, v in items)
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_canonical(v) for v in obj) + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if obj is None:
        return "null"
    return json.dumps(obj)


def build_document(g: GeneratorSet, report: dict | None = None) -> dict:
    n = g.basis.top.n
    gens = {}
    for l in g.rank_levels:
        gens[f"e{l}"] = [[r, c, v.real, v.imag]
                        for (r, c), v in sorted(g.e[l].items())]
        gens[f"f{l}"] = [[r, c, v.real, v.imag]
                        for (r, c), v in sorted(g.f[l].items())]
    gens["k_exponents"] = {f"k{l}": list(g.k_exponents[l]) for l in g.rank_levels}
    doc = {
        "algebra": f"sl({n})",
        "q": {
            "kind": "root" if g.q.is_root else "generic",
            "m": g.q.m if g.q.is_root else None,
            "re": g.q.value.real,
            "im": g.q.value.imag,
        },
        "convention": g.convention,
        "basis": [p.as_nested() for p in g.basis],
        "generators": gens,
        "report": report or {},
    }
    return doc


def dumps_canonical(doc: dict) -> str:
    return _canonical(doc) + "\n"


def document_to_generator_set(doc: dict) -> GeneratorSet:
    basis_patterns = tuple(GZPattern(tuple(tuple(r) for r in p)) for p in doc["basis"])
    top = TopRow(basis_patterns[0].rows[0])
    index = {p.flatten(): i for i, p in enumerate(basis_patterns)}
    basis = ModuleBasis(top, basis_patterns, index)
    qd = doc["q"]
    if qd["kind"] == "root":
        q = q_from_order(qd["m"])
    else:
        q = QPoint(complex(qd["re"], qd["im"]), "generic")
    n = top.n
    e, f = {}, {}
    for l in range(1, n):
        e[l] = {(int(r), int(c)): complex(re, im)
                for r, c, re, im in doc["generators"][f"e{l}"]}
        f[l] = {(int(r), int(c)): complex(re, im)
                for r, c, re, im in doc["generators"][f"f{l}"]}
    k = {l: tuple(doc["generators"]["k_exponents"][f"k{l}"]) for l in range(1, n)}
    return GeneratorSet(basis, e, f, k, q, doc["convention"],
                        dict(doc.get("report") or {}))


def load_document(text: str) -> dict:
    return json.loads(text)


def csv_triplets(g: GeneratorSet) -> str:
    """Flat triplet table: generator,row,col,re,im (k rows carry exponents)."""
    lines = ["generator,row,col,re,im"]
    for l in g.rank_levels:
        for (r, c), v in sorted(g.e[l].items()):
            lines.append(f"e{l},{r},{c},{_fmt_float(v.real)},{_fmt_float(v.imag)}")
        for (r, c), v in sorted(g.f[l].items()):
            lines.append(f"f{l},{r},{c},{_fmt_float(v.real)},{_fmt_float(v.imag)}")
        for i, h in enumerate(g.k_exponents[l]):
            lines.append(f"k{l},{i},{i},{h},0.0")
    return "\n".join(lines) + "\n"
