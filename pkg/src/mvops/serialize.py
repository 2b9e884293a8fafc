"""JSON envelopes for polynomial systems, recurrence blocks and relations.

Matrices travel as plain-text payloads (rows/cols header plus rows of
shortest round-trip decimals) inside a JSON wrapper carrying the shape
metadata, so files are diffable and bit-exact across writers and readers.
"""

from __future__ import annotations

import json

from .construct import PolySystem
from .linrel import LinearRelation
from .matrixkit import format_matrix, parse_matrix
from .ttr import ThreeTermData


def system_to_json(P: PolySystem) -> str:
    payload = {
        "kind": "polynomial_system",
        "d": P.d,
        "N": P.N,
        "monic": bool(P.monic),
        "label": P.label,
        "blocks": [
            [format_matrix(P.block(n, k)) for k in range(n + 1)]
            for n in range(P.N + 1)
        ],
    }
    return json.dumps(payload, indent=2)


def system_from_json(text: str) -> PolySystem:
    payload = json.loads(text)
    if payload.get("kind") != "polynomial_system":
        raise ValueError("not a polynomial system document")
    blocks = [[parse_matrix(t) for t in row] for row in payload["blocks"]]
    return PolySystem(int(payload["d"]), blocks, bool(payload["monic"]),
                      payload.get("label", ""))


def ttr_to_json(T: ThreeTermData) -> str:
    payload = {
        "kind": "three_term",
        "d": T.d,
        "A": [[format_matrix(m) for m in row] for row in T.A],
        "B": [[format_matrix(m) for m in row] for row in T.B],
        "C": [None if row is None else [format_matrix(m) for m in row]
              for row in T.C],
    }
    return json.dumps(payload, indent=2)


def ttr_from_json(text: str) -> ThreeTermData:
    payload = json.loads(text)
    if payload.get("kind") != "three_term":
        raise ValueError("not a three-term recurrence document")
    return ThreeTermData(
        int(payload["d"]),
        [[parse_matrix(t) for t in row] for row in payload["A"]],
        [[parse_matrix(t) for t in row] for row in payload["B"]],
        [None if row is None else [parse_matrix(t) for t in row]
         for row in payload["C"]],
    )


def relation_to_json(rel: LinearRelation) -> str:
    payload = {
        "kind": "linear_relation",
        "d": rel.d,
        "label": rel.label,
        "tail": rel.tail,
        "M": [None if m is None else format_matrix(m) for m in rel.M],
    }
    return json.dumps(payload, indent=2)


def relation_from_json(text: str) -> LinearRelation:
    payload = json.loads(text)
    if payload.get("kind") != "linear_relation":
        raise ValueError("not a linear relation document")
    M = [None if t is None else parse_matrix(t) for t in payload["M"]]
    return LinearRelation(int(payload["d"]), M, tail=float(payload.get("tail", 0.0)),
                          label=payload.get("label", ""))
