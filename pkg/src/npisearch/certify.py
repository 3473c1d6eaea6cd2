"""Bit-exact certificates for immersions and their independent verifier.

A certificate is a JSON document (extension ``.npicert.json``, UTF-8) with
top-level keys ``format``, ``source``, ``target``, ``map``, ``claims``:

* ``format``: the tag ``"npi-cert/1"``; unknown tags are rejected;
* ``source`` / ``target``: complexes as ``{"vertices": [id...],
  "edges": [{"id", "from", "to"}...],
  "faces": [{"id", "boundary": ["e", "-e", ...]}...]}`` with signed edge
  references spelled ``"e"`` (forward) or ``"-e"`` (reversed);
* ``map``: vertex/edge/face assignments; faces carry
  ``{"image", "rotation", "orientation"}``;
* ``claims``: euler, connected, immersion, free_edge_count,
  isolated_edge_count -- all recomputed by the verifier, never trusted.

Serialization is deterministic (cells in shortlex id order, sorted JSON
keys), so equal maps produce byte-identical documents.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

from .complexes import (
    FORWARD,
    REVERSE,
    CellMap,
    Edge,
    Face,
    FaceImage,
    SignedEdge,
    TwoComplex,
    euler_characteristic,
    free_edges,
    immersion_violations,
    is_connected,
    isolated_edges,
    validate_complex,
    validate_map,
)

FORMAT_TAG = "npi-cert/1"
FILE_SUFFIX = ".npicert.json"

_CLAIM_FIELDS = (
    "euler",
    "connected",
    "immersion",
    "free_edge_count",
    "isolated_edge_count",
)


class CertificateError(ValueError):
    """Raised for malformed or inconsistent certificate documents."""


def _signed_ref(s: SignedEdge) -> str:
    return s.edge if s.sign == FORWARD else f"-{s.edge}"


def _parse_signed_ref(ref: str) -> SignedEdge:
    if not isinstance(ref, str) or not ref or ref == "-":
        raise CertificateError(f"bad signed edge reference: {ref!r}")
    if ref.startswith("-"):
        return SignedEdge(ref[1:], REVERSE)
    return SignedEdge(ref, FORWARD)


def _complex_doc(c: TwoComplex) -> dict:
    for cell_id in (*c.vertices, *(e.id for e in c.edges), *(f.id for f in c.faces)):
        if not cell_id or cell_id.startswith("-"):
            raise CertificateError(f"unserializable cell id: {cell_id!r}")
    return {
        "vertices": list(c.vertices),
        "edges": [{"id": e.id, "from": e.origin, "to": e.terminus} for e in c.edges],
        "faces": [
            {"id": f.id, "boundary": [_signed_ref(s) for s in f.boundary]}
            for f in c.faces
        ],
    }


def _complex_from_doc(doc: Any, label: str) -> TwoComplex:
    if not isinstance(doc, dict):
        raise CertificateError(f"{label}: expected an object")
    try:
        vertices = tuple(doc["vertices"])
        edges = tuple(Edge(e["id"], e["from"], e["to"]) for e in doc["edges"])
        faces = tuple(
            Face(f["id"], tuple(_parse_signed_ref(r) for r in f["boundary"]))
            for f in doc["faces"]
        )
    except (KeyError, TypeError) as exc:
        raise CertificateError(f"{label}: malformed complex ({exc})") from exc
    c = TwoComplex(vertices, edges, faces)
    for f in c.faces:
        for s in f.boundary:
            if s.edge not in c.edge_by_id:
                raise CertificateError(
                    f"{label}: face {f.id} references missing edge {s.edge}"
                )
    problems = validate_complex(c)
    if problems:
        raise CertificateError(f"{label}: invalid complex: {problems}")
    return c


def load_complex(doc: Union[str, dict], label: str = "complex") -> TwoComplex:
    """Parse a bare complex document (the schema of source/target blocks)."""
    if isinstance(doc, str):
        doc = loads(doc)
    return _complex_from_doc(doc, label)


def compute_claims(m: CellMap) -> dict:
    src = m.domain
    return {
        "euler": euler_characteristic(src),
        "connected": is_connected(src),
        "immersion": not immersion_violations(m, validate=False),
        "free_edge_count": len(free_edges(src)),
        "isolated_edge_count": len(isolated_edges(src)),
    }


def serialize(m: CellMap, *, with_claims: bool = True) -> dict:
    """Certificate document for ``m``; raises on an invalid map."""
    problems = validate_map(m)
    if problems:
        raise CertificateError(f"cannot serialize invalid map: {problems}")
    doc = {
        "format": FORMAT_TAG,
        "source": _complex_doc(m.domain),
        "target": _complex_doc(m.codomain),
        "map": {
            "vertices": {v: m.vertex_map[v] for v in m.domain.vertices},
            "edges": {
                e.id: _signed_ref(m.edge_map[e.id]) for e in m.domain.edges
            },
            "faces": {
                f.id: {
                    "image": m.face_map[f.id].face,
                    "rotation": m.face_map[f.id].rotation,
                    "orientation": m.face_map[f.id].orientation,
                }
                for f in m.domain.faces
            },
        },
    }
    if with_claims:
        doc["claims"] = compute_claims(m)
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CertificateError(
            f"syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise CertificateError("certificate must be a JSON object")
    return doc


def deserialize(doc: Union[str, dict]) -> CellMap:
    """Rebuild the cell map from a document; claims are ignored here."""
    if isinstance(doc, str):
        doc = loads(doc)
    tag = doc.get("format")
    if tag != FORMAT_TAG:
        raise CertificateError(f"unsupported format tag: {tag!r}")
    source = _complex_from_doc(doc.get("source"), "source")
    target = _complex_from_doc(doc.get("target"), "target")
    mp = doc.get("map")
    if not isinstance(mp, dict):
        raise CertificateError("map: expected an object")
    try:
        vertex_map = dict(mp["vertices"])
        edge_map = {e: _parse_signed_ref(r) for e, r in mp["edges"].items()}
        face_map = {
            f: FaceImage(entry["image"], int(entry["rotation"]), int(entry["orientation"]))
            for f, entry in mp["faces"].items()
        }
    except (KeyError, TypeError, AttributeError) as exc:
        raise CertificateError(f"map: malformed ({exc})") from exc
    m = CellMap(source, target, vertex_map, edge_map, face_map)
    problems = validate_map(m)
    if problems:
        raise CertificateError(f"invalid map: {problems}")
    return m


def write_certificate(path: Union[str, Path], m: CellMap) -> Path:
    path = Path(path)
    path.write_text(dumps(serialize(m)), encoding="utf-8")
    return path


def read_certificate(path: Union[str, Path]) -> CellMap:
    return deserialize(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            out.append(f"{status} {c.name}" + (f": {c.detail}" if c.detail else ""))
        return out


def verify(doc: Union[str, dict]) -> VerificationReport:
    """Re-derive every claim of a certificate from its raw cell data.

    Structural validity (both complexes, the map) and the recomputed
    immersion property are hard checks.  Connectivity, Euler characteristic
    and edge counts are recomputed and, when a claims block is present,
    must agree with it; with no claims block the recomputed values are
    reported and the document can still pass.
    """
    report = VerificationReport()

    def check(name: str, passed: bool, detail: str = "") -> bool:
        report.checks.append(Check(name, passed, detail))
        return passed

    if isinstance(doc, str):
        try:
            doc = loads(doc)
        except CertificateError as exc:
            check("parse", False, str(exc))
            return report
    check("parse", True)

    tag = doc.get("format")
    if not check("format", tag == FORMAT_TAG, f"found {tag!r}"):
        return report

    try:
        source = _complex_from_doc(doc.get("source"), "source")
        check("source_complex", True)
    except CertificateError as exc:
        check("source_complex", False, str(exc))
        source = None
    try:
        target = _complex_from_doc(doc.get("target"), "target")
        check("target_complex", True)
    except CertificateError as exc:
        check("target_complex", False, str(exc))
        target = None
    if source is None or target is None:
        return report

    mp = doc.get("map")
    try:
        if not isinstance(mp, dict):
            raise CertificateError("map: expected an object")
        vertex_map = dict(mp["vertices"])
        edge_map = {e: _parse_signed_ref(r) for e, r in mp["edges"].items()}
        face_map = {
            f: FaceImage(entry["image"], int(entry["rotation"]), int(entry["orientation"]))
            for f, entry in mp["faces"].items()
        }
        m = CellMap(source, target, vertex_map, edge_map, face_map)
    except (CertificateError, KeyError, TypeError, AttributeError) as exc:
        check("map", False, str(exc))
        return report
    problems = validate_map(m)
    if not check("map", not problems, "; ".join(problems[:3])):
        return report

    violations = immersion_violations(m, validate=False)
    check("immersion", not violations, "; ".join(violations[:3]))

    claims = doc.get("claims")
    recomputed = compute_claims(m)
    if claims is None:
        check("claims", True, "absent; recomputed " + json.dumps(recomputed, sort_keys=True))
        for name in ("connectivity", "euler", "free_edge_count", "isolated_edge_count"):
            key = "connected" if name == "connectivity" else name
            check(name, True, f"recomputed {recomputed[key]}")
        return report

    if not isinstance(claims, dict):
        check("claims", False, "claims must be an object")
        return report
    unknown = sorted(set(claims) - set(_CLAIM_FIELDS))
    check("claims", not unknown, f"unknown claim fields {unknown}" if unknown else "")

    for name, key in (
        ("connectivity", "connected"),
        ("euler", "euler"),
        ("immersion_claim", "immersion"),
        ("free_edge_count", "free_edge_count"),
        ("isolated_edge_count", "isolated_edge_count"),
    ):
        if key not in claims:
            check(name, True, f"no claim; recomputed {recomputed[key]}")
            continue
        agree = claims[key] == recomputed[key]
        check(name, agree, f"claimed {claims[key]}, recomputed {recomputed[key]}")
    return report


def verify_file(path: Union[str, Path]) -> VerificationReport:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        report = VerificationReport()
        report.checks.append(Check("read", False, str(exc)))
        return report
    return verify(text)


def convert_foreign_certificate(doc: Any) -> dict:
    """Entry point for converting externally published serializations.

    The external format is unspecified here and no compatibility is
    promised; this converter is a documented stub.
    """
    raise NotImplementedError(
        "conversion from foreign certificate formats is not implemented"
    )
