"""Canonical keys for immersions over a fixed target complex.

Two maps ``Y -> X`` and ``Y' -> X`` get equal keys exactly when there is an
isomorphism ``Y -> Y'`` commuting with the maps to ``X``.  The key is the
lexicographically least serialization over every admissible BFS labeling of
the domain:

* vertices are colored by image data and the coloring is refined a few
  rounds; only vertices of the minimal color class serve as BFS bases;
* from a base, BFS discovers edges in sorted order of their image (signed
  codomain edge), which is a total order whenever the 1-skeleton is immersed
  -- the intended use.  Exact ties (possible for non-immersed skeleta) are
  resolved by branching over the tied orderings, so the key stays exact;
* face records are anonymized and normalized over the full dihedral gauge
  (rotating the stored boundary and flipping the disc parameterization,
  transporting rotation/orientation accordingly), because an isomorphism
  over X may re-parameterize a face.

The key is the serialized form itself (bytes), not a hash, so key equality
is isomorphism with no collision caveat.  Use :func:`key_digest` for file
names and log records.
"""

from __future__ import annotations

import hashlib
from itertools import permutations
from typing import Iterator, Optional

from .complexes import (
    CellMap,
    SignedEdge,
    flip_face_image,
    is_connected,
    rotate_face_image,
)

_KEY_FORMAT = "npikey/1"

# (vertex index map, edge index map, edge direction map, edge records)
_Labeling = tuple[dict[str, int], dict[str, int], dict[str, int], list]


def key_digest(key: bytes) -> str:
    """Short stable digest of a canonical key, for file names and reports."""
    return hashlib.sha256(key).hexdigest()[:20]


def canonical_key(m: CellMap) -> bytes:
    """Canonical key of ``m`` over its codomain; domain must be connected."""
    dom = m.domain
    if not is_connected(dom):
        raise ValueError("canonical_key requires a connected domain")

    # outgoing half-edges tagged with image keys, sorted by image
    out: dict[str, list[tuple[tuple[str, int], SignedEdge]]] = {}
    ties = False
    for v in dom.vertices:
        entries = []
        for h in dom.star[v]:
            img = m.signed_image(h)
            entries.append(((img.edge, img.sign), h))
        entries.sort(key=lambda kh: kh[0])
        for i in range(1, len(entries)):
            if entries[i][0] == entries[i - 1][0]:
                ties = True
        out[v] = entries

    best: Optional[bytes] = None
    for base in _base_candidates(m, out):
        labelings: Iterator[_Labeling]
        if ties:
            labelings = _branching_labelings(dom, out, base)
        else:
            labelings = iter([_bfs_labeling(dom, out, base)])
        for labeling in labelings:
            data = _serialize(m, labeling)
            if best is None or data < best:
                best = data
    assert best is not None
    return best


def _base_candidates(m: CellMap, out) -> list[str]:
    """Vertices in the minimal class of an image-driven color refinement."""
    dom = m.domain
    color = {v: (m.vertex_map[v], tuple(k for k, _ in out[v])) for v in dom.vertices}
    rank = _ranks(color)
    for _ in range(3):
        new = {}
        for v in dom.vertices:
            nbrs = sorted((k, rank[dom.signed_terminus(h)]) for k, h in out[v])
            new[v] = (rank[v], tuple(nbrs))
        new_rank = _ranks(new)
        stable = len(set(new_rank.values())) == len(set(rank.values()))
        rank = new_rank
        if stable:
            break
    return [v for v in dom.vertices if rank[v] == 0]


def _ranks(color: dict[str, tuple]) -> dict[str, int]:
    values = sorted(set(color.values()))
    index = {c: i for i, c in enumerate(values)}
    return {v: index[c] for v, c in color.items()}


def _bfs_labeling(dom, out, base: str) -> _Labeling:
    """The unique BFS labeling from ``base`` (no image-key ties)."""
    vidx = {base: 0}
    order = [base]
    eidx: dict[str, int] = {}
    edir: dict[str, int] = {}
    records = []
    qi = 0
    while qi < len(order):
        u = order[qi]
        qi += 1
        for key, h in out[u]:
            if h.edge in eidx:
                continue
            eidx[h.edge] = len(eidx)
            edir[h.edge] = h.sign
            w = dom.signed_terminus(h)
            if w not in vidx:
                vidx[w] = len(order)
                order.append(w)
            records.append((vidx[u], vidx[w], key))
    return vidx, eidx, edir, records


def _branching_labelings(dom, out, base: str) -> Iterator[_Labeling]:
    """All BFS labelings from ``base``, branching over tied orderings."""

    def walk(vidx, order, eidx, edir, records, qi):
        if qi == len(order):
            yield vidx, eidx, edir, records
            return
        u = order[qi]
        groups: list[list[tuple[tuple, SignedEdge]]] = []
        for key, h in out[u]:
            if groups and groups[-1][0][0] == key:
                groups[-1].append((key, h))
            else:
                groups.append([(key, h)])
        for ordering in _group_orders(groups):
            v2, o2 = dict(vidx), list(order)
            e2, d2, r2 = dict(eidx), dict(edir), list(records)
            for key, h in ordering:
                if h.edge in e2:
                    continue
                e2[h.edge] = len(e2)
                d2[h.edge] = h.sign
                w = dom.signed_terminus(h)
                if w not in v2:
                    v2[w] = len(o2)
                    o2.append(w)
                r2.append((v2[u], v2[w], key))
            yield from walk(v2, o2, e2, d2, r2, qi + 1)

    yield from walk({base: 0}, [base], {}, {}, [], 0)


def _group_orders(groups):
    if not groups:
        yield []
        return
    first, rest = groups[0], groups[1:]
    for perm in permutations(first):
        for tail in _group_orders(rest):
            yield list(perm) + tail


def _serialize(m: CellMap, labeling: _Labeling) -> bytes:
    vidx, eidx, edir, records = labeling
    dom = m.domain

    def signed_int(s: SignedEdge) -> int:
        n = eidx[s.edge] + 1
        return n if s.sign == edir[s.edge] else -n

    face_records = []
    for f in dom.faces:
        bd = tuple(signed_int(s) for s in f.boundary)
        fi = m.face_map[f.id]
        n = len(bd)
        candidates = []
        for flipped in (False, True):
            cbd = bd if not flipped else tuple(-x for x in reversed(bd))
            cfi = fi if not flipped else flip_face_image(fi, n)
            for k in range(n):
                rbd = cbd[k:] + cbd[:k]
                rfi = rotate_face_image(cfi, k, n)
                candidates.append((rbd, rfi.face, rfi.rotation, rfi.orientation))
        face_records.append(min(candidates))
    face_records.sort()

    vertex_images = tuple(m.vertex_map[v] for v in sorted(vidx, key=vidx.get))
    payload = (
        _KEY_FORMAT,
        len(vidx),
        vertex_images,
        tuple(records),
        tuple(face_records),
    )
    return repr(payload).encode()
