"""Finite combinatorial 2-complexes and combinatorial maps between them.

A :class:`TwoComplex` is a set of vertices, a set of oriented edges, and a
set of faces, each face attached along a nonempty cyclic sequence of signed
edge references.  A :class:`CellMap` sends cells to cells dimension-wise; a
face is carried onto its image face by a rotation index and an orientation
sign.  The central predicate of the module is :func:`is_immersion`: local
injectivity, checked as injectivity of the induced maps on vertex links
(nodes and corner edges).

Index convention for face maps, fixed once and used by the validator, the
folder, and the serializer:

* orientation ``+1``: ``edge_map(bd(f)[i]) == bd(F)[(i + r) % L]``
* orientation ``-1``: ``edge_map(bd(f)[i]) == inverse(bd(F)[(r - i) % L])``

where ``r`` is the rotation and ``L`` the boundary length.  Corner ``i`` of a
face sits at the start vertex of boundary step ``i``; under the map it lands
on corner ``(i + r) % L`` (orientation ``+1``) or ``(r - i + 1) % L``
(orientation ``-1``) of the image face.

All ids are opaque strings ordered by :func:`id_sort_key` (shortlex).  All
types are immutable after construction and safe to share between workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Optional

FORWARD = 1
REVERSE = -1


def id_sort_key(cell_id: str) -> tuple[int, str]:
    """Shortlex key; the canonical ordering for every id set."""
    return (len(cell_id), cell_id)


class SignedEdge(NamedTuple):
    """An oriented edge reference: the edge id plus a direction flag."""

    edge: str
    sign: int  # FORWARD or REVERSE

    def inverse(self) -> "SignedEdge":
        return SignedEdge(self.edge, -self.sign)

    def sort_key(self) -> tuple[int, str, int]:
        return (len(self.edge), self.edge, 0 if self.sign == FORWARD else 1)


class Edge(NamedTuple):
    id: str
    origin: str
    terminus: str


class Face(NamedTuple):
    id: str
    boundary: tuple[SignedEdge, ...]


class FaceImage(NamedTuple):
    """Target data of a face under a map: image face, rotation, orientation."""

    face: str
    rotation: int
    orientation: int  # +1 or -1


class Corner(NamedTuple):
    """A corner edge of a vertex link.

    ``position`` indexes the boundary step of ``face`` that starts at the
    link's vertex; ``ends`` are the two link nodes it joins (arrival end of
    the previous step, departure end of this step), both written as signed
    edges pointing out of the vertex.
    """

    face: str
    position: int
    ends: tuple[SignedEdge, SignedEdge]


@dataclass(frozen=True)
class LinkGraph:
    """Whitehead graph at a vertex: edge-end nodes, face-corner edges."""

    vertex: str
    nodes: frozenset[SignedEdge]
    corners: tuple[Corner, ...]


@dataclass(frozen=True)
class TwoComplex:
    """A finite combinatorial 2-complex.

    Cell tuples are sorted by id on construction so that equal complexes
    compare equal regardless of input order.  Face boundary order is
    meaningful and left untouched.
    """

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    faces: tuple[Face, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "vertices", tuple(sorted(self.vertices, key=id_sort_key))
        )
        object.__setattr__(
            self, "edges", tuple(sorted(self.edges, key=lambda e: id_sort_key(e.id)))
        )
        object.__setattr__(
            self, "faces", tuple(sorted(self.faces, key=lambda f: id_sort_key(f.id)))
        )

    @cached_property
    def vertex_set(self) -> frozenset[str]:
        return frozenset(self.vertices)

    @cached_property
    def edge_by_id(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def face_by_id(self) -> dict[str, Face]:
        return {f.id: f for f in self.faces}

    @cached_property
    def star(self) -> dict[str, tuple[SignedEdge, ...]]:
        """Outgoing signed edges (link nodes) at each vertex, sorted."""
        out: dict[str, list[SignedEdge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            if e.origin in out:
                out[e.origin].append(SignedEdge(e.id, FORWARD))
            if e.terminus in out:
                out[e.terminus].append(SignedEdge(e.id, REVERSE))
        return {v: tuple(sorted(s, key=SignedEdge.sort_key)) for v, s in out.items()}

    def signed_origin(self, s: SignedEdge) -> str:
        e = self.edge_by_id[s.edge]
        return e.origin if s.sign == FORWARD else e.terminus

    def signed_terminus(self, s: SignedEdge) -> str:
        e = self.edge_by_id[s.edge]
        return e.terminus if s.sign == FORWARD else e.origin

    def boundary_length(self) -> int:
        return sum(len(f.boundary) for f in self.faces)


@dataclass(frozen=True)
class CellMap:
    """A combinatorial map of 2-complexes (cells to cells, dimension-wise)."""

    domain: TwoComplex
    codomain: TwoComplex
    vertex_map: dict[str, str]
    edge_map: dict[str, SignedEdge]
    face_map: dict[str, FaceImage]

    def signed_image(self, s: SignedEdge) -> SignedEdge:
        img = self.edge_map[s.edge]
        return img if s.sign == FORWARD else img.inverse()


# ---------------------------------------------------------------------------
# face-map gauge algebra
# ---------------------------------------------------------------------------

def rotate_boundary(boundary: tuple[SignedEdge, ...], k: int) -> tuple[SignedEdge, ...]:
    k %= len(boundary)
    return boundary[k:] + boundary[:k]


def flip_boundary(boundary: tuple[SignedEdge, ...]) -> tuple[SignedEdge, ...]:
    """The boundary read backwards: reversed order, inverted steps."""
    return tuple(s.inverse() for s in reversed(boundary))


def rotate_face_image(fi: FaceImage, k: int, length: int) -> FaceImage:
    """Image data after re-basing the domain boundary at offset ``k``."""
    if fi.orientation == FORWARD:
        return FaceImage(fi.face, (fi.rotation + k) % length, fi.orientation)
    return FaceImage(fi.face, (fi.rotation - k) % length, fi.orientation)


def flip_face_image(fi: FaceImage, length: int) -> FaceImage:
    """Image data after reading the domain boundary backwards."""
    if fi.orientation == FORWARD:
        return FaceImage(fi.face, (fi.rotation - 1) % length, REVERSE)
    return FaceImage(fi.face, (fi.rotation + 1) % length, FORWARD)


def compose_face_images(outer: FaceImage, inner: FaceImage, length: int) -> FaceImage:
    """Image data of ``outer`` after ``inner`` (inner applied first)."""
    orientation = inner.orientation * outer.orientation
    rotation = (outer.rotation + outer.orientation * inner.rotation) % length
    return FaceImage(outer.face, rotation, orientation)


def corner_image_position(fi: FaceImage, position: int, length: int) -> int:
    """Image corner index of corner ``position`` under face data ``fi``."""
    if fi.orientation == FORWARD:
        return (position + fi.rotation) % length
    return (fi.rotation - position + 1) % length


def compose(outer: CellMap, inner: CellMap) -> CellMap:
    """Composite map ``outer . inner``; domains must match up."""
    if inner.codomain != outer.domain:
        raise ValueError("compose: inner codomain differs from outer domain")
    vmap = {v: outer.vertex_map[w] for v, w in inner.vertex_map.items()}
    emap = {e: outer.signed_image(s) for e, s in inner.edge_map.items()}
    fmap = {}
    for f, fi in inner.face_map.items():
        length = len(inner.domain.face_by_id[f].boundary)
        fmap[f] = compose_face_images(outer.face_map[fi.face], fi, length)
    return CellMap(inner.domain, outer.codomain, vmap, emap, fmap)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate_complex(c: TwoComplex) -> list[str]:
    """Check the TwoComplex invariants; return a list of violations.

    An empty list means the complex is valid.  The empty complex (no
    vertices) is rejected: connectivity and Euler characteristic conventions
    degenerate on it.
    """
    problems: list[str] = []
    if not c.vertices:
        problems.append("empty complex: no vertices")
    if len(set(c.vertices)) != len(c.vertices):
        problems.append("duplicate vertex ids")
    if len(c.edge_by_id) != len(c.edges):
        problems.append("duplicate edge ids")
    if len(c.face_by_id) != len(c.faces):
        problems.append("duplicate face ids")
    for e in c.edges:
        if e.origin not in c.vertex_set:
            problems.append(f"edge {e.id}: unknown origin vertex {e.origin}")
        if e.terminus not in c.vertex_set:
            problems.append(f"edge {e.id}: unknown terminus vertex {e.terminus}")
    for f in c.faces:
        if not f.boundary:
            problems.append(f"face {f.id}: empty boundary")
            continue
        dangling = [s.edge for s in f.boundary if s.edge not in c.edge_by_id]
        if dangling:
            problems.append(f"face {f.id}: unknown edges {sorted(set(dangling))}")
            continue
        n = len(f.boundary)
        for i, s in enumerate(f.boundary):
            nxt = f.boundary[(i + 1) % n]
            if c.signed_terminus(s) != c.signed_origin(nxt):
                problems.append(
                    f"face {f.id}: boundary not closed at position {i} "
                    f"({s.edge} -> {nxt.edge})"
                )
    return problems


def validate_map(m: CellMap) -> list[str]:
    """Check the CellMap invariants; return a list of violations."""
    problems: list[str] = []
    dom, cod = m.domain, m.codomain

    missing_v = [v for v in dom.vertices if v not in m.vertex_map]
    if missing_v:
        problems.append(f"vertices without image: {missing_v}")
    for v, w in m.vertex_map.items():
        if v not in dom.vertex_set:
            problems.append(f"vertex_map key {v} not in domain")
        if w not in cod.vertex_set:
            problems.append(f"vertex {v}: image {w} not in codomain")

    missing_e = [e.id for e in dom.edges if e.id not in m.edge_map]
    if missing_e:
        problems.append(f"edges without image: {missing_e}")
    for eid, s in m.edge_map.items():
        e = dom.edge_by_id.get(eid)
        if e is None:
            problems.append(f"edge_map key {eid} not in domain")
            continue
        if s.edge not in cod.edge_by_id:
            problems.append(f"edge {eid}: image edge {s.edge} not in codomain")
            continue
        if m.vertex_map.get(e.origin) != cod.signed_origin(s):
            problems.append(f"edge {eid}: endpoint mismatch at origin")
        if m.vertex_map.get(e.terminus) != cod.signed_terminus(s):
            problems.append(f"edge {eid}: endpoint mismatch at terminus")

    missing_f = [f.id for f in dom.faces if f.id not in m.face_map]
    if missing_f:
        problems.append(f"faces without image: {missing_f}")
    for fid, fi in m.face_map.items():
        f = dom.face_by_id.get(fid)
        if f is None:
            problems.append(f"face_map key {fid} not in domain")
            continue
        if fi.face not in cod.face_by_id:
            problems.append(f"face {fid}: image face {fi.face} not in codomain")
            continue
        if fi.orientation not in (FORWARD, REVERSE):
            problems.append(f"face {fid}: orientation must be +1 or -1")
            continue
        target = cod.face_by_id[fi.face].boundary
        n = len(f.boundary)
        if n != len(target):
            problems.append(
                f"face {fid}: boundary length {n} != image length {len(target)}"
            )
            continue
        if any(s.edge not in m.edge_map for s in f.boundary):
            continue  # already reported above
        for i, s in enumerate(f.boundary):
            if fi.orientation == FORWARD:
                expected = target[(i + fi.rotation) % n]
            else:
                expected = target[(fi.rotation - i) % n].inverse()
            if m.signed_image(s) != expected:
                problems.append(
                    f"face {fid}: image mismatch at boundary position {i}"
                )
                break
    return problems


# ---------------------------------------------------------------------------
# invariants and predicates
# ---------------------------------------------------------------------------

def euler_characteristic(c: TwoComplex) -> int:
    """|V| - |E| + |F|."""
    return len(c.vertices) - len(c.edges) + len(c.faces)


def is_connected(c: TwoComplex) -> bool:
    """Connectivity of the 1-skeleton; the empty complex counts as False."""
    if not c.vertices:
        return False
    adjacency: dict[str, list[str]] = {v: [] for v in c.vertices}
    for e in c.edges:
        adjacency[e.origin].append(e.terminus)
        adjacency[e.terminus].append(e.origin)
    seen = {c.vertices[0]}
    stack = [c.vertices[0]]
    while stack:
        for w in adjacency[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(c.vertices)


def graph_rank(c: TwoComplex) -> int:
    """First Betti number of the 1-skeleton: |E| - |V| + 1."""
    if not is_connected(c):
        raise ValueError("graph_rank requires a connected complex")
    return len(c.edges) - len(c.vertices) + 1


def free_edges(c: TwoComplex) -> set[str]:
    """Edges traversed exactly once over all face boundaries."""
    counts = _traversal_counts(c)
    return {e.id for e in c.edges if counts[e.id] == 1}


def isolated_edges(c: TwoComplex) -> set[str]:
    """Edges traversed by no face boundary at all."""
    counts = _traversal_counts(c)
    return {e.id for e in c.edges if counts[e.id] == 0}


def _traversal_counts(c: TwoComplex) -> dict[str, int]:
    counts = dict.fromkeys(c.edge_by_id, 0)
    for f in c.faces:
        for s in f.boundary:
            counts[s.edge] += 1
    return counts


def link_graph(c: TwoComplex, vertex: str) -> LinkGraph:
    """The link (Whitehead graph) of ``vertex`` in ``c``."""
    if vertex not in c.vertex_set:
        raise ValueError(f"unknown vertex {vertex}")
    corners = []
    for f in c.faces:
        n = len(f.boundary)
        for i, s in enumerate(f.boundary):
            if c.signed_origin(s) == vertex:
                arrival = f.boundary[(i - 1) % n].inverse()
                corners.append(Corner(f.id, i, (arrival, s)))
    return LinkGraph(vertex, frozenset(c.star[vertex]), tuple(corners))


def immersion_violations(m: CellMap, *, validate: bool = True) -> list[str]:
    """Local-injectivity violations of ``m``; empty list means immersion.

    For every domain vertex the induced map on its link must be injective on
    nodes (edge-ends) and on corner edges.  Violations name the colliding
    cells.
    """
    if validate:
        problems = validate_map(m)
        if problems:
            raise ValueError(f"invalid cell map: {problems}")
    violations: list[str] = []
    dom = m.domain
    for v in dom.vertices:
        seen_nodes: dict[SignedEdge, SignedEdge] = {}
        for s in dom.star[v]:
            img = m.signed_image(s)
            other = seen_nodes.get(img)
            if other is not None:
                violations.append(
                    f"vertex {v}: edge-ends {other} and {s} both map to {img}"
                )
            else:
                seen_nodes[img] = s
        seen_corners: dict[tuple[str, int], tuple[str, int]] = {}
        for f in dom.faces:
            fi = m.face_map[f.id]
            n = len(f.boundary)
            for i, s in enumerate(f.boundary):
                if dom.signed_origin(s) != v:
                    continue
                img_corner = (fi.face, corner_image_position(fi, i, n))
                other_corner = seen_corners.get(img_corner)
                if other_corner is not None:
                    violations.append(
                        f"vertex {v}: corners {other_corner} and "
                        f"({f.id}, {i}) both map to corner {img_corner}"
                    )
                else:
                    seen_corners[img_corner] = (f.id, i)
    return violations


def is_immersion(m: CellMap) -> bool:
    """True iff the induced maps on all vertex links are injective."""
    return not immersion_violations(m)
