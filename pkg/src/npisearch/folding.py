"""Folding of combinatorial maps into immersions.

``fold`` factors any map ``A -> B`` (``A`` finite) as a cell-surjective
quotient ``A -> Abar`` followed by an immersion ``Abar -> B``.  The quotient
is produced by two kinds of identifications, applied to a fixpoint:

* graph folds: two edge-ends at one vertex with the same signed image are
  identified (merging their far endpoints), exactly as for graphs;
* face folds: once the 1-skeleton is folded, two faces with the same image
  face that share one matched corner are identified.  One matched corner is
  enough: path lifting through a folded 1-skeleton is unique, so the full
  boundary lifts coincide.

Identifications are tracked with union-find structures (edges carry a sign
for direction-reversing identifications) and the quotient map is emitted at
the end.  Each union-find class is named after its shortlex-least member, so
folding is deterministic; an optional RNG shuffles the work order for
confluence testing.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .complexes import (
    FORWARD,
    CellMap,
    Edge,
    Face,
    FaceImage,
    SignedEdge,
    TwoComplex,
    corner_image_position,
    id_sort_key,
    validate_map,
)


class UnionFind:
    """Plain union-find over string ids, union by size."""

    def __init__(self, items: Iterable[str]):
        self.parent = {x: x for x in items}
        self.size = dict.fromkeys(self.parent, 1)

    def find(self, x: str) -> str:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def classes(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return out


class SignedUnionFind:
    """Union-find whose elements carry a sign relative to their root.

    ``find(x)`` returns ``(root, g)`` with the meaning ``x = g * root``
    (``g = -1`` when ``x`` is identified with the root reversed).
    """

    def __init__(self, items: Iterable[str]):
        self.parent = {x: x for x in items}
        self.sign = dict.fromkeys(self.parent, 1)
        self.size = dict.fromkeys(self.parent, 1)

    def find(self, x: str) -> tuple[str, int]:
        root, g = x, 1
        while self.parent[root] != root:
            g *= self.sign[root]
            root = self.parent[root]
        # path compression with sign accumulation
        node, g_node = x, 1
        while self.parent[node] != node:
            nxt = self.parent[node]
            g_next = g_node * self.sign[node]
            self.parent[node], self.sign[node] = root, g * _inv(g_node)
            node, g_node = nxt, g_next
        return root, g

    def union(self, a: str, b: str, rel: int) -> bool:
        """Impose ``a = rel * b``; returns False if already related."""
        ra, ga = self.find(a)
        rb, gb = self.find(b)
        if ra == rb:
            if ga != rel * gb:
                raise ValueError(f"inconsistent identification of edge {a}")
            return False
        link = ga * rel * gb  # ra = link * rb
        if self.size[ra] < self.size[rb]:
            self.parent[ra] = rb
            self.sign[ra] = link
            self.size[rb] += self.size[ra]
        else:
            self.parent[rb] = ra
            self.sign[rb] = link
            self.size[ra] += self.size[rb]
        return True

    def classes(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for x in self.parent:
            out.setdefault(self.find(x)[0], []).append(x)
        return out


def _inv(g: int) -> int:
    return g  # signs are self-inverse


@dataclass(frozen=True)
class FoldResult:
    """Factorization ``A -> Abar -> B`` with identification counts."""

    quotient: CellMap
    folded: CellMap
    face_merge_count: int
    edge_fold_count: int
    vertex_fold_count: int


def fold(
    m: CellMap,
    *,
    order_rng: Optional[random.Random] = None,
    validate: bool = True,
) -> FoldResult:
    """Fold ``m`` to a fixpoint and return the factorization.

    ``order_rng`` shuffles the processing order of fold sites (folding is
    confluent, so the result is isomorphic over the codomain either way);
    the default order is deterministic.
    """
    if validate:
        problems = validate_map(m)
        if problems:
            raise ValueError(f"invalid cell map: {problems}")
    dom = m.domain

    vuf = UnionFind(dom.vertices)
    euf = SignedUnionFind(dom.edge_by_id)
    # star of each merged vertex: image signed edge -> original half-edge
    stars: dict[str, dict[SignedEdge, SignedEdge]] = {}
    pending: deque[tuple[str, str]] = deque()
    edge_folds = 0

    def merge_half_edges(h1: SignedEdge, h2: SignedEdge) -> None:
        nonlocal edge_folds
        r1, g1 = euf.find(h1.edge)
        r2, g2 = euf.find(h2.edge)
        if r1 == r2:
            if h1.sign * g1 != h2.sign * g2:
                raise ValueError(f"edge {r1} would fold onto its own inverse")
            return
        euf.union(h1.edge, h2.edge, h1.sign * h2.sign)
        edge_folds += 1
        pending.append((dom.signed_terminus(h1), dom.signed_terminus(h2)))

    def insert(star: dict[SignedEdge, SignedEdge], h: SignedEdge) -> None:
        key = m.signed_image(h)
        existing = star.get(key)
        if existing is None:
            star[key] = h
        else:
            merge_half_edges(existing, h)

    init_vertices = list(dom.vertices)
    if order_rng is not None:
        order_rng.shuffle(init_vertices)
    for v in init_vertices:
        star: dict[SignedEdge, SignedEdge] = {}
        stars[v] = star
        halves = list(dom.star[v])
        if order_rng is not None:
            order_rng.shuffle(halves)
        for h in halves:
            insert(star, h)

    while pending:
        if order_rng is not None and len(pending) > 1:
            i = order_rng.randrange(len(pending))
            pending[0], pending[i] = pending[i], pending[0]
        a, b = pending.popleft()
        ra, rb = vuf.find(a), vuf.find(b)
        if ra == rb:
            continue
        vuf.union(ra, rb)
        winner = vuf.find(ra)
        loser = rb if winner == ra else ra
        big, small = stars[winner], stars.pop(loser)
        if len(big) < len(small):
            big, small = small, big
            stars[winner] = big
        for key, h in small.items():
            existing = big.get(key)
            if existing is None:
                big[key] = h
            else:
                merge_half_edges(existing, h)

    # 1-skeleton is folded; match face corners through the quotient
    fuf = UnionFind(dom.face_by_id)
    corner_owner: dict[tuple[str, str, int], str] = {}
    for f in dom.faces:
        fi = m.face_map[f.id]
        n = len(f.boundary)
        for i, s in enumerate(f.boundary):
            v = vuf.find(dom.signed_origin(s))
            key = (v, fi.face, corner_image_position(fi, i, n))
            owner = corner_owner.get(key)
            if owner is None:
                corner_owner[key] = f.id
            else:
                fuf.union(owner, f.id)

    return _emit(m, vuf, euf, fuf, edge_folds, validate)


def _emit(
    m: CellMap,
    vuf: UnionFind,
    euf: SignedUnionFind,
    fuf: UnionFind,
    edge_folds: int,
    check: bool,
) -> FoldResult:
    dom = m.domain

    v_classes = vuf.classes()
    v_name = {root: min(members, key=id_sort_key) for root, members in v_classes.items()}
    qv = {v: v_name[vuf.find(v)] for v in dom.vertices}

    e_classes = euf.classes()
    anchor: dict[str, str] = {}
    anchor_sign: dict[str, int] = {}
    for root, members in e_classes.items():
        a = min(members, key=id_sort_key)
        anchor[root] = a
        anchor_sign[root] = euf.find(a)[1]
    qe: dict[str, SignedEdge] = {}
    for e in dom.edge_by_id:
        root, g = euf.find(e)
        qe[e] = SignedEdge(anchor[root], g * anchor_sign[root])

    def q_signed(s: SignedEdge) -> SignedEdge:
        img = qe[s.edge]
        return img if s.sign == FORWARD else img.inverse()

    f_classes = fuf.classes()
    rep_face = {root: min(members, key=id_sort_key) for root, members in f_classes.items()}
    qf_rep = {f: rep_face[fuf.find(f)] for f in dom.face_by_id}

    new_vertices = tuple(v_name.values())
    new_edges = tuple(
        Edge(anchor[root], qv[dom.edge_by_id[anchor[root]].origin],
             qv[dom.edge_by_id[anchor[root]].terminus])
        for root in e_classes
    )
    new_faces = []
    folded_fmap: dict[str, FaceImage] = {}
    for root in f_classes:
        f0 = dom.face_by_id[rep_face[root]]
        new_faces.append(Face(f0.id, tuple(q_signed(s) for s in f0.boundary)))
        folded_fmap[f0.id] = m.face_map[f0.id]
    quotient_complex = TwoComplex(new_vertices, new_edges, tuple(new_faces))

    quotient_fmap: dict[str, FaceImage] = {}
    for f in dom.faces:
        f0_id = qf_rep[f.id]
        fi = m.face_map[f.id]
        fi0 = m.face_map[f0_id]
        n = len(f.boundary)
        flip = fi.orientation * fi0.orientation
        shift = (fi0.orientation * (fi.rotation - fi0.rotation)) % n
        quotient_fmap[f.id] = FaceImage(f0_id, shift, flip)

    quotient = CellMap(dom, quotient_complex, dict(qv), dict(qe), quotient_fmap)
    folded = CellMap(
        quotient_complex,
        m.codomain,
        {v: m.vertex_map[v] for v in quotient_complex.vertices},
        {e.id: m.edge_map[e.id] for e in quotient_complex.edges},
        folded_fmap,
    )

    if check:
        for name, cm in (("quotient", quotient), ("folded", folded)):
            problems = validate_map(cm)
            if problems:
                raise AssertionError(f"fold produced invalid {name} map: {problems}")

    return FoldResult(
        quotient=quotient,
        folded=folded,
        face_merge_count=len(dom.faces) - len(f_classes),
        edge_fold_count=edge_folds,
        vertex_fold_count=len(dom.vertices) - len(v_classes),
    )


def edge_lift_index(imm: CellMap) -> dict[str, dict[SignedEdge, SignedEdge]]:
    """Per-vertex index (image signed edge -> outgoing half-edge).

    Requires the 1-skeleton of ``imm`` to be an immersion; raises otherwise.
    """
    index: dict[str, dict[SignedEdge, SignedEdge]] = {}
    dom = imm.domain
    for v in dom.vertices:
        table: dict[SignedEdge, SignedEdge] = {}
        for h in dom.star[v]:
            key = imm.signed_image(h)
            if key in table:
                raise ValueError(
                    f"1-skeleton not immersed: vertex {v} has two edge-ends over {key}"
                )
            table[key] = h
        index[v] = table
    return index


def lift_path(
    imm: CellMap,
    start: str,
    path: Sequence[SignedEdge],
) -> Optional[tuple[SignedEdge, ...]]:
    """The unique lift of ``path`` starting at ``start``, or None.

    ``path`` is a composable signed-edge sequence in the codomain.  The
    1-skeleton of ``imm`` must be an immersion, which makes lifts unique.
    """
    dom, cod = imm.domain, imm.codomain
    if start not in dom.vertex_set:
        raise ValueError(f"start vertex {start} not in domain")
    at = None
    for s in path:
        if s.edge not in cod.edge_by_id:
            raise ValueError(f"unknown codomain edge {s.edge}")
        if at is not None and cod.signed_origin(s) != at:
            raise ValueError("path is not composable in the codomain")
        at = cod.signed_terminus(s)

    index = edge_lift_index(imm)
    lifted: list[SignedEdge] = []
    cur = start
    for s in path:
        h = index[cur].get(s)
        if h is None:
            return None
        lifted.append(h)
        cur = dom.signed_terminus(h)
    return tuple(lifted)
