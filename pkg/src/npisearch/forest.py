"""The forest of primitive facial pieces over a target complex.

Roots are the folded characteristic maps (one disc per face and
orientation).  A node's children arise by wedging a fresh characteristic
disc onto the node's domain at every compatible vertex pair, folding the
induced map, keeping the results that still gained a face, and discarding
isomorphism classes already seen.  Every node at depth d has exactly d+1
faces, so per-depth dedup of canonical keys equals global dedup.

``search`` runs breadth-first within a budget, streaming hits through a
callback and collecting exact per-depth statistics for fully expanded
depths.  Expanding a node is a pure function, so levels can be farmed out
to worker processes; results are merged in submission order, which keeps
multi-worker runs identical to single-worker runs except for wall time.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from .canonical import canonical_key, key_digest
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
    graph_rank,
    validate_complex,
)
from .folding import fold


@dataclass(frozen=True)
class ForestNode:
    """An immersion Y -> X in the forest, keyed by isomorphism class."""

    immersion: CellMap
    depth: int
    euler: int
    key: bytes
    parent: Optional[bytes] = None

    @property
    def faces(self) -> int:
        return len(self.immersion.domain.faces)

    @property
    def digest(self) -> str:
        return key_digest(self.key)


def characteristic_map(x: TwoComplex, face_id: str, orientation: int) -> CellMap:
    """The disc mapped onto ``face_id``, read in the given orientation."""
    face = x.face_by_id.get(face_id)
    if face is None:
        raise ValueError(f"unknown face {face_id}")
    if orientation not in (FORWARD, REVERSE):
        raise ValueError("orientation must be +1 or -1")
    n = len(face.boundary)
    vertices = tuple(f"u{i}" for i in range(n))
    edges = tuple(Edge(f"c{i}", f"u{i}", f"u{(i + 1) % n}") for i in range(n))
    boundary = tuple(SignedEdge(f"c{i}", FORWARD) for i in range(n))
    disc = TwoComplex(vertices, edges, (Face("d0", boundary),))

    edge_map = {}
    for i in range(n):
        if orientation == FORWARD:
            edge_map[f"c{i}"] = face.boundary[i]
        else:
            edge_map[f"c{i}"] = face.boundary[(-i) % n].inverse()
    vertex_map = {f"u{i}": x.signed_origin(edge_map[f"c{i}"]) for i in range(n)}
    face_map = {"d0": FaceImage(face_id, 0, orientation)}
    return CellMap(disc, x, vertex_map, edge_map, face_map)


def characteristic_maps(x: TwoComplex) -> list[CellMap]:
    """Both orientations of every face, in deterministic order."""
    return [
        characteristic_map(x, f.id, orientation)
        for f in x.faces
        for orientation in (FORWARD, REVERSE)
    ]


def roots(x: TwoComplex) -> list[ForestNode]:
    """Folded characteristic maps, deduplicated, sorted by key."""
    problems = validate_complex(x)
    if problems:
        raise ValueError(f"invalid complex: {problems}")
    seen: dict[bytes, ForestNode] = {}
    for cm in characteristic_maps(x):
        folded = fold(cm, validate=False).folded
        key = canonical_key(folded)
        if key not in seen:
            seen[key] = ForestNode(folded, 0, euler_characteristic(folded.domain), key)
    return sorted(seen.values(), key=lambda node: node.key)


def wedge_map(m_y: CellMap, disc: CellMap, v: str, u: str) -> CellMap:
    """Y v D -> X, glued at v ~ u, with canonically relabeled cells."""
    y, d = m_y.domain, disc.domain
    vname = {old: f"v{i}" for i, old in enumerate(y.vertices)}
    ename = {old.id: f"e{i}" for i, old in enumerate(y.edges)}
    fname = {old.id: f"f{i}" for i, old in enumerate(y.faces)}
    dv = {}
    for old in d.vertices:
        dv[old] = vname[v] if old == u else f"v{len(vname) + len(dv)}"
    de = {old.id: f"e{len(ename) + i}" for i, old in enumerate(d.edges)}
    df = {old.id: f"f{len(fname) + i}" for i, old in enumerate(d.faces)}

    vertices = tuple(vname.values()) + tuple(n for o, n in dv.items() if o != u)
    edges = tuple(
        Edge(ename[e.id], vname[e.origin], vname[e.terminus]) for e in y.edges
    ) + tuple(Edge(de[e.id], dv[e.origin], dv[e.terminus]) for e in d.edges)
    faces = tuple(
        Face(fname[f.id], tuple(SignedEdge(ename[s.edge], s.sign) for s in f.boundary))
        for f in y.faces
    ) + tuple(
        Face(df[f.id], tuple(SignedEdge(de[s.edge], s.sign) for s in f.boundary))
        for f in d.faces
    )
    wedge = TwoComplex(vertices, edges, faces)

    vertex_map = {vname[o]: m_y.vertex_map[o] for o in y.vertices}
    vertex_map.update({dv[o]: disc.vertex_map[o] for o in d.vertices if o != u})
    edge_map = {ename[o]: m_y.edge_map[o] for o in y.edge_by_id}
    edge_map.update({de[o]: disc.edge_map[o] for o in d.edge_by_id})
    face_map = {fname[o]: m_y.face_map[o] for o in y.face_by_id}
    face_map.update({df[o]: disc.face_map[o] for o in d.face_by_id})
    return CellMap(wedge, m_y.codomain, vertex_map, edge_map, face_map)


@dataclass(frozen=True)
class ExpandStats:
    attempts: int = 0
    face_rejects: int = 0
    duplicate_keys: int = 0


def expand(
    node: ForestNode, discs: Optional[list[CellMap]] = None
) -> tuple[list[ForestNode], ExpandStats]:
    """Children of ``node`` (locally deduplicated) with expansion counters."""
    if discs is None:
        discs = characteristic_maps(node.immersion.codomain)
    m_y = node.immersion
    want_faces = len(m_y.domain.faces) + 1
    attempts = face_rejects = duplicates = 0
    seen: set[bytes] = set()
    out: list[ForestNode] = []
    for disc in discs:
        for u in disc.domain.vertices:
            u_image = disc.vertex_map[u]
            for v in m_y.domain.vertices:
                if m_y.vertex_map[v] != u_image:
                    continue
                attempts += 1
                result = fold(wedge_map(m_y, disc, v, u), validate=False)
                child = result.folded
                if len(child.domain.faces) != want_faces:
                    face_rejects += 1
                    continue
                key = canonical_key(child)
                if key in seen:
                    duplicates += 1
                    continue
                seen.add(key)
                out.append(
                    ForestNode(
                        child,
                        node.depth + 1,
                        euler_characteristic(child.domain),
                        key,
                        node.key,
                    )
                )
    return out, ExpandStats(attempts, face_rejects, duplicates)


def children(
    node: ForestNode, x: TwoComplex, discs: Optional[list[CellMap]] = None
) -> list[ForestNode]:
    """New-class children of ``node``: wedge a disc, fold, keep face gains."""
    if discs is None:
        discs = characteristic_maps(x)
    return expand(node, discs)[0]


# ---------------------------------------------------------------------------
# breadth-first search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Budget:
    max_depth: int = 8
    max_nodes: int = 1_000_000
    max_seconds: Optional[float] = None

    def validate(self) -> None:
        if self.max_depth < 0 or self.max_nodes < 0:
            raise ValueError("budget limits must be nonnegative")
        if self.max_seconds is not None and self.max_seconds < 0:
            raise ValueError("budget limits must be nonnegative")
        if self.max_nodes == 0:
            raise ValueError("invalid budget: node limit is zero")


@dataclass(frozen=True)
class Target:
    """Hit predicate: minimal Euler characteristic, optional free-edge ban."""

    min_chi: Optional[int] = None
    require_no_free_edges: bool = False
    stop_on_first: bool = False

    @property
    def active(self) -> bool:
        return self.min_chi is not None or self.require_no_free_edges

    def matches(self, node: ForestNode) -> bool:
        if not self.active:
            return False
        if self.min_chi is not None and node.euler < self.min_chi:
            return False
        if self.require_no_free_edges and free_edges(node.immersion.domain):
            return False
        return True


@dataclass(frozen=True)
class DepthStats:
    depth: int
    nodes: int
    max_chi: Optional[int]
    complete: bool


@dataclass(frozen=True)
class Hit:
    digest: str
    depth: int
    euler: int
    faces: int


@dataclass(frozen=True)
class NodeRecord:
    digest: str
    parent_digest: Optional[str]
    depth: int
    euler: int
    rank: int
    faces: int


@dataclass
class SearchReport:
    depths: list[DepthStats] = field(default_factory=list)
    hits: list[Hit] = field(default_factory=list)
    node_records: list[NodeRecord] = field(default_factory=list)
    candidates: int = 0
    dedup_hits: int = 0
    face_merge_rejects: int = 0
    completed: bool = True
    stopped_on_hit: bool = False
    interrupted: bool = False
    wall_seconds: Optional[float] = None

    def keys_by_depth(self) -> dict[int, set[str]]:
        out: dict[int, set[str]] = {}
        for record in self.node_records:
            out.setdefault(record.depth, set()).add(record.digest)
        return out


def search(
    x: TwoComplex,
    budget: Budget = Budget(),
    target: Target = Target(),
    *,
    workers: int = 1,
    on_hit: Optional[Callable[[ForestNode], None]] = None,
    record_nodes: bool = True,
    log: Optional[Callable[[str], None]] = None,
) -> SearchReport:
    """Breadth-first traversal of the forest over ``x`` within ``budget``.

    Per-depth statistics are exact for levels marked complete.  ``on_hit``
    is invoked once per hit, in key order within each depth.  With
    ``target.stop_on_first`` the run halts as soon as a hit is admitted;
    a level cut short that way is marked incomplete but the run still
    counts as completed.  Interrupts return the partial report.
    """
    budget.validate()
    if workers < 1:
        raise ValueError("workers must be >= 1")
    start = time.monotonic()
    report = SearchReport()
    discs = characteristic_maps(x)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None

    def out_of_time() -> bool:
        return (
            budget.max_seconds is not None
            and time.monotonic() - start > budget.max_seconds
        )

    def results(level: list[ForestNode]) -> Iterator[tuple[list[ForestNode], ExpandStats]]:
        if pool is None:
            for node in level:
                yield expand(node, discs)
        else:
            yield from pool.map(_expand_task, level, chunksize=4)

    total = 0
    depth = 0
    level = roots(x)
    level_complete = True
    budget_exhausted = False

    try:
        while True:
            truncated = total + len(level) > budget.max_nodes
            if truncated:
                level = level[: budget.max_nodes - total]
                budget_exhausted = True
            total += len(level)
            complete = level_complete and not truncated

            max_chi = max((n.euler for n in level), default=None)
            report.depths.append(DepthStats(depth, len(level), max_chi, complete))
            if record_nodes:
                for node in level:
                    report.node_records.append(
                        NodeRecord(
                            node.digest,
                            key_digest(node.parent) if node.parent else None,
                            node.depth,
                            node.euler,
                            graph_rank(node.immersion.domain),
                            node.faces,
                        )
                    )
            for node in level:
                if target.matches(node):
                    report.hits.append(
                        Hit(node.digest, node.depth, node.euler, node.faces)
                    )
                    if on_hit is not None:
                        on_hit(node)
                    if target.stop_on_first:
                        report.stopped_on_hit = True
            if log is not None:
                log(
                    f"depth={depth} nodes={len(level)} max_chi={max_chi} "
                    f"dedup_hits={report.dedup_hits} "
                    f"elapsed={time.monotonic() - start:.2f}"
                )

            if report.stopped_on_hit or not complete:
                break
            if depth >= budget.max_depth or not level:
                break
            if out_of_time():
                budget_exhausted = True
                break

            next_keys: dict[bytes, ForestNode] = {}
            level_complete = True
            for kids, stats in results(level):
                report.candidates += stats.attempts
                report.face_merge_rejects += stats.face_rejects
                report.dedup_hits += stats.duplicate_keys
                found = False
                for child in kids:
                    if child.key in next_keys:
                        report.dedup_hits += 1
                        continue
                    next_keys[child.key] = child
                    if target.stop_on_first and target.matches(child):
                        found = True
                if found:
                    level_complete = False
                    break
                if out_of_time():
                    budget_exhausted = True
                    level_complete = False
                    break
            level = sorted(next_keys.values(), key=lambda node: node.key)
            depth += 1
    except KeyboardInterrupt:
        report.interrupted = True
        budget_exhausted = True
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)

    report.completed = not budget_exhausted
    report.wall_seconds = time.monotonic() - start
    return report


def _expand_task(node: ForestNode) -> tuple[list[ForestNode], ExpandStats]:
    """Top-level worker task (must be picklable)."""
    return expand(node)
