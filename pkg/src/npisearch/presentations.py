"""Group presentations, words, and presentation complexes.

Word syntax is shared with the CLI and the certificate format: lowercase
letters are generators, uppercase letters their inverses, concatenation is
multiplication.  ``"abbaB"`` denotes a b b a b^-1.

The family of interest takes a word ``w`` over {a, b} with exponent sum 1 in
b and an integer ``n >= 1`` and forms the balanced presentation

    < a, b | w, b a^n b^-1 a^-(n+1) >

whose presentation complex is contractible; :func:`miller_schupp` builds it.
:func:`wnpi_to_npi` is the wedge construction turning an immersion with
chi >= 2 over X into one of chi >= 1 over the homotopy-equivalent X v D^2.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Optional

from .complexes import (
    FORWARD,
    REVERSE,
    CellMap,
    Edge,
    Face,
    FaceImage,
    SignedEdge,
    TwoComplex,
    id_sort_key,
    immersion_violations,
)


def inverse_letter(ch: str) -> str:
    return ch.swapcase()


def free_reduce(letters: str) -> str:
    """Delete adjacent inverse pairs until none remain."""
    stack: list[str] = []
    for ch in letters:
        if stack and stack[-1] == inverse_letter(ch):
            stack.pop()
        else:
            stack.append(ch)
    return "".join(stack)


def cyclic_reduce(letters: str) -> str:
    """Freely reduce, then strip inverse pairs across the wraparound."""
    s = free_reduce(letters)
    while len(s) > 1 and s[0] == inverse_letter(s[-1]):
        s = s[1:-1]
    return s


def inverse_word_letters(letters: str) -> str:
    return "".join(inverse_letter(ch) for ch in reversed(letters))


@dataclass(frozen=True)
class Word:
    """A freely reduced word; reduction happens on construction."""

    letters: str

    def __post_init__(self) -> None:
        if not all(ch.isalpha() and ch.isascii() for ch in self.letters):
            raise ValueError(f"bad word syntax: {self.letters!r}")
        object.__setattr__(self, "letters", free_reduce(self.letters))

    def __str__(self) -> str:
        return self.letters

    def __len__(self) -> int:
        return len(self.letters)

    def inverse(self) -> "Word":
        return Word(inverse_word_letters(self.letters))


def exponent_sum(w: Word | str, letter: str) -> int:
    """Signed count of ``letter`` (a generator, lowercase) in ``w``."""
    s = w.letters if isinstance(w, Word) else w
    return s.count(letter) - s.count(inverse_letter(letter))


def normalize_word(w: Word | str) -> Word:
    """Cyclically reduce, then minimize over rotations of w and w^-1."""
    s = cyclic_reduce(w.letters if isinstance(w, Word) else free_reduce(str(w)))
    if not s:
        return Word("")
    candidates = []
    for word in (s, inverse_word_letters(s)):
        for k in range(len(word)):
            candidates.append(word[k:] + word[:k])
    return Word(min(candidates))


def enumerate_words(max_len: int) -> list[Word]:
    """Normalized cyclically reduced words over {a, b} with b-exponent sum 1.

    One representative per :func:`normalize_word` class, every class with a
    member of length <= max_len, sorted by (length, spelling).
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    alphabet = "aAbB"
    found: set[str] = set()
    stack = [""]
    while stack:
        prefix = stack.pop()
        if prefix:
            if exponent_sum(prefix, "b") == 1 and cyclic_reduce(prefix) == prefix:
                found.add(normalize_word(prefix).letters)
        if len(prefix) < max_len:
            for ch in alphabet:
                if prefix and prefix[-1] == inverse_letter(ch):
                    continue  # never extend into a free reduction
                stack.append(prefix + ch)
    return [Word(s) for s in sorted(found, key=lambda s: (len(s), s))]


@dataclass(frozen=True)
class Presentation:
    """A finite presentation; relators are nonempty words."""

    generators: tuple[str, ...]
    relators: tuple[Word, ...]

    def __post_init__(self) -> None:
        for g in self.generators:
            if not (len(g) == 1 and g.isalpha() and g.islower()):
                raise ValueError(f"generators must be single lowercase letters: {g!r}")
        allowed = set(self.generators) | {inverse_letter(g) for g in self.generators}
        for r in self.relators:
            if not r.letters:
                raise ValueError("empty relator")
            bad = set(r.letters) - allowed
            if bad:
                raise ValueError(f"relator {r} uses unknown letters {sorted(bad)}")


def presentation_complex(p: Presentation) -> TwoComplex:
    """One vertex, a loop per generator, a face per relator.

    Relators that are not cyclically reduced are reduced with a warning;
    folding would cancel the backtracks anyway.
    """
    faces = []
    for i, r in enumerate(p.relators, start=1):
        reduced = cyclic_reduce(r.letters)
        if reduced != r.letters:
            warnings.warn(
                f"relator {r} is not cyclically reduced; using {reduced}",
                stacklevel=2,
            )
        if not reduced:
            raise ValueError(f"relator {r} reduces to the empty word")
        boundary = tuple(
            SignedEdge(ch.lower(), FORWARD if ch.islower() else REVERSE)
            for ch in reduced
        )
        faces.append(Face(f"r{i}", boundary))
    edges = tuple(Edge(g, "v", "v") for g in p.generators)
    return TwoComplex(("v",), edges, tuple(faces))


def miller_schupp(n: int, w: Word | str) -> TwoComplex:
    """Presentation complex of < a, b | w, b a^n b^-1 a^-(n+1) >."""
    if n < 1:
        raise ValueError("n must be >= 1")
    word = w if isinstance(w, Word) else Word(str(w))
    if exponent_sum(word, "b") != 1:
        raise ValueError(f"w must have exponent sum 1 in b, got {exponent_sum(word, 'b')}")
    second = Word("b" + "a" * n + "B" + "A" * (n + 1))
    return presentation_complex(Presentation(("a", "b"), (word, second)))


def _fresh_id(base: str, used: Iterable[str]) -> str:
    taken = set(used)
    if base not in taken:
        return base
    i = 0
    while f"{base}{i}" in taken:
        i += 1
    return f"{base}{i}"


def wnpi_to_npi(imm: CellMap, wedge_vertex: Optional[str] = None) -> CellMap:
    """Wedge a circle onto the domain and a disc onto the codomain.

    Given an immersion Y -> X, returns the immersion Y v S^1 -> X v D^2 that
    sends the circle to the boundary of the new disc.  The domain loses one
    from its Euler characteristic; the codomain keeps its own (one new edge,
    one new face).  The new domain loop is an isolated edge, so the result
    is deliberately not a facial piece.
    """
    violations = immersion_violations(imm)
    if violations:
        raise ValueError(f"input is not an immersion: {violations}")
    dom, cod = imm.domain, imm.codomain
    if wedge_vertex is None:
        wedge_vertex = dom.vertices[0]
    if wedge_vertex not in dom.vertex_set:
        raise ValueError(f"unknown wedge vertex {wedge_vertex}")
    target_vertex = imm.vertex_map[wedge_vertex]

    loop_id = _fresh_id("s", dom.edge_by_id)
    new_dom = TwoComplex(
        dom.vertices,
        dom.edges + (Edge(loop_id, wedge_vertex, wedge_vertex),),
        dom.faces,
    )
    cod_edge_id = _fresh_id("s", cod.edge_by_id)
    cod_face_id = _fresh_id("d", cod.face_by_id)
    new_cod = TwoComplex(
        cod.vertices,
        cod.edges + (Edge(cod_edge_id, target_vertex, target_vertex),),
        cod.faces + (Face(cod_face_id, (SignedEdge(cod_edge_id, FORWARD),)),),
    )
    edge_map = dict(imm.edge_map)
    edge_map[loop_id] = SignedEdge(cod_edge_id, FORWARD)
    return CellMap(new_dom, new_cod, dict(imm.vertex_map), edge_map, dict(imm.face_map))
