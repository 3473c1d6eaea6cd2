"""Combinatorial 2-complexes, folding, and the facial-piece forest search."""

from .canonical import canonical_key, key_digest
from .certify import (
    CertificateError,
    VerificationReport,
    deserialize,
    read_certificate,
    serialize,
    verify,
    verify_file,
    write_certificate,
)
from .complexes import (
    FORWARD,
    REVERSE,
    CellMap,
    Corner,
    Edge,
    Face,
    FaceImage,
    LinkGraph,
    SignedEdge,
    TwoComplex,
    compose,
    euler_characteristic,
    free_edges,
    graph_rank,
    immersion_violations,
    is_connected,
    is_immersion,
    isolated_edges,
    link_graph,
    validate_complex,
    validate_map,
)
from .folding import FoldResult, fold, lift_path
from .forest import (
    Budget,
    ForestNode,
    SearchReport,
    Target,
    characteristic_map,
    children,
    roots,
    search,
)
from .presentations import (
    Presentation,
    Word,
    enumerate_words,
    exponent_sum,
    miller_schupp,
    normalize_word,
    presentation_complex,
    wnpi_to_npi,
)

__version__ = "0.1.0"
