"""Epsilon-nets of gate sequences: exhaustive enumeration, ball
selection, nearest-point search, density accounting and persistence.

A net stores, per point, the word and its rotation vector; matrices are
recomputed on demand (storing both would invite incoherence).  Points
are kept sorted by word integer so ties and merges are deterministic.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kernels
from . import gates as gates_mod
from . import geometry
from .errors import (EmptyNetError, FingerprintMismatchError, NetFormatError,
                     ValidationError)
from .gates import GateSet

DEFAULT_ENUMERATION_CAP = 2 ** 24
DEFAULT_DENSITY_CONSTANT = 8.0


@dataclass(frozen=True)
class NetPoint:
    """One net entry: the word, its vector and the cached |r|."""

    word: np.ndarray
    vector: np.ndarray
    radius: float
    index: int


@dataclass(eq=False)
class EpsilonNet:
    """Level-tagged point collection.

    level -1 is the unrestricted sampling net; level >= 0 nets hold only
    points with |r| < radius.  All words share one length.  resolution
    is the stored covering claim (radius**2 for shrunk nets); adjacent
    stack levels satisfy radius_{i+1} == resolution_i exactly.
    """

    level: int
    radius: float
    resolution: float
    fingerprint: str
    word_length: int
    dim: int
    words: np.ndarray  # (K, L) uint8
    vectors: np.ndarray  # (K, d) float64
    radii: np.ndarray = field(default=None)
    _matrices: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.radii is None:
            self.radii = np.linalg.norm(self.vectors, axis=1)

    @property
    def size(self) -> int:
        return self.words.shape[0]

    @property
    def space_dim(self) -> int:
        return self.vectors.shape[1]

    def point(self, i: int) -> NetPoint:
        return NetPoint(self.words[i], self.vectors[i], float(self.radii[i]), i)

    def equals(self, other: "EpsilonNet") -> bool:
        return (
            self.level == other.level
            and self.radius == other.radius
            and self.resolution == other.resolution
            and self.fingerprint == other.fingerprint
            and self.word_length == other.word_length
            and self.dim == other.dim
            and np.array_equal(self.words, other.words)
            and np.array_equal(self.vectors, other.vectors)
        )


def sampling_radius(k: int) -> float:
    """Typical nearest-neighbour resolution of a k-point qubit sampling
    net: 2^(1/4) sqrt(pi) / k^(1/3)."""
    if k < 1:
        raise ValidationError(f"need k >= 1, got {k}")
    return 2.0 ** 0.25 * math.sqrt(math.pi) / k ** (1.0 / 3.0)


def required_point_count(eps: float, d: int, C: float = DEFAULT_DENSITY_CONSTANT) -> int:
    """Points needed for sufficient density at scale eps in d dimensions:
    ceil(C / eps^d)."""
    if not 0.0 < eps < 1.0:
        raise ValidationError(f"need 0 < eps < 1, got {eps}")
    return math.ceil(C / eps ** d)


def _pair_fn(dim: int):
    return kernels.pair_products if dim == 2 else kernels.pair_products_numpy


def _enumerate_products(gs: GateSet, L: int) -> np.ndarray:
    """Matrices of all m^L words of length L, ordered by word integer.
    Built by halving: the products of length L are all prefix-suffix
    combinations of the two half-length enumerations."""
    if L == 0:
        return np.eye(gs.dim, dtype=np.complex128)[None]
    if L == 1:
        return np.array(gs.gates)
    half = _enumerate_products(gs, L // 2)
    rest = half if L % 2 == 0 else _pair_fn(gs.dim)(half, np.array(gs.gates))
    return _pair_fn(gs.dim)(half, rest)


def batch_vectors(mats: np.ndarray, dim: int) -> np.ndarray:
    """Rotation vectors for a batch of unitaries (fast closed form for
    qubits, general eigendecomposition path otherwise)."""
    if dim == 2:
        return kernels.su2_vectors(np.ascontiguousarray(mats))
    basis = geometry.make_generator_basis(dim)
    return np.array([geometry.unitary_to_vector(U, basis) for U in mats])


def all_words(m: int, L: int) -> np.ndarray:
    """All m^L words of length L as a (m^L, L) uint8 array in word-integer
    order."""
    k = np.arange(m ** L, dtype=np.int64)
    out = np.empty((k.size, L), dtype=np.uint8)
    for pos in range(L - 1, -1, -1):
        out[:, pos] = k % m
        k //= m
    return out


def build_sampling_net(gs: GateSet, L: int,
                       cap: int = DEFAULT_ENUMERATION_CAP) -> EpsilonNet:
    """Exhaustive net of all m^L words (level -1), ordered by word
    integer.  Refuses enumerations beyond cap."""
    if L < 1:
        raise ValidationError(f"need L >= 1, got {L}")
    total = gs.size ** L
    if total > cap:
        raise ValidationError(
            f"enumeration of {gs.size}^{L} = {total} words exceeds the cap "
            f"{cap}; raise the cap to at least {total} to proceed"
        )
    mats = _enumerate_products(gs, L)
    vectors = batch_vectors(mats, gs.dim)
    net = EpsilonNet(
        level=-1,
        radius=float("inf"),
        resolution=sampling_radius(total),
        fingerprint=gs.fingerprint(),
        word_length=L,
        dim=gs.dim,
        words=all_words(gs.size, L),
        vectors=vectors,
    )
    net._matrices = mats
    return net


def select_ball(net: EpsilonNet, radius: float) -> EpsilonNet:
    """Filter points with |r| < radius.  Applied to the sampling net the
    result is the level-0 base net with that radius.  Idempotent."""
    if radius <= 0:
        raise ValidationError(f"need radius > 0, got {radius}")
    keep = net.radii < radius
    if not keep.any():
        raise EmptyNetError(
            f"no points within radius {radius}; raise the sampling length"
        )
    out = EpsilonNet(
        level=0 if net.level == -1 else net.level,
        radius=float(radius),
        resolution=float(radius) ** 2,
        fingerprint=net.fingerprint,
        word_length=net.word_length,
        dim=net.dim,
        words=net.words[keep].copy(),
        vectors=net.vectors[keep].copy(),
    )
    if net._matrices is not None:
        out._matrices = net._matrices[keep].copy()
    return out


def net_matrices(net: EpsilonNet, gs: GateSet) -> np.ndarray:
    """Matrices of every net word (cached in memory after first use)."""
    if net._matrices is None:
        if gs.fingerprint() != net.fingerprint:
            raise FingerprintMismatchError(
                "gate set does not match the net's fingerprint"
            )
        G = np.array(gs.gates)
        P = G[net.words[:, 0].astype(np.int64)]
        for t in range(1, net.word_length):
            P = np.einsum("nij,njk->nik", P, G[net.words[:, t].astype(np.int64)])
        net._matrices = np.ascontiguousarray(P)
    return net._matrices


def nearest_point(net: EpsilonNet, target: np.ndarray, gs: GateSet):
    """Brute-force nearest net point to a target unitary under the
    rotation-vector distance.  Ties break toward the smallest word
    integer (nets are stored in word order).  Returns (NetPoint, D)."""
    if net.size == 0:
        raise EmptyNetError("cannot search an empty net")
    target = geometry.check_unitary(target)
    mats = net_matrices(net, gs)
    if net.dim == 2:
        dists = kernels.target_distances(np.ascontiguousarray(target), mats)
    else:
        dists = np.array([geometry.distance_d(target, M) for M in mats])
    i = int(np.argmin(dists))
    return net.point(i), float(dists[i])


NET_MAGIC = b"DNET"
NET_FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHHHhddHQ16s")


def save_net(net: EpsilonNet, path) -> None:
    """Binary format: fixed header, fixed-width records (word bytes then
    d little-endian float64 vector components), sha256 checksum."""
    d = net.space_dim
    header = _HEADER.pack(
        NET_MAGIC, NET_FORMAT_VERSION, net.dim, d, net.level,
        net.radius, net.resolution, net.word_length, net.size,
        net.fingerprint.encode(),
    )
    payload = bytearray(header)
    vec_bytes = np.ascontiguousarray(net.vectors, dtype="<f8").tobytes()
    words = np.ascontiguousarray(net.words, dtype=np.uint8)
    L = net.word_length
    for i in range(net.size):
        payload += words[i].tobytes()
        payload += vec_bytes[i * 8 * d:(i + 1) * 8 * d]
    payload += hashlib.sha256(bytes(payload)).digest()
    with open(path, "wb") as fh:
        fh.write(bytes(payload))


def read_net_header(path) -> dict:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
    if len(raw) < _HEADER.size:
        raise NetFormatError(f"{path}: truncated header")
    magic, version, dim, d, level, radius, resolution, L, count, fp = \
        _HEADER.unpack(raw)
    if magic != NET_MAGIC:
        raise NetFormatError(f"{path}: not a net file")
    if version != NET_FORMAT_VERSION:
        raise NetFormatError(f"{path}: unsupported net format v{version}")
    return {
        "version": version, "dim": dim, "space_dim": d, "level": level,
        "radius": radius, "resolution": resolution, "word_length": L,
        "count": count, "fingerprint": fp.decode(),
    }


def load_net(path, gs: GateSet | None = None) -> EpsilonNet:
    """Load a net; verifies the checksum and, when a gate set is given,
    refuses a fingerprint mismatch.  Matrices are recomputed lazily."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size + 32:
        raise NetFormatError(f"{path}: truncated file")
    body, digest = blob[:-32], blob[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise NetFormatError(f"{path}: checksum mismatch (corrupt file)")
    hdr = read_net_header(path)
    d, L, count = hdr["space_dim"], hdr["word_length"], hdr["count"]
    record = L + 8 * d
    expect = _HEADER.size + count * record
    if len(body) != expect:
        raise NetFormatError(f"{path}: size mismatch ({len(body)} != {expect})")
    if gs is not None and gs.fingerprint() != hdr["fingerprint"]:
        raise FingerprintMismatchError(
            f"{path}: net was built with gate set {hdr['fingerprint']}, "
            f"got {gs.fingerprint()}"
        )
    rec = np.frombuffer(body, dtype=np.uint8, offset=_HEADER.size)
    rec = rec.reshape(count, record) if count else rec.reshape(0, record)
    words = rec[:, :L].copy()
    vectors = rec[:, L:].copy().view("<f8").reshape(count, d).astype(np.float64)
    return EpsilonNet(
        level=hdr["level"], radius=hdr["radius"], resolution=hdr["resolution"],
        fingerprint=hdr["fingerprint"], word_length=L, dim=hdr["dim"],
        words=words, vectors=vectors,
    )
