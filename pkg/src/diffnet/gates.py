"""Gate sets and words over the gate alphabet.

A word is a sequence of gate indices; its matrix is the product with the
first index as the leftmost factor (the convention makes the stored word
read like the printed product).  Words of a fixed length are in bijection
with integers via the base-m big-endian encoding.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import ValidationError

HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
T_GATE = np.diag([1.0, np.exp(1j * np.pi / 4)]).astype(np.complex128)

# The random interpolating unitary used by the reference diffusive qubit
# set (entries quoted to 5 decimals; re-unitarized on construction).
RANDOM_F = np.array(
    [
        [-0.40194 - 0.43507j, -0.36803 - 0.71674j],
        [0.36803 - 0.71674j, -0.40194 + 0.43507j],
    ],
    dtype=np.complex128,
)


@dataclass(frozen=True)
class GateSet:
    """Immutable ordered collection of unitary gates of one dimension."""

    dim: int
    gates: np.ndarray  # (m, N, N) complex
    label: str = "gateset"
    includes_inverses: bool = False
    gate_labels: tuple = ()

    def __post_init__(self):
        gates = np.ascontiguousarray(np.asarray(self.gates, dtype=np.complex128))
        if gates.ndim != 3 or gates.shape[0] < 2:
            raise ValidationError("a gate set needs at least two square gates")
        if gates.shape[1] != self.dim or gates.shape[2] != self.dim:
            raise ValidationError(
                f"gate shape {gates.shape[1:]} does not match dim {self.dim}"
            )
        for g in gates:
            geometry.check_unitary(g)
        object.__setattr__(self, "gates", gates)
        gates.setflags(write=False)
        if not self.gate_labels:
            labels = tuple(chr(ord("A") + i) if self.dim == 2 and len(gates) <= 26
                           else f"G{i}" for i in range(len(gates)))
            object.__setattr__(self, "gate_labels", labels)
        if len(self.gate_labels) != len(gates):
            raise ValidationError("one label per gate required")

    @property
    def size(self) -> int:
        return self.gates.shape[0]

    def fingerprint(self) -> str:
        """Stable 16-hex-digit digest of the gate entries and flags."""
        h = hashlib.sha256()
        h.update(f"{self.dim}:{self.size}:{int(self.includes_inverses)}".encode())
        h.update(np.ascontiguousarray(self.gates).tobytes())
        return h.hexdigest()[:16]


def word_to_integer(w, m: int) -> int:
    """Base-m big-endian value of a word (first index = most significant)."""
    k = 0
    for i in w:
        if not 0 <= i < m:
            raise ValidationError(f"gate index {i} out of range for alphabet {m}")
        k = k * m + int(i)
    return k


def integer_to_word(k: int, L: int, m: int) -> np.ndarray:
    """Word of length L with base-m big-endian value k."""
    if not 0 <= k < m ** L:
        raise ValidationError(f"integer {k} out of range for {L} base-{m} digits")
    w = np.empty(L, dtype=np.uint8)
    for pos in range(L - 1, -1, -1):
        w[pos] = k % m
        k //= m
    return w


def evaluate_word(gs: GateSet, w) -> np.ndarray:
    """Matrix of a word: product with the first index leftmost.  The empty
    word is the identity.  Long products are polar-projected back onto
    the unitary group once per 32 multiplications to bound drift."""
    w = np.asarray(w, dtype=np.int64)
    if w.size and (w.min() < 0 or w.max() >= gs.size):
        raise ValidationError(f"word indices must lie in [0, {gs.size})")
    U = np.eye(gs.dim, dtype=np.complex128)
    for n, i in enumerate(w, start=1):
        U = U @ gs.gates[i]
        if n % geometry.REUNITARIZE_EVERY == 0:
            U = geometry.project_unitary(U)
    return U


def cyclic_shifts(w) -> list:
    """All L cyclic rotations of a word, starting with the word itself.
    Rotations preserve the spectrum of the evaluated matrix and hence its
    distance from the identity."""
    w = np.asarray(w, dtype=np.uint8)
    if w.size == 0:
        raise ValidationError("cyclic shifts of the empty word are undefined")
    return [np.roll(w, -t) for t in range(w.size)]


def inverse_word(w, m: int) -> np.ndarray:
    """Word evaluating to the inverse matrix over an inverse-augmented
    alphabet of size 2m: reverse the word and swap each index i with its
    inverse-gate index (i + m) mod 2m."""
    w = np.asarray(w, dtype=np.int64)
    return ((w[::-1] + m) % (2 * m)).astype(np.uint8)


def make_diffusive_qubit_set(F: np.ndarray | None = None,
                             seed: int | None = None) -> GateSet:
    """The two-gate diffusive qubit set {A = H F, B = T F}.

    With the default F (the quoted random interpolating matrix) the set
    reproduces the reference experiments; F = I gives the bare
    Hadamard/T pair, a useful non-diffusive control.  A seed draws F
    Haar-randomly instead.  F is polar-projected to unitarity; the
    5-decimal default needs a correction of order 1e-5.
    """
    if F is None:
        F = geometry.sample_haar_unitary(2, seed) if seed is not None else RANDOM_F
    F = np.asarray(F, dtype=np.complex128)
    if F.shape != (2, 2):
        raise ValidationError(f"F must be 2x2, got {F.shape}")
    defect = np.abs(F @ F.conj().T - np.eye(2)).max()
    if defect > 1e-3:
        raise ValidationError(f"F is not unitary within 1e-3 (defect {defect:.2e})")
    Fp = geometry.project_unitary(F)
    correction = float(np.abs(Fp - F).max())
    gs = GateSet(
        dim=2,
        gates=np.array([HADAMARD @ Fp, T_GATE @ Fp]),
        label="diffusive-qubit",
        gate_labels=("A", "B"),
    )
    object.__setattr__(gs, "projection_correction", correction)
    return gs


def augment_with_inverses(gs: GateSet) -> GateSet:
    """Append the conjugate transpose of every gate; indices m..2m-1 are
    the inverses of 0..m-1."""
    inv = gs.gates.conj().transpose(0, 2, 1)
    return GateSet(
        dim=gs.dim,
        gates=np.concatenate([gs.gates, inv]),
        label=gs.label + "+inv",
        includes_inverses=True,
        gate_labels=gs.gate_labels + tuple(l + "'" for l in gs.gate_labels),
    )


def base_set(gs: GateSet) -> GateSet:
    """The inverse-free front half of an augmented set."""
    if not gs.includes_inverses:
        return gs
    m = gs.size // 2
    return GateSet(dim=gs.dim, gates=gs.gates[:m].copy(), label=gs.label.removesuffix("+inv"),
                   gate_labels=gs.gate_labels[:m])


GATESET_FORMAT_VERSION = 1


def save_gateset(gs: GateSet, path) -> None:
    """Versioned text format: header lines, then one gate per block of
    row-major complex entries at 17 significant digits."""
    lines = [
        f"diffnet-gateset v{GATESET_FORMAT_VERSION}",
        f"dim {gs.dim}",
        f"count {gs.size}",
        f"label {gs.label}",
        f"includes_inverses {int(gs.includes_inverses)}",
        "labels " + " ".join(gs.gate_labels),
    ]
    for g in gs.gates:
        lines.append("gate")
        for row in g:
            lines.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_gateset(path) -> GateSet:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].startswith("diffnet-gateset v"):
        raise ValidationError(f"{path}: not a gate-set file")
    version = int(lines[0].split("v")[-1])
    if version != GATESET_FORMAT_VERSION:
        raise ValidationError(f"{path}: unsupported gate-set format v{version}")
    header = {}
    pos = 1
    while pos < len(lines) and lines[pos] != "gate":
        key, _, val = lines[pos].partition(" ")
        header[key] = val
        pos += 1
    dim = int(header["dim"])
    count = int(header["count"])
    gates = np.empty((count, dim, dim), dtype=np.complex128)
    for g in range(count):
        if lines[pos] != "gate":
            raise ValidationError(f"{path}: malformed gate block")
        pos += 1
        for row in range(dim):
            vals = [float(x) for x in lines[pos].split()]
            gates[g, row] = [complex(vals[2 * c], vals[2 * c + 1]) for c in range(dim)]
            pos += 1
    return GateSet(
        dim=dim,
        gates=gates,
        label=header.get("label", "gateset"),
        includes_inverses=bool(int(header.get("includes_inverses", "0"))),
        gate_labels=tuple(header.get("labels", "").split()) or (),
    )


def word_labels(gs: GateSet, w) -> str:
    """Human-readable gate-label string of a word, e.g. 'ABBA...'."""
    return "".join(gs.gate_labels[int(i)] for i in np.asarray(w))
