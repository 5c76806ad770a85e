"""Net shrinking and its random-walk statistics.

A tighter net (radius eps^2) is produced from a radius-eps net either by
triple products plus post-selection (no inverse gates needed) or by
normal commutators T1 T2 T1^-1 T2^-1 (inverse-using baseline).  Products
of net elements behave like steps of an isotropic random walk, which
gives closed-form survivor-rate predictions; the diffusivity report
checks how Haar-like a gate set's moderate-length words actually are.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.special
import scipy.stats

from . import _kernels as kernels
from . import gates as gates_mod
from . import geometry
from .errors import InsufficientDensityError, ValidationError
from .gates import GateSet
from .nets import (DEFAULT_DENSITY_CONSTANT, EpsilonNet, batch_vectors,
                   net_matrices, required_point_count)

DEFAULT_CANDIDATE_BUDGET = 10 ** 8
# Raw post-selection survivors are uniformly subsampled down to this many
# before the cyclic-permutation augmentation; it bounds the memory of the
# augmented pool while leaving far more points than any realistic target.
DEFAULT_SURVIVOR_CAP = 20_000


# ---------------------------------------------------------------------------
# random-walk statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WalkModel:
    """Isotropic M-step walk with step scale eps in d dimensions."""

    d: int
    M: int
    eps: float

    def __post_init__(self):
        if self.d < 1 or self.M < 1 or self.eps <= 0:
            raise ValidationError(f"invalid walk model {self}")


def walk_pdf(r: float, model: WalkModel) -> float:
    """Radial density of the endpoint distance after M steps:
    2 (d / 2M eps^2)^(d/2) r^(d-1) exp(-d r^2 / 2M eps^2) / Gamma(d/2)."""
    r = np.asarray(r, dtype=np.float64)
    a = model.d / (2.0 * model.M * model.eps ** 2)
    out = (2.0 * a ** (model.d / 2.0) * r ** (model.d - 1)
           * np.exp(-a * r * r) / scipy.special.gamma(model.d / 2.0))
    return float(out) if out.ndim == 0 else out


def walk_cdf(r: float, model: WalkModel) -> float:
    """Probability that the walk ends within distance r of the origin
    (regularized lower incomplete gamma of the density above)."""
    r = np.asarray(r, dtype=np.float64)
    a = model.d / (2.0 * model.M * model.eps ** 2)
    out = scipy.special.gammainc(model.d / 2.0, a * r * r)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ApproxCdf:
    """Two labeled closed forms for the probability of landing within
    eps^... of the origin: the quoted power-law expression, and the exact
    small-r integral of the radial density (which is smaller by exactly
    the factor d)."""

    printed: float
    exact_small_r: float


def walk_cdf_approx(eps: float, model: WalkModel) -> ApproxCdf:
    """Small-radius power-law approximations of walk_cdf at radius eps^d
    scale.  `printed` is the quoted form 2 (d/2M)^(d/2) eps^d / Gamma(d/2);
    `exact_small_r` integrates the density with the exponential set to 1
    and is the form to use for planning."""
    if eps >= 1.0 or eps <= 0.0:
        raise ValidationError(f"need 0 < eps < 1, got {eps}")
    base = ((model.d / (2.0 * model.M)) ** (model.d / 2.0)
            * eps ** model.d / scipy.special.gamma(model.d / 2.0))
    return ApproxCdf(printed=2.0 * base, exact_small_r=(2.0 / model.d) * base)


def expected_survivors(K: int, model: WalkModel) -> float:
    """Planning estimate for a shrink step: K^M tuple products times the
    probability of landing within eps^2."""
    if K < 1:
        raise ValidationError(f"need K >= 1, got {K}")
    return K ** model.M * walk_cdf(model.eps ** 2, model)


# ---------------------------------------------------------------------------
# shrinking
# ---------------------------------------------------------------------------

@dataclass
class ShrinkReport:
    method: str
    base_size: int
    candidates: int
    survivors: int
    augmented: int
    final: int
    target: int
    acceptance_fraction: float
    wall_time: float
    estimate_mode: bool = False
    survivors_capped: bool = False

    def to_text(self) -> str:
        pairs = [
            ("method", self.method),
            ("base_size", self.base_size),
            ("candidates", self.candidates),
            ("survivors", self.survivors),
            ("augmented", self.augmented),
            ("final", self.final),
            ("target", self.target),
            ("acceptance_fraction", f"{self.acceptance_fraction:.6e}"),
            # wall_time is kept on the object but not serialized, so that
            # repeated builds produce byte-identical artifacts.
            ("estimate_mode", int(self.estimate_mode)),
            ("survivors_capped", int(self.survivors_capped)),
        ]
        return "\n".join(f"{k} = {v}" for k, v in pairs) + "\n"


def _matching_gateset(net: EpsilonNet, gs: GateSet) -> GateSet:
    """Gate set usable to evaluate net words: gs itself or, for a base
    net lifted into an inverse-augmented alphabet, its front half."""
    if gs.fingerprint() == net.fingerprint:
        return gs
    if gs.includes_inverses:
        base = gates_mod.base_set(gs)
        if base.fingerprint() == net.fingerprint:
            return base
    raise ValidationError("gate set does not match the net's fingerprint")


def _tuple_scan_generic(mats: np.ndarray, M: int, r_max: float,
                        dim: int) -> np.ndarray:
    """Reference scan over all ordered M-tuples (any M >= 2, any dim);
    the numba triple kernel must agree with this for M = 3, dim = 2."""
    K = mats.shape[0]
    pairs = kernels.pair_products_numpy(mats, mats)
    hits = []
    if M == 2:
        dist = np.linalg.norm(batch_vectors(pairs, dim), axis=1)
        for flat in np.nonzero(dist < r_max)[0]:
            hits.append((flat // K, flat % K))
        return np.array(hits, dtype=np.int64).reshape(-1, 2)
    for head in itertools.product(range(K), repeat=M - 2):
        P = mats[head[0]]
        for i in head[1:]:
            P = P @ mats[i]
        prods = np.einsum("ij,njk->nik", P, pairs)
        dist = np.linalg.norm(batch_vectors(prods, dim), axis=1)
        for flat in np.nonzero(dist < r_max)[0]:
            hits.append(head + (flat // K, flat % K))
    return np.array(hits, dtype=np.int64).reshape(-1, M)


def _augment_dedupe_subsample(tuple_mats, tuple_words, gs, net, r_new, target,
                              rng, survivor_cap, max_rotations, report):
    """Shared tail of both shrink paths: cyclic-permutation augmentation,
    word dedup, seeded subsampling down to the target count."""
    n = tuple_words.shape[0]
    report.survivors = n
    report.acceptance_fraction = n / report.candidates if report.candidates else 0.0
    if n > survivor_cap:
        keep = np.sort(rng.choice(n, size=survivor_cap, replace=False))
        tuple_mats = tuple_mats[keep]
        tuple_words = tuple_words[keep]
        report.survivors_capped = True
        n = survivor_cap
    L_new = tuple_words.shape[1]
    n_rot = L_new if max_rotations is None else min(max_rotations, L_new)
    gate_arr = np.array(gs.gates)
    gate_dag = gate_arr.conj().transpose(0, 2, 1)
    # Rotation t+1 of a word's product follows from rotation t by
    # conjugation with the gate being moved to the back.
    all_words = np.empty((n, n_rot, L_new), dtype=np.uint8)
    all_mats = np.empty((n, n_rot, net.dim, net.dim), dtype=np.complex128)
    P = tuple_mats
    cols = np.arange(L_new)
    for t in range(n_rot):
        all_words[:, t] = tuple_words[:, (cols + t) % L_new]
        all_mats[:, t] = P
        if t + 1 < n_rot:
            g = tuple_words[:, t].astype(np.int64)
            P = np.einsum("nij,njk,nkl->nil", gate_dag[g], P, gate_arr[g])
    all_words = all_words.reshape(n * n_rot, L_new)
    all_mats = all_mats.reshape(n * n_rot, net.dim, net.dim)
    uniq_words, first = np.unique(all_words, axis=0, return_index=True)
    uniq_mats = all_mats[first]
    report.augmented = uniq_words.shape[0]
    if uniq_words.shape[0] < target:
        raise InsufficientDensityError(
            f"only {uniq_words.shape[0]} distinct points after augmentation, "
            f"{target} required (short by {target - uniq_words.shape[0]}); "
            "the gate set may not be diffusive enough or the base net too small"
        )
    pick = np.sort(rng.choice(uniq_words.shape[0], size=target, replace=False))
    vectors = batch_vectors(uniq_mats[pick], net.dim)
    report.final = target
    out = EpsilonNet(
        level=net.level + 1,
        radius=r_new,
        resolution=r_new ** 2,
        fingerprint=gs.fingerprint(),
        word_length=L_new,
        dim=net.dim,
        words=uniq_words[pick].copy(),
        vectors=vectors,
    )
    out._matrices = np.ascontiguousarray(uniq_mats[pick])
    return out


def shrink_diffusion(net: EpsilonNet, gs: GateSet, M: int = 3,
                     target: int | None = None, seed: int = 0,
                     candidate_budget: int = DEFAULT_CANDIDATE_BUDGET,
                     survivor_cap: int = DEFAULT_SURVIVOR_CAP,
                     density_constant: float = DEFAULT_DENSITY_CONSTANT,
                     max_rotations: int | None = None):
    """Inverse-free shrink: all ordered M-tuple products of net points,
    post-selected on the exact product matrix lying within radius^2 of
    the identity, augmented with cyclic permutations, deduplicated and
    subsampled to the target density.  Returns (net, report)."""
    if net.level < 0:
        raise ValidationError("shrink needs a level >= 0 net (select a ball first)")
    if M < 2:
        raise ValidationError(f"need M >= 2, got {M}")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    eval_gs = _matching_gateset(net, gs)
    r_new = net.radius ** 2
    base = net
    estimate = False
    if net.size ** M > candidate_budget:
        k_eff = max(2, int(candidate_budget ** (1.0 / M)))
        keep = np.sort(rng.choice(net.size, size=k_eff, replace=False))
        base = EpsilonNet(
            level=net.level, radius=net.radius, resolution=net.resolution,
            fingerprint=net.fingerprint, word_length=net.word_length,
            dim=net.dim, words=net.words[keep], vectors=net.vectors[keep],
        )
        if net._matrices is not None:
            base._matrices = net._matrices[keep]
        estimate = True
    mats = net_matrices(base, eval_gs)
    K = base.size
    if target is None:
        target = required_point_count(r_new, base.space_dim, density_constant)
    if net.dim == 2 and M == 3:
        idx = kernels.triple_scan(np.ascontiguousarray(mats), r_new)
    else:
        idx = _tuple_scan_generic(mats, M, r_new, net.dim)
    tuple_mats = mats[idx[:, 0]]
    for col in range(1, M):
        tuple_mats = np.einsum("nij,njk->nik", tuple_mats, mats[idx[:, col]])
    tuple_words = base.words[idx].reshape(idx.shape[0], M * base.word_length)
    report = ShrinkReport(
        method=f"diffusion-M{M}", base_size=K, candidates=K ** M,
        survivors=0, augmented=0, final=0, target=target,
        acceptance_fraction=0.0, wall_time=0.0, estimate_mode=estimate,
    )
    out = _augment_dedupe_subsample(
        tuple_mats, tuple_words, gs, net, r_new, target, rng,
        survivor_cap, max_rotations, report)
    report.wall_time = time.perf_counter() - t0
    return out, report


def shrink_commutator(net: EpsilonNet, gs: GateSet,
                      target: int | None = None, c_slack: float = 1.0,
                      seed: int = 0,
                      candidate_budget: int = DEFAULT_CANDIDATE_BUDGET,
                      survivor_cap: int = DEFAULT_SURVIVOR_CAP,
                      density_constant: float = DEFAULT_DENSITY_CONSTANT,
                      max_rotations: int | None = None):
    """Inverse-using baseline shrink: normal commutators T1 T2 T1^-1 T2^-1
    of ordered point pairs, post-selected within c_slack * radius^2.  The
    gate set must carry inverses so commutator words are expressible;
    word length quadruples."""
    if net.level < 0:
        raise ValidationError("shrink needs a level >= 0 net (select a ball first)")
    if not gs.includes_inverses:
        raise ValidationError("commutator shrinking needs an inverse-augmented gate set")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    eval_gs = _matching_gateset(net, gs)
    r_new = net.radius ** 2
    r_keep = c_slack * r_new
    base = net
    estimate = False
    if net.size ** 2 > candidate_budget:
        k_eff = max(2, int(math.isqrt(candidate_budget)))
        keep = np.sort(rng.choice(net.size, size=k_eff, replace=False))
        base = EpsilonNet(
            level=net.level, radius=net.radius, resolution=net.resolution,
            fingerprint=net.fingerprint, word_length=net.word_length,
            dim=net.dim, words=net.words[keep], vectors=net.vectors[keep],
        )
        if net._matrices is not None:
            base._matrices = net._matrices[keep]
        estimate = True
    mats = net_matrices(base, eval_gs)
    K = base.size
    if target is None:
        target = required_point_count(r_new, base.space_dim, density_constant)
    if net.dim == 2:
        idx = kernels.commutator_scan(np.ascontiguousarray(mats), r_keep)
    else:
        dag = mats.conj().transpose(0, 2, 1)
        hits = []
        for i in range(K):
            prods = np.einsum("ij,njk,kl,nlm->nim", mats[i], mats, dag[i], dag)
            dist = np.linalg.norm(batch_vectors(prods, net.dim), axis=1)
            hits.extend((i, j) for j in np.nonzero(dist < r_keep)[0])
        idx = np.array(hits, dtype=np.int64).reshape(-1, 2)
    dag = mats.conj().transpose(0, 2, 1)
    tuple_mats = np.einsum("nij,njk->nik", mats[idx[:, 0]], mats[idx[:, 1]])
    tuple_mats = np.einsum("nij,njk->nik", tuple_mats, dag[idx[:, 0]])
    tuple_mats = np.einsum("nij,njk->nik", tuple_mats, dag[idx[:, 1]])
    m_half = gs.size // 2
    inv_words = ((base.words[:, ::-1].astype(np.int64) + m_half)
                 % gs.size).astype(np.uint8)
    tuple_words = np.concatenate(
        [base.words[idx[:, 0]], base.words[idx[:, 1]],
         inv_words[idx[:, 0]], inv_words[idx[:, 1]]], axis=1)
    report = ShrinkReport(
        method="commutator", base_size=K, candidates=K ** 2,
        survivors=0, augmented=0, final=0, target=target,
        acceptance_fraction=0.0, wall_time=0.0, estimate_mode=estimate,
    )
    out = _augment_dedupe_subsample(
        tuple_mats, tuple_words, gs, net, r_new, target, rng,
        survivor_cap, max_rotations, report)
    report.wall_time = time.perf_counter() - t0
    return out, report


# ---------------------------------------------------------------------------
# pre-selection vs post-selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PreselectionStats:
    """How well the vector-sum shortcut predicts the exact post-selection
    outcome on random tuples of net points."""

    samples: int
    pre_only: int
    post_only: int
    both: int
    false_positive_rate: float  # pre-selected tuples failing post-selection
    false_negative_rate: float  # post-selected tuples missed by pre-selection
    symmetric_rate: float  # |pre xor post| / |pre or post|
    disagreement_rate: float  # max of the two directional rates
    max_growth: float  # max over pre-selected tuples of (D - eps^2) / eps^3


def preselection_stats(net: EpsilonNet, gs: GateSet, M: int = 3,
                       samples: int = 200_000, seed: int = 0) -> PreselectionStats:
    """Sample random ordered M-tuples and compare the vector-sum predicate
    |sum r_j| < radius^2 with the exact product predicate D < radius^2."""
    rng = np.random.default_rng(seed)
    eval_gs = _matching_gateset(net, gs)
    mats = net_matrices(net, eval_gs)
    idx = rng.integers(0, net.size, size=(samples, M))
    vec_sum = net.vectors[idx].sum(axis=1)
    pre = np.linalg.norm(vec_sum, axis=1) < net.radius ** 2
    prod = mats[idx[:, 0]]
    for col in range(1, M):
        prod = np.einsum("nij,njk->nik", prod, mats[idx[:, col]])
    dist = np.linalg.norm(batch_vectors(prod, net.dim), axis=1)
    post = dist < net.radius ** 2
    union = int(np.count_nonzero(pre | post))
    xor = int(np.count_nonzero(pre ^ post))
    pre_only = int(np.count_nonzero(pre & ~post))
    post_only = int(np.count_nonzero(post & ~pre))
    both = int(np.count_nonzero(pre & post))
    n_pre = pre_only + both
    n_post = post_only + both
    fpr = pre_only / n_pre if n_pre else 0.0
    fnr = post_only / n_post if n_post else 0.0
    growth = 0.0
    if pre.any():
        growth = float((dist[pre] - net.radius ** 2).max() / net.radius ** 3)
    return PreselectionStats(
        samples=samples,
        pre_only=pre_only,
        post_only=post_only,
        both=both,
        false_positive_rate=fpr,
        false_negative_rate=fnr,
        symmetric_rate=xor / union if union else 0.0,
        disagreement_rate=max(fpr, fnr),
        max_growth=growth,
    )


# ---------------------------------------------------------------------------
# diffusivity diagnostics
# ---------------------------------------------------------------------------

def haar_radial_cdf(theta: np.ndarray) -> np.ndarray:
    """CDF of the folded qubit rotation angle theta = sqrt(2) |r| under
    the Haar measure: (theta - sin theta) / pi on [0, pi]."""
    theta = np.clip(theta, 0.0, np.pi)
    return (theta - np.sin(theta)) / np.pi


@dataclass
class DiffusivityReport:
    gate_set: str
    word_length: int
    sample: int
    ks_stat: float
    dot_mean: float
    dot_var: float
    radial_score: float
    angular_score: float
    score: float
    points: np.ndarray

    def to_text(self) -> str:
        pairs = [
            ("gate_set", self.gate_set),
            ("word_length", self.word_length),
            ("sample", self.sample),
            ("ks_stat", f"{self.ks_stat:.6f}"),
            ("dot_mean", f"{self.dot_mean:.6f}"),
            ("dot_var", f"{self.dot_var:.6f}"),
            ("radial_score", f"{self.radial_score:.6f}"),
            ("angular_score", f"{self.angular_score:.6f}"),
            ("score", f"{self.score:.6f}"),
        ]
        return "\n".join(f"{k} = {v}" for k, v in pairs) + "\n"


def diffusivity_score_from_stats(ks_stat: float, dot_mean: float,
                                 dot_var: float, d: int) -> tuple:
    """Combine radial and angular uniformity into a score in [0, 1].

    Radial part decays exponentially in the KS statistic against the
    Haar radial law; angular part decays in the deviation of the pairwise
    unit-dot moments from the isotropic values (mean 0, variance 1/d).
    The score is the product, so either failure mode drives it to 0.
    """
    radial = math.exp(-10.0 * ks_stat)
    angular = math.exp(-3.0 * (abs(dot_mean) + abs(dot_var * d - 1.0)))
    return radial, angular, radial * angular


def diffusivity_report(gs: GateSet, L: int = 17, sample: int = 131072,
                       seed: int = 0) -> DiffusivityReport:
    """How uniformly (Haar-like) words of length L cover the group.

    Evaluates `sample` words (all of them when the alphabet allows),
    maps them to rotation vectors and scores radial uniformity (KS
    against the Haar radial law) and angular isotropy (pairwise
    unit-vector dot moments).  The raw point cloud is kept for export.
    """
    rng = np.random.default_rng(seed)
    total = gs.size ** L
    if total <= sample:
        words = None
        from .nets import _enumerate_products
        mats = _enumerate_products(gs, L)
    else:
        if total <= 2 ** 24:
            ks = np.sort(rng.choice(total, size=sample, replace=False))
            words = np.empty((sample, L), dtype=np.uint8)
            kk = ks.copy()
            for pos in range(L - 1, -1, -1):
                words[:, pos] = kk % gs.size
                kk //= gs.size
        else:
            words = rng.integers(0, gs.size, size=(sample, L)).astype(np.uint8)
        G = np.array(gs.gates)
        mats = G[words[:, 0].astype(np.int64)]
        for t in range(1, L):
            mats = np.einsum("nij,njk->nik", mats, G[words[:, t].astype(np.int64)])
    vectors = batch_vectors(np.ascontiguousarray(mats), gs.dim)
    radii = np.linalg.norm(vectors, axis=1)
    d = vectors.shape[1]
    if gs.dim != 2:
        raise ValidationError("diffusivity diagnostics are implemented for qubits")
    theta = np.sqrt(2.0) * radii
    ks_stat = float(scipy.stats.kstest(theta, haar_radial_cdf).statistic)
    nz = radii > 1e-12
    units = vectors[nz] / radii[nz, None]
    n_pairs = min(200_000, units.shape[0] * (units.shape[0] - 1) // 2)
    i = rng.integers(0, units.shape[0], size=n_pairs)
    j = rng.integers(0, units.shape[0], size=n_pairs)
    ok = i != j
    dots = np.einsum("ni,ni->n", units[i[ok]], units[j[ok]])
    dot_mean = float(dots.mean())
    dot_var = float(dots.var())
    radial, angular, score = diffusivity_score_from_stats(
        ks_stat, dot_mean, dot_var, d)
    return DiffusivityReport(
        gate_set=gs.label, word_length=L, sample=int(mats.shape[0]),
        ks_stat=ks_stat, dot_mean=dot_mean, dot_var=dot_var,
        radial_score=radial, angular_score=angular, score=score,
        points=vectors,
    )


def export_cloud(path, points: np.ndarray) -> None:
    """CSV point cloud, one rotation vector per line, 17 significant
    digits, for external plotting."""
    with open(path, "w") as fh:
        for row in points:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")
