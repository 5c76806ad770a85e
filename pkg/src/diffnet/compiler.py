"""Recursive approximation of a target unitary against a stack of nets.

Stage 0 looks the target up in the exhaustive sampling net; every later
stage looks the remaining correction V = (product so far)^dag . target up
in the next shrunk net and appends that word on the right.  Numerical
inverses are conjugate transposes throughout; no inverse *gate* is ever
required of the gate set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import gates as gates_mod
from . import geometry
from .errors import ValidationError
from .gates import GateSet
from .nets import EpsilonNet, nearest_point


@dataclass
class NetStack:
    """Gate set, sampling net and the ordered shrunk nets used for the
    per-stage corrections.  Correction-net radii strictly decrease and
    successive radii satisfy radius_{i+1} = radius_i^2."""

    gate_set: GateSet
    sampling: EpsilonNet
    levels: list

    def __post_init__(self):
        fp = self.gate_set.fingerprint()
        base_fp = None
        if self.gate_set.includes_inverses:
            base_fp = gates_mod.base_set(self.gate_set).fingerprint()
        for net in [self.sampling] + list(self.levels):
            if net.fingerprint not in (fp, base_fp):
                raise ValidationError(
                    "net stack mixes nets from different gate sets")
        radii = [net.radius for net in self.levels]
        if any(b >= a for a, b in zip(radii, radii[1:])):
            raise ValidationError("correction-net radii must strictly decrease")
        for a, b in zip(radii, radii[1:]):
            if not math.isclose(b, a * a, rel_tol=1e-12):
                raise ValidationError(
                    f"adjacent net radii must square down: {a} -> {b}")


@dataclass
class CompilationResult:
    word: np.ndarray
    stage_words: list
    stage_word_integers: list
    residuals_d: list  # D after stage 0, 1, ...
    residuals_df: list
    final_d: float
    final_df: float
    stage0_missed: bool  # best sampling point was outside the first radius
    conformant: bool  # final D < (last net radius)^2

    @property
    def length(self) -> int:
        return int(self.word.shape[0])


def predicted_length(r: int, eps0: float, eps_n: float, M: int) -> float:
    """Closed-form total length of the recursive procedure:
    r * (log(1/eps_n) / log(1/eps0))^(log M / log 2)."""
    if r < 1 or M < 2:
        raise ValidationError(f"need r >= 1 and M >= 2, got r={r}, M={M}")
    if not 0.0 < eps_n <= eps0 < 1.0:
        raise ValidationError(f"need 0 < eps_n <= eps0 < 1, got {eps0}, {eps_n}")
    return r * (math.log(1.0 / eps_n) / math.log(1.0 / eps0)) ** (
        math.log(M) / math.log(2.0))


def residual(target: np.ndarray, w, gs: GateSet):
    """(D, d_F) between a target and the matrix of a word."""
    U = gates_mod.evaluate_word(gs, w)
    return geometry.distance_d(target, U), geometry.distance_df(target, U)


def compile_unitary(target: np.ndarray, stack: NetStack) -> CompilationResult:
    """Approximate the target by a gate word using the net stack.

    When every stage succeeds the final distance is below the square of
    the last net's radius.  A stage that cannot improve the residual
    stops the recursion and flags the result instead of aborting; stage-0
    misses (no sampling point within the first correction radius) are
    flagged the same way, as accuracy over the group is not uniform.
    """
    gs = stack.gate_set
    target = geometry.check_unitary(target)
    if target.shape[0] != gs.dim:
        raise ValidationError(
            f"target dimension {target.shape[0]} != gate dimension {gs.dim}")
    pt, dist = nearest_point(stack.sampling, target, gs)
    product = gates_mod.evaluate_word(gs, pt.word)
    word = pt.word.astype(np.uint8)
    stage_words = [pt.word.copy()]
    stage_ints = [gates_mod.word_to_integer(pt.word, gs.size)]
    res_d = [dist]
    res_df = [geometry.distance_df(target, product)]
    stage0_missed = bool(stack.levels) and dist >= stack.levels[0].radius
    for net in stack.levels:
        V = product.conj().T @ target
        pt, _ = nearest_point(net, V, gs)
        correction = gates_mod.evaluate_word(gs, pt.word)
        new_product = geometry.project_unitary(product @ correction)
        new_d = geometry.distance_d(target, new_product)
        if new_d >= res_d[-1]:
            break
        product = new_product
        word = np.concatenate([word, pt.word.astype(np.uint8)])
        stage_words.append(pt.word.copy())
        stage_ints.append(gates_mod.word_to_integer(pt.word, gs.size))
        res_d.append(new_d)
        res_df.append(geometry.distance_df(target, product))
    final_bound = stack.levels[-1].radius ** 2 if stack.levels else float("inf")
    return CompilationResult(
        word=word,
        stage_words=stage_words,
        stage_word_integers=stage_ints,
        residuals_d=res_d,
        residuals_df=res_df,
        final_d=res_d[-1],
        final_df=res_df[-1],
        stage0_missed=stage0_missed,
        conformant=res_d[-1] < final_bound,
    )


def result_to_text(result: CompilationResult, target: np.ndarray,
                   gs: GateSet) -> str:
    """Plain-text report: target matrix, per-stage table, final word."""
    lines = ["target:"]
    for row in np.asarray(target):
        lines.append("  " + "  ".join(f"{z.real:+.10f}{z.imag:+.10f}j" for z in row))
    lines.append("stage  word_integer  residual_D     residual_dF")
    for i, (k, d, f) in enumerate(zip(result.stage_word_integers,
                                      result.residuals_d, result.residuals_df)):
        lines.append(f"{i:5d}  {k:12d}  {d:.6e}  {f:.6e}")
    lines.append(f"final_D = {result.final_d:.6e}")
    lines.append(f"final_dF = {result.final_df:.6e}")
    lines.append(f"length = {result.length}")
    lines.append(f"stage0_missed = {int(result.stage0_missed)}")
    lines.append(f"conformant = {int(result.conformant)}")
    lines.append("word = " + gates_mod.word_labels(gs, result.word))
    return "\n".join(lines) + "\n"
