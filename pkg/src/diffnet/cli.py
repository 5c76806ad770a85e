"""Command-line interface.

Subcommands: build (sampling net + ball + shrink levels, persisted to a
stack directory), compile (approximate a target against a stack),
benchmark (phase-rotation gates for both shrink methods and several
sampling lengths), diagnose (diffusivity report + point cloud CSV) and
net-info (net file headers).

Exit codes: 0 success, 2 validation error, 3 insufficient density,
4 I/O or file-format error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import compiler as compiler_mod
from . import gates as gates_mod
from . import geometry, nets, shrink
from ._kernels import backend_name
from .errors import InsufficientDensityError, NetFormatError, ValidationError


@dataclass
class RunConfig:
    seed: int = 0
    gate_set: str = "builtin"  # builtin | bare | random | file
    gate_file: str = ""
    gate_seed: int = 0
    length: int = 16
    eps_s: float = 0.3
    method: str = "diffusion"
    steps: int = 3  # tuple size M for diffusion
    levels: int = 1
    density_constant: float = 8.0
    cap: int = nets.DEFAULT_ENUMERATION_CAP
    budget: int = shrink.DEFAULT_CANDIDATE_BUDGET
    survivor_cap: int = shrink.DEFAULT_SURVIVOR_CAP
    max_rotations: int = 0  # 0 = all rotations
    sample: int = 131072
    threads: int = 0
    out: str = "."


_INT_FIELDS = {f.name for f in fields(RunConfig) if f.type in ("int",)}
_FLOAT_FIELDS = {f.name for f in fields(RunConfig) if f.type in ("float",)}


def apply_config_file(cfg: RunConfig, path: str) -> RunConfig:
    """Flat key=value overrides; unknown keys are rejected."""
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = line.partition("=")
        key = key.strip().replace("-", "_")
        val = val.strip()
        if not hasattr(cfg, key):
            raise ValidationError(f"{path}: unknown config key {key!r}")
        if key in _INT_FIELDS:
            setattr(cfg, key, int(val))
        elif key in _FLOAT_FIELDS:
            setattr(cfg, key, float(val))
        else:
            setattr(cfg, key, val)
    return cfg


def make_gate_set(cfg: RunConfig) -> gates_mod.GateSet:
    if cfg.gate_set == "builtin":
        return gates_mod.make_diffusive_qubit_set()
    if cfg.gate_set == "bare":
        return gates_mod.make_diffusive_qubit_set(F=np.eye(2))
    if cfg.gate_set == "random":
        return gates_mod.make_diffusive_qubit_set(seed=cfg.gate_seed)
    if cfg.gate_set == "file":
        if not cfg.gate_file:
            raise ValidationError("gate_set=file requires --gate-file")
        return gates_mod.load_gateset(cfg.gate_file)
    raise ValidationError(f"unknown gate-set source {cfg.gate_set!r}")


def parse_target(spec: str) -> np.ndarray:
    """Builtin phase gate R{2^m} (diag(1, exp(i pi / 2^m))) or a text file
    with one matrix row per line, 're im' pairs."""
    if spec.upper().startswith("R") and spec[1:].isdigit():
        denom = int(spec[1:])
        if denom < 2 or denom & (denom - 1):
            raise ValidationError(f"phase-gate name must be R<power of two>: {spec}")
        return np.diag([1.0, np.exp(1j * np.pi / denom)]).astype(np.complex128)
    try:
        lines = Path(spec).read_text().strip().splitlines()
        rows = []
        for ln in lines:
            vals = [float(x) for x in ln.replace(",", " ").split()]
            if len(vals) % 2:
                raise ValueError("odd number of floats in a matrix row")
            rows.append([complex(vals[2 * i], vals[2 * i + 1])
                         for i in range(len(vals) // 2)])
        target = np.array(rows, dtype=np.complex128)
    except OSError:
        raise
    except Exception as exc:
        raise ValidationError(f"cannot parse target {spec!r}: {exc}") from exc
    return geometry.check_unitary(target)


def phase_gate(m: int) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * np.pi / 2 ** m)]).astype(np.complex128)


# ---------------------------------------------------------------------------
# build
# ---------------------------------------------------------------------------

def build_stack(cfg: RunConfig, out_dir: Path, echo=print):
    """Build and persist one stack: gate set, sampling net, ball, and
    the configured number of shrink levels."""
    out_dir.mkdir(parents=True, exist_ok=True)
    base_gs = make_gate_set(cfg)
    if cfg.method == "commutator":
        gs = gates_mod.augment_with_inverses(base_gs)
    elif cfg.method == "diffusion":
        gs = base_gs
    else:
        raise ValidationError(f"unknown shrink method {cfg.method!r}")
    gates_mod.save_gateset(gs, out_dir / "gateset.txt")
    sampling = nets.build_sampling_net(base_gs, cfg.length, cap=cfg.cap)
    nets.save_net(sampling, out_dir / "sampling.net")
    echo(f"sampling net: {sampling.size} words of length {cfg.length} "
         f"(resolution estimate {sampling.resolution:.4f})")
    ball = nets.select_ball(sampling, cfg.eps_s)
    nets.save_net(ball, out_dir / "ball.net")
    echo(f"ball of radius {cfg.eps_s}: {ball.size} points")
    current = ball
    reports = []
    max_rot = cfg.max_rotations or None
    for lvl in range(1, cfg.levels + 1):
        model = shrink.WalkModel(d=current.space_dim, M=cfg.steps,
                                 eps=current.radius)
        predicted = shrink.walk_cdf(current.radius ** 2, model)
        if cfg.method == "diffusion":
            current, report = shrink.shrink_diffusion(
                current, gs, M=cfg.steps, seed=cfg.seed,
                candidate_budget=cfg.budget, survivor_cap=cfg.survivor_cap,
                density_constant=cfg.density_constant, max_rotations=max_rot)
        else:
            current, report = shrink.shrink_commutator(
                current, gs, seed=cfg.seed,
                candidate_budget=cfg.budget, survivor_cap=cfg.survivor_cap,
                density_constant=cfg.density_constant, max_rotations=max_rot)
        nets.save_net(current, out_dir / f"level{lvl}.net")
        (out_dir / f"shrink_level{lvl}.txt").write_text(report.to_text())
        reports.append(report)
        echo(f"level {lvl}: radius {current.radius:.6g}, {current.size} points, "
             f"word length {current.word_length}")
        echo(f"  candidates {report.candidates}, survivors {report.survivors} "
             f"(fraction {report.acceptance_fraction:.3e}, "
             f"walk model predicts {predicted:.3e})")
    return gs, reports


def load_stack(stack_dir) -> compiler_mod.NetStack:
    stack_dir = Path(stack_dir)
    gs = gates_mod.load_gateset(stack_dir / "gateset.txt")
    allowed = {gs.fingerprint()}
    if gs.includes_inverses:
        allowed.add(gates_mod.base_set(gs).fingerprint())
    def _load(path):
        net = nets.load_net(path)
        if net.fingerprint not in allowed:
            raise ValidationError(
                f"{path}: net fingerprint does not match the stack's gate set")
        return net
    sampling = _load(stack_dir / "sampling.net")
    levels = []
    for path in sorted(stack_dir.glob("level*.net"),
                       key=lambda p: int(p.stem[5:])):
        levels.append(_load(path))
    return compiler_mod.NetStack(gate_set=gs, sampling=sampling, levels=levels)


def cmd_build(cfg: RunConfig) -> int:
    build_stack(cfg, Path(cfg.out))
    print(f"stack written to {cfg.out} (kernel backend: {backend_name()})")
    return 0


def cmd_compile(cfg: RunConfig, stack_dir: str, target_spec: str) -> int:
    stack = load_stack(stack_dir)
    target = parse_target(target_spec)
    result = compiler_mod.compile_unitary(target, stack)
    text = compiler_mod.result_to_text(result, target, stack.gate_set)
    print(text, end="")
    out_dir = Path(cfg.out)
    if out_dir != Path("."):
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "compile_report.txt").write_text(text)
    return 0


def cmd_benchmark(cfg: RunConfig, lengths, methods) -> int:
    """Compile the seven phase gates R_{2^m}, m = 1..7, for each method
    and sampling length; emits benchmark.csv in the output directory."""
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = ["method,r,m,length,D,dF"]
    for method in methods:
        for r in lengths:
            sub = dataclass_replace(cfg, method=method, length=r,
                                    out=str(out_dir / f"{method}-r{r}"))
            stack_dir = Path(sub.out)
            if not (stack_dir / "sampling.net").exists():
                build_stack(sub, stack_dir)
            stack = load_stack(stack_dir)
            for m in range(1, 8):
                res = compiler_mod.compile_unitary(phase_gate(m), stack)
                rows.append(f"{method},{r},{m},{res.length},"
                            f"{res.final_d:.10e},{res.final_df:.10e}")
                print(rows[-1])
    (out_dir / "benchmark.csv").write_text("\n".join(rows) + "\n")
    print(f"wrote {out_dir / 'benchmark.csv'}")
    return 0


def cmd_diagnose(cfg: RunConfig) -> int:
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    gs = make_gate_set(cfg)
    report = shrink.diffusivity_report(gs, L=cfg.length, sample=cfg.sample,
                                       seed=cfg.seed)
    print(report.to_text(), end="")
    (out_dir / "diagnose.txt").write_text(report.to_text())
    shrink.export_cloud(out_dir / "cloud.csv", report.points)
    print(f"wrote {out_dir / 'cloud.csv'} ({report.points.shape[0]} rows)")
    return 0


def cmd_net_info(paths) -> int:
    for path in paths:
        hdr = nets.read_net_header(path)
        print(path)
        for key, val in hdr.items():
            print(f"  {key} = {val}")
    return 0


def dataclass_replace(cfg: RunConfig, **kw) -> RunConfig:
    import dataclasses
    return dataclasses.replace(cfg, **kw)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value file overriding the flags")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gate-set", default="builtin",
                   choices=["builtin", "bare", "random", "file"])
    p.add_argument("--gate-file", default="")
    p.add_argument("--gate-seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.add_argument("--threads", type=int, default=0,
                   help="worker cap (results are independent of it)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="diffnet",
        description="Gate-sequence compiler built on diffusive epsilon-nets")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build and persist a net stack")
    _add_common(p)
    p.add_argument("-L", "--length", type=int, default=16)
    p.add_argument("--eps-s", type=float, default=0.3)
    p.add_argument("--method", default="diffusion",
                   choices=["diffusion", "commutator"])
    p.add_argument("-M", "--steps", type=int, default=3)
    p.add_argument("--levels", type=int, default=1)
    p.add_argument("--density-constant", type=float, default=8.0)
    p.add_argument("--cap", type=int, default=nets.DEFAULT_ENUMERATION_CAP)
    p.add_argument("--budget", type=int, default=shrink.DEFAULT_CANDIDATE_BUDGET)
    p.add_argument("--survivor-cap", type=int, default=shrink.DEFAULT_SURVIVOR_CAP)
    p.add_argument("--max-rotations", type=int, default=0)

    p = sub.add_parser("compile", help="approximate a target with a stack")
    _add_common(p)
    p.add_argument("--stack", required=True)
    p.add_argument("--target", required=True,
                   help="builtin name R<2^m> or a matrix file")

    p = sub.add_parser("benchmark",
                       help="phase-gate accuracy table for both methods")
    _add_common(p)
    p.add_argument("--lengths", default="16,17,18")
    p.add_argument("--methods", default="diffusion,commutator")
    p.add_argument("--eps-s", type=float, default=0.3)
    p.add_argument("-M", "--steps", type=int, default=3)
    p.add_argument("--levels", type=int, default=1)
    p.add_argument("--density-constant", type=float, default=8.0)
    p.add_argument("--cap", type=int, default=nets.DEFAULT_ENUMERATION_CAP)
    p.add_argument("--budget", type=int, default=shrink.DEFAULT_CANDIDATE_BUDGET)
    p.add_argument("--survivor-cap", type=int, default=shrink.DEFAULT_SURVIVOR_CAP)
    p.add_argument("--max-rotations", type=int, default=0)

    p = sub.add_parser("diagnose", help="diffusivity report + point cloud")
    _add_common(p)
    p.add_argument("-L", "--length", type=int, default=17)
    p.add_argument("--sample", type=int, default=131072)

    p = sub.add_parser("net-info", help="print net file headers")
    p.add_argument("paths", nargs="+")
    return ap


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig()
    for f in fields(RunConfig):
        if hasattr(args, f.name):
            setattr(cfg, f.name, getattr(args, f.name))
    if getattr(args, "config", None):
        apply_config_file(cfg, args.config)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "net-info":
            return cmd_net_info(args.paths)
        cfg = _config_from_args(args)
        if args.command == "build":
            return cmd_build(cfg)
        if args.command == "compile":
            return cmd_compile(cfg, args.stack, args.target)
        if args.command == "benchmark":
            lengths = [int(x) for x in str(args.lengths).split(",") if x]
            methods = [x.strip() for x in args.methods.split(",") if x.strip()]
            for m in methods:
                if m not in ("diffusion", "commutator"):
                    raise ValidationError(f"unknown method {m!r}")
            return cmd_benchmark(cfg, lengths, methods)
        if args.command == "diagnose":
            return cmd_diagnose(cfg)
        raise ValidationError(f"unknown command {args.command!r}")
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InsufficientDensityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (NetFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
