"""Shared fixtures: the reference gate set, the length-16 sampling net,
the 0.3-ball and one shrink level per method, built once per session.

Acceptance tests append one line per criterion to `acceptance_log`;
the lines are echoed in the terminal summary so they are visible even
with output capture on.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from diffnet import cli, compiler, gates, nets, shrink

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


@pytest.fixture(scope="session")
def base_gs():
    return gates.make_diffusive_qubit_set()


@pytest.fixture(scope="session")
def aug_gs(base_gs):
    return gates.augment_with_inverses(base_gs)


@pytest.fixture(scope="session")
def sampling16(base_gs):
    t0 = time.perf_counter()
    net = nets.build_sampling_net(base_gs, 16)
    net.build_seconds = time.perf_counter() - t0
    return net


@pytest.fixture(scope="session")
def ball03(sampling16):
    return nets.select_ball(sampling16, 0.3)


@pytest.fixture(scope="session")
def diffusion_level(ball03, base_gs):
    t0 = time.perf_counter()
    net, report = shrink.shrink_diffusion(ball03, base_gs, seed=0)
    net.build_seconds = time.perf_counter() - t0
    return net, report


@pytest.fixture(scope="session")
def commutator_level(ball03, aug_gs):
    net, report = shrink.shrink_commutator(ball03, aug_gs, seed=0)
    return net, report


@pytest.fixture(scope="session")
def diffusion_stack(base_gs, sampling16, diffusion_level):
    return compiler.NetStack(gate_set=base_gs, sampling=sampling16,
                             levels=[diffusion_level[0]])


@pytest.fixture(scope="session")
def commutator_stack(aug_gs, sampling16, commutator_level):
    return compiler.NetStack(gate_set=aug_gs, sampling=sampling16,
                             levels=[commutator_level[0]])


SMALL = dict(length=12, eps_s=0.4)


@pytest.fixture(scope="session")
def small_stack_dir(tmp_path_factory):
    """A fast, fully persisted diffusion stack for CLI and I/O tests."""
    out = tmp_path_factory.mktemp("small-stack")
    cfg = cli.RunConfig(out=str(out), **SMALL)
    cli.build_stack(cfg, Path(cfg.out), echo=lambda *a: None)
    return out
