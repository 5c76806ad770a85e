"""Net construction, density accounting, search and persistence."""

import numpy as np
import pytest

from diffnet import gates as gm
from diffnet import geometry as G
from diffnet import nets
from diffnet.errors import (EmptyNetError, FingerprintMismatchError,
                            NetFormatError, ValidationError)


def test_sampling_radius_values():
    assert nets.sampling_radius(2 ** 16) == pytest.approx(0.05228, abs=5e-6)
    assert nets.sampling_radius(4096) == pytest.approx(0.13174, abs=5e-6)
    with pytest.raises(ValidationError):
        nets.sampling_radius(0)


def test_required_point_count():
    assert nets.required_point_count(0.09, 3, 8) == 10974
    assert nets.required_point_count(0.3, 8, 8) == 121933
    with pytest.raises(ValidationError):
        nets.required_point_count(1.5, 3)


def test_small_net_enumeration_order(base_gs):
    net = nets.build_sampling_net(base_gs, 5)
    assert net.size == 32 and net.level == -1
    assert net.radius == float("inf")
    # words are exactly the integers 0..31 in order, first index leftmost
    for k in range(32):
        assert gm.word_to_integer(net.words[k], 2) == k
        U = gm.evaluate_word(base_gs, net.words[k])
        assert np.abs(G.unitary_to_vector(U) - net.vectors[k]).max() < 1e-10


def test_enumeration_cap(base_gs):
    with pytest.raises(ValidationError):
        nets.build_sampling_net(base_gs, 16, cap=1000)


def test_sampling_net_16(sampling16):
    assert sampling16.size == 2 ** 16
    assert sampling16.word_length == 16
    assert sampling16.resolution == pytest.approx(0.05228, abs=5e-6)


def test_select_ball(sampling16):
    ball = nets.select_ball(sampling16, 0.3)
    assert ball.level == 0
    assert ball.radius == 0.3 and ball.resolution == pytest.approx(0.09)
    assert ball.radii.max() < 0.3
    assert ball.size == np.count_nonzero(sampling16.radii < 0.3)
    # idempotent
    again = nets.select_ball(ball, 0.3)
    assert again.equals(ball)
    with pytest.raises(EmptyNetError):
        nets.select_ball(sampling16, 1e-9)


def test_nearest_point(sampling16, base_gs):
    # the nearest point to a net member is that member, at distance ~0
    U = gm.evaluate_word(base_gs, sampling16.words[12345])
    pt, dist = nets.nearest_point(sampling16, U, base_gs)
    assert pt.index == 12345
    assert dist < 1e-6  # arccos near 1 has sqrt(machine-eps) precision
    # a Haar target is matched within a few times the resolution
    target = G.sample_haar_unitary(2, 1)
    pt, dist = nets.nearest_point(sampling16, target, base_gs)
    assert dist < 5 * sampling16.resolution
    assert G.distance_d(target, gm.evaluate_word(base_gs, pt.word)) == \
        pytest.approx(dist, abs=1e-10)


def test_net_matrices_requires_matching_gate_set(base_gs):
    net = nets.build_sampling_net(base_gs, 4)
    fresh = nets.EpsilonNet(
        level=net.level, radius=net.radius, resolution=net.resolution,
        fingerprint=net.fingerprint, word_length=net.word_length,
        dim=net.dim, words=net.words, vectors=net.vectors)
    other = gm.make_diffusive_qubit_set(seed=9)
    with pytest.raises(FingerprintMismatchError):
        nets.net_matrices(fresh, other)


def test_save_load_round_trip(tmp_path, base_gs):
    net = nets.select_ball(nets.build_sampling_net(base_gs, 10), 0.5)
    path = tmp_path / "ball.net"
    nets.save_net(net, path)
    back = nets.load_net(path, base_gs)
    assert back.equals(net)
    hdr = nets.read_net_header(path)
    assert hdr["count"] == net.size
    assert hdr["fingerprint"] == base_gs.fingerprint()
    assert hdr["word_length"] == 10
    # save -> load -> save is byte-identical
    path2 = tmp_path / "again.net"
    nets.save_net(back, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_load_rejects_tampered_file(tmp_path, base_gs):
    net = nets.build_sampling_net(base_gs, 6)
    path = tmp_path / "net.net"
    nets.save_net(net, path)
    blob = bytearray(path.read_bytes())
    blob[len(blob) // 2] ^= 0xFF
    path.write_bytes(bytes(blob))
    with pytest.raises(NetFormatError):
        nets.load_net(path)


def test_load_rejects_truncation_and_garbage(tmp_path, base_gs):
    net = nets.build_sampling_net(base_gs, 6)
    path = tmp_path / "net.net"
    nets.save_net(net, path)
    path.write_bytes(path.read_bytes()[:40])
    with pytest.raises(NetFormatError):
        nets.load_net(path)
    path.write_bytes(b"JUNK" + b"\x00" * 100)
    with pytest.raises(NetFormatError):
        nets.read_net_header(path)


def test_load_rejects_wrong_gate_set(tmp_path, base_gs):
    net = nets.build_sampling_net(base_gs, 6)
    path = tmp_path / "net.net"
    nets.save_net(net, path)
    other = gm.make_diffusive_qubit_set(seed=3)
    with pytest.raises(FingerprintMismatchError):
        nets.load_net(path, other)
