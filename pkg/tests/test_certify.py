import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_state
from lruc.certify import (
    COVERING_CERTIFIED,
    FAIL,
    PASS,
    STATISTICAL_ONLY,
    CertificationSpec,
    adversarial_sup_estimate,
    ascent_path,
    certify_over_net,
    local_deficits,
    net_deficits,
    randomizing_deficit,
)
from lruc.channel import (
    apply_conjugate,
    identity_channel,
    output_on_pure,
    outputs_on_states,
    pauli_channel,
    sample_uniform_ruc,
)
from lruc.errors import DomainError
from lruc.linalg import operator_norm
from lruc.randgen import SeededStream, derive_stream
from lruc.spheregeo import COVERING_NET, EpsilonNet, build_covering_net, build_net_probabilistic


def _bloch_grid(n):
    th = np.linspace(0, np.pi, n)
    ph = np.linspace(0, 2 * np.pi, 2 * n, endpoint=False)
    t, p = np.meshgrid(th, ph)
    return np.stack([np.cos(t / 2).ravel(), (np.exp(1j * p) * np.sin(t / 2)).ravel()], axis=1)


def test_spec_validation():
    with pytest.raises(DomainError):
        CertificationSpec(0.6)
    with pytest.raises(DomainError):
        CertificationSpec(0.5, net_kind="other")


def test_local_deficits_match_direct_norms(rng, stream):
    ch = sample_uniform_ruc(3, 4, stream)
    phi = random_state(rng, 3)
    fwd, conj = local_deficits(ch, phi)
    assert fwd == pytest.approx(operator_norm(output_on_pure(ch, phi)) - 1 / 3, abs=1e-12)
    assert conj == pytest.approx(operator_norm(apply_conjugate(ch, phi)) - 1 / 4, abs=1e-12)
    assert randomizing_deficit(ch, phi) == pytest.approx(fwd)


def test_net_deficits_both_routes(rng, stream):
    ch = sample_uniform_ruc(3, 5, stream)
    pts = np.array([random_state(rng, 3) for _ in range(20)])
    fwd, conj = net_deficits(ch, pts)
    fwd2, conj2 = net_deficits(ch, pts, gram_limit=0)
    np.testing.assert_allclose(fwd, fwd2, atol=1e-14)
    # with dE > dA the spectra coincide, so the shortcut route must agree
    np.testing.assert_allclose(conj, conj2, atol=1e-10)
    for p, f, c in zip(pts, fwd, conj):
        lf, lc = local_deficits(ch, p)
        assert f == pytest.approx(lf, abs=1e-12) and c == pytest.approx(lc, abs=1e-12)


def test_pauli_certifies_with_zero_deficit(stream):
    ch = pauli_channel()
    for eps in (0.1, 0.5):
        net = build_net_probabilistic(2, eps, 10, stream)
        rep = certify_over_net(ch, net, CertificationSpec(eps))
        assert rep.verdict == PASS and abs(rep.forward_deficit) < 1e-12
        assert rep.guarantee_kind == STATISTICAL_ONLY
        # the Gram side sits at 1/2 - 1/4 for every input
        assert rep.conjugate_deficit == pytest.approx(0.25)
        assert not rep.conjugate_pass
        strict = certify_over_net(ch, net, CertificationSpec(eps, require_conjugate=True))
        assert strict.verdict == FAIL


def test_covering_correction(stream):
    ch = pauli_channel()
    delta = 0.5 / 4
    net = build_covering_net(2, delta, stream)
    rep = certify_over_net(ch, net, CertificationSpec(0.5, net_kind=COVERING_NET))
    assert rep.guarantee_kind == COVERING_CERTIFIED
    assert rep.net_correction == pytest.approx(delta / 2)
    assert rep.verdict == PASS


def test_identity_channel_fails(stream):
    net = build_net_probabilistic(3, 0.5, 10, stream)
    rep = certify_over_net(identity_channel(3), net, CertificationSpec(0.5))
    assert rep.verdict == FAIL
    assert rep.forward_deficit == pytest.approx(1 - 1 / 3)


def test_covering_guarantee_bounds_true_sup(stream):
    # the certified bound must dominate a dense Bloch-sphere search
    ch = sample_uniform_ruc(2, 3, stream)
    delta = 0.1
    net = build_covering_net(2, delta, derive_stream(stream, 1))
    rep = certify_over_net(ch, net, CertificationSpec(0.5, net_kind=COVERING_NET))
    grid_sup = np.max(net_deficits(ch, _bloch_grid(120))[0])
    assert rep.forward_deficit <= grid_sup + 1e-12
    assert grid_sup <= rep.forward_deficit + rep.net_correction + 1e-12


def test_adversarial_matches_bloch_grid(stream):
    for k in range(3):
        ch = sample_uniform_ruc(2, 3, derive_stream(stream, k))
        grid = np.max(np.linalg.eigvalsh(outputs_on_states(ch, _bloch_grid(200)))[:, -1])
        value, phi = adversarial_sup_estimate(ch, 6, derive_stream(stream, 10 + k))
        assert value >= grid - 1e-6
        assert value <= grid + 1e-3
        assert np.linalg.norm(phi) == pytest.approx(1.0)


@given(st.integers(2, 5), st.integers(1, 8), st.integers(0, 2 ** 32 - 1))
def test_ascent_is_monotone(dA, dE, seed):
    ch = sample_uniform_ruc(dA, dE, SeededStream(seed))
    phi = random_state(np.random.default_rng(seed), dA)
    path, _ = ascent_path(ch, phi)
    assert all(b >= a - 1e-12 for a, b in zip(path, path[1:]))
    assert path[-1] <= 1.0 + 1e-12


def test_adversarial_restarts_in_certify(stream):
    ch = sample_uniform_ruc(4, 6, stream)
    net = build_net_probabilistic(4, 0.5, 2, stream)
    plain = certify_over_net(ch, net, CertificationSpec(0.5))
    pushed = certify_over_net(ch, net, CertificationSpec(0.5, adversarial_restarts=4), derive_stream(stream, 3))
    assert pushed.adversarial_value is not None
    assert pushed.forward_deficit >= plain.forward_deficit - 1e-12


def test_empty_net_rejected():
    net = EpsilonNet(2, 0.5, np.empty((0, 2), complex), "measureNet")
    with pytest.raises(DomainError):
        certify_over_net(pauli_channel(), net, CertificationSpec(0.5))


def test_single_unitary_deficits(rng, stream):
    ch = sample_uniform_ruc(4, 1, stream)
    phi = random_state(rng, 4)
    assert local_deficits(ch, phi)[0] == pytest.approx(0.75)
    assert randomizing_deficit(ch, phi) == pytest.approx(0.75)
    net = build_net_probabilistic(4, 0.5, 1, stream)
    assert certify_over_net(ch, net, CertificationSpec(0.5)).verdict == FAIL


def test_pauli_conjugate_deficit_oracle():
    ch = pauli_channel()
    zero = np.array([1, 0], complex)
    gram = np.array([[0.25 * np.vdot(sj @ zero, si @ zero) for sj in ch.unitaries] for si in ch.unitaries])
    top = np.max(np.linalg.eigvals(gram).real)
    assert local_deficits(ch, zero)[1] == pytest.approx(top - 0.25, abs=1e-12)


def test_randomizing_dominates_forward(stream):
    rng = np.random.default_rng(8)
    for k in range(1000):
        dA, dE = int(rng.integers(1, 6)), int(rng.integers(1, 8))
        ch = sample_uniform_ruc(dA, dE, derive_stream(stream, k))
        phi = random_state(rng, dA)
        assert local_deficits(ch, phi)[0] <= randomizing_deficit(ch, phi) + 1e-12


def test_supremum_consistency(stream):
    ch = sample_uniform_ruc(3, 4, stream)
    net = build_net_probabilistic(3, 0.5, 5, stream)
    rep = certify_over_net(ch, net, CertificationSpec(0.5))
    fwd, _ = net_deficits(ch, net.points)
    assert rep.forward_deficit >= fwd.max() - 1e-15
    value, _ = adversarial_sup_estimate(ch, len(net), derive_stream(stream, 1), starts=net.points)
    assert value >= np.max(fwd + 1 / 3) - 1e-9


def test_adversarial_fixtures(stream):
    value, _ = adversarial_sup_estimate(identity_channel(3), 3, stream)
    assert value == pytest.approx(1.0)
    value, _ = adversarial_sup_estimate(pauli_channel(), 3, stream)
    assert value == pytest.approx(0.5, abs=1e-9)


def test_adversarial_against_million_point_grid(stream):
    ch = sample_uniform_ruc(2, 3, derive_stream(stream, 42))
    grid = _bloch_grid(710)
    top = max(np.max(np.linalg.eigvalsh(outputs_on_states(ch, grid[lo:lo + 100_000]))[:, -1])
              for lo in range(0, len(grid), 100_000))
    value, _ = adversarial_sup_estimate(ch, 4, stream)
    assert len(grid) > 1_000_000
    assert abs(value - top) < 1e-3


@pytest.mark.parametrize("eps", [0.05, 0.2, 0.37, 0.5])
def test_pauli_passes_every_net(eps, stream):
    rep = certify_over_net(pauli_channel(), build_net_probabilistic(2, eps, 3, stream), CertificationSpec(eps))
    assert rep.verdict == PASS


@pytest.mark.xfail(strict=True, reason="forward deficit sits near 0.035 against eps/dB = 0.03125; 0 of 20 seeds pass")
def test_haar_sixteen_by_256_pass_rate(stream):
    passed = 0
    for s in range(20):
        ch = sample_uniform_ruc(16, 256, derive_stream(stream, s))
        net = build_net_probabilistic(16, 0.5, 10, derive_stream(stream, 100 + s))
        passed += certify_over_net(ch, net, CertificationSpec(0.5)).verdict == PASS
    assert passed / 20 >= 0.9
