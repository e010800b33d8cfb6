import numpy as np
import pytest

import oracle
from scramblesim.channels import CoherentPair, NoisyChannel, channel_state_rep, depolarizing_channel
from scramblesim.entropy import mutual_info_renyi2, noise_delta
from scramblesim.errors import NotCliffordBehavior, PostSelectionError
from scramblesim.protocol import (ProtocolConfig, bell_probabilities, beta_coefficient,
                                  build_psi_in, clifford_bell_decode, coherent_cross_terms,
                                  coherent_otoc_bound, epr_fidelity, eta_of_error,
                                  eta_projector_form, fidelity_mi_bound, fidelity_otoc_bound,
                                  mub_states, post_select, regions_for_pair, run_protocol,
                                  state_decode, state_decoding_summary, undo_check)
from scramblesim.qudit import epr_vector, partial_trace
from scramblesim.regions import Regions
from scramblesim.scramblers import clifford_sample, haar_sample
from scramblesim.weyl import WeylOperator, site_labels

R3 = Regions((2, 2, 2))
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)


def small_error(dim, eps, seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (g + g.conj().T) / 2
    w, v = np.linalg.eigh(h / np.linalg.norm(h, 2))
    return (v * np.exp(1j * eps * w)) @ v.conj().T


class TestPsiIn:
    def test_identity_three_pairs(self):
        psi = build_psi_in(ProtocolConfig(np.eye(8), R3))
        assert psi.layout.names == ("R", "C", "D", "D'", "C'", "R'")
        p, out = post_select(psi)
        assert p == pytest.approx(1.0)
        # R pairs with C's site 0, C' site 0 with R', C site 1 with C' site 1
        t = out.tensor.reshape(2, 2, 2, 2, 2, 2)  # R, C0, C1, C'0, C'1, R'
        amps = np.einsum("rc,ab,ps->rcabps", np.eye(2), np.eye(2), np.eye(2))
        amps = amps.transpose(0, 1, 2, 4, 3, 5) / np.sqrt(8)
        np.testing.assert_allclose(t, amps, atol=1e-12)

    def test_scrambler_quarter(self, scrambler):
        p, _ = post_select(build_psi_in(ProtocolConfig(scrambler, R3)))
        assert p == pytest.approx(0.25, abs=1e-12)

    def test_invalid_configs(self):
        with pytest.raises(ValueError):
            ProtocolConfig(np.eye(4), R3)
        with pytest.raises(ValueError):
            ProtocolConfig(np.eye(8), R3, psi=np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            ProtocolConfig(np.eye(8), R3, b_basis=4)


class TestRunProtocol:
    @pytest.mark.parametrize("pair", [(3, 4), (1, 6), (2, 5)])
    def test_scrambler_pairings(self, scrambler, pair):
        rep = run_protocol(ProtocolConfig(scrambler, regions_for_pair((2, 2, 2), pair)))
        assert rep.p_epr == pytest.approx(0.25, abs=1e-10)
        assert rep.f_epr == pytest.approx(1.0, abs=1e-10)
        assert rep.undo == pytest.approx(1.0, abs=1e-10)

    def test_swap_pairings(self, swap3):
        good = run_protocol(ProtocolConfig(swap3, regions_for_pair((3, 3), (2, 3))))
        bad = run_protocol(ProtocolConfig(swap3, regions_for_pair((3, 3), (1, 4))))
        assert good.f_epr == pytest.approx(1.0, abs=1e-10)
        assert bad.f_epr == pytest.approx(1 / 9, abs=1e-10)

    @pytest.mark.parametrize("seed", range(3))
    def test_against_oracle(self, seed):
        dims = (2, 3, 2)
        u = haar_sample(12, seed)
        rep = run_protocol(ProtocolConfig(u, Regions(dims)))
        p, f = oracle.protocol(u, dims)
        assert rep.p_epr == pytest.approx(p, abs=1e-12)
        assert rep.f_epr == pytest.approx(f, abs=1e-12)

    @pytest.mark.parametrize("seed", range(3))
    def test_unitary_fidelity_relation(self, seed):
        rep = run_protocol(ProtocolConfig(haar_sample(8, seed), R3))
        assert rep.f_epr == pytest.approx(1 / (4 * rep.p_epr), abs=1e-10)
        assert rep.p_epr == pytest.approx(rep.otoc, abs=1e-10)

    def test_depolarized_full(self, scrambler):
        rep = run_protocol(ProtocolConfig(NoisyChannel(depolarizing_channel(scrambler, 1.0)), R3))
        assert rep.delta == pytest.approx(0.25, abs=1e-12)
        assert rep.delta_measured == pytest.approx(0.25, abs=1e-12)

    @pytest.mark.parametrize("p", [0.1, 0.5, 0.8])
    def test_channel_fidelity_is_i2(self, p):
        q = depolarizing_channel(haar_sample(8, 4), p)
        rep = run_protocol(ProtocolConfig(NoisyChannel(q), R3))
        i2 = mutual_info_renyi2(channel_state_rep(q, R3), ["R"], ["D", "B'"])
        assert rep.f_epr == pytest.approx(2.0**i2 / 4, abs=1e-10)
        assert rep.delta_measured == pytest.approx(noise_delta(q, R3), abs=1e-9)

    def test_decoherence_never_helps(self):
        u = haar_sample(8, 6)
        f0 = run_protocol(ProtocolConfig(u, R3)).f_epr
        for p in np.linspace(0, 1, 6):
            rep = run_protocol(ProtocolConfig(NoisyChannel(depolarizing_channel(u, p)), R3))
            assert rep.f_epr <= f0 + 1e-9

    def test_fixed_state_rejected(self, scrambler):
        with pytest.raises(ValueError):
            run_protocol(ProtocolConfig(scrambler, R3, psi=np.array([1.0, 0.0])))

    def test_sigma_marginal(self, scrambler, qutrit):
        for u, r in ((scrambler, R3), (qutrit, Regions((3, 3)))):
            assert run_protocol(ProtocolConfig(u, r)).sigma_deviation < 1e-6

    def test_report_dict(self, scrambler):
        d = run_protocol(ProtocolConfig(scrambler, R3)).as_dict()
        assert d["PF"] == pytest.approx(0.25)
        assert "bound_mi_lower" in d and d["seed"] == 0


class TestBell:
    def test_completeness(self):
        psi = build_psi_in(ProtocolConfig(haar_sample(9, 2), Regions((3, 3))))
        assert sum(bell_probabilities(psi).values()) == pytest.approx(1.0, abs=1e-10)

    def test_completeness_channel(self):
        q = depolarizing_channel(haar_sample(8, 2), 0.3)
        psi = build_psi_in(ProtocolConfig(NoisyChannel(q), R3))
        assert sum(bell_probabilities(psi).values()) == pytest.approx(1.0, abs=1e-10)

    def test_impossible_outcome(self):
        # computational copy on BB' with U = I leaves DD' in |00>, so a shifted outcome never occurs
        psi = build_psi_in(ProtocolConfig(np.eye(8), R3, b_basis=0))
        with pytest.raises(PostSelectionError):
            post_select(psi, label=(1, 0))

    def test_identity_outcome_correction(self, scrambler):
        c = clifford_bell_decode(scrambler, R3, (0, 0))
        assert c.c_label == ((0, 0), (0, 0)) and c.r_label == ((0, 0),)
        assert c.fidelity == pytest.approx(1.0)

    @pytest.mark.parametrize("label", site_labels(2))
    def test_scrambler_outcomes(self, scrambler, label):
        assert clifford_bell_decode(scrambler, R3, label).fidelity > 1 - 1e-9

    @pytest.mark.parametrize("seed", [3, 17])
    def test_random_clifford_outcomes(self, seed):
        # a random Clifford need not scramble, so only outcomes that occur are checked
        u = clifford_sample(3, seed)
        probs = bell_probabilities(build_psi_in(ProtocolConfig(u, R3)))
        for label, p in probs.items():
            if p > 1e-12:
                assert clifford_bell_decode(u, R3, label).fidelity > 1 - 1e-9

    def test_haar_fails(self):
        with pytest.raises(NotCliffordBehavior):
            clifford_bell_decode(haar_sample(8, 3), R3, (1, 0))


class TestStateDecode:
    def test_scrambler_any_state(self, scrambler, rng):
        for _ in range(3):
            psi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            psi /= np.linalg.norm(psi)
            p, f = state_decode(ProtocolConfig(scrambler, R3), psi)
            assert p == pytest.approx(0.25, abs=1e-10)
            assert f == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("seed", range(2))
    def test_against_oracle(self, seed, rng):
        dims = (3, 2)
        u = haar_sample(6, seed)
        psi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        psi /= np.linalg.norm(psi)
        p, f = state_decode(ProtocolConfig(u, Regions(dims)), psi)
        po, fo = oracle.protocol(u, dims, psi=psi)
        assert (p, f) == pytest.approx((po, fo), abs=1e-12)

    def test_classical_scrambler(self, classical):
        r = regions_for_pair((2, 2, 2), (2, 5))
        cfg = ProtocolConfig(classical, r)
        for psi in np.eye(2, dtype=complex):
            assert state_decode(cfg, psi)[1] == pytest.approx(1.0, abs=1e-10)
        plus = np.array([1, 1]) / np.sqrt(2)
        assert state_decode(cfg, plus)[1] < 0.99

    def test_needs_state(self, scrambler):
        with pytest.raises(ValueError):
            state_decode(ProtocolConfig(scrambler, R3))

    def test_summary_reliable(self, scrambler):
        s = state_decoding_summary(ProtocolConfig(scrambler, R3))
        assert s.reliable and s.mean_pf == pytest.approx(0.25)
        assert len(s.f) == 6

    def test_summary_classical_unreliable(self, classical):
        s = state_decoding_summary(ProtocolConfig(classical, regions_for_pair((2, 2, 2), (2, 5))))
        assert not s.reliable


class TestMub:
    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_unbiased(self, d):
        states = mub_states(d)
        assert len(states) == d * (d + 1)
        for i in range(d + 1):
            for j in range(d + 1):
                block = np.array([[abs(np.vdot(a, b)) ** 2 for b in states[j * d:(j + 1) * d]]
                                  for a in states[i * d:(i + 1) * d]])
                target = np.eye(d) if i == j else np.full((d, d), 1 / d)
                np.testing.assert_allclose(block, target, atol=1e-10)

    def test_non_prime(self):
        with pytest.raises(ValueError):
            mub_states(4)


class TestUndo:
    def test_examples(self, scrambler, qutrit):
        assert undo_check(ProtocolConfig(scrambler, R3)) == pytest.approx(1.0)
        assert undo_check(ProtocolConfig(np.eye(8), R3)) == pytest.approx(0.25)
        assert undo_check(ProtocolConfig(qutrit, Regions((3, 3)))) == pytest.approx(1.0)

    def test_channel_rejected(self, scrambler):
        with pytest.raises(ValueError):
            undo_check(ProtocolConfig(NoisyChannel(depolarizing_channel(scrambler, 0.1)), R3))


class TestEta:
    def test_identity(self):
        assert eta_of_error(np.eye(8), R3) == pytest.approx(1.0)

    def test_error_on_d(self):
        assert eta_of_error(R3.embed_output(X), R3) == pytest.approx(0.0, abs=1e-14)

    def test_error_on_c(self):
        e = np.kron(np.kron(X, Z), np.eye(2))
        assert eta_of_error(e, R3) == pytest.approx(1.0)

    def test_non_unitary(self):
        with pytest.raises(ValueError):
            eta_of_error(2 * np.eye(8), R3)

    @pytest.mark.parametrize("seed", range(4))
    def test_three_routes(self, seed):
        u = haar_sample(8, 50 + seed)
        e = small_error(8, 0.6, seed)
        eta = eta_of_error(e, R3)
        assert eta_projector_form(e, R3) == pytest.approx(eta, abs=1e-10)
        rep = run_protocol(ProtocolConfig(CoherentPair(u, e @ u), R3))
        assert rep.eta_measured == pytest.approx(eta, abs=1e-10)

    @pytest.mark.parametrize("seed", range(3))
    def test_coherent_against_oracle(self, seed):
        dims = (2, 2, 2)
        u = haar_sample(8, seed)
        v = small_error(8, 0.4, seed) @ u
        rep = run_protocol(ProtocolConfig(CoherentPair(u, v), Regions(dims)))
        assert (rep.p_epr, rep.f_epr) == pytest.approx(oracle.protocol(u, dims, v=v), abs=1e-12)


class TestCoherentBound:
    def test_examples(self):
        assert coherent_otoc_bound(0.4, 1.0) == pytest.approx(0.4)
        assert coherent_otoc_bound(0.4, 0.5) is None
        assert coherent_otoc_bound(0.3, 0.75) == pytest.approx(0.6)

    def test_invalid_eta(self):
        with pytest.raises(ValueError):
            coherent_otoc_bound(0.3, 1.5)

    def test_beta_trivial(self):
        u = haar_sample(8, 1)
        assert beta_coefficient(u, u, X, R3) == pytest.approx(1.0)

    def test_beta_weyl_phase(self):
        u = haar_sample(8, 1)
        v = R3.embed_output(Z) @ u
        assert beta_coefficient(u, v, X, R3) == pytest.approx(-1.0)
        assert beta_coefficient(u, v, Z, R3) == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(4))
    def test_beta_range(self, seed):
        u = haar_sample(8, seed)
        e = small_error(8, 0.5, seed + 10)
        eta = eta_of_error(e, R3)
        for lab in site_labels(2):
            b = beta_coefficient(u, e @ u, WeylOperator((2,), (lab,)).matrix, R3)
            assert 2 * eta - 1 - 1e-12 <= b.real <= 1 + 1e-12

    @pytest.mark.parametrize("seed", range(4))
    def test_bound_on_clifford(self, seed):
        u = clifford_sample(3, seed)
        v = small_error(8, 0.5, seed) @ u
        rep = run_protocol(ProtocolConfig(CoherentPair(u, v), R3))
        assert rep.metadata["coherent_cross_terms"] < 1e-12
        bound = rep.bounds["otoc_coherent_upper"]
        assert bound is not None and rep.otoc <= bound + 1e-9

    def test_eta_one_saturates(self, scrambler):
        rep = run_protocol(ProtocolConfig(CoherentPair(scrambler, scrambler), R3))
        assert rep.bounds["otoc_coherent_upper"] == pytest.approx(rep.otoc)
        assert coherent_cross_terms(scrambler, scrambler, R3) < 1e-12


class TestFidelityBounds:
    def test_examples(self):
        assert fidelity_mi_bound(1.0, 2) == pytest.approx(2.0)
        assert fidelity_mi_bound(0.25, 2) <= -2.0
        assert fidelity_otoc_bound(1.0, 2) == pytest.approx(0.25)

    def test_invalid(self):
        with pytest.raises(ValueError):
            fidelity_mi_bound(0.0, 2)
        with pytest.raises(ValueError):
            fidelity_otoc_bound(-0.1, 2)

    def test_scrambler_saturates(self, scrambler):
        rep = run_protocol(ProtocolConfig(scrambler, R3))
        assert rep.bounds["mi_lower"] == pytest.approx(rep.i2, abs=1e-10)
        assert rep.bounds["otoc_upper"] == pytest.approx(rep.otoc, abs=1e-10)

    @pytest.mark.parametrize("seed", range(4))
    def test_coherent_sweep(self, seed):
        u = haar_sample(8, 80 + seed)
        v = small_error(8, 0.3, seed) @ u
        rep = run_protocol(ProtocolConfig(CoherentPair(u, v), R3))
        assert rep.otoc <= rep.bounds["otoc_upper"] + 1e-9
        assert rep.i2 >= rep.bounds["mi_lower"] - 1e-9


def test_epr_fidelity_of_epr():
    from scramblesim.qudit import PureState, SystemLayout

    s = PureState(SystemLayout.of(R=3, **{"R'": 3}), epr_vector(3))
    assert epr_fidelity(s) == pytest.approx(1.0)
    assert partial_trace(s, ["R"]).purity() == pytest.approx(1 / 3)
