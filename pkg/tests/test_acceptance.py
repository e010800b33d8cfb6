"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

The lines are collected in ``RESULTS`` and echoed again in the pytest terminal
summary (see ``conftest.py``). Run ``python3 tests/test_acceptance.py`` for the
lines alone.
"""
import math
import time
from contextlib import contextmanager

import numpy as np

import test_properties
from scramblesim.channels import (CoherentPair, NoisyChannel, depolarizing_channel,
                                  unitary_state_rep)
from scramblesim.entropy import entropy_report, finite_temp_amplitude, noise_delta
from scramblesim.errors import NotCliffordBehavior
from scramblesim.grover import grover_decode
from scramblesim.otoc import channel_otoc_point, otoc_avg, otoc_point
from scramblesim.protocol import (ProtocolConfig, clifford_bell_decode, eta_of_error,
                                  regions_for_pair, run_protocol, state_decode)
from scramblesim.regions import Regions
from scramblesim.scramblers import (classical_scrambler, clifford_sample, factorizing_sample,
                                    haar_sample, qubit_clifford_scrambler, qutrit_scrambler,
                                    swap_circuit)
from scramblesim.weyl import WeylOperator, conjugate_weyl, enumerate_weyl, site_labels

RESULTS: list[str] = []
TOL = 1e-9


@contextmanager
def criterion(n: int, title: str, budget: float):
    """Time a criterion body; the body returns through ``box`` a (passed, detail) pair."""
    box: dict = {}
    t0 = time.perf_counter()
    try:
        yield box
    finally:
        elapsed = time.perf_counter() - t0
        ok = bool(box.get("ok")) and elapsed < budget
        line = (f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {title}: {box.get('detail', 'error')} "
                f"[{elapsed:.2f} s / {budget:g} s]")
        RESULTS.append(line)
        print(line)
    assert ok, line


def _small_error(dim: int, eps: float, seed: int) -> np.ndarray:
    """``exp(i eps H)`` with ``H`` Hermitian of unit spectral norm."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (g + g.conj().T) / 2
    w, v = np.linalg.eigh(h / np.linalg.norm(h, 2))
    return (v * np.exp(1j * eps * w)) @ v.conj().T


def _random_density(rng, d: int) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def test_criterion_01_qubit_scrambler():
    with criterion(1, "qubit scrambler P=1/4, F=1 on all pairings", 1.0) as box:
        u = qubit_clifford_scrambler().unitary
        worst = 0.0
        for pair in [(1, 6), (2, 5), (3, 4)]:
            rep = run_protocol(ProtocolConfig(u, regions_for_pair((2, 2, 2), pair)))
            worst = max(worst, abs(rep.p_epr - 0.25), abs(rep.f_epr - 1.0))
        box.update(ok=worst < 1e-10, detail=f"max deviation {worst:.1e}")


def test_criterion_02_identity_consistency():
    with criterion(2, "otoc = 2^-I2 and P F = 1/d_A^2 at d=16", 30.0) as box:
        r = Regions((2, 2, 2, 2))
        dev_otoc = dev_pf = 0.0
        for seed in range(50):
            u = haar_sample(16, seed)
            i2 = entropy_report(unitary_state_rep(u, r)).mutual_info_renyi2
            dev_otoc = max(dev_otoc, abs(otoc_avg(u, r) - 2.0**-i2))
            rep = run_protocol(ProtocolConfig(u, r))
            dev_pf = max(dev_pf, abs(rep.p_epr * rep.f_epr - 1 / r.d_A**2))
        box.update(ok=dev_otoc < TOL and dev_pf < TOL,
                   detail=f"50 unitaries, max deviations {dev_otoc:.1e} / {dev_pf:.1e}")


def test_criterion_03_depolarization():
    with criterion(3, "depolarizing delta formula, delta routes, (1-p)^2 scaling", 30.0) as box:
        r = Regions((2, 2, 2))
        u = haar_sample(8, 11)
        weyl = enumerate_weyl((2,))[1:]
        dev_formula = dev_routes = dev_scale = 0.0
        for p in np.linspace(0.0, 1.0, 11):
            q = depolarizing_channel(u, p)
            formula = (1 - p) ** 2 + (2 * p - p * p) / r.d_D**2
            rep = run_protocol(ProtocolConfig(NoisyChannel(q), r))
            dev_formula = max(dev_formula, abs(noise_delta(q, r) - formula))
            dev_routes = max(dev_routes, abs(rep.delta - rep.delta_measured))
            for wa in weyl:
                for wd in weyl:
                    base = otoc_point(u, wa.matrix, wd.matrix, r)
                    got = channel_otoc_point(q, wa.matrix, wd.matrix, r)
                    dev_scale = max(dev_scale, abs(got - (1 - p) ** 2 * base))
        box.update(ok=max(dev_formula, dev_routes, dev_scale) < TOL,
                   detail=f"11 points, deviations {dev_formula:.1e} / {dev_routes:.1e} / {dev_scale:.1e}")


QUTRIT_TABLE = [
    (((0, 1), (0, 0)), ((0, 1), (0, 2))),
    (((0, 0), (0, 1)), ((0, 2), (0, 2))),
    (((1, 0), (0, 0)), ((2, 0), (1, 0))),
    (((0, 0), (1, 0)), ((1, 0), (1, 0))),
]


def test_criterion_04_qutrit():
    with criterion(4, "qutrit conjugations, decoding and SWAP baseline", 5.0) as box:
        u = qutrit_scrambler().unitary
        exact = all(conjugate_weyl(u, WeylOperator((3, 3), src)).dominant().keys() == {dst}
                    and abs(abs(conjugate_weyl(u, WeylOperator((3, 3), src)).coeffs[dst]) - 1) < 1e-12
                    for src, dst in QUTRIT_TABLE)
        f_q = [run_protocol(ProtocolConfig(u, regions_for_pair((3, 3), pr))).f_epr
               for pr in [(2, 3), (1, 4)]]
        s = swap_circuit(3).unitary
        f_good = run_protocol(ProtocolConfig(s, regions_for_pair((3, 3), (2, 3)))).f_epr
        f_bad = run_protocol(ProtocolConfig(s, regions_for_pair((3, 3), (1, 4)))).f_epr
        ok = (exact and max(abs(f - 1) for f in f_q) < TOL and abs(f_good - 1) < TOL
              and abs(f_bad - 1 / 9) < TOL)
        box.update(ok=ok, detail=f"table exact={exact}, F={f_q[0]:.12f},{f_q[1]:.12f}, "
                                 f"SWAP F={f_good:.12f} on {{2,3}}, {f_bad:.12f} on {{1,4}}")


def test_criterion_05_grover():
    with criterion(5, "Grover decoder success m=0 and m=1", 5.0) as box:
        u = qubit_clifford_scrambler().unitary
        r = Regions((2, 2, 2))
        s0 = grover_decode(u, r, 0).success
        s1 = grover_decode(u, r, 1).success
        box.update(ok=abs(s1 - 1) < 1e-6 and abs(s0 - 0.25) < 1e-6,
                   detail=f"m=0 -> {s0:.9f}, m=1 -> {s1:.9f}")


def test_criterion_06_clifford_statistics():
    with criterion(6, "Haar vs Clifford OTOC ensembles on 4 qubits", 600.0) as box:
        r = Regions((2, 2, 2, 2))
        haar = np.array([otoc_avg(haar_sample(16, s), r) for s in range(200)])
        cliff = np.array([otoc_avg(clifford_sample(4, 10_000 + s), r) for s in range(200)])
        se = math.sqrt(haar.var(ddof=1) / 200 + cliff.var(ddof=1) / 200)
        gap = abs(haar.mean() - cliff.mean())
        ratio = cliff.std(ddof=1) / haar.std(ddof=1)
        box.update(ok=gap < 3 * se and ratio > 3,
                   detail=f"means {haar.mean():.5f} / {cliff.mean():.5f} ({gap / se:.2f} SE), "
                          f"std ratio {ratio:.2f}")


def _coherent_points(n: int):
    """Clifford U with small coherent errors, kept when eta > 0.55."""
    r = Regions((2, 2, 2))
    points, seed = [], 0
    while len(points) < n:
        u = clifford_sample(3, seed)
        eps = 0.1 + 0.5 * (seed % 7) / 6
        v = _small_error(8, eps, 5000 + seed) @ u
        seed += 1
        if eta_of_error(v @ u.conj().T, r) > 0.55:
            points.append((u, v))
    return r, points


def test_criterion_07_bounds():
    with criterion(7, "bounds on a 100-point coherent + depolarizing sweep", 120.0) as box:
        worst = {"coherent": math.inf, "mi": math.inf, "otoc": math.inf}
        cross = 0.0
        r, coherent = _coherent_points(50)
        reports = []
        for u, v in coherent:
            rep = run_protocol(ProtocolConfig(CoherentPair(u, v, r.in_dims), r))
            cross = max(cross, rep.metadata["coherent_cross_terms"])
            worst["coherent"] = min(worst["coherent"], rep.bounds["otoc_coherent_upper"] - rep.otoc)
            reports.append(rep)
        rng = np.random.default_rng(77)
        for seed in range(50):
            q = depolarizing_channel(haar_sample(8, 300 + seed), float(rng.uniform(0, 1)))
            reports.append(run_protocol(ProtocolConfig(NoisyChannel(q), r)))
        for rep in reports:
            worst["mi"] = min(worst["mi"], rep.i2 - rep.bounds["mi_lower"])
            worst["otoc"] = min(worst["otoc"], rep.bounds["otoc_upper"] - rep.otoc)
        # Haar U keeps cross terms the coherent bound drops; reported, not asserted
        haar_margin = math.inf
        for seed in range(10):
            u = haar_sample(8, 900 + seed)
            v = _small_error(8, 0.3, 950 + seed) @ u
            rep = run_protocol(ProtocolConfig(CoherentPair(u, v, r.in_dims), r))
            if rep.bounds["otoc_coherent_upper"] is not None:
                haar_margin = min(haar_margin, rep.bounds["otoc_coherent_upper"] - rep.otoc)
        ok = len(reports) == 100 and min(worst.values()) >= -TOL and cross < 1e-12
        box.update(ok=ok, detail="min margins " + ", ".join(f"{k} {m:.2e}" for k, m in worst.items())
                                 + f"; coherent cross terms <= {cross:.1e}"
                                 + f"; Haar coherent margin (info) {haar_margin:.1e}")


def test_criterion_08_classical_scrambler():
    with criterion(8, "classical scrambler decodes classical inputs only", 1.0) as box:
        u = classical_scrambler().unitary
        r = regions_for_pair((2, 2, 2), (2, 5))
        comp = [state_decode(ProtocolConfig(u, r, b_basis=b), psi)[1]
                for psi in np.eye(2, dtype=complex) for b in range(4)]
        had = [state_decode(ProtocolConfig(u, r, b_basis=b), psi)[1]
               for psi in np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2) for b in range(4)]
        ok = len(comp) == 8 and max(abs(f - 1) for f in comp) < TOL and min(had) < 0.99
        box.update(ok=ok, detail=f"computational min F {min(comp):.12f}, Hadamard min F {min(had):.4f}")


def test_criterion_09_finite_temperature():
    with criterion(9, "finite-temperature amplitude bound on factorizing pairs", 30.0) as box:
        r = Regions((2, 2))
        rng = np.random.default_rng(2024)
        margin = gap = math.inf
        for k in range(20):
            ra, rb = _random_density(rng, 2), _random_density(rng, 2)
            rep = finite_temp_amplitude(factorizing_sample(ra, rb, r, 40 + k), ra, rb, r)
            margin = min(margin, rep.mutual_info - rep.bound)
            gap = min(gap, rep.d2 - rep.d1)
        box.update(ok=margin >= -TOL and gap >= -TOL,
                   detail=f"20 pairs, min I - bound {margin:.2e}, min D2 - D1 {gap:.2e}")


def test_criterion_10_bell_decoding():
    with criterion(10, "Weyl corrections for every Bell outcome", 10.0) as box:
        r = Regions((2, 2, 2))
        u = qubit_clifford_scrambler().unitary
        fids = [clifford_bell_decode(u, r, lab).fidelity for lab in site_labels(2)]
        h = haar_sample(8, 3)
        refused = 0
        for lab in site_labels(2)[1:]:
            try:
                clifford_bell_decode(h, r, lab)
            except NotCliffordBehavior:
                refused += 1
        ok = len(fids) == 4 and min(fids) > 1 - TOL and refused >= 1
        box.update(ok=ok, detail=f"scrambler min fidelity {min(fids):.12f}, "
                                 f"Haar refused {refused}/3 non-identity outcomes")


def test_criterion_11_properties():
    with criterion(11, "randomized invariants of every module", 300.0) as box:
        test_properties.TRIALS.clear()
        for prop in test_properties.PROPERTIES:
            prop()
        trials = test_properties.TRIALS
        modules = {"qudit", "weyl", "channels", "otoc", "entropy", "protocol", "grover",
                   "scramblers", "cli"}
        total = sum(trials.values())
        ok = total >= 1000 and set(trials) == modules
        box.update(ok=ok, detail=f"{len(test_properties.PROPERTIES)} properties, {total} trials "
                                 f"over {len(trials)} modules")


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
