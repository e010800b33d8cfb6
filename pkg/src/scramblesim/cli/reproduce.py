"""Reference fixture table: exact values every correct build must reproduce."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..channels import NoisyChannel, depolarizing_channel
from ..errors import NotCliffordBehavior
from ..grover import GroverPlan, grover_decode
from ..otoc import otoc_avg
from ..protocol import (ProtocolConfig, clifford_bell_decode, regions_for_pair, run_protocol,
                        state_decode)
from ..qudit import epr_state
from ..regions import Regions
from ..scramblers import (NamedCircuit, classical_scrambler, haar_sample, qubit_clifford_scrambler,
                          qutrit_scrambler, swap_circuit)
from ..weyl import WeylOperator, conjugate_weyl, delocalization_check, site_labels

TOL = 1e-9


@dataclass(frozen=True)
class FixtureResult:
    name: str
    passed: bool
    detail: str


def _close(x: float, y: float, tol: float = TOL) -> bool:
    return abs(x - y) <= tol


def _epr_qubit(circuits) -> tuple[bool, str]:
    amps = epr_state(2).amplitudes
    ok = np.allclose(amps, np.array([1, 0, 0, 1]) / np.sqrt(2), atol=1e-15)
    return ok, f"amplitudes {np.round(amps.real, 6).tolist()}"


def _qubit_pairings(circuits) -> tuple[bool, str]:
    u = circuits["qubit_clifford_scrambler"].unitary
    parts, ok = [], True
    for pair in ((3, 4), (1, 6), (2, 5)):
        rep = run_protocol(ProtocolConfig(u, regions_for_pair((2, 2, 2), pair)))
        ok &= _close(rep.p_epr, 0.25, 1e-10) and _close(rep.f_epr, 1.0, 1e-10)
        parts.append(f"{pair}: P={rep.p_epr:.12f} F={rep.f_epr:.12f}")
    return ok, "; ".join(parts)


def _qubit_delta(circuits) -> tuple[bool, str]:
    u = circuits["qubit_clifford_scrambler"].unitary
    r = Regions((2, 2, 2))
    rep = run_protocol(ProtocolConfig(u, r))
    delta = r.d_A**2 * rep.pf
    return _close(delta, 1.0) and _close(otoc_avg(u, r), 0.25), f"d_A^2 PF={delta:.12f}"


def _qubit_delocalization(circuits) -> tuple[bool, str]:
    rep = delocalization_check(circuits["qubit_clifford_scrambler"].unitary, (2, 2, 2))
    weights = sorted(set(w for ws in rep.images.values() for w in ws))
    return rep.maximal, f"{len(rep.images)} one-body images, weights {weights}"


def _depolarizing_delta(circuits) -> tuple[bool, str]:
    u = circuits["qubit_clifford_scrambler"].unitary
    r = Regions((2, 2, 2))
    worst = 0.0
    for p in (0.0, 0.25, 0.5, 0.75, 1.0):
        rep = run_protocol(ProtocolConfig(NoisyChannel(depolarizing_channel(u, p, (2, 2, 2))), r))
        expected = (1 - p) ** 2 + (2 * p - p * p) / r.d_D**2
        worst = max(worst, abs(rep.delta - expected), abs(rep.delta_measured - expected))
    return worst <= TOL, f"max deviation {worst:.2e}"


_QUTRIT_TABLE = {
    ((0, 1), (0, 0)): ((0, 1), (0, 2)),
    ((0, 0), (0, 1)): ((0, 2), (0, 2)),
    ((1, 0), (0, 0)): ((2, 0), (1, 0)),
    ((0, 0), (1, 0)): ((1, 0), (1, 0)),
}


def _qutrit_conjugation(circuits) -> tuple[bool, str]:
    u = circuits["qutrit_scrambler"].unitary
    ok = True
    for src, dst in _QUTRIT_TABLE.items():
        dec = conjugate_weyl(u, WeylOperator((3, 3), src))
        ok &= abs(dec[dst] - 1) <= TOL and len(dec.dominant()) == 1
    return ok, f"{len(_QUTRIT_TABLE)} relations"


def _qutrit_decoding(circuits) -> tuple[bool, str]:
    u = circuits["qutrit_scrambler"].unitary
    fs = [run_protocol(ProtocolConfig(u, regions_for_pair((3, 3), pair))).f_epr
          for pair in ((2, 3), (1, 4))]
    return all(_close(f, 1.0) for f in fs), f"F={fs}"


def _swap_decoding(circuits) -> tuple[bool, str]:
    u = swap_circuit(3).unitary
    good = run_protocol(ProtocolConfig(u, regions_for_pair((3, 3), (2, 3)))).f_epr
    bad = run_protocol(ProtocolConfig(u, regions_for_pair((3, 3), (1, 4)))).f_epr
    return _close(good, 1.0) and _close(bad, 1 / 9), f"F(2,3)={good:.12f} F(1,4)={bad:.12f}"


def _grover_qubit(circuits) -> tuple[bool, str]:
    u = circuits["qubit_clifford_scrambler"].unitary
    r = Regions((2, 2, 2))
    s0 = grover_decode(u, r, 0).success
    s1 = grover_decode(u, r, 1).success
    return _close(s0, 0.25, 1e-6) and _close(s1, 1.0, 1e-6), f"m=0: {s0:.9f}, m=1: {s1:.9f}"


def _grover_qutrit(circuits) -> tuple[bool, str]:
    u = circuits["qutrit_scrambler"].unitary
    plan = GroverPlan(3)
    res = grover_decode(u, Regions((3, 3)), plan.m_opt)
    return _close(res.success, plan.predicted_success, 1e-6), (
        f"m={plan.m_opt}: {res.success:.9f} vs {plan.predicted_success:.9f}")


def _classical_inputs(circuits) -> tuple[bool, str]:
    u = circuits["classical_scrambler"].unitary
    r = regions_for_pair((2, 2, 2), (2, 5))
    fs = []
    for x in range(2):
        for b in range(4):
            psi = np.eye(2, dtype=np.complex128)[x]
            fs.append(state_decode(ProtocolConfig(u, r, b_basis=b), psi)[1])
    plus = np.array([1, 1], dtype=np.complex128) / math.sqrt(2)
    f_plus = state_decode(ProtocolConfig(u, r), plus)[1]
    ok = all(_close(f, 1.0) for f in fs) and f_plus < 0.99
    return ok, f"min computational F={min(fs):.12f}; F(|+>)={f_plus:.6f}"


def _bell_corrections(circuits) -> tuple[bool, str]:
    u = circuits["qubit_clifford_scrambler"].unitary
    r = Regions((2, 2, 2))
    try:
        fids = [clifford_bell_decode(u, r, lab).fidelity for lab in site_labels(2)]
    except NotCliffordBehavior as exc:
        return False, str(exc)
    return all(f > 1 - TOL for f in fids), f"min fidelity {min(fids):.12f}"


def _haar_not_clifford(circuits) -> tuple[bool, str]:
    u = haar_sample(8, 7)
    r = Regions((2, 2, 2))
    for lab in site_labels(2)[1:]:
        try:
            clifford_bell_decode(u, r, lab)
        except NotCliffordBehavior:
            return True, f"outcome {lab} has no Weyl correction"
    return False, "every outcome admitted a Weyl correction"


FIXTURES: dict[str, Callable] = {
    "epr pair amplitudes, qubit": _epr_qubit,
    "qubit scrambler: P and F on all pairings": _qubit_pairings,
    "qubit scrambler: noiseless delta and averaged OTOC": _qubit_delta,
    "qubit scrambler: maximal delocalization": _qubit_delocalization,
    "depolarizing delta formula": _depolarizing_delta,
    "qutrit scrambler: conjugation table": _qutrit_conjugation,
    "qutrit scrambler: decoding on both pairings": _qutrit_decoding,
    "qutrit swap: decodes one pairing only": _swap_decoding,
    "grover: qubit input, m = 0 and 1": _grover_qubit,
    "grover: qutrit input, optimal m": _grover_qutrit,
    "classical scrambler: computational vs superposed inputs": _classical_inputs,
    "bell-outcome weyl corrections": _bell_corrections,
    "haar unitary: no weyl correction": _haar_not_clifford,
}


def default_circuits() -> dict[str, NamedCircuit]:
    return {"qubit_clifford_scrambler": qubit_clifford_scrambler(),
            "qutrit_scrambler": qutrit_scrambler(),
            "classical_scrambler": classical_scrambler()}


def run_fixtures(circuits: dict[str, NamedCircuit] | None = None) -> list[FixtureResult]:
    """Run every fixture; ``circuits`` overrides the reference circuits (negative controls)."""
    circ = {**default_circuits(), **(circuits or {})}
    out = []
    for name, fn in FIXTURES.items():
        try:
            ok, detail = fn(circ)
        except Exception as exc:  # a broken circuit can fail anywhere
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(FixtureResult(name, bool(ok), detail))
    return out


def print_table(results: list[FixtureResult]) -> None:
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}")
    n = sum(r.passed for r in results)
    print(f"{n}/{len(results)} fixtures passed")
