"""Deterministic decoding by amplitude amplification between two reflections.

``W_D = 1 - 2 P_D`` flips the sign of the component with an EPR pair on ``DD'``.
``W_A = 2 P~_A - 1`` keeps the component whose mirror copy, pulled back through
``U^T``, holds an EPR pair on ``A'R'``. For an ideal scrambler ``W_A W_D``
rotates the input state towards the post-selected output by ``theta`` with
``sin(theta / 2) = 1 / d_A``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import Unitary, unitary_state_rep
from .entropy import entropy_report
from .errors import DimensionError
from .protocol import P_MIN, ProtocolConfig, build_psi_in, epr_fidelity
from .qudit import PureState, SystemLayout, embed, epr_projector_local
from .regions import Regions

IDEAL_GAP = 0.05


@dataclass(frozen=True)
class GroverPlan:
    """Rotation angle and iteration count for input dimension ``d_A``."""

    d_A: int

    def __post_init__(self):
        if self.d_A < 2:
            raise ValueError(f"d_A must be >= 2, got {self.d_A}")

    @property
    def theta(self) -> float:
        return 2 * math.asin(1 / self.d_A)

    @property
    def m_opt(self) -> int:
        return max(0, round(math.pi * self.d_A / 4 - 0.5))

    def success(self, m: int) -> float:
        if m < 0:
            raise ValueError(f"iteration count must be >= 0, got {m}")
        return math.sin((m + 0.5) * self.theta) ** 2

    @property
    def predicted_success(self) -> float:
        return self.success(self.m_opt)

    @staticmethod
    def gate_applications(m: int) -> int:
        """Uses of ``U``, ``U*`` or ``U^T``: two to prepare ``Psi_in``, two per iteration."""
        return 2 + 2 * m


def _check_u(u: np.ndarray, regions: Regions) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (regions.d, regions.d):
        raise DimensionError(f"unitary of shape {u.shape} for regions of dim {regions.d}")
    return u


def _mirror_projector(u: np.ndarray, regions: Regions) -> np.ndarray:
    """``P~_A = U* P_A U^T`` on ``(C', D', R')`` with ``P_A`` the EPR projector on ``A'R'``."""
    da, db = regions.d_A, regions.d_B
    epr = np.eye(da) / np.sqrt(da)
    p_ar = np.einsum("ar,bs->arbs", epr, epr.conj())
    # ordering (A', B', R') on both sides
    p_a = np.einsum("arbs,xy->axrbys", p_ar, np.eye(db)).reshape(da * db * da, da * db * da)
    m = np.kron(regions.canonical(u).conj(), np.eye(da))
    return m @ p_a @ m.conj().T


def _layout(regions: Regions) -> SystemLayout:
    return SystemLayout((("R", regions.d_A), ("C", regions.d_C), ("D", regions.d_D),
                         ("D'", regions.d_D), ("C'", regions.d_C), ("R'", regions.d_A)))


def build_reflections(u: np.ndarray, regions: Regions) -> tuple[np.ndarray, np.ndarray]:
    """Dense ``(W_D, W_A)`` on the registers ``R, C, D, D', C', R'``."""
    u = _check_u(u, regions)
    layout = _layout(regions)
    n = layout.total_dim
    p_d = embed(layout, epr_projector_local(regions.d_D), ["D", "D'"])
    p_a = embed(layout, _mirror_projector(u, regions), ["C'", "D'", "R'"])
    return np.eye(n) - 2 * p_d, 2 * p_a - np.eye(n)


@dataclass(frozen=True)
class GroverResult:
    state: PureState
    m: int
    success: float
    fidelity_out: float
    predicted: float
    ideal: bool
    i2: float
    plane_deviation: float
    gate_applications: int
    teleport_fidelity: float

    @property
    def deviation(self) -> float:
        """Gap between the measured success and the closed form."""
        return abs(self.success - self.predicted)


def _plane_residual(vec: np.ndarray, basis: np.ndarray) -> float:
    return float(np.linalg.norm(vec - basis @ (basis.conj().T @ vec)))


def grover_decode(u: np.ndarray, regions: Regions, m: int) -> GroverResult:
    """Apply ``(W_A W_D)^m`` to ``Psi_in`` and measure the EPR pair on ``DD'``.

    ``teleport_fidelity`` is the EPR fidelity on ``RR'`` once the final state is
    projected onto an EPR pair on ``DD'``. Non-ideal evolutions are run anyway;
    ``ideal`` records whether the Renyi-2 mutual information reaches
    ``2 log2 d_A`` so the closed form applies.
    """
    if m < 0:
        raise ValueError(f"iteration count must be >= 0, got {m}")
    u = _check_u(u, regions)
    psi_in = build_psi_in(ProtocolConfig(Unitary(u, regions.in_dims), regions))
    w_d, w_a = build_reflections(u, regions)
    p_d = (np.eye(len(w_d)) - w_d) / 2
    v_in = psi_in.amplitudes
    out = p_d @ v_in
    v_out = out / np.linalg.norm(out)
    basis, _ = np.linalg.qr(np.stack([v_in, v_out], axis=1))

    vec = v_in.copy()
    worst = 0.0
    for _ in range(m):
        vec = w_a @ (w_d @ vec)
        worst = max(worst, _plane_residual(vec, basis))

    branch = p_d @ vec
    weight = float(np.real(np.vdot(branch, branch)))
    f_rr = 0.0
    if weight > P_MIN:
        st = PureState(_layout(regions), branch / np.sqrt(weight))
        f_rr = epr_fidelity(st, ("R", "R'"))
    i2 = entropy_report(unitary_state_rep(u, regions)).mutual_info_renyi2
    plan = GroverPlan(regions.d_A)
    return GroverResult(
        state=PureState(_layout(regions), vec),
        m=m,
        success=float(np.real(np.vdot(vec, p_d @ vec))),
        fidelity_out=float(abs(np.vdot(v_out, vec)) ** 2),
        predicted=plan.success(m),
        ideal=bool(i2 >= 2 * math.log2(regions.d_A) - IDEAL_GAP),
        i2=float(i2),
        plane_deviation=worst,
        gate_applications=GroverPlan.gate_applications(m),
        teleport_fidelity=f_rr,
    )


def psi_perp(u: np.ndarray, regions: Regions) -> PureState:
    """Normalized ``(1 - P_D)`` component of ``Psi_in``: the partner of ``Psi_out`` in the plane."""
    u = _check_u(u, regions)
    psi_in = build_psi_in(ProtocolConfig(Unitary(u, regions.in_dims), regions))
    layout = psi_in.layout
    p_d = embed(layout, epr_projector_local(regions.d_D), ["D", "D'"])
    v = psi_in.amplitudes - p_d @ psi_in.amplitudes
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        raise ArithmeticError("Psi_in lies entirely in the EPR subspace")
    return PureState(layout, v / norm)


def ideal_identities(u: np.ndarray, regions: Regions) -> dict[str, float]:
    """Residual norms of the four projector identities that hold for an ideal scrambler.

    ``P_D Psi_in = Psi_out / d_A``, ``P_D Psi_out = Psi_out``,
    ``P~_A Psi_in = Psi_in`` and ``P~_A Psi_out = Psi_in / d_A``.
    """
    u = _check_u(u, regions)
    psi_in = build_psi_in(ProtocolConfig(Unitary(u, regions.in_dims), regions)).amplitudes
    w_d, w_a = build_reflections(u, regions)
    n = len(w_d)
    p_d = (np.eye(n) - w_d) / 2
    p_a = (np.eye(n) + w_a) / 2
    out = p_d @ psi_in
    psi_out = out / np.linalg.norm(out)
    da = regions.d_A
    return {
        "P_D psi_in": float(np.linalg.norm(p_d @ psi_in - psi_out / da)),
        "P_D psi_out": float(np.linalg.norm(p_d @ psi_out - psi_out)),
        "P_A psi_in": float(np.linalg.norm(p_a @ psi_in - psi_in)),
        "P_A psi_out": float(np.linalg.norm(p_a @ psi_out - psi_in / da)),
    }


def verify_epr_after_decode(result: GroverResult, u: np.ndarray, regions: Regions) -> float:
    """Probability of an EPR pair on ``DD'`` after the closing ``W_D`` step.

    ``W_D`` only flips the sign of the EPR component, so this equals the success
    probability of the iteration; with ``m = 0`` it is the plain projection probability.
    """
    w_d, _ = build_reflections(u, regions)
    vec = w_d @ result.state.amplitudes
    p_d = (np.eye(len(w_d)) - w_d) / 2
    return float(np.real(np.vdot(vec, p_d @ vec)))
