"""Entropies (in bits), mutual informations, the noise parameter delta and Renyi divergences."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .channels import Channel, channel_state_rep, rep_layout
from .errors import DimensionError, PSDViolation
from .qudit import DensityMatrix, PureState, SystemLayout, partial_trace, sqrtm_psd
from .regions import Regions

CLIP_TOL = 1e-9
EIG_FLOOR = 1e-12

State = Union[PureState, DensityMatrix]


def _matrix(rho) -> np.ndarray:
    if isinstance(rho, PureState):
        return rho.to_density().matrix
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    return np.asarray(rho, dtype=np.complex128)


def spectrum(rho) -> np.ndarray:
    """Eigenvalues with ``[-1e-9, 0)`` clipped to zero; more negative values raise."""
    m = _matrix(rho)
    w = np.linalg.eigvalsh((m + m.conj().T) / 2)
    if w.min(initial=0.0) < -CLIP_TOL:
        raise PSDViolation(f"eigenvalue {w.min():.3g} below -{CLIP_TOL}")
    return np.clip(w, 0.0, None)


def renyi2(rho) -> float:
    """``-log2 Tr rho^2``."""
    if isinstance(rho, PureState):
        return 0.0
    m = _matrix(rho)
    return float(-np.log2(np.real(np.vdot(m, m))))


def von_neumann(rho) -> float:
    w = spectrum(rho)
    w = w[w > EIG_FLOOR]
    return float(-np.sum(w * np.log2(w)))


def _regions_of(state: State, x: Sequence[str], y: Sequence[str]) -> tuple[list, list]:
    x = [x] if isinstance(x, str) else list(x)
    y = [y] if isinstance(y, str) else list(y)
    if set(x) & set(y):
        raise ValueError(f"regions {x} and {y} overlap")
    state.layout.indices(x + y)
    return x, y


def _entropy_of(state: State, names: Sequence[str], fn) -> float:
    return fn(partial_trace(state, names))


def mutual_info_renyi2(state: State, x: Sequence[str], y: Sequence[str]) -> float:
    """``S2_X + S2_Y - S2_XY``."""
    x, y = _regions_of(state, x, y)
    return (_entropy_of(state, x, renyi2) + _entropy_of(state, y, renyi2)
            - _entropy_of(state, x + y, renyi2))


def mutual_info_vn(state: State, x: Sequence[str], y: Sequence[str]) -> float:
    x, y = _regions_of(state, x, y)
    return (_entropy_of(state, x, von_neumann) + _entropy_of(state, y, von_neumann)
            - _entropy_of(state, x + y, von_neumann))


@dataclass(frozen=True)
class EntropyReport:
    """Renyi-2 / von Neumann entropies of a state on ``R, C, D, B'``."""

    renyi2: dict
    von_neumann: dict
    mutual_info_renyi2: float
    mutual_info_vn: float
    otoc_exponent: float
    delta: float
    delta_alt: float

    def as_dict(self) -> dict:
        return {
            "renyi2": dict(self.renyi2),
            "von_neumann": dict(self.von_neumann),
            "I2_R_BpD": self.mutual_info_renyi2,
            "I_R_BpD": self.mutual_info_vn,
            "otoc_exponent": self.otoc_exponent,
            "delta": self.delta,
        }


_REGIONS = {"R": ["R"], "C": ["C"], "D": ["D"], "B'": ["B'"], "B'D": ["D", "B'"],
            "RB'D": ["R", "D", "B'"]}


def entropy_report(state: State) -> EntropyReport:
    """Entropies entering the averaged-OTOC identities for a state representation.

    ``otoc_exponent`` is ``S2_B'D + S2_D - S2_B'``; ``delta`` is
    ``2^(I2(R, B'D) - otoc_exponent)`` and ``delta_alt`` is ``2^(S2_C - S2_RB'D)``.
    """
    r2 = {k: _entropy_of(state, v, renyi2) for k, v in _REGIONS.items()}
    vn = {k: _entropy_of(state, v, von_neumann) for k, v in _REGIONS.items()}
    i2 = r2["R"] + r2["B'D"] - r2["RB'D"]
    ivn = vn["R"] + vn["B'D"] - vn["RB'D"]
    expo = r2["B'D"] + r2["D"] - r2["B'"]
    return EntropyReport(r2, vn, i2, ivn, expo, float(2.0 ** (i2 - expo)),
                         float(2.0 ** (r2["C"] - r2["RB'D"])))


def noise_delta(q: Channel, regions: Regions, tol: float = 1e-9) -> float:
    """Ratio of the scrambling-only decay to the total decay of the averaged OTOC.

    The mutual-information form is returned. The ``2^(S2_C - S2_RB'D)`` form
    relies on ``S2_C + S2_D`` being maximal, which holds for unital channels
    only, so the two are required to agree to ``tol`` exactly in that case.
    """
    rep = entropy_report(channel_state_rep(q, regions))
    if q.is_unital() and abs(rep.delta - rep.delta_alt) > tol:
        raise ArithmeticError(f"delta routes disagree: {rep.delta!r} vs {rep.delta_alt!r}")
    return rep.delta


def _support_projector(g: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh((g + g.conj().T) / 2)
    if w.min(initial=0.0) < -CLIP_TOL:
        raise PSDViolation(f"eigenvalue {w.min():.3g} below -{CLIP_TOL}")
    keep = w > tol
    return w[keep], v[:, keep], v[:, ~keep]


def _check_support(f: np.ndarray, null: np.ndarray, allow_singular: bool, tol: float):
    if null.shape[1] == 0:
        return
    if not allow_singular:
        raise ValueError("g is singular; pass allow_singular=True to work on its support")
    leak = np.linalg.norm(null.conj().T @ f @ null)
    if leak > tol:
        raise ValueError("support of f is not contained in the support of g")


def sandwiched_renyi2_divergence(f: np.ndarray, g: np.ndarray, allow_singular: bool = False,
                                 tol: float = 1e-12) -> float:
    """``log2((1/Tr f) Tr[(g^{-1/4} f g^{-1/4})^2])``.

    ``g`` need not have unit trace. A singular ``g`` is only accepted with
    ``allow_singular=True``, in which case inverse powers act on its support.
    """
    f = np.asarray(f, dtype=np.complex128)
    g = np.asarray(g, dtype=np.complex128)
    if f.shape != g.shape:
        raise DimensionError(f"shapes {f.shape} and {g.shape} differ")
    w, v, null = _support_projector(g, tol)
    _check_support(f, null, allow_singular, 1e-9)
    gq = (v * w ** -0.25) @ v.conj().T
    x = gq @ f @ gq
    return float(np.log2(np.real(np.vdot(x, x)) / np.real(np.trace(f))))


def relative_entropy(f: np.ndarray, g: np.ndarray, allow_singular: bool = False,
                     tol: float = 1e-12) -> float:
    """``(1/Tr f) Tr[f (log2 f - log2 g)]``, the alpha -> 1 limit of the sandwiched family."""
    f = np.asarray(f, dtype=np.complex128)
    g = np.asarray(g, dtype=np.complex128)
    w, v, null = _support_projector(g, tol)
    _check_support(f, null, allow_singular, 1e-9)
    log_g = (v * np.log2(w)) @ v.conj().T
    wf, vf = np.linalg.eigh((f + f.conj().T) / 2)
    wf = np.clip(wf, 0.0, None)
    pos = wf > EIG_FLOOR
    f_log_f = float(np.sum(wf[pos] * np.log2(wf[pos])))
    return (f_log_f - float(np.real(np.trace(f @ log_g)))) / float(np.real(np.trace(f)))


def finite_temp_state_rep(u: np.ndarray, rho_a: np.ndarray, rho_b: np.ndarray,
                          regions: Regions) -> PureState:
    """State representation with each EPR dot replaced by a density-matrix square root.

    Registers ``R, C, D, B'``; the inputs A and B carry ``rho_a`` and ``rho_b``.
    """
    sa, sb = _roots(rho_a, rho_b, regions)
    u4 = regions.canonical(u).reshape(regions.d_C, regions.d_D, regions.d_A, regions.d_B)
    psi = np.einsum("ar,cdab,bq->rcdq", sa, u4, sb)
    return PureState(rep_layout(regions), psi.ravel())


def _roots(rho_a, rho_b, regions: Regions) -> tuple[np.ndarray, np.ndarray]:
    rho_a = np.asarray(rho_a, dtype=np.complex128)
    rho_b = np.asarray(rho_b, dtype=np.complex128)
    if rho_a.shape != (regions.d_A,) * 2 or rho_b.shape != (regions.d_B,) * 2:
        raise DimensionError("rho_A / rho_B do not match the region dimensions")
    for r in (rho_a, rho_b):
        if abs(np.trace(r) - 1) > 1e-9:
            raise ValueError("input density matrices must have unit trace")
    return sqrtm_psd(rho_a), sqrtm_psd(rho_b)


@dataclass(frozen=True)
class FiniteTempReport:
    """Thermofield-double projection amplitude and the information bound it implies.

    ``amplitude`` is the projection probability; ``bound = -log2(amplitude)``;
    ``mutual_info`` is the von Neumann ``I(A, BD)``; ``divergence_form`` is the
    amplitude rebuilt from the marginals as ``2^{D2}``; ``d1`` the relative
    entropy counterpart; ``output_mutual_info`` is ``I(C:D)`` of the evolved
    input ensemble (zero when the output ensemble factorizes).
    """

    amplitude: float
    bound: float
    mutual_info: float
    divergence_form: float
    d2: float
    d1: float
    output_mutual_info: float

    @property
    def holds(self) -> bool:
        return self.mutual_info >= self.bound - 1e-9

    @property
    def output_factorized(self) -> bool:
        return self.output_mutual_info < 1e-9


def finite_temp_amplitude(u: np.ndarray, rho_a: np.ndarray, rho_b: np.ndarray, regions: Regions,
                          rho_d_target: np.ndarray | None = None) -> FiniteTempReport:
    """Project ``DD'`` of the doubled finite-temperature circuit onto a thermofield double.

    The doubled state uses ``rho_a^{1/2}`` on ``RA``, ``rho_b^{1/2}`` on ``BB'`` and
    ``(rho_a^{1/2})*`` on ``A'R'``. The target defaults to the D marginal of
    ``U (rho_a (x) rho_b) U^dag``. When the output ensemble factorizes the
    bound ``I(A, BD) >= -log2 P`` is guaranteed and checked here.
    """
    u = np.asarray(u, dtype=np.complex128)
    sa, sb = _roots(rho_a, rho_b, regions)
    dc, dd = regions.d_C, regions.d_D
    u4 = regions.canonical(u).reshape(dc, dd, regions.d_A, regions.d_B)
    rho_cd = regions.canonical(u) @ np.kron(rho_a, rho_b) @ regions.canonical(u).conj().T
    cd = DensityMatrix(SystemLayout((("C", dc), ("D", dd))), rho_cd)
    if rho_d_target is None:
        rho_d_target = partial_trace(cd, ["D"]).matrix
    st = sqrtm_psd(np.asarray(rho_d_target, dtype=np.complex128))
    amp = np.einsum("ar,cdab,bq,CDpq,pR,dD->rcCR", sa, u4, sb, u4.conj(), sa.conj(), st.conj(),
                    optimize=True)
    p = float(np.sum(np.abs(amp) ** 2))

    psi = finite_temp_state_rep(u, rho_a, rho_b, regions)
    rho_bd = partial_trace(psi, ["D", "B'"]).matrix.reshape(dd, regions.d_B, dd, regions.d_B)
    rho_bd = rho_bd.transpose(1, 0, 3, 2).reshape(dd * regions.d_B, -1)
    rb = partial_trace(psi, ["B'"]).matrix
    rd = partial_trace(psi, ["D"]).matrix
    wd, vd = np.linalg.eigh(rd)
    g = np.kron(rb, (vd / wd) @ vd.conj().T)
    d2 = sandwiched_renyi2_divergence(rho_bd, g)
    d1 = relative_entropy(rho_bd, g)
    mi = mutual_info_vn(psi, ["R"], ["D", "B'"])
    icd = von_neumann(partial_trace(cd, ["C"])) + von_neumann(partial_trace(cd, ["D"])) - von_neumann(cd)
    report = FiniteTempReport(p, float(-np.log2(p)), mi, float(2.0 ** d2), d2, d1, icd)
    if report.output_factorized and not report.holds:
        raise ArithmeticError(f"information bound violated: I={mi!r} < -log2 P={report.bound!r}")
    return report
