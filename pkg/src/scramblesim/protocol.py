"""Teleportation-based decoding on six registers ``R, C, D, D', C', R'``.

Alice's reference ``R`` is entangled with the input ``A``; Bob holds an EPR
partner ``B'`` of ``B`` and a second pair ``A'R'``. The forward evolution maps
``AB`` to ``CD``, the mirrored (conjugate) evolution maps ``B'A'`` to ``D'C'``.
Bob projects ``DD'`` onto an EPR pair and checks whether ``R'`` now holds
Alice's half.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channels import (Channel, CoherentPair, EvolutionModel, NoisyChannel, Unitary,
                       apply_channel_on, as_evolution, unitary_channel, unitary_state_rep)
from .entropy import mutual_info_renyi2, mutual_info_vn, noise_delta
from .errors import DimensionError, NotCliffordBehavior, PostSelectionError
from .otoc import otoc_avg, otoc_channel_avg, otoc_coherent, otoc_coherent_avg, otoc_table
from .qudit import (DensityMatrix, PureState, SystemLayout, apply_on, epr_vector, is_unitary,
                    partial_trace, permute_registers)
from .regions import Regions, wire_pair_to_site
from .weyl import WeylOperator, decompose_in_weyl, enumerate_weyl

P_MIN = 1e-14
SPREAD_TOL = 0.05
RENYI_VN_GAP = 0.1
REGISTERS = ("R", "C", "D", "D'", "C'", "R'")


@dataclass(frozen=True)
class ProtocolConfig:
    """One decoding experiment.

    Parameters
    ----------
    evolution : Unitary, NoisyChannel, CoherentPair or ndarray
        Forward evolution and its mirror.
    regions : Regions
        Site dims and the choice of A (input) and D (projected output).
    psi : ndarray, optional
        Fixed input state on A; when given, ``R`` is dropped.
    b_basis : int, optional
        Replace Bob's ``BB'`` pair by the classical copy ``|b>|b>`` of a
        computational basis state of B.
    seed : int
        Recorded in reports only; the protocol itself is deterministic.
    """

    evolution: EvolutionModel
    regions: Regions
    psi: np.ndarray | None = None
    b_basis: int | None = None
    seed: int = 0

    def __post_init__(self):
        evo = as_evolution(self.evolution, self.regions.in_dims)
        object.__setattr__(self, "evolution", evo)
        dim = _evolution_dim(evo)
        if dim != self.regions.d:
            raise ValueError(f"evolution of dim {dim} for regions of dim {self.regions.d}")
        if self.psi is not None:
            psi = np.asarray(self.psi, dtype=np.complex128).ravel()
            if psi.shape != (self.regions.d_A,):
                raise ValueError(f"fixed state has {psi.size} amplitudes, d_A = {self.regions.d_A}")
            if abs(np.linalg.norm(psi) - 1) > 1e-10:
                raise ValueError("fixed input state is not normalized")
            object.__setattr__(self, "psi", psi)
        if self.b_basis is not None and not 0 <= self.b_basis < self.regions.d_B:
            raise ValueError(f"b_basis {self.b_basis} outside range(d_B = {self.regions.d_B})")

    @property
    def mode(self) -> str:
        if isinstance(self.evolution, NoisyChannel):
            return "channel"
        if isinstance(self.evolution, CoherentPair):
            return "coherent"
        return "unitary"

    def with_state(self, psi: np.ndarray | None) -> "ProtocolConfig":
        return ProtocolConfig(self.evolution, self.regions, psi, self.b_basis, self.seed)


def _evolution_dim(evo: EvolutionModel) -> int:
    if isinstance(evo, NoisyChannel):
        return evo.q.dim
    return evo.u.shape[0]


def regions_for_pair(in_dims: Sequence[int], pair: Sequence[int], A: Sequence[int] = (0,)) -> Regions:
    """Regions whose D is the output site addressed by a mirrored wire pair."""
    return Regions(tuple(in_dims), A=tuple(A), D=(wire_pair_to_site(pair, len(in_dims)),))


def _canonical_channel(q: Channel, regions: Regions) -> Channel:
    dep = None
    if q.depolarizing is not None:
        u, p = q.depolarizing
        dep = (regions.canonical(u), p)
    return Channel(tuple(regions.canonical(k) for k in q.kraus_ops), (regions.d,), dep)


def _initial_state(regions: Regions, psi: np.ndarray | None, b_basis: int | None = None) -> PureState:
    """Registers ``[R,] X, Y, R'``: X = (A, B) and Y = (A', B') before the evolution."""
    da, db = regions.d_A, regions.d_B
    if b_basis is None:
        bb = np.eye(db) / np.sqrt(db)
    else:
        bb = np.zeros((db, db))
        bb[b_basis, b_basis] = 1.0
    if psi is None:
        t = np.einsum("ra,bq,pR->rabpqR", np.eye(da), bb, np.eye(da)) / da
        layout = SystemLayout((("R", da), ("X", da * db), ("Y", da * db), ("R'", da)))
    else:
        t = np.einsum("a,bq,pR->abpqR", psi, bb, np.eye(da)) / np.sqrt(da)
        layout = SystemLayout((("X", da * db), ("Y", da * db), ("R'", da)))
    return PureState(layout, t.ravel())


def _final_layout(regions: Regions, with_r: bool) -> SystemLayout:
    regs = [("C", regions.d_C), ("D", regions.d_D), ("D'", regions.d_D), ("C'", regions.d_C),
            ("R'", regions.d_A)]
    if with_r:
        regs.insert(0, ("R", regions.d_A))
    return SystemLayout(tuple(regs))


def _split_outputs(state, regions: Regions):
    """Reinterpret X, Y as (C, D), (C', D') and reorder to ``R, C, D, D', C', R'``."""
    with_r = "R" in state.layout.names
    dc, dd = regions.d_C, regions.d_D
    split = []
    for n, d in state.layout.registers:
        if n == "X":
            split += [("C", dc), ("D", dd)]
        elif n == "Y":
            split += [("C'", dc), ("D'", dd)]
        else:
            split.append((n, d))
    lay = SystemLayout(tuple(split))
    if isinstance(state, PureState):
        s = PureState(lay, state.amplitudes, normalized=state.normalized)
    else:
        s = DensityMatrix(lay, state.matrix, normalized=state.normalized)
    return permute_registers(s, _final_layout(regions, with_r).names)


def build_psi_in(config: ProtocolConfig):
    """The state just before Bob's projection; density matrix in channel mode."""
    regions = config.regions
    init = _initial_state(regions, config.psi, config.b_basis)
    evo = config.evolution
    if isinstance(evo, NoisyChannel):
        q = _canonical_channel(evo.q, regions)
        rho = init.to_density()
        rho = apply_channel_on(rho, q, ["X"])
        rho = apply_channel_on(rho, q, ["Y"], conjugate=True)
        return _split_outputs(rho, regions)
    u = regions.canonical(evo.u)
    v = regions.canonical(evo.v) if isinstance(evo, CoherentPair) else u
    s = apply_on(init, u, ["X"])
    s = apply_on(s, v.conj(), ["Y"])
    return _split_outputs(s, regions)


def _pair_vector(d: int, label: tuple[int, int] = (0, 0)) -> np.ndarray:
    w = WeylOperator((d,), (label,)).matrix
    return (w @ np.eye(d)).ravel() / np.sqrt(d)


def contract_pair(state, pair: tuple[str, str], vec: np.ndarray):
    """Apply ``<vec|`` on ``pair``; returns the unnormalized state on the other registers."""
    lay = state.layout
    i, j = lay.indices(pair)
    rest = [k for k in range(len(lay)) if k not in (i, j)]
    rest_layout = SystemLayout(tuple(lay.registers[k] for k in rest))
    v = vec.reshape(lay.dims[i], lay.dims[j]).conj()
    if isinstance(state, PureState):
        t = np.moveaxis(state.tensor, [i, j], [0, 1])
        out = np.tensordot(v, t, axes=([0, 1], [0, 1]))
        return PureState(rest_layout, out.ravel(), normalized=False)
    n = len(lay)
    t = np.moveaxis(state.tensor, [i, j, n + i, n + j], [0, 1, 2, 3])
    out = np.tensordot(v, t, axes=([0, 1], [0, 1]))
    out = np.tensordot(v.conj(), out, axes=([0, 1], [0, 1]))
    m = out.reshape(rest_layout.total_dim, rest_layout.total_dim)
    return DensityMatrix(rest_layout, m, normalized=False)


def _weight(state) -> float:
    if isinstance(state, PureState):
        return float(np.real(np.vdot(state.amplitudes, state.amplitudes)))
    return float(np.real(np.trace(state.matrix)))


def _normalized(state):
    w = _weight(state)
    if isinstance(state, PureState):
        return PureState(state.layout, state.amplitudes / np.sqrt(w))
    m = state.matrix / w
    return DensityMatrix(state.layout, (m + m.conj().T) / 2)


def post_select(state, pair=("D", "D'"), label=(0, 0)):
    """Probability of the Bell outcome ``label`` on ``pair`` and the normalized remainder."""
    d = state.layout.dims[state.layout.index(pair[0])]
    branch = contract_pair(state, pair, _pair_vector(d, label))
    p = _weight(branch)
    if p < P_MIN:
        raise PostSelectionError(f"projection probability {p:.3g} below {P_MIN}")
    return p, _normalized(branch)


def bell_probabilities(state, pair=("D", "D'")) -> dict:
    d = state.layout.dims[state.layout.index(pair[0])]
    return {lab: _weight(contract_pair(state, pair, _pair_vector(d, lab)))
            for lab in ((a, b) for a in range(d) for b in range(d))}


def epr_fidelity(state, pair=("R", "R'")) -> float:
    d = state.layout.dims[state.layout.index(pair[0])]
    return _weight(contract_pair(state, pair, _pair_vector(d)))


def state_fidelity(state, psi: np.ndarray, register: str = "R'") -> float:
    """``<psi| rho_reg |psi>`` of the teleported register."""
    rho = partial_trace(state, [register]).matrix
    return float(np.real(np.vdot(psi, rho @ psi)))


def eta_of_error(e: np.ndarray, regions: Regions) -> float:
    """Weight of the error ``E`` (on the output space) that acts trivially on D.

    Sum over Weyl ``P`` on C of ``|alpha_{P, I}|^2`` in ``E = sum alpha_{P,Q} P (x) Q``.
    """
    e = np.asarray(e, dtype=np.complex128)
    if not is_unitary(e):
        raise ValueError("coherent error must be unitary")
    ec = regions.canonical_output(e)
    c_dims = tuple(regions.out_dims[i] for i in regions.C)
    dec = decompose_in_weyl(ec, c_dims + regions.d_dims, split=len(c_dims))
    ident = tuple((0, 0) for _ in regions.d_dims)
    return float(sum(abs(v) ** 2 for lab, v in dec.coeffs.items() if dec.pair(lab)[1] == ident))


def eta_projector_form(e: np.ndarray, regions: Regions) -> float:
    """``Tr[(I (x) Pi_DD') E (I/d_C (x) Pi_DD') E^dag]`` with ``E`` acting on ``C D``."""
    ec = regions.canonical_output(np.asarray(e, dtype=np.complex128))
    dc, dd = regions.d_C, regions.d_D
    pi = np.outer(epr_vector(dd), epr_vector(dd).conj())
    full = np.kron(ec, np.eye(dd))
    proj = np.kron(np.eye(dc), pi)
    return float(np.real(np.trace(proj @ full @ (proj / dc) @ full.conj().T)))


def coherent_otoc_bound(p_epr: float, eta: float) -> float | None:
    """``P / (2 eta - 1)`` when ``eta > 1/2``, otherwise ``None`` (not applicable)."""
    if not 0.0 <= eta <= 1.0 + 1e-12:
        raise ValueError(f"eta = {eta} outside [0, 1]")
    return p_epr / (2 * eta - 1) if eta > 0.5 else None


def beta_coefficient(u: np.ndarray, v: np.ndarray, o_d: np.ndarray, regions: Regions) -> complex:
    """Overlap ``(1/d) Tr(O_D(t) V^dag O_D^dag V)``: the OTOC with a trivial input operator."""
    return otoc_coherent(u, v, np.eye(regions.d_A), o_d, regions)


def coherent_cross_terms(u: np.ndarray, v: np.ndarray, regions: Regions) -> float:
    """Part of the measured coherent OTOC not carried by ``beta_{I, O_D}`` times the true OTOC.

    The bound ``<OTOC> <= P / (2 eta - 1)`` drops these terms; it is exact when they
    vanish, which happens for Clifford ``U`` (distinct Paulis stay distinct).
    """
    table = otoc_table(u, regions)
    total = 0.0 + 0.0j
    for j, w in enumerate(enumerate_weyl(regions.d_dims)):
        total += beta_coefficient(u, v, w.matrix, regions) * np.mean(table[:, j])
    return float(abs(otoc_coherent_avg(u, v, regions) - total / regions.d_D**2))


def fidelity_mi_bound(f_epr: float, d_r: int) -> float:
    """Lower bound ``2 log2 d_R + 2 log2 F`` on the reference's mutual information."""
    if f_epr <= 0:
        raise ValueError("fidelity must be positive")
    return 2 * math.log2(d_r) + 2 * math.log2(f_epr)


def fidelity_otoc_bound(f_epr: float, d_r: int) -> float:
    """Upper bound ``1 / (d_R^2 F^2)`` on the averaged OTOC."""
    if f_epr <= 0:
        raise ValueError("fidelity must be positive")
    return 1.0 / (d_r**2 * f_epr**2)


@dataclass(frozen=True)
class DecodingReport:
    mode: str
    p_epr: float
    f_epr: float
    otoc: float
    delta: float | None = None
    delta_measured: float | None = None
    eta: float | None = None
    eta_measured: float | None = None
    undo: float | None = None
    i2: float | None = None
    i_vn: float | None = None
    sigma_deviation: float | None = None
    bounds: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def pf(self) -> float:
        return self.p_epr * self.f_epr

    def as_dict(self) -> dict:
        out = {
            "mode": self.mode, "P_epr": self.p_epr, "F_epr": self.f_epr, "PF": self.pf,
            "otoc": self.otoc, "delta": self.delta, "delta_measured": self.delta_measured,
            "eta": self.eta, "eta_measured": self.eta_measured, "undo": self.undo,
            "I2_R_BpD": self.i2, "I_R_BpD": self.i_vn, "sigma_deviation": self.sigma_deviation,
        }
        out.update({f"bound_{k}": v for k, v in self.bounds.items()})
        out.update(self.metadata)
        return out


def _true_otoc(config: ProtocolConfig) -> float:
    evo, regions = config.evolution, config.regions
    if isinstance(evo, NoisyChannel):
        return otoc_channel_avg(evo.q, regions)
    return otoc_avg(evo.u, regions)


def _state_rep(config: ProtocolConfig):
    from .channels import channel_state_rep

    evo, regions = config.evolution, config.regions
    if isinstance(evo, NoisyChannel):
        return channel_state_rep(evo.q, regions)
    return unitary_state_rep(evo.u, regions)


def run_protocol(config: ProtocolConfig) -> DecodingReport:
    """Post-selected decoding in reference (EPR) mode."""
    if config.psi is not None:
        raise ValueError("run_protocol uses the reference mode; see state_decode for fixed states")
    regions = config.regions
    psi_in = build_psi_in(config)
    p, out = post_select(psi_in)
    f = epr_fidelity(out)
    da = regions.d_A
    rep = _state_rep(config)
    i2 = mutual_info_renyi2(rep, ["R"], ["D", "B'"])
    ivn = mutual_info_vn(rep, ["R"], ["D", "B'"])
    otoc = _true_otoc(config)
    rr = partial_trace(out, ["R'"]).matrix
    sigma_dev = float(np.max(np.abs(rr - np.eye(da) / da)))
    kw = {}
    if config.mode == "channel":
        kw["delta"] = noise_delta(config.evolution.q, regions)
        kw["delta_measured"] = da**2 * p * f
    elif config.mode == "coherent":
        kw["eta"] = eta_of_error(config.evolution.error, regions)
        kw["eta_measured"] = da**2 * p * f
    else:
        kw["delta"] = noise_delta(unitary_channel(config.evolution.u, regions.in_dims), regions)
        kw["delta_measured"] = da**2 * p * f
        kw["undo"] = _undo_value(psi_in, p)
    bounds = {
        "mi_lower": fidelity_mi_bound(f, da) if f > 0 else None,
        "otoc_upper": fidelity_otoc_bound(f, da) if f > 0 else None,
    }
    extra = {}
    if kw.get("eta") is not None:
        bounds["otoc_coherent_upper"] = coherent_otoc_bound(p, kw["eta"])
        extra["coherent_cross_terms"] = coherent_cross_terms(config.evolution.u,
                                                             config.evolution.v, regions)
    meta = {
        "seed": config.seed, "in_dims": list(regions.in_dims), "A": list(regions.A),
        "D": list(regions.D), "d_A": da, "d_D": regions.d_D,
        "renyi_vn_flag": bool(abs(i2 - ivn) > RENYI_VN_GAP),
        **extra,
    }
    return DecodingReport(config.mode, p, f, otoc, i2=i2, i_vn=ivn, sigma_deviation=sigma_dev,
                          bounds=bounds, metadata=meta, **kw)


def _undo_value(psi_in, p: float) -> float:
    branch = contract_pair(psi_in, ("D", "D'"), _pair_vector(psi_in.layout.dims[2]))
    branch = contract_pair(branch, ("C", "C'"), _pair_vector(branch.layout.dims[1]))
    branch = contract_pair(branch, ("R", "R'"), _pair_vector(branch.layout.dims[0]))
    return _weight(branch) / p


def undo_check(config: ProtocolConfig) -> float:
    """``<Psi_out| Pi_RR' Pi_CC' Pi_DD' |Psi_out>``: how close the doubled circuit is to the identity."""
    if config.mode != "unitary" or config.psi is not None:
        raise ValueError("undo_check needs a unitary evolution in reference mode")
    psi_in = build_psi_in(config)
    p, _ = post_select(psi_in)
    return _undo_value(psi_in, p)


def state_decode(config: ProtocolConfig, psi: np.ndarray | None = None) -> tuple[float, float]:
    """``(P_psi, F_psi)`` for a fixed input state on A."""
    if psi is not None:
        config = config.with_state(psi)
    if config.psi is None:
        raise ValueError("state_decode needs a fixed input state")
    p, out = post_select(build_psi_in(config))
    return p, state_fidelity(out, config.psi)


def mub_states(d: int) -> list[np.ndarray]:
    """Complete set of mutually unbiased bases for prime ``d`` (a state 2-design).

    The computational basis plus the eigenbases of ``X Z^b`` for ``b = 0..d-1``.
    """
    if d < 2 or any(d % k == 0 for k in range(2, int(math.isqrt(d)) + 1)):
        raise ValueError(f"mutually unbiased bases are built here for prime d only, got {d}")
    states = list(np.eye(d, dtype=np.complex128))
    for b in range(d):
        m = WeylOperator((d,), ((1, b),)).matrix
        _, vecs = np.linalg.eig(m)
        q, _ = np.linalg.qr(vecs)
        states += [q[:, k] for k in range(d)]
    return states


@dataclass(frozen=True)
class StateDecodingSummary:
    p: tuple
    f: tuple
    mean_pf: float
    spread: float

    @property
    def reliable(self) -> bool:
        return self.spread <= SPREAD_TOL


def state_decoding_summary(config: ProtocolConfig) -> StateDecodingSummary:
    """Run :func:`state_decode` over a state 2-design on A."""
    ps, fs = [], []
    for psi in mub_states(config.regions.d_A):
        p, f = state_decode(config, psi)
        ps.append(p)
        fs.append(f)
    pf = float(np.mean(np.array(ps) * np.array(fs)))
    return StateDecodingSummary(tuple(ps), tuple(fs), pf, float(max(fs) - min(fs)))


@dataclass(frozen=True)
class BellCorrection:
    outcome: tuple
    c_label: tuple
    r_label: tuple
    fidelity: float


def clifford_bell_decode(u: np.ndarray, regions: Regions, outcome: Sequence[int],
                         tol: float = 1e-9) -> BellCorrection:
    """Weyl correction on ``C'R'`` that maps the Bell branch ``outcome`` onto the EPR branch.

    ``outcome = (a, b)`` labels ``(X^a Z^b (x) I)|EPR>`` on ``DD'`` (single-site D).
    """
    outcome = tuple(int(x) for x in outcome)
    psi_in = build_psi_in(ProtocolConfig(Unitary(u, regions.in_dims), regions))
    if len(regions.D) != 1:
        raise DimensionError("Bell outcomes are labelled for a single-site D")
    _, target = post_select(psi_in)
    pw, branch = post_select(psi_in, label=outcome)
    c_dims = tuple(regions.out_dims[i] for i in regions.C)
    t = target.amplitudes
    best = None
    for pc in enumerate_weyl(c_dims):
        moved = apply_on(branch, pc.matrix, ["C'"])
        for qr in enumerate_weyl(regions.a_dims):
            cand = apply_on(moved, qr.matrix, ["R'"])
            fid = float(abs(np.vdot(t, cand.amplitudes)) ** 2)
            if best is None or fid > best.fidelity:
                best = BellCorrection(outcome, pc.label, qr.label, fid)
            if fid > 1 - tol:
                return best
    raise NotCliffordBehavior(
        f"no Weyl correction for outcome {outcome} (best fidelity {best.fidelity:.6f}, branch weight {pw:.3g})")
