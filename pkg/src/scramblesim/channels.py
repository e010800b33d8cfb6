"""Kraus channels, evolution models and state representations of evolutions.

A channel acts on a register of sites with dims ``dims``. Depolarizing
channels also remember ``(U, p)`` so that they can be applied as
``(1 - p) U rho U^dag + p Tr(rho) I / d`` without looping over ``d^2`` Kraus
operators.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import DimensionError
from .qudit import (ATOL, DensityMatrix, PureState, SystemLayout, _apply_to_axes,
                    sqrtm_psd)
from .regions import Regions
from .weyl import enumerate_weyl


def _as_dims(dim: int, dims: Sequence[int] | None) -> tuple[int, ...]:
    if dims is None:
        return (dim,)
    dims = tuple(int(x) for x in dims)
    if math.prod(dims) != dim:
        raise DimensionError(f"site dims {dims} do not multiply to {dim}")
    return dims


@dataclass(frozen=True)
class Channel:
    """CPTP map ``rho -> sum_k K rho K^dag`` on sites with dims ``dims``.

    Parameters
    ----------
    kraus_ops : tuple of ndarray
        Square matrices of side ``prod(dims)``.
    dims : tuple of int
        Site dimensions (used for Weyl sums and region bookkeeping).
    depolarizing : tuple, optional
        ``(U, p)`` when the channel is a depolarized unitary; enables the
        closed-form application path.
    """

    kraus_ops: tuple
    dims: tuple[int, ...]
    depolarizing: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=np.complex128) for k in self.kraus_ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        dims = _as_dims(d, self.dims)
        for k in ops:
            if k.shape != (d, d):
                raise DimensionError(f"Kraus operator of shape {k.shape}, expected {(d, d)}")
            k.flags.writeable = False
        tp = sum(k.conj().T @ k for k in ops)
        if not np.allclose(tp, np.eye(d), atol=ATOL):
            raise ValueError("Kraus operators are not trace preserving")
        object.__setattr__(self, "kraus_ops", ops)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    def is_unitary(self) -> bool:
        return len(self.kraus_ops) == 1

    def is_unital(self, tol: float = 1e-9) -> bool:
        """True when the channel maps the identity to itself."""
        out = sum(k @ k.conj().T for k in self.kraus_ops)
        return bool(np.allclose(out, np.eye(self.dim), atol=tol))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=np.complex128)
        if self.depolarizing is not None:
            u, p = self.depolarizing
            out = (1 - p) * (u @ rho @ u.conj().T)
            return out + p * np.trace(rho) * np.eye(self.dim) / self.dim
        return sum(k @ rho @ k.conj().T for k in self.kraus_ops)

    def adjoint(self, op: np.ndarray) -> np.ndarray:
        """Heisenberg image ``sum_k K^dag O K``."""
        op = np.asarray(op, dtype=np.complex128)
        if self.depolarizing is not None:
            u, p = self.depolarizing
            out = (1 - p) * (u.conj().T @ op @ u)
            return out + p * np.trace(op) * np.eye(self.dim) / self.dim
        return sum(k.conj().T @ op @ k for k in self.kraus_ops)

    def superoperator(self) -> np.ndarray:
        """Row-major vectorized action, ``vec(Q(rho)) = S vec(rho)``."""
        return sum(np.kron(k, k.conj()) for k in self.kraus_ops)

    def conjugate(self) -> "Channel":
        dep = None
        if self.depolarizing is not None:
            u, p = self.depolarizing
            dep = (u.conj(), p)
        return Channel(tuple(k.conj() for k in self.kraus_ops), self.dims, dep)


def unitary_channel(u: np.ndarray, dims: Sequence[int] | None = None) -> Channel:
    u = np.asarray(u, dtype=np.complex128)
    return Channel((u,), _as_dims(u.shape[0], dims))


def depolarizing_channel(u: np.ndarray, p: float, dims: Sequence[int] | None = None) -> Channel:
    """``rho -> (1 - p) U rho U^dag + p Tr(rho) I / d`` as a Weyl-twirl Kraus set.

    Uses ``sum_W W X W^dag = d Tr(X) I`` over all ``d^2`` Weyl operators, so the
    identity term carries weight ``(1 - p) + p / d^2`` and every other Weyl
    operator ``p / d^2``. Zero-weight terms are dropped, hence ``p = 0`` yields
    the single operator ``U``.
    """
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing probability {p} outside [0, 1]")
    u = np.asarray(u, dtype=np.complex128)
    dims = _as_dims(u.shape[0], dims)
    d = u.shape[0]
    w0 = (1 - p) + p / d**2
    ops = [np.sqrt(w0) * u]
    if p > 0:
        amp = np.sqrt(p) / d
        ops += [amp * (w.matrix @ u) for w in enumerate_weyl(dims)[1:]]
    return Channel(tuple(ops), dims, depolarizing=(u, p))


def conjugate_channel(q: Channel) -> Channel:
    return q.conjugate()


@dataclass(frozen=True)
class Unitary:
    u: np.ndarray
    dims: tuple[int, ...] | None = None

    def __post_init__(self):
        u = np.array(self.u, dtype=np.complex128)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "dims", _as_dims(u.shape[0], self.dims))

    @property
    def forward(self) -> Channel:
        return unitary_channel(self.u, self.dims)

    @property
    def backward(self) -> Channel:
        return unitary_channel(self.u.conj(), self.dims)


@dataclass(frozen=True)
class NoisyChannel:
    q: Channel

    @property
    def dims(self) -> tuple[int, ...]:
        return self.q.dims

    @property
    def forward(self) -> Channel:
        return self.q

    @property
    def backward(self) -> Channel:
        return self.q.conjugate()


@dataclass(frozen=True)
class CoherentPair:
    """Forward evolution ``U`` and imperfect mirror ``V`` (the mirror applies ``V*``)."""

    u: np.ndarray
    v: np.ndarray
    dims: tuple[int, ...] | None = None

    def __post_init__(self):
        u = np.array(self.u, dtype=np.complex128)
        v = np.array(self.v, dtype=np.complex128)
        if u.shape != v.shape:
            raise DimensionError(f"U {u.shape} and V {v.shape} differ in shape")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "dims", _as_dims(u.shape[0], self.dims))

    @property
    def error(self) -> np.ndarray:
        """``E = V U^dag`` on the output space, so that ``V = E U``."""
        return self.v @ self.u.conj().T

    @property
    def forward(self) -> Channel:
        return unitary_channel(self.u, self.dims)

    @property
    def backward(self) -> Channel:
        return unitary_channel(self.v.conj(), self.dims)


EvolutionModel = Union[Unitary, NoisyChannel, CoherentPair]


def as_evolution(obj, dims: Sequence[int] | None = None) -> EvolutionModel:
    """Wrap a bare matrix or channel into an evolution model."""
    if isinstance(obj, (Unitary, NoisyChannel, CoherentPair)):
        return obj
    if isinstance(obj, Channel):
        return Unitary(obj.kraus_ops[0], obj.dims) if obj.is_unitary() else NoisyChannel(obj)
    return Unitary(np.asarray(obj), dims)


def rep_layout(regions: Regions) -> SystemLayout:
    return SystemLayout((("R", regions.d_A), ("C", regions.d_C),
                         ("D", regions.d_D), ("B'", regions.d_B)))


def _rep_vector(k: np.ndarray, regions: Regions) -> np.ndarray:
    k4 = regions.canonical(k).reshape(regions.d_C, regions.d_D, regions.d_A, regions.d_B)
    return np.transpose(k4, (2, 0, 1, 3)).ravel() / np.sqrt(regions.d_A * regions.d_B)


def unitary_state_rep(u: np.ndarray, regions: Regions) -> PureState:
    """``(I_R (x) U (x) I_B') |EPR>_RA |EPR>_BB'`` on registers ``R, C, D, B'``."""
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (regions.d, regions.d):
        raise DimensionError(f"unitary of shape {u.shape} for regions of dim {regions.d}")
    return PureState(rep_layout(regions), _rep_vector(u, regions))


def channel_state_rep(q: Channel, regions: Regions) -> DensityMatrix:
    """Channel applied to the ``A`` and ``B`` halves of two EPR pairs; registers ``R, C, D, B'``."""
    if q.dim != regions.d:
        raise DimensionError(f"channel of dim {q.dim} for regions of dim {regions.d}")
    layout = rep_layout(regions)
    if q.depolarizing is not None:
        u, p = q.depolarizing
        v = _rep_vector(u, regions)
        n = layout.total_dim
        m = (1 - p) * np.outer(v, v.conj()) + p * np.eye(n) / n
    else:
        vs = np.stack([_rep_vector(k, regions) for k in q.kraus_ops])
        m = vs.T @ vs.conj()
    return DensityMatrix(layout, (m + m.conj().T) / 2)


def thermofield_double(rho: np.ndarray | DensityMatrix, names: tuple[str, str] = ("S", "S'")) -> PureState:
    """Purification ``(rho^{1/2} (x) I) sum_j |jj>``.

    The first register has marginal ``rho``, the mirror register ``rho^T``.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if abs(np.trace(m) - 1.0) > 1e-9:
        raise ValueError("thermofield double needs a unit-trace density matrix")
    d = m.shape[0]
    root = sqrtm_psd(m)
    return PureState(SystemLayout(((names[0], d), (names[1], d))), root.ravel())


def apply_channel_on(rho: DensityMatrix, q: Channel, targets: Sequence[str],
                     conjugate: bool = False) -> DensityMatrix:
    """Apply ``q`` (or its entrywise conjugate) to ``targets`` of a density matrix."""
    layout = rho.layout
    idx = layout.indices(targets)
    if math.prod(layout.dims[i] for i in idx) != q.dim:
        raise DimensionError(f"channel of dim {q.dim} on targets {list(targets)}")
    if conjugate:
        q = q.conjugate()
    n = len(layout)
    t = rho.tensor
    cols = [i + n for i in idx]

    def sandwich(k):
        x = _apply_to_axes(t, k, idx)
        return _apply_to_axes(x, k.conj(), cols)

    if q.depolarizing is not None:
        u, p = q.depolarizing
        out = (1 - p) * sandwich(u)
        if p > 0:
            # replace the targets by I/d: trace them out, then tensor back in
            moved = np.moveaxis(t, idx + cols, list(range(2 * len(idx))))
            sub = moved.reshape((q.dim, q.dim) + moved.shape[2 * len(idx):])
            traced = np.trace(sub, axis1=0, axis2=1)
            full = np.multiply.outer(np.eye(q.dim) / q.dim, traced)
            full = full.reshape(moved.shape)
            out = out + p * np.moveaxis(full, list(range(2 * len(idx))), idx + cols)
    else:
        out = sum(sandwich(k) for k in q.kraus_ops)
    m = out.reshape(rho.matrix.shape)
    return DensityMatrix(layout, (m + m.conj().T) / 2, normalized=rho.normalized)
