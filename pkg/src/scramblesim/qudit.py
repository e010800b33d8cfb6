"""Dense multi-qudit states and register bookkeeping.

Index convention: the leftmost register of a :class:`SystemLayout` is the most
significant digit of the composite index, i.e. amplitudes reshape to
``layout.dims`` in C order.
"""
from __future__ import annotations

import math
import string
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DimensionError

ATOL = 1e-10


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SystemLayout:
    """Ordered registers ``(name, dim)``."""

    registers: tuple[tuple[str, int], ...]

    def __post_init__(self):
        regs = tuple((str(n), int(d)) for n, d in self.registers)
        names = [n for n, _ in regs]
        if len(set(names)) != len(names):
            raise ValueError(f"register names must be unique, got {names}")
        for n, d in regs:
            if d < 2:
                raise ValueError(f"register {n!r} has dimension {d} < 2")
        object.__setattr__(self, "registers", regs)

    @classmethod
    def of(cls, **dims: int) -> "SystemLayout":
        return cls(tuple(dims.items()))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.registers)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.registers)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def __len__(self):
        return len(self.registers)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no register named {name!r} in {self.names}") from None

    def indices(self, names: Iterable[str]) -> list[int]:
        if isinstance(names, str):
            names = [names]
        return [self.index(n) for n in names]

    def dim_of(self, names: Iterable[str]) -> int:
        return math.prod(self.dims[i] for i in self.indices(names))

    def sub(self, names: Iterable[str]) -> "SystemLayout":
        """Layout restricted to ``names``, in the order given."""
        return SystemLayout(tuple(self.registers[i] for i in self.indices(names)))

    def __add__(self, other: "SystemLayout") -> "SystemLayout":
        return SystemLayout(self.registers + other.registers)


@dataclass(frozen=True)
class PureState:
    layout: SystemLayout
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.shape != (self.layout.total_dim,):
            raise DimensionError(
                f"{amps.shape[0]} amplitudes for layout of dim {self.layout.total_dim}"
            )
        if self.normalized and abs(np.linalg.norm(amps) - 1.0) > ATOL:
            raise ValueError(f"state not normalized (norm {np.linalg.norm(amps)!r})")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "PureState":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return PureState(self.layout, self.amplitudes / n)

    def to_density(self) -> "DensityMatrix":
        v = self.amplitudes
        return DensityMatrix(self.layout, np.outer(v, v.conj()), normalized=self.normalized)

    def overlap(self, other: "PureState") -> complex:
        if other.layout != self.layout:
            raise DimensionError("overlap between states on different layouts")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    layout: SystemLayout
    matrix: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        m = _frozen(self.matrix)
        d = self.layout.total_dim
        if m.shape != (d, d):
            raise DimensionError(f"matrix shape {m.shape} for layout of dim {d}")
        if self.normalized:
            if abs(np.trace(m) - 1.0) > ATOL:
                raise ValueError(f"density matrix trace {np.trace(m)!r} != 1")
            if np.max(np.abs(m - m.conj().T), initial=0.0) > ATOL:
                raise ValueError("density matrix is not Hermitian")
        object.__setattr__(self, "matrix", m)

    @property
    def tensor(self) -> np.ndarray:
        return self.matrix.reshape(self.layout.dims * 2)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def normalize(self) -> "DensityMatrix":
        tr = np.trace(self.matrix).real
        if tr <= 0:
            raise ValueError("cannot normalize a matrix with non-positive trace")
        m = self.matrix / tr
        return DensityMatrix(self.layout, (m + m.conj().T) / 2)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def expectation(self, operator: np.ndarray) -> complex:
        return complex(np.trace(operator @ self.matrix))


State = Union[PureState, DensityMatrix]


def basis_state(layout: SystemLayout, digits: Sequence[int]) -> PureState:
    amps = np.zeros(layout.dims, dtype=np.complex128)
    amps[tuple(digits)] = 1.0
    return PureState(layout, amps)


def epr_state(d: int, names: tuple[str, str] = ("L", "R")) -> PureState:
    """Maximally entangled pair ``sum_j |j>|j> / sqrt(d)`` on two registers."""
    if d < 2:
        raise ValueError(f"invalid dimension {d}")
    return PureState(SystemLayout(((names[0], d), (names[1], d))), np.eye(d) / np.sqrt(d))


def tensor(*states: State) -> State:
    """Tensor product; the result is a density matrix if any factor is one."""
    layout = states[0].layout
    for s in states[1:]:
        layout = layout + s.layout
    if all(isinstance(s, PureState) for s in states):
        amps = states[0].amplitudes
        for s in states[1:]:
            amps = np.kron(amps, s.amplitudes)
        return PureState(layout, amps, normalized=all(s.normalized for s in states))
    mats = [s.to_density().matrix if isinstance(s, PureState) else s.matrix for s in states]
    m = mats[0]
    for x in mats[1:]:
        m = np.kron(m, x)
    return DensityMatrix(layout, m, normalized=all(s.normalized for s in states))


def _apply_to_axes(t: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract ``op`` into tensor ``t`` along ``axes`` (as a left multiplication)."""
    k = len(axes)
    moved = np.moveaxis(t, list(axes), list(range(k)))
    shape = moved.shape
    sub = math.prod(shape[:k])
    out = (op @ moved.reshape(sub, -1)).reshape(shape)
    return np.moveaxis(out, list(range(k)), list(axes))


def _check_op(layout: SystemLayout, operator: np.ndarray, targets) -> tuple[np.ndarray, list[int]]:
    idx = layout.indices(targets)
    if len(set(idx)) != len(idx):
        raise ValueError(f"repeated target registers {targets}")
    d = math.prod(layout.dims[i] for i in idx)
    op = np.asarray(operator, dtype=np.complex128)
    if op.shape != (d, d):
        raise DimensionError(f"operator of shape {op.shape} on targets of dim {d}")
    return op, idx


def apply_on(state: State, operator: np.ndarray, targets: Sequence[str],
             normalized: bool | None = None) -> State:
    """Apply ``operator`` to the ``targets`` registers, identity elsewhere.

    Density matrices are conjugated, ``O rho O^dagger``. The result is flagged
    unnormalized when ``operator`` is not unitary unless ``normalized`` is given.
    """
    op, idx = _check_op(state.layout, operator, targets)
    if normalized is None:
        normalized = state.normalized and np.allclose(op.conj().T @ op, np.eye(op.shape[0]), atol=ATOL)
    dims = state.layout.dims
    if isinstance(state, PureState):
        t = _apply_to_axes(state.tensor, op, idx)
        return PureState(state.layout, t.ravel(), normalized=normalized)
    n = len(dims)
    t = _apply_to_axes(state.tensor, op, idx)
    t = _apply_to_axes(t, op.conj(), [i + n for i in idx])
    return DensityMatrix(state.layout, t.reshape(state.matrix.shape), normalized=normalized)


def embed(layout: SystemLayout, operator: np.ndarray, targets: Sequence[str]) -> np.ndarray:
    """Dense matrix of ``operator`` on ``targets`` and identity on the rest."""
    op, idx = _check_op(layout, operator, targets)
    eye = np.eye(layout.total_dim, dtype=np.complex128).reshape(layout.dims * 2)
    return _apply_to_axes(eye, op, idx).reshape(layout.total_dim, layout.total_dim)


def partial_trace(rho: State, keep: Sequence[str]) -> DensityMatrix:
    """Reduced density matrix on ``keep`` (registers kept in layout order)."""
    if isinstance(keep, str):
        keep = [keep]
    if not keep:
        raise ValueError("keep must name at least one register")
    layout = rho.layout
    keep_idx = sorted(layout.indices(keep))
    kept = layout.sub([layout.names[i] for i in keep_idx])
    if isinstance(rho, PureState):
        t = rho.tensor
        traced = [i for i in range(len(layout)) if i not in keep_idx]
        m = np.moveaxis(t, keep_idx + traced, list(range(len(layout))))
        m = m.reshape(kept.total_dim, -1)
        return DensityMatrix(kept, m @ m.conj().T, normalized=rho.normalized)
    n = len(layout)
    letters = string.ascii_letters
    rows = list(letters[:n])
    cols = [rows[i] if i not in keep_idx else letters[n + i] for i in range(n)]
    out = [rows[i] for i in keep_idx] + [cols[i] for i in keep_idx]
    expr = "".join(rows) + "".join(cols) + "->" + "".join(out)
    m = np.einsum(expr, rho.tensor).reshape(kept.total_dim, kept.total_dim)
    return DensityMatrix(kept, m, normalized=rho.normalized)


def epr_vector(d: int) -> np.ndarray:
    return np.eye(d, dtype=np.complex128).ravel() / np.sqrt(d)


def epr_projector_local(d: int) -> np.ndarray:
    v = epr_vector(d)
    return np.outer(v, v.conj())


def epr_projector(layout: SystemLayout, pair: tuple[str, str], dense: bool = True) -> np.ndarray:
    """``|EPR><EPR|`` on ``pair`` embedded with identity on the other registers.

    With ``dense=False`` only the local ``d^2 x d^2`` projector is returned,
    which is what :func:`apply_on` wants.
    """
    da, db = (layout.dims[i] for i in layout.indices(pair))
    if da != db:
        raise DimensionError(f"EPR pair needs equal dimensions, got {da} and {db}")
    local = epr_projector_local(da)
    return embed(layout, local, pair) if dense else local


def permute_registers(state: State, new_order: Sequence[str]) -> State:
    layout = state.layout
    if sorted(new_order) != sorted(layout.names) or len(new_order) != len(layout):
        raise ValueError(f"{list(new_order)} is not a permutation of {list(layout.names)}")
    perm = layout.indices(new_order)
    new_layout = layout.sub(new_order)
    if isinstance(state, PureState):
        return PureState(new_layout, np.transpose(state.tensor, perm).ravel(),
                         normalized=state.normalized)
    n = len(layout)
    t = np.transpose(state.tensor, perm + [p + n for p in perm])
    return DensityMatrix(new_layout, t.reshape(state.matrix.shape), normalized=state.normalized)


def relabel(state: State, layout: SystemLayout) -> State:
    """Reinterpret the composite index under a new layout of equal total dim."""
    if layout.total_dim != state.layout.total_dim:
        raise DimensionError("relabel must preserve the total dimension")
    if isinstance(state, PureState):
        return PureState(layout, state.amplitudes, normalized=state.normalized)
    return DensityMatrix(layout, state.matrix, normalized=state.normalized)


def permute_operator_sites(op: np.ndarray, out_dims: Sequence[int], in_dims: Sequence[int],
                           out_order: Sequence[int], in_order: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of an operator's output and input sides."""
    m = len(out_dims)
    t = np.asarray(op).reshape(tuple(out_dims) + tuple(in_dims))
    t = np.transpose(t, list(out_order) + [m + i for i in in_order])
    return t.reshape(op.shape)


def is_unitary(u: np.ndarray, atol: float = ATOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.allclose(
        u.conj().T @ u, np.eye(u.shape[0]), atol=atol)


def sqrtm_psd(rho: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix."""
    from .errors import PSDViolation

    h = (rho + rho.conj().T) / 2
    w, v = np.linalg.eigh(h)
    if w.min(initial=0.0) < -tol:
        raise PSDViolation(f"matrix has eigenvalue {w.min():.3g} < 0")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T
