"""Input/output factorizations ``H = A (x) B = C (x) D`` over a site register."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError
from .qudit import permute_operator_sites


@dataclass(frozen=True)
class Regions:
    """Site dims of an evolution plus the sites forming A (input) and D (output).

    B is the complement of A among the input sites, C the complement of D among
    the output sites. ``out_dims`` defaults to ``in_dims``.
    """

    in_dims: tuple[int, ...]
    A: tuple[int, ...] = (0,)
    D: tuple[int, ...] = (-1,)
    out_dims: tuple[int, ...] | None = None

    def __post_init__(self):
        in_dims = tuple(int(d) for d in self.in_dims)
        out_dims = in_dims if self.out_dims is None else tuple(int(d) for d in self.out_dims)
        if math.prod(in_dims) != math.prod(out_dims):
            raise DimensionError(f"input dims {in_dims} and output dims {out_dims} differ in size")
        a = tuple(sorted({x % len(in_dims) for x in self.A}))
        d = tuple(sorted({x % len(out_dims) for x in self.D}))
        if not a or not d:
            raise ValueError("regions A and D must be nonempty")
        object.__setattr__(self, "in_dims", in_dims)
        object.__setattr__(self, "out_dims", out_dims)
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "D", d)

    @classmethod
    def for_operator(cls, u: np.ndarray, dims: Sequence[int] | None = None, **kw) -> "Regions":
        if dims is None:
            dims = _guess_dims(np.asarray(u).shape[0])
        return cls(tuple(dims), **kw)

    @property
    def B(self) -> tuple[int, ...]:
        return tuple(i for i in range(len(self.in_dims)) if i not in self.A)

    @property
    def C(self) -> tuple[int, ...]:
        return tuple(i for i in range(len(self.out_dims)) if i not in self.D)

    @property
    def d(self) -> int:
        return math.prod(self.in_dims)

    @property
    def d_A(self) -> int:
        return math.prod(self.in_dims[i] for i in self.A)

    @property
    def d_B(self) -> int:
        return math.prod(self.in_dims[i] for i in self.B)

    @property
    def d_C(self) -> int:
        return math.prod(self.out_dims[i] for i in self.C)

    @property
    def d_D(self) -> int:
        return math.prod(self.out_dims[i] for i in self.D)

    def canonical(self, op: np.ndarray) -> np.ndarray:
        """Reorder ``op`` so inputs read ``(A, B)`` and outputs ``(C, D)``."""
        op = np.asarray(op, dtype=np.complex128)
        if op.shape != (self.d, self.d):
            raise DimensionError(f"operator of shape {op.shape} for regions of dim {self.d}")
        return permute_operator_sites(op, self.out_dims, self.in_dims,
                                      self.C + self.D, self.A + self.B)

    def from_canonical(self, op: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`canonical`."""
        out_order, in_order = self.C + self.D, self.A + self.B
        out_dims = tuple(self.out_dims[i] for i in out_order)
        in_dims = tuple(self.in_dims[i] for i in in_order)
        return permute_operator_sites(np.asarray(op, dtype=np.complex128), out_dims, in_dims,
                                      _inverse(out_order), _inverse(in_order))

    def canonical_input(self, op: np.ndarray) -> np.ndarray:
        """Reorder an operator on the input space (both sides) to ``(A, B)``."""
        order = self.A + self.B
        return permute_operator_sites(np.asarray(op), self.in_dims, self.in_dims, order, order)

    def canonical_output(self, op: np.ndarray) -> np.ndarray:
        """Reorder an operator on the output space (both sides) to ``(C, D)``."""
        order = self.C + self.D
        return permute_operator_sites(np.asarray(op), self.out_dims, self.out_dims, order, order)

    def embed_input(self, op_a: np.ndarray) -> np.ndarray:
        """``O_A (x) I_B`` in the original (site-ordered) input basis."""
        full = np.kron(op_a, np.eye(self.d_B))
        order = self.A + self.B
        dims = tuple(self.in_dims[i] for i in order)
        return permute_operator_sites(full, dims, dims, _inverse(order), _inverse(order))

    def embed_output(self, op_d: np.ndarray) -> np.ndarray:
        """``I_C (x) O_D`` in the original output basis."""
        full = np.kron(np.eye(self.d_C), op_d)
        order = self.C + self.D
        dims = tuple(self.out_dims[i] for i in order)
        return permute_operator_sites(full, dims, dims, _inverse(order), _inverse(order))

    @property
    def a_dims(self) -> tuple[int, ...]:
        return tuple(self.in_dims[i] for i in self.A)

    @property
    def d_dims(self) -> tuple[int, ...]:
        return tuple(self.out_dims[i] for i in self.D)


def _inverse(perm: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return tuple(inv)


def _guess_dims(d: int) -> tuple[int, ...]:
    for p in (2, 3, 5, 7):
        n = round(math.log(d, p))
        if p ** n == d:
            return (p,) * n
    raise DimensionError(f"cannot infer site dims for dimension {d}; pass dims explicitly")


def wire_pair_to_site(pair: Sequence[int], n_sites: int) -> int:
    """Map a 1-based projection pair ``{k, 2n+1-k}`` of the doubled circuit to output site ``k-1``.

    Wires ``1..n`` carry the forward evolution and ``n+1..2n`` its mirror, so
    ``{3, 4}`` on three qubits is output site 2 and ``{1, 6}`` is site 0.
    """
    lo, hi = sorted(int(x) for x in pair)
    if not (1 <= lo <= n_sites) or hi != 2 * n_sites + 1 - lo:
        raise ValueError(f"{tuple(pair)} is not a mirrored wire pair for {n_sites} sites")
    return lo - 1
