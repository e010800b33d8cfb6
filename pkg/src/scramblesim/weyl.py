"""Generalized Pauli (Weyl) operators ``X^a Z^b`` on qudits.

``X = sum_j |j+1><j|`` and ``Z = sum_j w^j |j><j|`` with ``w = exp(2 pi i / d)``.
No extra phases are attached: for qubits the label ``(1, 1)`` is ``XZ = -iY``.
Labels are tuples of per-site ``(a, b)`` pairs.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Iterator, Sequence

import numpy as np

from .errors import DimensionError

Label = tuple[tuple[int, int], ...]
PRESENT_TOL = 1e-8


@lru_cache(maxsize=None)
def shift(d: int) -> np.ndarray:
    m = np.roll(np.eye(d, dtype=np.complex128), 1, axis=0)
    m.flags.writeable = False
    return m


@lru_cache(maxsize=None)
def clock(d: int) -> np.ndarray:
    m = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    m.flags.writeable = False
    return m


@lru_cache(maxsize=None)
def _site_matrix(d: int, a: int, b: int) -> np.ndarray:
    m = np.linalg.matrix_power(shift(d), a) @ np.linalg.matrix_power(clock(d), b)
    m.flags.writeable = False
    return m


@dataclass(frozen=True)
class WeylOperator:
    dims: tuple[int, ...]
    label: Label
    phase: complex = 1.0

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        label = tuple((int(a) % d, int(b) % d) for (a, b), d in zip(self.label, dims))
        if len(label) != len(dims):
            raise DimensionError(f"label {self.label} does not match dims {dims}")
        if abs(abs(self.phase) - 1.0) > 1e-12:
            raise ValueError("Weyl phase must have unit modulus")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "label", label)

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "WeylOperator":
        return cls(tuple(dims), tuple((0, 0) for _ in dims))

    @classmethod
    def single(cls, dims: Sequence[int], site: int, a: int, b: int) -> "WeylOperator":
        lab = [(0, 0)] * len(dims)
        lab[site] = (a, b)
        return cls(tuple(dims), tuple(lab))

    @property
    def matrix(self) -> np.ndarray:
        mats = [_site_matrix(d, a, b) for d, (a, b) in zip(self.dims, self.label)]
        return self.phase * reduce(np.kron, mats, np.ones((1, 1), dtype=np.complex128))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, ab in enumerate(self.label) if ab != (0, 0))

    @property
    def weight(self) -> int:
        return len(self.support)

    def is_identity(self) -> bool:
        return self.weight == 0

    def __str__(self):
        body = " ".join(f"X{a}Z{b}" for a, b in self.label)
        return body if self.phase == 1.0 else f"({self.phase:.3g}) {body}"


def site_labels(d: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(d) for b in range(d)]


def enumerate_labels(dims: Sequence[int]) -> Iterator[Label]:
    """All ``prod d_i^2`` labels, identity first, deterministic order."""
    return itertools.product(*(site_labels(d) for d in dims))


def enumerate_weyl(dims: Sequence[int]) -> list[WeylOperator]:
    dims = tuple(dims)
    return [WeylOperator(dims, lab) for lab in enumerate_labels(dims)]


def weyl_coefficients(operator: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """Coefficients ``Tr((X^a Z^b)^dagger M) / d`` as an array indexed ``[a1, b1, a2, b2, ...]``.

    Each site is handled by gathering the ``a``-th cyclic subdiagonal and taking
    an FFT along it, so the cost is ``O(d^2 log d)`` rather than ``O(d^4)``.
    """
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    total = math.prod(dims)
    m = np.asarray(operator, dtype=np.complex128)
    if m.shape != (total, total):
        raise DimensionError(f"operator of shape {m.shape} for site dims {dims}")
    t = m.reshape(dims + dims)
    # current layout of axes: row_i at position i, col_i at n + i; convert site by site
    for i, d in enumerate(dims):
        t = np.moveaxis(t, [i, n + i], [-2, -1])
        a = np.arange(d)[:, None]
        j = np.arange(d)[None, :]
        g = t[..., (j + a) % d, j]
        g = np.fft.fft(g, axis=-1)
        t = np.moveaxis(g, [-2, -1], [i, n + i])
    order = [k for i in range(n) for k in (i, n + i)]
    return np.transpose(t, order).reshape(tuple(x for d in dims for x in (d, d))) / total


@dataclass(frozen=True)
class PauliDecomposition:
    """Weyl-basis coefficients of an operator; ``split`` sites form the C part."""

    dims: tuple[int, ...]
    coeffs: dict = field(repr=False)
    split: int | None = None

    def __getitem__(self, label: Label) -> complex:
        return self.coeffs.get(tuple(label), 0.0)

    def dominant(self, tol: float = PRESENT_TOL) -> dict:
        return {k: v for k, v in self.coeffs.items() if abs(v) > tol}

    def norm_squared(self) -> float:
        return float(sum(abs(v) ** 2 for v in self.coeffs.values()))

    def pair(self, label: Label) -> tuple[Label, Label]:
        k = len(self.dims) if self.split is None else self.split
        return tuple(label[:k]), tuple(label[k:])

    def reconstruct(self) -> np.ndarray:
        total = math.prod(self.dims)
        out = np.zeros((total, total), dtype=np.complex128)
        for lab, c in self.coeffs.items():
            if c != 0:
                out += c * WeylOperator(self.dims, lab).matrix
        return out


def decompose_in_weyl(operator: np.ndarray, dims: Sequence[int], split: int | None = None,
                      drop_below: float = 0.0) -> PauliDecomposition:
    """Expand ``operator = sum alpha_{P,Q} P (x) Q`` over Weyl operators.

    ``dims`` are the site dimensions; the first ``split`` sites are the C part
    and the rest the D part (``split`` only affects :meth:`PauliDecomposition.pair`).
    """
    dims = tuple(int(d) for d in dims)
    c = weyl_coefficients(operator, dims)
    coeffs = {}
    for lab in enumerate_labels(dims):
        idx = tuple(x for ab in lab for x in ab)
        v = complex(c[idx])
        if abs(v) > drop_below:
            coeffs[lab] = v
    return PauliDecomposition(dims, coeffs, split)


def conjugate_weyl(u: np.ndarray, p: WeylOperator) -> PauliDecomposition:
    """Decomposition of ``U P U^dagger``."""
    u = np.asarray(u)
    return decompose_in_weyl(u @ p.matrix @ u.conj().T, p.dims)


def _nearest_root_distance(value: complex, order: int) -> float:
    k = np.round(np.angle(value) * order / (2 * np.pi))
    return float(abs(value - np.exp(2j * np.pi * k / order)))


@dataclass(frozen=True)
class CliffordVerdict:
    consistent: bool
    evidence: tuple = field(repr=False)

    @property
    def verdict(self) -> str:
        return "consistent-with-Clifford" if self.consistent else "not-Clifford"


def clifford_witness(u: np.ndarray, dims: Sequence[int], trials: int | None = 16,
                     seed: int = 0, tol: float = PRESENT_TOL) -> CliffordVerdict:
    """Commutator test ``(1/d) Tr(U P U^dag Q U P^dag U^dag Q^dag)`` on random Weyl pairs.

    For qubits this is the familiar ``(1/d) Tr(UPU^dag Q UPU^dag Q)`` and a Clifford
    gives exactly +-1; for qudits a Clifford gives a root of unity of order
    ``lcm(dims)``. ``trials=None`` runs every ordered pair of non-identity labels.
    """
    dims = tuple(dims)
    u = np.asarray(u, dtype=np.complex128)
    labels = [lab for lab in enumerate_labels(dims) if any(ab != (0, 0) for ab in lab)]
    if trials is None:
        pairs = list(itertools.product(labels, labels))
    else:
        if trials < 1:
            raise ValueError("trials must be >= 1")
        rng = np.random.default_rng(seed)
        picks = rng.integers(len(labels), size=(trials, 2))
        pairs = [(labels[i], labels[j]) for i, j in picks]
    order = math.lcm(*dims)
    d = u.shape[0]
    evidence = []
    ok = True
    for lp, lq in pairs:
        p = WeylOperator(dims, lp).matrix
        q = WeylOperator(dims, lq).matrix
        pt = u @ p @ u.conj().T
        val = complex(np.trace(pt @ q @ pt.conj().T @ q.conj().T) / d)
        evidence.append((lp, lq, val))
        if _nearest_root_distance(val, order) > tol:
            ok = False
    return CliffordVerdict(ok, tuple(evidence))


@dataclass(frozen=True)
class DelocalizationReport:
    """Per one-body Weyl operator: weights of the dominant terms of its image."""

    n_sites: int
    images: dict = field(repr=False)

    @property
    def maximal(self) -> bool:
        return all(min(w) == self.n_sites for w in self.images.values())

    def min_weight(self) -> int:
        return min(min(w) for w in self.images.values())


def delocalization_check(u: np.ndarray, dims: Sequence[int], tol: float = PRESENT_TOL) -> DelocalizationReport:
    dims = tuple(dims)
    images = {}
    for site, d in enumerate(dims):
        for a, b in site_labels(d):
            if (a, b) == (0, 0):
                continue
            p = WeylOperator.single(dims, site, a, b)
            dec = conjugate_weyl(u, p)
            weights = sorted({sum(ab != (0, 0) for ab in lab) for lab in dec.dominant(tol)})
            images[(site, (a, b))] = tuple(weights)
    return DelocalizationReport(len(dims), images)
