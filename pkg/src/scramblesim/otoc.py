"""Out-of-time-order correlators.

All correlators use the Heisenberg image ``O_D(t) = U^dag O_D U`` of an output
operator and an input operator ``O_A`` acting before the evolution. Region
bookkeeping goes through :class:`~scramblesim.regions.Regions`; operators on
A and D are given in the local basis of those regions.
"""
from __future__ import annotations

import warnings

import numpy as np

from .channels import Channel
from .errors import DimensionError
from .qudit import epr_vector
from .regions import Regions
from .weyl import enumerate_weyl

REAL_TOL = 1e-10


def _check_local(op: np.ndarray, dim: int, name: str) -> np.ndarray:
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (dim, dim):
        raise DimensionError(f"{name} has shape {op.shape}, region dimension is {dim}")
    return op


def _heisenberg(u: np.ndarray, o_out: np.ndarray) -> np.ndarray:
    return u.conj().T @ o_out @ u


def otoc_point(u: np.ndarray, o_a: np.ndarray, o_d: np.ndarray, regions: Regions) -> complex:
    """``(1/d) Tr(O_A U^dag O_D U O_A^dag U^dag O_D^dag U)``."""
    a = regions.embed_input(_check_local(o_a, regions.d_A, "O_A"))
    y = _heisenberg(u, regions.embed_output(_check_local(o_d, regions.d_D, "O_D")))
    return complex(np.trace(a @ y @ a.conj().T @ y.conj().T) / regions.d)


def otoc_doubled(u: np.ndarray, o_a: np.ndarray, o_d: np.ndarray, regions: Regions) -> complex:
    """The same correlator as an expectation value on two copies of the system.

    Prepares ``(U (x) U*) (I (x) O_A*) |EPR>`` (the perturbation sits on the mirror
    copy, which equals ``O_A^dag`` on the primary copy) and measures
    ``(I_C (x) O_D) (x) (I_C' (x) O_D*)``.
    """
    u = np.asarray(u, dtype=np.complex128)
    d = regions.d
    a = regions.embed_input(_check_local(o_a, regions.d_A, "O_A"))
    od = regions.embed_output(_check_local(o_d, regions.d_D, "O_D"))
    phi = np.kron(u, u.conj()) @ (np.kron(np.eye(d), a.conj()) @ epr_vector(d))
    return complex(np.vdot(phi, np.kron(od, od.conj()) @ phi))


def _weyl_mats(dims) -> list[np.ndarray]:
    return [w.matrix for w in enumerate_weyl(dims)]


def _assert_real(value: complex, what: str, tol: float = REAL_TOL) -> float:
    if abs(value.imag) > tol:
        raise ArithmeticError(f"{what} has imaginary part {value.imag:.3g}")
    return float(value.real)


def otoc_table(u: np.ndarray, regions: Regions) -> np.ndarray:
    """Matrix of ``otoc_point`` over all Weyl pairs, rows indexed by O_A, columns by O_D."""
    u = np.asarray(u, dtype=np.complex128)
    a_ops = [regions.embed_input(m) for m in _weyl_mats(regions.a_dims)]
    d_ops = [_heisenberg(u, regions.embed_output(m)) for m in _weyl_mats(regions.d_dims)]
    out = np.empty((len(a_ops), len(d_ops)), dtype=np.complex128)
    for i, a in enumerate(a_ops):
        for j, y in enumerate(d_ops):
            out[i, j] = np.trace(a @ y @ a.conj().T @ y.conj().T)
    return out / regions.d


def otoc_avg(u: np.ndarray, regions: Regions) -> float:
    """Uniform average of the OTOC over all Weyl operators on A and on D."""
    return _assert_real(complex(np.mean(otoc_table(u, regions))), "averaged OTOC")


def scrambled_value(d_a: int, d_d: int) -> float:
    """Value of the averaged OTOC for a fully scrambling evolution."""
    if d_a < 2 or d_d < 2:
        raise ValueError("region dimensions must be >= 2")
    return 1 / d_a**2 + 1 / d_d**2 - 1 / (d_a**2 * d_d**2)


def haar_mean_otoc_avg(d_a: int, d_d: int, d: int) -> float:
    """Exact Haar (equivalently unitary 2-design) mean of :func:`otoc_avg` at total dimension ``d``.

    Obtained from second-moment Weingarten calculus; tends to
    :func:`scrambled_value` as ``d`` grows.
    """
    num = d_a**2 + d_d**2 - 1 - (d_a**2 - 1) * (d_d**2 - 1) / (d**2 - 1)
    return num / (d_a**2 * d_d**2)


def channel_otoc_point(q: Channel, o_a: np.ndarray, o_d: np.ndarray, regions: Regions) -> complex:
    """OTOC with ``O_D(t)`` replaced by its Heisenberg image under the adjoint channel."""
    a = regions.embed_input(_check_local(o_a, regions.d_A, "O_A"))
    od = regions.embed_output(_check_local(o_d, regions.d_D, "O_D"))
    y = q.adjoint(od)
    yd = q.adjoint(od.conj().T)
    return complex(np.trace(a @ y @ a.conj().T @ yd) / regions.d)


def otoc_channel_avg(q: Channel, regions: Regions) -> float:
    if not isinstance(q, Channel):
        raise ValueError("otoc_channel_avg expects a CPTP Channel")
    a_ops = [regions.embed_input(m) for m in _weyl_mats(regions.a_dims)]
    total = 0.0 + 0.0j
    for m in _weyl_mats(regions.d_dims):
        od = regions.embed_output(m)
        y = q.adjoint(od)
        yd = q.adjoint(od.conj().T)
        for a in a_ops:
            total += np.trace(a @ y @ a.conj().T @ yd)
    value = total / (regions.d * len(a_ops) * regions.d_D**2)
    return _assert_real(complex(value), "averaged channel OTOC")


def otoc_coherent(u: np.ndarray, v: np.ndarray, o_a: np.ndarray, o_d: np.ndarray,
                  regions: Regions) -> complex:
    """``(1/d) Tr(O_A U^dag O_D U O_A^dag V^dag O_D^dag V)``: the mirror evolves with ``V``."""
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if u.shape != v.shape:
        raise DimensionError("U and V must have the same shape")
    a = regions.embed_input(_check_local(o_a, regions.d_A, "O_A"))
    od = regions.embed_output(_check_local(o_d, regions.d_D, "O_D"))
    y = _heisenberg(u, od)
    yv = _heisenberg(v, od.conj().T)
    return complex(np.trace(a @ y @ a.conj().T @ yv) / regions.d)


def otoc_coherent_avg(u: np.ndarray, v: np.ndarray, regions: Regions) -> complex:
    total = 0.0 + 0.0j
    for ma in _weyl_mats(regions.a_dims):
        for md in _weyl_mats(regions.d_dims):
            total += otoc_coherent(u, v, ma, md, regions)
    return total / (regions.d_A**2 * regions.d_D**2)


def is_factorized(rho: np.ndarray, regions: Regions, tol: float = 1e-10) -> bool:
    """Whether an input-space density matrix equals ``rho_A (x) rho_B``."""
    from .qudit import DensityMatrix, SystemLayout, partial_trace

    r = regions.canonical_input(rho)
    lay = SystemLayout((("A", regions.d_A), ("B", regions.d_B)))
    dm = DensityMatrix(lay, r, normalized=False)
    ra = partial_trace(dm, ["A"]).matrix
    rb = partial_trace(dm, ["B"]).matrix
    return bool(np.allclose(np.kron(ra, rb), r, atol=tol))


def otoc_finite_temp(u: np.ndarray, ops, rho_ab: np.ndarray, regions: Regions,
                     side: str = "one-sided") -> complex:
    """Thermal OTOC of ``(O_X, O_Y, O_Z, O_W)``; ``O_X, O_Z`` act on A and ``O_Y, O_W`` on D.

    ``one-sided``: ``Tr(O_X O_Y(t) O_Z O_W(t) rho)``.
    ``two-sided``: ``Tr(O_X O_Y(t) rho^{1/2} O_Z O_W(t) rho^{1/2})``.
    ``rho_ab`` is given in the site-ordered input basis.
    """
    from .qudit import sqrtm_psd

    u = np.asarray(u, dtype=np.complex128)
    rho = np.asarray(rho_ab, dtype=np.complex128)
    if rho.shape != (regions.d, regions.d):
        raise DimensionError(f"rho of shape {rho.shape} for regions of dim {regions.d}")
    if not is_factorized(rho, regions):
        warnings.warn("input ensemble does not factorize as rho_A (x) rho_B", stacklevel=2)
    ox, oy, oz, ow = ops
    x = regions.embed_input(_check_local(ox, regions.d_A, "O_X"))
    z = regions.embed_input(_check_local(oz, regions.d_A, "O_Z"))
    y = _heisenberg(u, regions.embed_output(_check_local(oy, regions.d_D, "O_Y")))
    w = _heisenberg(u, regions.embed_output(_check_local(ow, regions.d_D, "O_W")))
    if side == "one-sided":
        return complex(np.trace(x @ y @ z @ w @ rho))
    if side == "two-sided":
        s = sqrtm_psd(rho)
        return complex(np.trace(x @ y @ s @ z @ w @ s))
    raise ValueError(f"side must be 'one-sided' or 'two-sided', got {side!r}")


def otoc_finite_temp_avg(u: np.ndarray, rho_ab: np.ndarray, regions: Regions,
                         side: str = "one-sided") -> complex:
    """Uniform Weyl average of the thermal OTOC with ``O_Z = O_X^dag`` and ``O_W = O_Y^dag``.

    The two-sided average is real and bounded in modulus by the one-sided one.
    """
    if not is_factorized(np.asarray(rho_ab), regions):
        warnings.warn("input ensemble does not factorize as rho_A (x) rho_B", stacklevel=2)
    total = 0.0 + 0.0j
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for ma in _weyl_mats(regions.a_dims):
            for md in _weyl_mats(regions.d_dims):
                total += otoc_finite_temp(u, (ma, md, ma.conj().T, md.conj().T), rho_ab,
                                          regions, side)
    return total / (regions.d_A**2 * regions.d_D**2)
