"""Spectral calculus on symmetric 2x2 tensors.

Symmetric tensors are stored as arrays whose last axis holds the three
independent components ``(xx, xy, yy)``. All operations broadcast over any
number of leading axes, so a million quadrature-point tensors are handled in
one call.

The two nonlinear functions of the log-conformation constitutive law live
here: ``exp_remainder`` (the deviation of the scaled matrix exponential from
its linearization) and ``stretch_coupling`` (the off-diagonal coupling the
eigenbasis rotation induces between stretching and the log variable),
together with their closed-form directional derivatives.
"""

from typing import NamedTuple

import numpy as np

from .errors import NotSPDError, SpectralRangeError

# exp() overflows in float64 just above this exponent
_EXP_OVERFLOW = 709.0
# divided-difference switch for derivative kernels, |eig gap| below this
# uses the midpoint series (cancellation error crosses truncation error here)
_DD_SWITCH = 1e-7
# switch for the stretch-coupling coefficient and its derivative, on
# x = half the eigenvalue gap of the first argument
_X_SWITCH = 1e-5


class Spectral2(NamedTuple):
    """Eigen-decomposition of a symmetric 2x2 tensor.

    ``eig1 >= eig2`` and ``(c, s)`` is the cosine/sine of the rotation whose
    first column is the eigenvector of ``eig1``.
    """

    eig1: np.ndarray
    eig2: np.ndarray
    c: np.ndarray
    s: np.ndarray


def sym2(xx, xy, yy):
    """Stack components into the (..., 3) symmetric-tensor layout."""
    return np.stack(np.broadcast_arrays(xx, xy, yy), axis=-1)


def identity(shape=()):
    out = np.zeros(tuple(shape) + (3,))
    out[..., 0] = 1.0
    out[..., 2] = 1.0
    return out


def to_matrix(t):
    """(..., 3) component layout -> (..., 2, 2) dense matrices."""
    t = np.asarray(t, dtype=float)
    m = np.empty(t.shape[:-1] + (2, 2))
    m[..., 0, 0] = t[..., 0]
    m[..., 0, 1] = t[..., 1]
    m[..., 1, 0] = t[..., 1]
    m[..., 1, 1] = t[..., 2]
    return m


def from_matrix(m):
    """(..., 2, 2) dense matrices -> (..., 3), symmetrizing the off-diagonal."""
    m = np.asarray(m, dtype=float)
    return sym2(m[..., 0, 0], 0.5 * (m[..., 0, 1] + m[..., 1, 0]), m[..., 1, 1])


def frobenius(t):
    t = np.asarray(t, dtype=float)
    return np.sqrt(t[..., 0] ** 2 + 2.0 * t[..., 1] ** 2 + t[..., 2] ** 2)


def ddot(a, b):
    """Double contraction a : b of two symmetric tensors."""
    return a[..., 0] * b[..., 0] + 2.0 * a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def eigh2(t):
    """Closed-form eigen-decomposition of symmetric 2x2 tensors.

    Returns ordered eigenvalues (``eig1 >= eig2``) and the rotation
    ``R = [[c, -s], [s, c]]`` such that ``R diag(eig1, eig2) R^T`` rebuilds
    the input. The half-angle is evaluated with ``arctan2``, which is stable
    for every branch including coincident eigenvalues.
    """
    t = np.asarray(t, dtype=float)
    if not np.isfinite(t).all():
        raise ValueError("non-finite tensor components")
    xx, xy, yy = t[..., 0], t[..., 1], t[..., 2]
    mean = 0.5 * (xx + yy)
    half_diff = 0.5 * (xx - yy)
    radius = np.hypot(half_diff, xy)
    theta = 0.5 * np.arctan2(2.0 * xy, xx - yy)
    return Spectral2(mean + radius, mean - radius, np.cos(theta), np.sin(theta))


def _rotate_into(t, c, s):
    """Components of R^T t R (push t into the eigenbasis)."""
    xx, xy, yy = t[..., 0], t[..., 1], t[..., 2]
    cc, ss, cs = c * c, s * s, c * s
    return (
        cc * xx + 2.0 * cs * xy + ss * yy,
        (cc - ss) * xy + cs * (yy - xx),
        ss * xx - 2.0 * cs * xy + cc * yy,
    )


def _rotate_out(pxx, pxy, pyy, c, s):
    """R p R^T as a stacked (..., 3) tensor (pull p back to Cartesian)."""
    cc, ss, cs = c * c, s * s, c * s
    return sym2(
        cc * pxx - 2.0 * cs * pxy + ss * pyy,
        (cc - ss) * pxy + cs * (pxx - pyy),
        ss * pxx + 2.0 * cs * pxy + cc * pyy,
    )


def _recombine(spec, g1, g2):
    return _rotate_out(g1, np.zeros_like(g1), g2, spec.c, spec.s)


def _check_exp_arg(max_arg):
    if max_arg > _EXP_OVERFLOW:
        raise SpectralRangeError(max_arg)


def sym_expm(t):
    """Matrix exponential of a symmetric 2x2 tensor (SPD result)."""
    spec = eigh2(t)
    _check_exp_arg(np.max(spec.eig1, initial=-np.inf))
    return _recombine(spec, np.exp(spec.eig1), np.exp(spec.eig2))


def spd_logm(t):
    """Matrix logarithm of an SPD 2x2 tensor.

    Raises :class:`NotSPDError` carrying the offending eigenvalue when the
    input is not positive definite.
    """
    spec = eigh2(t)
    low = np.min(spec.eig2, initial=np.inf)
    if not low > 0.0:
        raise NotSPDError(low)
    return _recombine(spec, np.log(spec.eig1), np.log(spec.eig2))


def exp_remainder(a, t):
    """Nonlinear remainder f(a, t) = (expm(a t) - I)/a - t, with f(0, .) = 0.

    Applied spectrally: on each eigenvalue x the scalar map is
    ``expm1(a x)/a - x``, which vanishes identically at ``a = 0`` so the
    Newtonian limit is exact rather than a numerical cancellation.
    """
    a = float(a)
    t = np.asarray(t, dtype=float)
    if a < 0.0:
        raise ValueError(f"scale a must be >= 0, got {a}")
    if a == 0.0:
        return np.zeros_like(t)
    spec = eigh2(t)
    _check_exp_arg(a * np.max(spec.eig1, initial=-np.inf))
    g1 = np.expm1(a * spec.eig1) / a - spec.eig1
    g2 = np.expm1(a * spec.eig2) / a - spec.eig2
    return _recombine(spec, g1, g2)


def _coupling_coeff(x):
    """gamma(x) = 1 - x*coth(x), even in x, gamma(0) = 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _X_SWITCH
    xs = np.where(small, 1.0, x)  # avoid 0/0 in the masked lanes
    closed = 1.0 - xs / np.tanh(xs)
    x2 = x * x
    series = x2 * (-1.0 / 3.0 + x2 / 45.0)
    return np.where(small, series, closed)


def _coupling_coeff_ratio(x):
    """gamma(x) / (2x), regular at x = 0 (series -x/6 + x^3/90)."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _X_SWITCH
    xs = np.where(small, 1.0, x)
    closed = _coupling_coeff(xs) / (2.0 * xs)
    series = x * (-1.0 / 6.0 + x * x / 90.0)
    return np.where(small, series, closed)


def _coupling_coeff_deriv(x):
    """d(gamma)/dx = -coth(x) + x*csch(x)^2, odd, zero at x = 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _X_SWITCH
    xs = np.where(small, 1.0, x)
    coth = 1.0 / np.tanh(xs)
    closed = -coth + xs * (coth * coth - 1.0)
    series = x * (-2.0 / 3.0 + x * x * (4.0 / 45.0))
    return np.where(small, series, closed)


def stretch_coupling(b, d):
    """Coupling tensor kappa(b, d) of the log-conformation law.

    In the eigenbasis of ``b`` (eigenvalue gap ``2x``) the result has zero
    diagonal and off-diagonal ``d'_12 * (1 - x*coth(x))``. It is linear in
    ``d`` and vanishes when ``b`` is isotropic.
    """
    b = np.asarray(b, dtype=float)
    d = np.asarray(d, dtype=float)
    spec = eigh2(b)
    x = 0.5 * (spec.eig1 - spec.eig2)
    _, d12, _ = _rotate_into(d, spec.c, spec.s)
    k12 = _coupling_coeff(x) * d12
    zero = np.zeros_like(k12)
    return _rotate_out(zero, k12, zero, spec.c, spec.s)


def d_exp_remainder(a, t, direction):
    """Directional (Gateaux) derivative of ``exp_remainder`` at ``t``.

    Divided-difference rule on the eigenbasis: diagonal entries pick up the
    scalar derivative ``expm1(a x)``, the off-diagonal entry the divided
    difference of the scalar map, with a midpoint fallback below the
    cancellation threshold.
    """
    a = float(a)
    t = np.asarray(t, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if a < 0.0:
        raise ValueError(f"scale a must be >= 0, got {a}")
    if a == 0.0:
        return np.zeros(np.broadcast_shapes(t.shape, direction.shape))
    spec = eigh2(t)
    _check_exp_arg(a * np.max(spec.eig1, initial=-np.inf))
    hxx, hxy, hyy = _rotate_into(direction, spec.c, spec.s)
    gp1 = np.expm1(a * spec.eig1)
    gp2 = np.expm1(a * spec.eig2)
    gap = spec.eig1 - spec.eig2  # >= 0 by ordering
    tiny = gap < _DD_SWITCH
    gap_safe = np.where(tiny, 1.0, gap)
    phi_closed = (gp1 - gp2) / (a * gap_safe) - 1.0
    phi_mid = np.expm1(a * 0.5 * (spec.eig1 + spec.eig2))
    phi = np.where(tiny, phi_mid, phi_closed)
    return _rotate_out(hxx * gp1, hxy * phi, hyy * gp2, spec.c, spec.s)


def d_stretch_coupling(b, d, direction):
    """Derivative of ``stretch_coupling`` in its first argument.

    Both the eigenbasis of ``b`` and the scalar coefficient are
    differentiated. The eigenvector sensitivity enters only through the
    regular ratio ``gamma(x)/(2x)``, so coincident eigenvalues are smooth
    (the derivative vanishes there).
    """
    b = np.asarray(b, dtype=float)
    d = np.asarray(d, dtype=float)
    direction = np.asarray(direction, dtype=float)
    spec = eigh2(b)
    x = 0.5 * (spec.eig1 - spec.eig2)
    dxx, d12, dyy = _rotate_into(d, spec.c, spec.s)
    hxx, hxy, hyy = _rotate_into(direction, spec.c, spec.s)
    ratio = _coupling_coeff_ratio(x)
    slope = _coupling_coeff_deriv(x)
    diag = 2.0 * ratio * hxy * d12
    off = slope * 0.5 * (hxx - hyy) * d12 + ratio * hxy * (dyy - dxx)
    return _rotate_out(-diag, off, diag, spec.c, spec.s)


def stress_from_logconf(params, chi):
    """Extra stress from the log-conformation tensor: chi + f(a, chi).

    Evaluated spectrally as ``expm1(a x)/a`` per eigenvalue; reduces to the
    identity map when the relaxation time is zero.
    """
    chi = np.asarray(chi, dtype=float)
    a = params.elastic_scale
    if a == 0.0:
        return chi.copy()
    spec = eigh2(chi)
    _check_exp_arg(a * np.max(spec.eig1, initial=-np.inf))
    return _recombine(spec, np.expm1(a * spec.eig1) / a, np.expm1(a * spec.eig2) / a)


def logconf_from_stress(params, sigma):
    """Inverse of :func:`stress_from_logconf`: log1p(a x)/a per eigenvalue.

    Raises :class:`NotSPDError` when ``a sigma + I`` is not positive
    definite, which flags an inadmissible prescribed stress.
    """
    sigma = np.asarray(sigma, dtype=float)
    a = params.elastic_scale
    if a == 0.0:
        return sigma.copy()
    spec = eigh2(sigma)
    low = np.min(a * spec.eig2, initial=np.inf)
    if not low > -1.0:
        raise NotSPDError(low + 1.0, what="a*sigma + I")
    return _recombine(spec, np.log1p(a * spec.eig1) / a, np.log1p(a * spec.eig2) / a)
