"""
Closed-form frequency-domain quantities of a uniform two-wire line.

Everything here accepts scalars or numpy arrays and broadcasts. The
single-line transfer functions are used as oracles for the nodal solver;
they assume the terminal at x = 0 carries a resistive load ``z0`` and that
faults and guessed faults are ideal (zero-impedance) branches.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netmodel import LineParams


class ResonanceError(ArithmeticError):
    """A closed-form denominator is numerically zero."""


RESONANCE_TOL = 1e-9


@dataclass(frozen=True)
class Gamma:
    """Propagation constant alpha + j*beta (1/m)."""

    alpha: np.ndarray | float
    beta: np.ndarray | float

    @property
    def value(self):
        return self.alpha + 1j * self.beta


def _as_gamma(g):
    return g.value if isinstance(g, Gamma) else g


def series_impedance(s, p: LineParams):
    return p.r0 + s * p.l0


def shunt_admittance(s, p: LineParams):
    return p.g0 + s * p.c0


def propagation(s, p: LineParams):
    """Complex propagation constant at complex frequency ``s``.

    Principal root with nonnegative real part.
    """
    g = np.sqrt(np.asarray(series_impedance(s, p) * shunt_admittance(s, p), dtype=complex))
    return np.where(g.real < 0, -g, g)


def gamma(omega, p: LineParams) -> Gamma:
    """gamma = sqrt((r0 + j w l0)(g0 + j w c0)) = alpha + j beta."""
    g = propagation(1j * np.asarray(omega, dtype=float), p)
    if np.ndim(g) == 0:
        g = complex(g)
    return Gamma(np.real(g), np.imag(g))


def char_impedance(omega, p: LineParams):
    """Zc = sqrt((r0 + j w l0)/(g0 + j w c0)), nonnegative real part.

    Returns ``inf`` where the shunt admittance vanishes (DC with g0 = 0).
    """
    s = 1j * np.asarray(omega, dtype=float)
    z = np.asarray(series_impedance(s, p), dtype=complex)
    y = np.asarray(shunt_admittance(s, p), dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        zc = np.sqrt(z / y)
    zc = np.where(zc.real < 0, -zc, zc)
    zc = np.where(y == 0, np.inf, zc)
    return complex(zc) if zc.ndim == 0 else zc


def reflection_coeff(z0, zc):
    """rho = (z0 - zc)/(z0 + zc); infinite z0 gives 1, infinite zc gives -1."""
    z0 = np.asarray(z0, dtype=complex)
    zc = np.asarray(zc, dtype=complex)
    if np.any((z0 + zc) == 0):
        raise ZeroDivisionError("degenerate reflection coefficient: z0 == -zc")
    with np.errstate(invalid="ignore"):
        rho = (z0 - zc) / (z0 + zc)
    rho = np.where(np.isinf(z0) & ~np.isinf(zc), 1.0, rho)
    rho = np.where(np.isinf(zc) & ~np.isinf(z0), -1.0, rho)
    return complex(rho) if rho.ndim == 0 else rho


def _check(den, rho0):
    bad = np.abs(den) < RESONANCE_TOL * (1 + np.abs(rho0))
    if np.any(bad):
        idx = np.flatnonzero(np.broadcast_to(bad, np.shape(den)))
        raise ResonanceError(f"closed-form denominator vanishes at {idx.size} point(s), first index {idx[:1]}")


def forward_transfer(x_f, g, rho0):
    """Port voltage per unit fault source: (1+rho0) e^{-gx} / (1 + rho0 e^{-2gx})."""
    gx = _as_gamma(g) * x_f
    den = 1 + rho0 * np.exp(-2 * gx)
    _check(den, rho0)
    return (1 + rho0) * np.exp(-gx) / den


def injected_current_arbitrary(x_g, g, rho0, z0):
    """Short-circuit current at x_g per unit source injected behind z0."""
    gx = _as_gamma(g) * x_g
    den = 1 + rho0 * np.exp(-2 * gx)
    _check(den, rho0)
    return (1 + rho0) * np.exp(-gx) / (z0 * den)


def reverse_current_direct(x_f, x_g, g, rho0, z0):
    """Guess-branch current per unit fault source, port signal re-injected as is."""
    g = _as_gamma(g)
    d1 = 1 + rho0 * np.exp(-2 * g * x_g)
    d2 = 1 + rho0 * np.exp(-2 * g * x_f)
    _check(d1, rho0)
    _check(d2, rho0)
    return (1 + rho0) ** 2 * np.exp(-g * (x_g + x_f)) / (z0 * d1 * d2)


def reverse_current_classic(x_f, x_g, g, rho0, z0):
    """Guess-branch current per unit conjugated fault source, port signal reversed.

    Exact for lossless lines, where conjugation maps gamma to -gamma.
    """
    g = _as_gamma(g)
    d1 = 1 + rho0 * np.exp(-2 * g * x_g)
    d2 = 1 + rho0 * np.exp(2 * g * x_f)
    _check(d1, rho0)
    _check(d2, rho0)
    return (1 + rho0) ** 2 * np.exp(-g * (x_g - x_f)) / (z0 * d1 * d2)


def convolution_kernel(x_f, x_g, g, rho0, z0):
    """Spectrum of (guess current for arbitrary injection) * (port voltage), per unit U_f*U."""
    return injected_current_arbitrary(x_g, g, rho0, z0) * forward_transfer(x_f, g, rho0)


def segment_two_port(s, p: LineParams, length: float):
    """Exact admittance entries (y_self, y_mutual) of a uniform segment.

    ``Y = [[y_self, y_mutual], [y_mutual, y_self]]`` with
    y_self = coth(gl)/Zc and y_mutual = -csch(gl)/Zc.

    At s = 0 the analytic limits are used: a series conductance
    1/(r0 l) plus shunt halves g0 l / 2. A lossless segment at DC has no
    finite admittance (it is an ideal wire); ``inf`` is returned there and
    the nodal solver merges its end nodes instead.
    """
    s = np.asarray(s, dtype=complex)
    z = series_impedance(s, p)
    y = shunt_admittance(s, p)
    gl = propagation(s, p) * length
    dc = s == 0
    safe = np.where(dc, 1.0, gl)
    # y/gamma = 1/Zc, written to stay finite for lossy lines
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_zc = np.where(dc, 0.0, y * length / safe)
        e2 = np.exp(-2 * safe)
        coth = (1 + e2) / (1 - e2)
        csch = 2 * np.exp(-safe) / (1 - e2)
    y_self = inv_zc * coth
    y_mut = -inv_zc * csch
    if np.any(dc):
        if p.r0 > 0:
            g_series = 1.0 / (p.r0 * length)
            if p.g0 > 0:
                # exact real-gamma form at DC
                gl0 = np.sqrt(p.r0 * p.g0) * length
                inv_zc0 = np.sqrt(p.g0 / p.r0)
                ys0, ym0 = inv_zc0 / np.tanh(gl0), -inv_zc0 / np.sinh(gl0)
            else:
                ys0, ym0 = g_series, -g_series
        else:
            ys0, ym0 = np.inf, -np.inf
        y_self = np.where(dc, ys0, y_self)
        y_mut = np.where(dc, ym0, y_mut)
    if y_self.ndim == 0:
        return complex(y_self), complex(y_mut)
    return y_self, y_mut


def two_port_matrix(s, p: LineParams, length: float):
    """2x2 (or batched ...x2x2) admittance matrix of a segment."""
    ys, ym = segment_two_port(s, p, length)
    ys, ym = np.asarray(ys), np.asarray(ym)
    return np.stack([np.stack([ys, ym], -1), np.stack([ym, ys], -1)], -2)
