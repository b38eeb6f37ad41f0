"""
Fault location by electromagnetic time reversal.

Three methods, all producing an energy per guessed fault position and
locating the fault at the argmax:

* ``locate_classic``: the measured port signal is reversed in time and
  re-injected at the port; energy of the current through an ideal short at
  each guessed position.
* ``locate_direct``: same, without the reversal.
* ``locate_convolution``: the short-circuit currents for an arbitrary
  excitation are computed once (``precompute_db``); a measured signal is
  then convolved with each stored current and the energies compared. No
  network solve is needed at location time.

The re-injection methods integrate the energy over the whole response
(Parseval sum on a long frequency grid). The convolution method works in
the time domain on the stored, finite-length traces.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import solver
from .netmodel import GuessGrid, NetworkModel, Position
from .signals import (
    FrequencyGrid,
    SignalTrace,
    half_weights,
    lightning_impulse,
    next_pow2,
    power_frequency,
    time_reverse,
    white_noise,
)
from .store import TransientDB

# default integration horizon for the re-injection methods
DEFAULT_HORIZON_S = 0.1
# relative tolerance under which two maxima count as tied
TIE_RTOL = 1e-12
# contrast ratios below 1 + this are reported as degenerate
DEGENERATE_TOL = 1e-6


class DegenerateCurveWarning(UserWarning):
    pass


class MultiMaxWarning(UserWarning):
    pass


class FingerprintWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class EnergyCurve:
    positions: tuple[Position, ...]
    energies: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        if e.shape != (len(self.positions),):
            raise ValueError("one energy per position required")
        if np.any(e < 0):
            raise ValueError("energies must be nonnegative")
        object.__setattr__(self, "energies", e)

    @property
    def norm(self) -> float:
        return float(np.max(self.energies))

    @property
    def normalized(self) -> np.ndarray:
        m = self.norm
        return self.energies / m if m > 0 else np.zeros_like(self.energies)

    def argmax(self) -> int:
        """Index of the maximum; ties go to the smallest position key."""
        e = self.energies
        top = np.flatnonzero(e >= e.max() * (1 - TIE_RTOL))
        if top.size > 1:
            warnings.warn(
                f"{top.size} positions share the maximum energy; taking the smallest key",
                MultiMaxWarning,
                stacklevel=2,
            )
            return int(min(top, key=lambda i: self.positions[i]))
        return int(top[0])

    def rows(self):
        for p, e, n in zip(self.positions, self.energies, self.normalized):
            yield p.segment_id, float(p.distance_m), float(e), float(n)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["segment", "distance_m", "energy", "normalized"])
            for seg, d, e, n in self.rows():
                w.writerow([seg, repr(d), repr(e), repr(n)])


@dataclass(frozen=True, eq=False)
class LocationResult:
    located: Position
    energy_curve: EnergyCurve
    contrast_ratio: float
    method: str

    @property
    def degenerate(self) -> bool:
        return self.contrast_ratio < 1 + DEGENERATE_TOL


def contrast_ratio(curve: EnergyCurve) -> float:
    """Peak energy over the median of all other energies."""
    e = curve.energies
    if e.size < 3:
        raise ValueError("contrast ratio needs at least 3 positions")
    k = int(np.argmax(e))
    rest = np.median(np.delete(e, k))
    ratio = float(e[k] / rest) if rest > 0 else math.inf
    if ratio < 1 + DEGENERATE_TOL:
        warnings.warn("energy curve is flat; location is not determined", DegenerateCurveWarning, stacklevel=2)
    return ratio


def _result(curve: EnergyCurve, method: str) -> LocationResult:
    ratio = contrast_ratio(curve)
    return LocationResult(curve.positions[curve.argmax()], curve, ratio, method)


def energy_grid(dt: float, n_min: int = 0, horizon_s: float = DEFAULT_HORIZON_S) -> FrequencyGrid:
    """Frequency grid for the whole-response energy integral."""
    return FrequencyGrid(next_pow2(max(2 * n_min, int(math.ceil(horizon_s / dt)))), dt)


def injection_energies(
    net: NetworkModel,
    injected: SignalTrace,
    grid: GuessGrid,
    fgrid: FrequencyGrid | None = None,
    source_impedance: float | None = None,
) -> EnergyCurve:
    """Energy of the guess short-circuit current for a signal injected at the port.

    E = (1/2pi) * integral |H_rev(w)|^2 |U(w)|^2 dw, evaluated as a discrete
    Parseval sum on ``fgrid``.
    """
    if fgrid is None:
        fgrid = energy_grid(injected.dt, len(injected))
    U = solver.analyze_for(injected, fgrid)
    weight = half_weights(fgrid.n_samples) * np.abs(U.values) ** 2 * fgrid.domega / (2 * np.pi)
    s = 1j * fgrid.omega
    energies = [
        float(np.sum(weight * np.abs(solver.reverse_transfer_s(net, pos, s, source_impedance)) ** 2))
        for pos in grid
    ]
    return EnergyCurve(grid.positions, np.array(energies))


def locate_classic(net, u0: SignalTrace, grid: GuessGrid, fgrid=None, source_impedance=None) -> LocationResult:
    """Re-inject the time-reversed port signal."""
    curve = injection_energies(net, time_reverse(u0), grid, fgrid, source_impedance)
    return _result(curve, "classic")


def locate_direct(net, u0: SignalTrace, grid: GuessGrid, fgrid=None, source_impedance=None) -> LocationResult:
    """Re-inject the port signal as measured."""
    curve = injection_energies(net, u0, grid, fgrid, source_impedance)
    return _result(curve, "direct")


# ------------------------------------------------------- direct convolution

def excitation(kind: str, n_samples: int, dt: float, **params) -> tuple[SignalTrace, dict]:
    """Build a named excitation and its provenance descriptor.

    kinds: ``impulse`` (alpha_s, beta_s, peak), ``ac`` (amplitude, hz, phase),
    ``noise`` (seed, std). The AC source defaults to a cosine (phase pi/2),
    i.e. it is switched on at its peak as an EMTP cosine source would be; a
    sine switched on at zero has no switching edge and carries almost no
    traveling-wave content.
    """
    if kind == "impulse":
        p = {"alpha_s": 20e-6, "beta_s": 3e-6, "peak": 1.0, **params}
        trace = lightning_impulse(n_samples, dt, **p)
    elif kind == "ac":
        p = {"amplitude": 1.0, "hz": 50.0, "phase": math.pi / 2, **params}
        trace = power_frequency(n_samples, dt, **p)
    elif kind == "noise":
        p = {"seed": 0, "std": 1.0, **params}
        trace = white_noise(n_samples, dt, **p)
    else:
        raise ValueError(f"unknown excitation kind {kind!r} (impulse, ac, noise)")
    return trace, {"kind": kind, **p}


def precompute_db(
    net: NetworkModel,
    grid: GuessGrid,
    u: SignalTrace,
    source_impedance: float | None = None,
    descriptor: dict | None = None,
) -> TransientDB:
    """Short-circuit current at every guess position for ``u`` injected at the port.

    Each stored trace has the length of ``u``.
    """
    if len(grid) == 0:
        raise ValueError("empty guess grid")
    if not np.any(u.samples):
        raise ValueError("excitation is identically zero")
    zs = solver.reverse_source_impedance(net, source_impedance)
    traces = np.empty((len(grid), len(u)))
    for k, pos in enumerate(grid):
        resp = solver.causal_response(lambda s, pos=pos: solver.reverse_transfer_s(net, pos, s, zs), u)
        traces[k] = resp.samples
    provenance = {
        "excitation": descriptor or {"kind": "custom"},
        "source_impedance_ohms": zs,
        "spacing_m": grid.spacing_m,
        "window_s": len(u) * u.dt,
    }
    return TransientDB(grid.positions, traces, u.dt, net.fingerprint(), provenance)


def convolution_energies(db: TransientDB, u0: SignalTrace) -> np.ndarray:
    """energy(convolve(i_f, u0)) for every stored trace, sharing one FFT of u0."""
    n_out = db.n_samples + len(u0) - 1
    n = next_pow2(n_out)
    U = np.fft.rfft(u0.samples, n)
    out = np.empty(len(db))
    for k in range(len(db)):
        f = db.dt * np.fft.irfft(np.fft.rfft(db.traces[k], n) * U, n)[:n_out]
        out[k] = np.dot(f, f) * db.dt
    return out


def locate_convolution(db: TransientDB, u0_fraction: SignalTrace, fingerprint: str | None = None) -> LocationResult:
    """Convolve the measured signal with every stored response; argmax of energy."""
    if not math.isclose(u0_fraction.dt, db.dt, rel_tol=1e-9):
        raise ValueError(f"dt mismatch: trace {u0_fraction.dt} s, database {db.dt} s")
    if fingerprint is not None and fingerprint != db.fingerprint:
        warnings.warn(
            "database was computed for a different network description",
            FingerprintWarning,
            stacklevel=2,
        )
    curve = EnergyCurve(db.positions, convolution_energies(db, u0_fraction))
    return _result(curve, "convolution")


def min_signal_length_estimate(net: NetworkModel) -> float:
    """25 one-way transits of the longest port-to-leaf path at the slowest wave speed."""
    speed = min(seg.params.wave_speed for seg in net.segments)
    return 25.0 * net.longest_leaf_path() / speed
