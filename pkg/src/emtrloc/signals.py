"""
Sampled signals, their spectra and the operations the location methods
need: waveform generators, time reversal, fraction extraction, linear
convolution and energy.

Spectra approximate the continuous Fourier transform, X(w_k) = dt * DFT(x)_k,
kept as the nonnegative half (numpy ``rfft`` layout). With that scaling the
spectrum of ``convolve(a, b)`` is the product of the spectra and Parseval
reads sum(x**2) * dt = (1/2pi) * integral |X|^2 dw.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np


def next_pow2(n: int) -> int:
    return 1 << max(1, int(n - 1).bit_length())


@dataclass(frozen=True)
class FrequencyGrid:
    """FFT grid: ``n_samples`` (a power of two) at spacing ``dt``."""

    n_samples: int
    dt: float

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        n = self.n_samples
        if n < 2 or n & (n - 1):
            raise ValueError(f"n_samples must be a power of two >= 2, got {n}")

    @classmethod
    def covering(cls, duration_s: float, dt: float) -> "FrequencyGrid":
        """Smallest grid whose period is at least ``duration_s``."""
        return cls(next_pow2(int(math.ceil(duration_s / dt - 1e-9))), dt)

    @property
    def n_bins(self) -> int:
        return self.n_samples // 2 + 1

    @property
    def period(self) -> float:
        return self.n_samples * self.dt

    @property
    def domega(self) -> float:
        return 2 * np.pi / self.period

    @property
    def omega(self) -> np.ndarray:
        return self.domega * np.arange(self.n_bins)

    @property
    def nyquist_hz(self) -> float:
        return 0.5 / self.dt


@dataclass(frozen=True, eq=False)
class SignalTrace:
    """Uniformly sampled real signal starting at time ``t0``."""

    samples: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise ValueError("a trace needs at least 2 samples in a 1-D array")
        if not np.all(np.isfinite(x)):
            raise ValueError("trace samples must be finite")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        x.flags.writeable = False
        object.__setattr__(self, "samples", x)

    def __len__(self):
        return self.samples.size

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.samples.size)

    @property
    def duration(self) -> float:
        return self.samples.size * self.dt

    def scaled(self, k: float) -> "SignalTrace":
        return SignalTrace(k * self.samples, self.dt, self.t0)

    def head(self, n: int) -> "SignalTrace":
        return SignalTrace(self.samples[:n], self.dt, self.t0)


@dataclass(frozen=True, eq=False)
class SpectrumTrace:
    """Half spectrum of a real signal of ``n_samples`` samples at ``dt``."""

    values: np.ndarray
    dt: float
    n_samples: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.n_samples // 2 + 1,):
            raise ValueError(
                f"half spectrum of {self.n_samples} samples needs {self.n_samples // 2 + 1} bins, got {v.shape}"
            )
        object.__setattr__(self, "values", v)

    @property
    def grid(self) -> FrequencyGrid:
        return FrequencyGrid(self.n_samples, self.dt)

    @property
    def domega(self) -> float:
        return 2 * np.pi / (self.n_samples * self.dt)

    @property
    def omega(self) -> np.ndarray:
        return self.domega * np.arange(self.values.size)

    def __mul__(self, other):
        if isinstance(other, SpectrumTrace):
            if other.n_samples != self.n_samples or other.dt != self.dt:
                raise ValueError("spectrum grids differ")
            other = other.values
        return SpectrumTrace(self.values * other, self.dt, self.n_samples)

    __rmul__ = __mul__


def half_weights(n_samples: int) -> np.ndarray:
    """Multiplicity of each half-spectrum bin in the full spectrum."""
    w = np.full(n_samples // 2 + 1, 2.0)
    w[0] = 1.0
    if n_samples % 2 == 0:
        w[-1] = 1.0
    return w


def analyze_time(trace: SignalTrace, n_samples: int | None = None) -> SpectrumTrace:
    """Spectrum of ``trace``, zero padded to ``n_samples`` if given."""
    n = trace.samples.size if n_samples is None else int(n_samples)
    if n < trace.samples.size:
        raise ValueError(f"cannot analyze {trace.samples.size} samples on a {n}-sample grid")
    return SpectrumTrace(trace.dt * np.fft.rfft(trace.samples, n), trace.dt, n)


def synthesize_time(spectrum: SpectrumTrace, t0: float = 0.0) -> SignalTrace:
    """Real signal whose half spectrum is ``spectrum`` (Hermitian extension)."""
    x = np.fft.irfft(spectrum.values / spectrum.dt, spectrum.n_samples)
    return SignalTrace(x, spectrum.dt, t0)


def spectrum_energy(spectrum: SpectrumTrace) -> float:
    """(1/2pi) * sum |X(w_k)|^2 dw over the full (two-sided) grid."""
    w = half_weights(spectrum.n_samples)
    return float(np.sum(w * np.abs(spectrum.values) ** 2) * spectrum.domega / (2 * np.pi))


# ------------------------------------------------------------ waveforms

def lightning_impulse(
    n_samples: int, dt: float, alpha_s: float = 20e-6, beta_s: float = 3e-6, peak: float = 1.0
) -> SignalTrace:
    """Double exponential k*(exp(-t/alpha) - exp(-t/beta)) scaled to ``peak``.

    ``alpha_s`` is the tail constant and ``beta_s`` the front constant.
    """
    if not alpha_s > beta_s > 0:
        raise ValueError("lightning impulse needs alpha_s > beta_s > 0")
    t = dt * np.arange(n_samples)
    t_peak = alpha_s * beta_s / (alpha_s - beta_s) * math.log(alpha_s / beta_s)
    k = peak / (math.exp(-t_peak / alpha_s) - math.exp(-t_peak / beta_s))
    return SignalTrace(k * (np.exp(-t / alpha_s) - np.exp(-t / beta_s)), dt)


def power_frequency(
    n_samples: int, dt: float, amplitude: float = 1.0, hz: float = 50.0, phase: float = 0.0
) -> SignalTrace:
    """amplitude * sin(2 pi hz t + phase)."""
    if not hz > 0:
        raise ValueError("hz must be positive")
    t = dt * np.arange(n_samples)
    return SignalTrace(amplitude * np.sin(2 * np.pi * hz * t + phase), dt)


def white_noise(n_samples: int, dt: float, seed: int = 0, std: float = 1.0) -> SignalTrace:
    """Gaussian white noise from a fixed-seed generator."""
    rng = np.random.default_rng(seed)
    return SignalTrace(std * rng.standard_normal(n_samples), dt)


def unit_impulse(n_samples: int, dt: float) -> SignalTrace:
    """Discrete delta of unit area (flat unit spectrum)."""
    x = np.zeros(n_samples)
    x[0] = 1.0 / dt
    return SignalTrace(x, dt)


# ----------------------------------------------------------- operations

def time_reverse(x: SignalTrace) -> SignalTrace:
    """Samples in reverse order; the time axis is mirrored about t = 0."""
    return SignalTrace(x.samples[::-1], x.dt, -(x.t0 + (len(x) - 1) * x.dt))


def convolve(a: SignalTrace, b: SignalTrace) -> SignalTrace:
    """Linear (zero-padded) convolution approximating the convolution integral."""
    if not math.isclose(a.dt, b.dt, rel_tol=1e-12):
        raise ValueError(f"dt mismatch: {a.dt} vs {b.dt}")
    n_out = len(a) + len(b) - 1
    n = next_pow2(n_out)
    y = np.fft.irfft(np.fft.rfft(a.samples, n) * np.fft.rfft(b.samples, n), n)[:n_out]
    return SignalTrace(a.dt * y, a.dt, a.t0 + b.t0)


def energy(x: SignalTrace) -> float:
    """sum(x**2) * dt."""
    return float(np.dot(x.samples, x.samples) * x.dt)


def extract_fraction(x: SignalTrace, start_s: float, length_s: float) -> SignalTrace:
    """Contiguous slice starting at time ``start_s`` (trace time axis)."""
    i0 = int(round((start_s - x.t0) / x.dt))
    n = int(round(length_s / x.dt))
    if i0 < 0 or n < 2 or i0 + n > len(x):
        raise ValueError(
            f"fraction [{start_s:g} s, +{length_s:g} s] outside trace "
            f"[{x.t0:g} s, {x.t0 + x.duration:g} s)"
        )
    return SignalTrace(x.samples[i0:i0 + n], x.dt, x.t0 + i0 * x.dt)


# --------------------------------------------------------------- CSV I/O

def write_trace_csv(trace: SignalTrace, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_s", "value"])
        for t, v in zip(trace.t, trace.samples):
            w.writerow([repr(float(t)), repr(float(v))])


def read_trace_csv(path) -> SignalTrace:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["t_s", "value"]:
        raise ValueError(f"{path}: expected header 't_s,value'")
    data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    if data.shape[0] < 2:
        raise ValueError(f"{path}: need at least 2 samples")
    steps = np.diff(data[:, 0])
    dt = float(np.mean(steps))
    if np.max(np.abs(steps - dt)) > 1e-6 * dt:
        raise ValueError(f"{path}: samples are not uniformly spaced")
    return SignalTrace(data[:, 1], dt, float(data[0, 0]))
