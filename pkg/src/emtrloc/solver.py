"""
Frequency-domain nodal analysis of branched line networks.

Each segment enters the node-admittance matrix through its exact
distributed-line two-port. Guess and fault positions split their segment
into two sub-segments joined at a new node named by the position key.
Ideal shorts and ideal voltage sources are imposed by eliminating the node
(fixed voltage), never by a small impedance. Systems are solved for whole
arrays of complex frequencies s at once.

Time-domain responses of causal inputs are synthesized with a damped FFT
(numerical Laplace transform): the input is weighted by exp(-sigma t), the
transfer function is evaluated at s = sigma + jw, and the output is
re-weighted by exp(sigma t). This suppresses the circular wrap-around that a
plain FFT would produce for the slowly decaying, weakly damped line
networks considered here.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .linemath import segment_two_port
from .netmodel import FaultSpec, NetworkModel, Position, position_of
from .signals import FrequencyGrid, SignalTrace, SpectrumTrace, analyze_time, next_pow2

CHUNK = 1 << 15
# exp(-sigma * period): weight of the first wrapped period in damped synthesis
ALIAS_LEVEL = 1e-8
# start of the raised-cosine roll-off, as a fraction of Nyquist
TAPER_START = 0.5


class SolverError(RuntimeError):
    pass


class TransientWarning(UserWarning):
    """Simulation window shorter than recommended or not yet decayed."""


@dataclass(frozen=True)
class _Layout:
    nodes: tuple[str, ...]
    branches: tuple  # (i, j, LineParams, length)
    term_g: np.ndarray  # termination conductances per node

    def idx(self, name: str) -> int:
        return self.nodes.index(name)


def _layout(net: NetworkModel, positions=()) -> _Layout:
    positions = sorted({net.check_position(p) for p in positions})
    nodes = list(net.nodes)
    branches = []
    for seg in net.segments:
        cuts = sorted(p.distance_m for p in positions if p.segment_id == seg.id)
        names = [seg.from_node] + [str(Position(seg.id, d)) for d in cuts] + [seg.to_node]
        nodes.extend(names[1:-1])
        marks = [0.0] + cuts + [seg.length]
        for k in range(len(names) - 1):
            branches.append((names[k], names[k + 1], seg.params, marks[k + 1] - marks[k]))
    index = {n: i for i, n in enumerate(nodes)}
    g = np.zeros(len(nodes))
    for t in net.terminations:
        g[index[t.node]] = 1.0 / net.termination_ohms(t.node)
    branches = tuple((index[a], index[b], p, ln) for a, b, p, ln in branches)
    return _Layout(tuple(nodes), branches, g)


@dataclass(frozen=True)
class Drive:
    """Per-unit excitation of a layout.

    shunts: extra conductance per node name; fixed: imposed node voltages;
    inject: current injected into node names.
    """

    shunts: dict
    fixed: dict
    inject: dict


def _solve(lay: _Layout, s: np.ndarray, drive: Drive) -> np.ndarray:
    """Node voltages (len(s), n_nodes) for per-unit drive."""
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    n = len(lay.nodes)
    out = np.empty((s.size, n), dtype=complex)
    dc = s == 0
    if np.any(dc):
        out[dc] = _solve_dc(lay, drive)
    idx = np.flatnonzero(~dc)
    g = lay.term_g.astype(complex)
    for name, val in drive.shunts.items():
        g[lay.idx(name)] += val
    fixed = {lay.idx(k): v for k, v in drive.fixed.items()}
    free = np.array([i for i in range(n) if i not in fixed], dtype=int)
    fix = np.array(sorted(fixed), dtype=int)
    vfix = np.array([fixed[i] for i in fix], dtype=complex)
    b = np.zeros(n, dtype=complex)
    for name, val in drive.inject.items():
        b[lay.idx(name)] += val
    for start in range(0, idx.size, CHUNK):
        sel = idx[start:start + CHUNK]
        sc = s[sel]
        Y = np.zeros((sc.size, n, n), dtype=complex)
        for i, j, p, ln in lay.branches:
            ys, ym = segment_two_port(sc, p, ln)
            Y[:, i, i] += ys
            Y[:, j, j] += ys
            Y[:, i, j] += ym
            Y[:, j, i] += ym
        Y[:, np.arange(n), np.arange(n)] += g
        rhs = np.broadcast_to(b[free], (sc.size, free.size)).copy()
        if fix.size:
            rhs -= Y[:, free][:, :, fix] @ vfix
        V = np.empty((sc.size, n), dtype=complex)
        V[:, fix] = vfix
        if free.size:
            try:
                V[:, free] = np.linalg.solve(Y[:, free][:, :, free], rhs[..., None])[..., 0]
            except np.linalg.LinAlgError:
                for k in range(sc.size):
                    if abs(np.linalg.det(Y[k][np.ix_(free, free)])) == 0:
                        raise SolverError(f"singular nodal matrix at frequency index {sel[k]}") from None
                raise
        out[sel] = V
    return out


def _groups(lay: _Layout):
    """Union-find over branches that are ideal wires at DC (r0 == 0)."""
    parent = list(range(len(lay.nodes)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j, p, _ in lay.branches:
        if p.r0 == 0:
            parent[find(i)] = find(j)
    return [find(a) for a in range(len(lay.nodes))]


def _solve_dc(lay: _Layout, drive: Drive) -> np.ndarray:
    root = _groups(lay)
    reps = sorted(set(root))
    gi = {r: k for k, r in enumerate(reps)}
    m = len(reps)
    Y = np.zeros((m, m), dtype=complex)
    b = np.zeros(m, dtype=complex)
    for a in range(len(lay.nodes)):
        Y[gi[root[a]], gi[root[a]]] += lay.term_g[a]
    for name, val in drive.shunts.items():
        k = gi[root[lay.idx(name)]]
        Y[k, k] += val
    for name, val in drive.inject.items():
        b[gi[root[lay.idx(name)]]] += val
    for i, j, p, ln in lay.branches:
        if p.r0 == 0:
            Y[gi[root[i]], gi[root[i]]] += p.g0 * ln
            continue
        ys, ym = segment_two_port(0.0, p, ln)
        a, c = gi[root[i]], gi[root[j]]
        Y[a, a] += ys
        Y[c, c] += ys
        Y[a, c] += ym
        Y[c, a] += ym
    fixed = {}
    for name, val in drive.fixed.items():
        k = gi[root[lay.idx(name)]]
        if k in fixed and fixed[k] != val:
            raise SolverError("conflicting fixed voltages joined by an ideal wire at DC")
        fixed[k] = val
    free = [k for k in range(m) if k not in fixed]
    fix = sorted(fixed)
    V = np.zeros(m, dtype=complex)
    for k in fix:
        V[k] = fixed[k]
    if free:
        rhs = b[free] - Y[np.ix_(free, fix)] @ V[fix]
        try:
            V[free] = np.linalg.solve(Y[np.ix_(free, free)], rhs)
        except np.linalg.LinAlgError:
            raise SolverError("singular nodal matrix at frequency index 0 (DC)") from None
    return np.array([V[gi[root[a]]] for a in range(len(lay.nodes))])


def _current_to_ground(lay: _Layout, s: np.ndarray, V: np.ndarray, node: str, drive: Drive) -> np.ndarray:
    """Current flowing from the network into the fixed-voltage ``node``.

    KCL over the node (or, at DC, over the group of nodes joined to it by
    ideal wires): injected current minus shunt currents minus the currents
    leaving through line branches.
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    k = lay.idx(node)
    g = lay.term_g.astype(complex)
    inj = np.zeros(len(lay.nodes), dtype=complex)
    for name, val in drive.shunts.items():
        g[lay.idx(name)] += val
    for name, val in drive.inject.items():
        inj[lay.idx(name)] += val
    total = np.zeros(s.size, dtype=complex)
    dc = s == 0
    if np.any(dc):
        root = _groups(lay)
        group = {a for a in range(len(lay.nodes)) if root[a] == root[k]}
        v = V[np.flatnonzero(dc)[0]]
        cur = sum(inj[a] - g[a] * v[a] for a in group)
        for i, j, p, ln in lay.branches:
            if (i in group) == (j in group):
                continue
            ys, ym = segment_two_port(0.0, p, ln)
            a, c = (i, j) if i in group else (j, i)
            cur -= ys * v[a] + ym * v[c]
        total[dc] = cur
    nz = ~dc
    if np.any(nz):
        total[nz] = inj[k] - g[k] * V[nz, k]
        for i, j, p, ln in lay.branches:
            if k not in (i, j):
                continue
            other = j if i == k else i
            ys, ym = segment_two_port(s[nz], p, ln)
            total[nz] -= ys * V[nz, k] + ym * V[nz, other]
    return total


# ---------------------------------------------------------- public API

@dataclass(frozen=True)
class NodalSystem:
    nodes: tuple[str, ...]
    Y: np.ndarray


def assemble_nodal(net: NetworkModel, positions, omega: float, faults=None) -> NodalSystem:
    """Node-admittance matrix at one angular frequency.

    ``positions`` split their segments. ``faults`` maps positions to
    fault impedances: a positive value adds a shunt, zero grounds the node
    (it is then eliminated from the system).
    """
    faults = {position_of(k): v for k, v in (faults or {}).items()}
    lay = _layout(net, list(positions) + list(faults))
    n = len(lay.nodes)
    s = 1j * omega
    if omega == 0:
        raise ValueError("assemble_nodal needs omega != 0; DC is handled by node merging in the solver")
    Y = np.zeros((n, n), dtype=complex)
    for i, j, p, ln in lay.branches:
        ys, ym = segment_two_port(s, p, ln)
        Y[i, i] += ys
        Y[j, j] += ys
        Y[i, j] += ym
        Y[j, i] += ym
    Y[np.arange(n), np.arange(n)] += lay.term_g
    keep = list(range(n))
    for pos, z in faults.items():
        k = lay.idx(str(pos))
        if z > 0:
            Y[k, k] += 1.0 / z
        else:
            keep.remove(k)
    return NodalSystem(tuple(lay.nodes[k] for k in keep), Y[np.ix_(keep, keep)])


def forward_transfer_s(net: NetworkModel, fault: FaultSpec, s) -> np.ndarray:
    """Port voltage per unit fault source U_f (voltage source behind Zf)."""
    pos = net.check_position(fault)
    lay = _layout(net, [pos])
    name = str(pos)
    zf = fault.fault_impedance_ohms
    if zf == 0:
        drive = Drive({}, {name: 1.0}, {})
    else:
        drive = Drive({name: 1.0 / zf}, {}, {name: 1.0 / zf})
    V = _solve(lay, s, drive)
    return V[:, lay.idx(net.port_node)]


def reverse_source_impedance(net: NetworkModel, source_impedance: float | None = None) -> float:
    z = source_impedance if source_impedance is not None else net.termination_ohms(net.port_node)
    if z is None or not z > 0:
        raise SolverError("port has no termination; give an explicit source impedance")
    return float(z)


def reverse_transfer_s(net: NetworkModel, guess, s, source_impedance: float | None = None) -> np.ndarray:
    """Guess short-circuit current per unit EMF injected at the port behind Zs."""
    pos = net.check_position(position_of(guess))
    lay = _layout(net, [pos])
    zs = reverse_source_impedance(net, source_impedance)
    port = net.port_node
    extra = 1.0 / zs - lay.term_g[lay.idx(port)]
    drive = Drive({port: extra}, {str(pos): 0.0}, {port: 1.0 / zs})
    V = _solve(lay, s, drive)
    return _current_to_ground(lay, s, V, str(pos), drive)


def transfer_impedance(net: NetworkModel, positions, src: str, obs: str, s) -> np.ndarray:
    """Voltage at node ``obs`` per unit current injected at node ``src``."""
    lay = _layout(net, [position_of(p) for p in positions])
    V = _solve(lay, s, Drive({}, {}, {src: 1.0}))
    return V[:, lay.idx(obs)]


def prefault_voltage(net: NetworkModel, pos) -> complex:
    """Steady-state phasor (peak) at ``pos`` driven by the network's AC source."""
    src = net.steady_source
    if src is None:
        raise SolverError("network has no steady [source]")
    pos = net.check_position(position_of(pos))
    lay = _layout(net, [pos])
    z = net.termination_ohms(src.node)
    V = _solve(lay, np.array([2j * np.pi * src.hz]), Drive({}, {}, {src.node: src.volts / z}))
    return complex(V[0, lay.idx(str(pos))])


@dataclass(frozen=True, eq=False)
class TransferSpectrum:
    values: np.ndarray
    grid: FrequencyGrid
    description: str


def forward_transfer_spectrum(net, fault: FaultSpec, grid: FrequencyGrid) -> TransferSpectrum:
    h = forward_transfer_s(net, fault, 1j * grid.omega)
    return TransferSpectrum(h, grid, f"port voltage / fault source at {fault.position}")


def reverse_transfer_spectrum(net, guess, grid: FrequencyGrid, source_impedance=None) -> TransferSpectrum:
    h = reverse_transfer_s(net, guess, 1j * grid.omega, source_impedance)
    return TransferSpectrum(h, grid, f"short current at {position_of(guess)} / port EMF")


def forward_response(net, fault: FaultSpec, source_spectrum: SpectrumTrace) -> SpectrumTrace:
    """U_0(w) = H_fwd(w) U_f(w) at the port."""
    h = forward_transfer_s(net, fault, 1j * source_spectrum.omega)
    return source_spectrum * h


def reverse_response(net, guess, injected_spectrum: SpectrumTrace, source_impedance=None) -> SpectrumTrace:
    """Spectrum of the current through the short-circuit branch at ``guess``."""
    h = reverse_transfer_s(net, guess, 1j * injected_spectrum.omega, source_impedance)
    return injected_spectrum * h


# ------------------------------------------------------ time synthesis

def _taper(n_bins: int) -> np.ndarray:
    f = np.linspace(0.0, 1.0, n_bins)
    w = np.ones(n_bins)
    roll = f > TAPER_START
    w[roll] = 0.5 * (1 + np.cos(np.pi * (f[roll] - TAPER_START) / (1 - TAPER_START)))
    return w


def causal_response(transfer, x: SignalTrace, n_out: int | None = None) -> SignalTrace:
    """Output of the causal system ``transfer(s)`` driven by ``x`` from t = 0.

    Returns the first ``n_out`` samples (default ``len(x)``). The input is
    taken to start at t = 0 whatever its ``t0``.
    """
    n_out = len(x) if n_out is None else int(n_out)
    n_in = min(len(x), n_out)
    dt = x.dt
    P = next_pow2(2 * n_out)
    sigma = -math.log(ALIAS_LEVEL) / (P * dt)
    t = dt * np.arange(P)
    xd = np.zeros(P)
    xd[:n_in] = x.samples[:n_in] * np.exp(-sigma * t[:n_in])
    k = np.arange(P // 2 + 1)
    s = sigma + 2j * np.pi * k / (P * dt)
    H = np.asarray(transfer(s)) * _taper(k.size)
    y = np.fft.irfft(H * np.fft.rfft(xd), P)[:n_out] * np.exp(sigma * t[:n_out])
    return SignalTrace(y, dt)


def simulate_fault_transient(
    net: NetworkModel,
    fault: FaultSpec,
    dt: float = 1e-7,
    window_s: float = 5e-3,
    fault_angle: float = 0.0,
) -> SignalTrace:
    """Fault-generated port transient u0(t) by superposition.

    The fault-superimposed source is minus the pre-fault voltage at the
    fault point, switched on at t = 0. ``fault_angle`` is the phase of the
    pre-fault voltage at the switching instant: 0 switches at the voltage
    peak, pi/2 at a zero crossing.
    """
    src = net.steady_source
    if src is None:
        raise SolverError("fault simulation needs a steady [source] in the network")
    v_pre = prefault_voltage(net, fault)
    n = int(round(window_s / dt))
    t = dt * np.arange(n)
    uf = -abs(v_pre) * np.cos(2 * np.pi * src.hz * t + fault_angle)
    u0 = causal_response(lambda s: forward_transfer_s(net, fault, s), SignalTrace(uf, dt))
    speed = min(seg.params.wave_speed for seg in net.segments)
    round_trip = 2 * net.longest_leaf_path() / speed
    if window_s < 20 * round_trip:
        warnings.warn(
            f"window {window_s:g} s is shorter than 20 round trips ({20 * round_trip:g} s)",
            TransientWarning,
            stacklevel=2,
        )
    peak = np.max(np.abs(u0.samples))
    if peak > 0 and abs(u0.samples[-1]) > 0.01 * peak:
        warnings.warn(
            "transient has not decayed to 1% of its peak by the end of the window",
            TransientWarning,
            stacklevel=2,
        )
    return u0


def analyze_for(trace: SignalTrace, grid: FrequencyGrid) -> SpectrumTrace:
    """Spectrum of ``trace`` zero padded onto ``grid``."""
    if not math.isclose(trace.dt, grid.dt, rel_tol=1e-9):
        raise ValueError(f"trace dt {trace.dt} does not match grid dt {grid.dt}")
    return analyze_time(trace, grid.n_samples)
