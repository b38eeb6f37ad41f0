"""
Network topology: nodes, distributed-parameter line segments, resistive
terminations, the measurement port and the guessed-fault grid.

Network description files are plain ``key = value`` documents split into
sections::

    # 10 km line, 100 kOhm at both ends
    [node A]
    [node B]

    [segment L1]
    from = A
    to = B
    length_m = 10000
    r0 = 1e-4
    l0 = 1e-6
    g0 = 0
    c0 = 1.15e-11

    [termination]
    node = A
    ohms = 100000

    [termination]
    node = B
    ohms = matched

    [port]
    node = A

    [source]
    node = A
    volts = 10000
    hz = 50

Line parameters omitted from a segment fall back to ``DEFAULT_LINE``.
All quantities are SI base units.
"""
from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field
from typing import NamedTuple

import networkx as nx
import numpy as np

# Reference frequency used to resolve ``ohms = matched`` terminations.
MATCH_REFERENCE_HZ = 1e6


class NetworkError(ValueError):
    """Invalid network description or model."""


@dataclass(frozen=True)
class LineParams:
    """Per-unit-length line constants (ohm/m, H/m, S/m, F/m)."""

    r0: float
    l0: float
    g0: float
    c0: float

    def __post_init__(self):
        if not (self.l0 > 0 and self.c0 > 0):
            raise NetworkError(f"l0 and c0 must be positive, got l0={self.l0}, c0={self.c0}")
        if self.r0 < 0 or self.g0 < 0:
            raise NetworkError(f"r0 and g0 must be nonnegative, got r0={self.r0}, g0={self.g0}")

    @property
    def wave_speed(self) -> float:
        """Lossless propagation speed 1/sqrt(l0*c0)."""
        return 1.0 / math.sqrt(self.l0 * self.c0)

    @property
    def surge_impedance(self) -> float:
        """Lossless characteristic impedance sqrt(l0/c0)."""
        return math.sqrt(self.l0 / self.c0)

    @property
    def lossless(self) -> bool:
        return self.r0 == 0 and self.g0 == 0


# Stand-in overhead line: 0.1 ohm/km, 1 mH/km, 11.5 nF/km.
# Wave speed ~2.95e8 m/s, surge impedance ~295 ohm.
DEFAULT_LINE = LineParams(r0=0.1e-3, l0=1.0e-6, g0=0.0, c0=11.5e-12)


@dataclass(frozen=True)
class LineSegment:
    id: str
    from_node: str
    to_node: str
    length: float
    params: LineParams = DEFAULT_LINE

    def __post_init__(self):
        if not self.length > 0:
            raise NetworkError(f"segment {self.id}: length must be positive")
        if self.from_node == self.to_node:
            raise NetworkError(f"segment {self.id}: from_node equals to_node")


@dataclass(frozen=True)
class Termination:
    """Resistive termination; ``ohms=None`` means matched to the line."""

    node: str
    ohms: float | None = None

    def __post_init__(self):
        if self.ohms is not None and not self.ohms > 0:
            raise NetworkError(f"termination at {self.node}: ohms must be positive")

    @property
    def matched(self) -> bool:
        return self.ohms is None


@dataclass(frozen=True)
class SteadySource:
    """AC source (peak volts, hertz) behind the termination at ``node``."""

    node: str
    volts: float
    hz: float

    def __post_init__(self):
        if not self.hz > 0:
            raise NetworkError("source frequency must be positive")


class Position(NamedTuple):
    """Canonical position key: distance along a segment from its from_node."""

    segment_id: str
    distance_m: float

    def __str__(self):
        return f"{self.segment_id}@{format(float(self.distance_m), '.12g')}"

    @classmethod
    def parse(cls, text: str) -> "Position":
        seg, sep, dist = text.strip().rpartition("@")
        if not sep or not seg:
            raise ValueError(f"position key must look like 'SEG@METERS', got {text!r}")
        return cls(seg, float(dist))


@dataclass(frozen=True)
class FaultSpec:
    segment_id: str
    distance_m: float
    fault_impedance_ohms: float = 0.0

    def __post_init__(self):
        if self.fault_impedance_ohms < 0:
            raise NetworkError("fault impedance must be nonnegative")

    @property
    def position(self) -> Position:
        return Position(self.segment_id, float(self.distance_m))


@dataclass(frozen=True)
class NetworkModel:
    nodes: tuple[str, ...]
    segments: tuple[LineSegment, ...]
    terminations: tuple[Termination, ...]
    port_node: str
    steady_source: SteadySource | None = None
    _graph: nx.MultiGraph = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "terminations", tuple(self.terminations))
        self._validate()

    def _validate(self):
        if len(set(self.nodes)) != len(self.nodes):
            raise NetworkError("duplicate node ids")
        known = set(self.nodes)
        ids = [s.id for s in self.segments]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise NetworkError(f"duplicate segment ids: {', '.join(dup)}")
        if not self.segments:
            raise NetworkError("network has no segments")
        graph = nx.MultiGraph()
        graph.add_nodes_from(self.nodes)
        for seg in self.segments:
            for n in (seg.from_node, seg.to_node):
                if n not in known:
                    raise NetworkError(f"segment {seg.id} references unknown node {n!r}")
            graph.add_edge(seg.from_node, seg.to_node, key=seg.id, length=seg.length)
        if not nx.is_connected(graph):
            raise NetworkError("network graph is disconnected")
        term_nodes = [t.node for t in self.terminations]
        if len(set(term_nodes)) != len(term_nodes):
            raise NetworkError("node carries more than one termination")
        for n in term_nodes:
            if n not in known:
                raise NetworkError(f"termination at unknown node {n!r}")
        if self.port_node not in known:
            raise NetworkError(f"port node {self.port_node!r} does not exist")
        for n in self.nodes:
            if graph.degree(n) == 1 and n not in term_nodes and n != self.port_node:
                raise NetworkError(f"unterminated leaf node {n!r}")
        if self.steady_source is not None:
            if self.steady_source.node not in term_nodes:
                raise NetworkError("source node must carry a termination (its source impedance)")
        object.__setattr__(self, "_graph", graph)

    @property
    def graph(self) -> nx.MultiGraph:
        return self._graph

    def segment(self, segment_id: str) -> LineSegment:
        for seg in self.segments:
            if seg.id == segment_id:
                return seg
        raise NetworkError(f"unknown segment {segment_id!r}")

    def termination_ohms(self, node: str) -> float | None:
        """Resolved termination resistance at ``node`` (None if unterminated)."""
        for term in self.terminations:
            if term.node == node:
                if not term.matched:
                    return float(term.ohms)
                seg = next(s for s in self.segments if node in (s.from_node, s.to_node))
                from .linemath import char_impedance

                return float(abs(char_impedance(2 * np.pi * MATCH_REFERENCE_HZ, seg.params)))
        return None

    def check_position(self, pos: Position | FaultSpec) -> Position:
        pos = position_of(pos)
        seg = self.segment(pos.segment_id)
        if not 0 < pos.distance_m < seg.length:
            raise NetworkError(
                f"position {pos} outside segment {seg.id} (0 < d < {seg.length:g} m required)"
            )
        return pos

    def path_length_to(self, pos: Position) -> float:
        """Shortest along-line distance from the port to ``pos``."""
        seg = self.segment(pos.segment_id)
        dist = nx.single_source_dijkstra_path_length(self.graph, self.port_node, weight="length")
        return min(dist[seg.from_node] + pos.distance_m, dist[seg.to_node] + seg.length - pos.distance_m)

    def longest_leaf_path(self) -> float:
        """Largest shortest-path distance from the port to any leaf node."""
        dist = nx.single_source_dijkstra_path_length(self.graph, self.port_node, weight="length")
        leaves = [n for n in self.nodes if self.graph.degree(n) == 1 and n != self.port_node]
        if not leaves:
            leaves = list(self.nodes)
        return max(dist[n] for n in leaves)

    def fingerprint(self) -> str:
        """SHA-256 of the canonical serialization."""
        return hashlib.sha256(serialize_network(self).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class GuessGrid:
    positions: tuple[Position, ...]
    spacing_m: float

    def __len__(self):
        return len(self.positions)

    def __iter__(self):
        return iter(self.positions)

    def index(self, pos) -> int:
        return self.positions.index(position_of(pos))

    def nearest(self, pos) -> Position:
        """Grid position on the same segment closest to ``pos``."""
        pos = position_of(pos)
        same = [p for p in self.positions if p.segment_id == pos.segment_id]
        if not same:
            raise NetworkError(f"grid has no positions on segment {pos.segment_id!r}")
        return min(same, key=lambda p: abs(p.distance_m - pos.distance_m))


def position_of(item) -> Position:
    """Canonical ``Position`` key for a fault spec, grid entry or key string."""
    if isinstance(item, FaultSpec):
        return item.position
    if isinstance(item, str):
        return Position.parse(item)
    seg, dist = item
    return Position(str(seg), float(dist))


def make_guess_grid(net: NetworkModel, spacing_m: float) -> GuessGrid:
    """Guess positions at multiples of ``spacing_m`` along every segment.

    Segment endpoints are excluded. Positions are ordered by
    (segment id, distance).
    """
    if not spacing_m > 0:
        raise NetworkError("grid spacing must be positive")
    positions = []
    for seg in sorted(net.segments, key=lambda s: s.id):
        if spacing_m >= seg.length:
            raise NetworkError(
                f"grid spacing {spacing_m:g} m too large for segment {seg.id} ({seg.length:g} m)"
            )
        k = 1
        while k * spacing_m < seg.length * (1 - 1e-12):
            positions.append(Position(seg.id, k * spacing_m))
            k += 1
    return GuessGrid(tuple(positions), float(spacing_m))


# ---------------------------------------------------------------- parsing

_SECTION = re.compile(r"^\[\s*(\w+)(?:\s+([^\]\s]+))?\s*\]$")

_KEYS = {
    "node": set(),
    "segment": {"from", "to", "length_m", "r0", "l0", "g0", "c0"},
    "termination": {"node", "ohms"},
    "port": {"node"},
    "source": {"node", "volts", "hz"},
}
_REQUIRED = {
    "segment": {"from", "to", "length_m"},
    "termination": {"node", "ohms"},
    "port": {"node"},
    "source": {"node", "volts", "hz"},
}


def _number(value: str, key: str, lineno: int) -> float:
    try:
        x = float(value)
    except ValueError:
        raise NetworkError(f"line {lineno}: {key} must be a number, got {value!r}") from None
    if not math.isfinite(x):
        raise NetworkError(f"line {lineno}: {key} must be finite")
    return x


def parse_network(text: str) -> NetworkModel:
    """Parse and validate a network description document."""
    sections = []  # (kind, name, {key: (value, lineno)}, header lineno)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            kind, name = m.group(1).lower(), m.group(2)
            if kind not in _KEYS:
                raise NetworkError(f"line {lineno}: unknown section [{kind}]")
            if kind in ("node", "segment") and not name:
                raise NetworkError(f"line {lineno}: [{kind}] needs an id")
            if kind not in ("node", "segment") and name:
                raise NetworkError(f"line {lineno}: [{kind}] takes no id")
            sections.append((kind, name, {}, lineno))
            continue
        if "=" not in line:
            raise NetworkError(f"line {lineno}: expected 'key = value', got {line!r}")
        if not sections:
            raise NetworkError(f"line {lineno}: key outside of any section")
        key, value = (s.strip() for s in line.split("=", 1))
        kind, name, body, _ = sections[-1]
        if key not in _KEYS[kind]:
            raise NetworkError(f"line {lineno}: unknown key {key!r} in [{kind}]")
        if key in body:
            raise NetworkError(f"line {lineno}: duplicate key {key!r}")
        body[key] = (value, lineno)

    nodes, segments, terms = [], [], []
    port = source = None
    for kind, name, body, lineno in sections:
        missing = _REQUIRED.get(kind, set()) - set(body)
        if missing:
            raise NetworkError(f"line {lineno}: [{kind}] missing {', '.join(sorted(missing))}")
        if kind == "node":
            nodes.append(name)
        elif kind == "segment":
            p = {
                k: _number(body[k][0], k, body[k][1]) if k in body else getattr(DEFAULT_LINE, k)
                for k in ("r0", "l0", "g0", "c0")
            }
            length = _number(body["length_m"][0], "length_m", body["length_m"][1])
            try:
                segments.append(
                    LineSegment(name, body["from"][0], body["to"][0], length, LineParams(**p))
                )
            except NetworkError as exc:
                raise NetworkError(f"line {lineno}: {exc}") from None
        elif kind == "termination":
            value, vline = body["ohms"]
            ohms = None if value.lower() == "matched" else _number(value, "ohms", vline)
            try:
                terms.append(Termination(body["node"][0], ohms))
            except NetworkError as exc:
                raise NetworkError(f"line {vline}: {exc}") from None
        elif kind == "port":
            if port is not None:
                raise NetworkError(f"line {lineno}: more than one [port]")
            port = body["node"][0]
        elif kind == "source":
            if source is not None:
                raise NetworkError(f"line {lineno}: more than one [source]")
            source = SteadySource(
                body["node"][0],
                _number(body["volts"][0], "volts", body["volts"][1]),
                _number(body["hz"][0], "hz", body["hz"][1]),
            )
    if port is None:
        raise NetworkError("missing [port] section")
    return NetworkModel(tuple(nodes), tuple(segments), tuple(terms), port, source)


def load_network(path) -> NetworkModel:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


def serialize_network(net: NetworkModel) -> str:
    """Canonical text form: fixed section order, sorted keys, repr floats."""
    out = []
    for n in net.nodes:
        out.append(f"[node {n}]")
    for seg in net.segments:
        out.append(f"[segment {seg.id}]")
        fields = {
            "from": seg.from_node,
            "to": seg.to_node,
            "length_m": repr(float(seg.length)),
            "r0": repr(float(seg.params.r0)),
            "l0": repr(float(seg.params.l0)),
            "g0": repr(float(seg.params.g0)),
            "c0": repr(float(seg.params.c0)),
        }
        out.extend(f"{k} = {fields[k]}" for k in sorted(fields))
    for t in net.terminations:
        ohms = "matched" if t.matched else repr(float(t.ohms))
        out.extend(["[termination]", f"node = {t.node}", f"ohms = {ohms}"])
    out.extend(["[port]", f"node = {net.port_node}"])
    if net.steady_source is not None:
        s = net.steady_source
        out.extend(["[source]", f"hz = {float(s.hz)!r}", f"node = {s.node}", f"volts = {float(s.volts)!r}"])
    return "\n".join(out) + "\n"


# ------------------------------------------------------- stock networks

def single_line(
    length_m: float = 10e3,
    params: LineParams = DEFAULT_LINE,
    z_head: float | None = 100e3,
    z_tail: float | None = 100e3,
    source_volts: float = 10e3,
    hz: float = 50.0,
) -> NetworkModel:
    """Single line A--B, port and AC source at A. ``None`` means matched."""
    return NetworkModel(
        nodes=("A", "B"),
        segments=(LineSegment("L1", "A", "B", length_m, params),),
        terminations=(Termination("A", z_head), Termination("B", z_tail)),
        port_node="A",
        steady_source=SteadySource("A", source_volts, hz),
    )


# T-network lengths are an assumption: the fault cases need T1 > 4 km and
# T3 > 1 km; unequal branch lengths keep the two far branches distinguishable.
T_NETWORK_LENGTHS = {"T1": 8e3, "T2": 6e3, "T3": 4e3}


def t_network(
    lengths: dict[str, float] | None = None,
    params: LineParams = DEFAULT_LINE,
    z_term: float = 100e3,
    source_volts: float = 10e3,
    hz: float = 50.0,
) -> NetworkModel:
    """T network: port A --T1-- junction J, then J --T2-- B and J --T3-- C."""
    lengths = {**T_NETWORK_LENGTHS, **(lengths or {})}
    return NetworkModel(
        nodes=("A", "J", "B", "C"),
        segments=(
            LineSegment("T1", "A", "J", lengths["T1"], params),
            LineSegment("T2", "J", "B", lengths["T2"], params),
            LineSegment("T3", "J", "C", lengths["T3"], params),
        ),
        terminations=(Termination("A", z_term), Termination("B", z_term), Termination("C", z_term)),
        port_node="A",
        steady_source=SteadySource("A", source_volts, hz),
    )
