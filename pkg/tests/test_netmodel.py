import pytest
from hypothesis import given, settings, strategies as st

from emtrloc import netmodel as nm
from emtrloc.netmodel import NetworkError

from conftest import NETWORKS


def test_parse_single_line_file():
    net = nm.load_network(NETWORKS / "single_line.net")
    assert len(net.segments) == 1
    assert len(net.terminations) == 2
    assert all(t.ohms == 100e3 for t in net.terminations)
    assert net.port_node == "A"
    assert net.segments[0].length == 10e3
    assert net.steady_source == nm.SteadySource("A", 10e3, 50.0)


def test_parse_t_network_file():
    net = nm.load_network(NETWORKS / "t_network.net")
    assert len(net.nodes) == 4
    assert len(net.segments) == 3
    leaves = [n for n in net.nodes if net.graph.degree(n) == 1]
    assert sorted(leaves) == ["A", "B", "C"]
    assert sorted(t.node for t in net.terminations) == sorted(leaves)
    # omitted line constants fall back to the stand-in line
    assert net.segment("T2").params == nm.DEFAULT_LINE


def test_default_line_is_the_documented_stand_in():
    p = nm.DEFAULT_LINE
    assert p.wave_speed == pytest.approx(2.95e8, rel=2e-3)
    assert p.surge_impedance == pytest.approx(295, rel=2e-3)


UNTERMINATED = """
[node A]
[node B]
[segment L1]
from = A
to = B
length_m = 1000
[termination]
node = A
ohms = 100
[port]
node = A
[node C]
[segment L2]
from = B
to = C
length_m = 500
[termination]
node = B
ohms = 50
"""


def test_unterminated_leaf_rejected():
    with pytest.raises(NetworkError, match="unterminated leaf"):
        nm.parse_network(UNTERMINATED)


@pytest.mark.parametrize(
    "text, msg",
    [
        ("[node A]\n[node B]\n[segment L1]\nfrom = A\nto = B\nlength_m = 1\ncolour = red\n", "line 7: unknown key 'colour'"),
        ("[node A]\n[node A]\n[segment L1]\nfrom = A\nto = A\nlength_m = 1\n", "from_node equals to_node"),
        ("[node A]\n[node B]\n[segment L1]\nfrom = A\nto = B\n", "missing length_m"),
        ("[node A]\n[node B]\n[segment L1]\nfrom = A\nto = B\nlength_m = abc\n", "line 6: length_m must be a number"),
        ("[widget]\n", "unknown section"),
        ("node = A\n", "outside of any section"),
        ("[node A]\n[node B]\n[segment L1]\nfrom = A\nto = B\nlength_m = 10\n"
         "[termination]\nnode = A\nohms = 5\n[termination]\nnode = B\nohms = 5\n", "missing \\[port\\]"),
    ],
)
def test_schema_violations_name_the_problem(text, msg):
    with pytest.raises(NetworkError, match=msg):
        nm.parse_network(text)


def test_disconnected_and_duplicate_ids():
    base = "[node A]\n[node B]\n[node C]\n[node D]\n"
    seg = "[segment {i}]\nfrom = {a}\nto = {b}\nlength_m = 10\n"
    terms = "".join(f"[termination]\nnode = {n}\nohms = 50\n" for n in "ABCD") + "[port]\nnode = A\n"
    with pytest.raises(NetworkError, match="disconnected"):
        nm.parse_network(base + seg.format(i="S1", a="A", b="B") + seg.format(i="S2", a="C", b="D") + terms)
    with pytest.raises(NetworkError, match="duplicate segment ids: S1"):
        nm.parse_network(base + seg.format(i="S1", a="A", b="B") + seg.format(i="S1", a="B", b="C")
                         + seg.format(i="S3", a="C", b="D") + terms)


def test_matched_termination_resolves_to_surge_impedance():
    net = nm.single_line(params=nm.LineParams(0, 1e-6, 0, 1.15e-11), z_tail=None)
    assert net.termination_ohms("B") == pytest.approx(nm.DEFAULT_LINE.surge_impedance, rel=1e-12)
    assert nm.parse_network(nm.serialize_network(net)) == net


def test_guess_grid_single_line():
    grid = nm.make_guess_grid(nm.single_line(), 1000.0)
    assert [p.distance_m for p in grid] == [1000.0 * k for k in range(1, 10)]


def test_guess_grid_spacing_too_large():
    with pytest.raises(NetworkError, match="too large"):
        nm.make_guess_grid(nm.single_line(), 15e3)


def test_guess_grid_t_network_counts_by_enumeration():
    net = nm.t_network()
    grid = nm.make_guess_grid(net, 500.0)
    for seg in net.segments:
        expected = sum(1 for k in range(1, 10_000) if 0 < k * 500 < seg.length)
        assert sum(p.segment_id == seg.id for p in grid) == expected
    assert [sum(p.segment_id == s for p in grid) for s in ("T1", "T2", "T3")] == [15, 11, 7]


def test_position_keys():
    assert str(nm.position_of(nm.FaultSpec("T1", 4000.0, 1.0))) == "T1@4000"
    assert str(nm.position_of(("T3", 1000))) == "T3@1000"
    assert nm.position_of("T3@1000") == nm.Position("T3", 1000.0)
    assert nm.position_of(("T1", 4000.0)) == nm.position_of(("T1", 4000.0))
    assert str(nm.Position("X", 12.5)) == "X@12.5"


def test_fault_outside_segment():
    net = nm.single_line()
    with pytest.raises(NetworkError, match="outside segment"):
        net.check_position(nm.FaultSpec("L1", 12e3))


# ------------------------------------------------------------ properties

@st.composite
def random_trees(draw):
    n = draw(st.integers(2, 7))
    nodes = [f"N{i}" for i in range(n)]
    segs = []
    for i in range(1, n):
        parent = draw(st.integers(0, i - 1))
        length = draw(st.floats(100, 20e3, allow_nan=False))
        params = nm.LineParams(
            r0=draw(st.floats(0, 1e-3)), l0=draw(st.floats(1e-7, 1e-5)),
            g0=draw(st.sampled_from([0.0, 1e-9])), c0=draw(st.floats(1e-12, 1e-10)),
        )
        segs.append(nm.LineSegment(f"S{i}", nodes[parent], nodes[i], length, params))
    degree = {v: 0 for v in nodes}
    for s in segs:
        degree[s.from_node] += 1
        degree[s.to_node] += 1
    terms = []
    for v in nodes:
        if degree[v] == 1 or draw(st.booleans()):
            ohms = draw(st.one_of(st.none(), st.floats(1, 1e6)))
            terms.append(nm.Termination(v, ohms))
    src = nm.SteadySource(terms[0].node, draw(st.floats(1, 1e5)), 50.0) if draw(st.booleans()) else None
    return nm.NetworkModel(tuple(nodes), tuple(segs), tuple(terms), nodes[0], src)


@given(random_trees())
@settings(max_examples=60, deadline=None)
def test_serialize_round_trip(net):
    text = nm.serialize_network(net)
    again = nm.parse_network(text)
    assert again == net
    assert nm.serialize_network(again) == text
    assert again.fingerprint() == net.fingerprint()


@given(random_trees(), st.floats(0.01, 0.9))
@settings(max_examples=60, deadline=None)
def test_grid_positions_interior_increasing_and_spaced(net, frac):
    spacing = frac * min(s.length for s in net.segments)
    grid = nm.make_guess_grid(net, spacing)
    assert len(set(grid.positions)) == len(grid)
    for seg in net.segments:
        d = [p.distance_m for p in grid if p.segment_id == seg.id]
        assert d, "every segment covered"
        assert 0 < d[0] and d[-1] < seg.length
        gaps = [b - a for a, b in zip(d, d[1:])]
        assert all(g == pytest.approx(spacing, rel=1e-9) for g in gaps)
    assert list(grid.positions) == sorted(grid.positions)


@given(st.floats(200, 9800), st.sampled_from([250.0, 500.0, 1000.0]))
def test_fault_maps_to_nearest_key_within_half_spacing(distance, spacing):
    # holds wherever a grid point lies on either side of the fault
    grid = nm.make_guess_grid(nm.single_line(), spacing)
    first, last = grid.positions[0].distance_m, grid.positions[-1].distance_m
    if not first - spacing / 2 <= distance <= last + spacing / 2:
        return
    key = grid.nearest(nm.FaultSpec("L1", distance))
    assert abs(key.distance_m - distance) <= spacing / 2 + 1e-9
