import json
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qgs.graph import (
    DIRICHLET,
    GraphError,
    MetricGraph,
    PotentialSpec,
    build_graph,
    circumference,
    dumps_graph,
    effective_circumference,
    epsilon_boundary,
    load_graph,
    parse_graph,
    total_length,
)

SINGLE = {
    "vertices": [{"id": "a", "sigma": 0}, {"id": "b", "sigma": 0}],
    "edges": [{"id": "e", "from": "a", "to": "b", "length": 1, "potential": {"kind": "zero", "params": {}}}],
}


def star2(sigma_c=1.0):
    return build_graph([("c", "v1", 1.0), ("c", "v2", 1.0)], {"c": sigma_c})


def test_parse_single_edge():
    g = parse_graph(json.dumps(SINGLE))
    assert len(g.edges) == 1 and len(g.vertices) == 2
    assert total_length(g) == 1.0
    assert g.degrees == (1, 1)


def test_parse_star2_file(data_dir):
    g = load_graph(data_dir / "star2.json")
    assert g.degrees == (2, 1, 1)
    assert g.sigma == (1.0, 0.0, 0.0)


def test_zero_length_rejected():
    doc = json.loads(json.dumps(SINGLE))
    doc["edges"][0]["length"] = 0
    with pytest.raises(GraphError, match="non-positive length"):
        parse_graph(json.dumps(doc))


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d["edges"][0].update(extra=1), "unknown key"),
        (lambda d: d["edges"][0]["potential"].update(kind="bessel"), "unknown potential kind"),
        (lambda d: d["vertices"].append({"id": "z"}), "disconnected|degree"),
        (lambda d: d["edges"][0].update(to="nowhere"), "unknown vertex"),
        (lambda d: d["vertices"][0].update(sigma="robin"), "dirichlet"),
        (lambda d: d.pop("edges"), "missing"),
    ],
)
def test_parse_errors_name_the_field(mutate, message):
    doc = json.loads(json.dumps(SINGLE))
    mutate(doc)
    with pytest.raises(GraphError, match=message):
        parse_graph(json.dumps(doc))


def test_malformed_json():
    with pytest.raises(GraphError, match="malformed"):
        parse_graph("{not json")


def test_disconnected_rejected():
    with pytest.raises(GraphError, match="connected"):
        build_graph([("a", "b", 1.0), ("c", "d", 1.0)])


def test_dirichlet_sigma_parsed():
    doc = json.loads(json.dumps(SINGLE))
    doc["vertices"][1]["sigma"] = "dirichlet"
    g = parse_graph(json.dumps(doc))
    assert g.sigma[1] == DIRICHLET and g.has_dirichlet


@pytest.mark.parametrize(
    "g, expected",
    [(star2(), 2.0), (build_graph([("v", "v", 2.0)]), 2.0), (build_graph([("a", "b", 0.5)]), 0.5)],
)
def test_total_length(g, expected):
    assert total_length(g) == expected


def test_loop_degree_two():
    g = build_graph([("v", "v", 2.0)])
    assert g.degrees == (2,)
    assert g.edges[0].is_loop


@pytest.mark.parametrize(
    "g, expected",
    [
        (star2(), 2.5),
        (build_graph([("v", "v", 2.0)]), 0.5),
        (build_graph([("c", "a", 1.0), ("c", "b", 1.0), ("c", "d", 1.0)]), 10 / 3),
    ],
)
def test_circumference(g, expected):
    assert circumference(g) == pytest.approx(expected, rel=1e-15)


def test_effective_circumference():
    assert effective_circumference(star2(1.0)) == 0.5
    assert effective_circumference(star2(0.0)) == 0.0
    assert effective_circumference(build_graph([("a", "b", 1.0)], {"a": 2.0, "b": 3.0})) == 5.0


def test_effective_circumference_rejects_dirichlet():
    g = build_graph([("a", "b", 1.0)], {"a": DIRICHLET})
    with pytest.raises(GraphError, match="Dirichlet"):
        effective_circumference(g)


def test_epsilon_boundary():
    assert epsilon_boundary(star2(1.0), 0.4) == {"c"}
    assert epsilon_boundary(star2(1.0), 0.6) == set()
    assert epsilon_boundary(star2(0.0), 1e-9) == set()


def test_potential_integrals_exact():
    assert PotentialSpec.constant(3.0).integral(2.0) == 6.0
    assert PotentialSpec.polynomial([1.0, 2.0, 3.0]).integral(1.0) == pytest.approx(1 + 1 + 1)
    assert PotentialSpec.trig(1.0, cos=[1.0], sin=[2.0]).integral(1.0) == pytest.approx(1.0, abs=1e-15)


def test_potential_bounds_over_approximate():
    p = PotentialSpec.trig(0.0, cos=[1.0, 0.3], sin=[0.2, -0.7])
    lo, hi = p.bounds(1.3)
    import numpy as np

    x = np.linspace(0, 1.3, 200001)
    v = p(x, 1.3)
    assert lo <= v.min() and hi >= v.max()
    assert p.negative_part_sup(1.3) >= -v.min() - 1e-12
    assert np.all(p.negative_part(x, 1.3) >= 0)


def test_potential_from_dict_rejects_unknown_params():
    with pytest.raises(GraphError):
        PotentialSpec.from_dict({"kind": "constant", "params": {"c": 1, "d": 2}})


def test_roundtrip_canonical(test_graph):
    _, g = test_graph
    text = dumps_graph(g)
    assert parse_graph(text) == g
    assert dumps_graph(parse_graph(text)) == text


edge_lists = st.lists(
    st.tuples(st.integers(0, 4), st.integers(0, 4), st.floats(0.1, 5.0)), min_size=1, max_size=8
)


def _connected_graph(edges, sigmas):
    # chain the vertices so the graph is connected, then add the random edges
    verts = sorted({v for a, b, _ in edges for v in (a, b)})
    chain = [(f"v{verts[i]}", f"v{verts[i + 1]}", 1.0) for i in range(len(verts) - 1)]
    rest = [(f"v{a}", f"v{b}", length) for a, b, length in edges]
    g = build_graph(chain + rest)
    return g.with_sigma([sigmas[i % len(sigmas)] for i in range(len(g.vertices))])


@given(edge_lists, st.lists(st.floats(-5, 5), min_size=1, max_size=5))
def test_degree_sum_and_circumference_properties(edges, sigmas):
    g = _connected_graph(edges, sigmas)
    assert sum(g.degrees) == 2 * len(g.edges)
    assert circumference(g) <= len(g.vertices)
    doubled = g.with_sigma([2 * s for s in g.sigma])
    assert effective_circumference(doubled) == pytest.approx(2 * effective_circumference(g), abs=1e-12)
    assert parse_graph(dumps_graph(g)) == g


def test_circumference_exact_rational():
    g = build_graph([("c", "a", 1.0), ("c", "b", 1.0), ("c", "d", 1.0)])
    assert Fraction(circumference(g)).limit_denominator(100) == Fraction(10, 3)


def test_graph_is_immutable():
    g = star2()
    with pytest.raises(Exception):
        g.sigma = (0.0, 0.0, 0.0)
    assert isinstance(g, MetricGraph)


def test_invalid_sigma():
    with pytest.raises(GraphError):
        build_graph([("a", "b", 1.0)], {"a": math.nan})
