"""Named test graphs used by the experiments, the CLI and the test-suite."""

from __future__ import annotations

from .graph import DIRICHLET, MetricGraph, PotentialSpec, build_graph


def interval(length: float = 1.0, sigma: tuple[float, float] = (0.0, 0.0), potential: PotentialSpec | None = None) -> MetricGraph:
    edge = ("v0", "v1", length) if potential is None else ("v0", "v1", length, potential)
    return build_graph([edge], {"v0": sigma[0], "v1": sigma[1]})


def star(arms: int, length: float = 1.0, sigma_center: float = 0.0) -> MetricGraph:
    """Equal-armed star with centre ``c`` and leaves ``v1..v<arms>``."""
    return build_graph([("c", f"v{i + 1}", length) for i in range(arms)], {"c": sigma_center})


def loop(length: float = 2.0, sigma: float = 0.0) -> MetricGraph:
    return build_graph([("v", "v", length)], {"v": sigma})


def figure_eight(lengths: tuple[float, float] = (1.0, 1.5), sigma: float = 0.5) -> MetricGraph:
    return build_graph([("v", "v", lengths[0]), ("v", "v", lengths[1])], {"v": sigma})


def lasso(loop_length: float = 1.0, tail_length: float = 0.7, sigma: float = 1.0) -> MetricGraph:
    """A loop with a pendant edge; non-equilateral and with mixed degrees."""
    return build_graph([("v", "v", loop_length), ("v", "w", tail_length)], {"v": sigma, "w": 0.0})


def trig_interval(sigma: tuple[float, float] = (1.0, 0.0)) -> MetricGraph:
    """Unit interval with v(x) = 1 + cos(2 pi x)."""
    return interval(1.0, sigma, PotentialSpec.trig(1.0, cos=[1.0]))


TEST_GRAPHS = {
    "interval": lambda: interval(),
    "robin-interval": lambda: interval(sigma=(1.0, 0.0)),
    "star2": lambda: star(2, sigma_center=1.0),
    "star3": lambda: star(3),
    "loop": lambda: loop(),
    "figure-eight": lambda: figure_eight(),
    "lasso": lambda: lasso(),
    "trig-interval": lambda: trig_interval(),
}


def test_graph(name: str) -> MetricGraph:
    try:
        return TEST_GRAPHS[name]()
    except KeyError:
        raise KeyError(f"unknown test graph {name!r}; known: {', '.join(TEST_GRAPHS)}") from None


__all__ = ["DIRICHLET", "TEST_GRAPHS", "figure_eight", "interval", "lasso", "loop", "star", "test_graph", "trig_interval"]
