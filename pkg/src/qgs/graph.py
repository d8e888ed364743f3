"""Compact metric graphs with delta-coupling strengths and edge potentials.

A :class:`MetricGraph` is immutable. Vertex couplings live in ``sigma``
(aligned with ``vertices``); a Dirichlet vertex carries ``DIRICHLET``
(positive infinity, the formal limit of the coupling strength).
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

DIRICHLET = math.inf

POTENTIAL_KINDS = ("zero", "constant", "polynomial", "trig")


class GraphError(ValueError):
    """Raised for malformed or invalid graph descriptions."""


@dataclass(frozen=True)
class PotentialSpec:
    """Smooth bounded potential on one edge, in the edge coordinate x in [0, l].

    ``coeffs`` meaning by kind:

    * ``zero``: empty
    * ``constant``: ``(c,)``
    * ``polynomial``: ``(c0, c1, ...)`` for ``c0 + c1 x + ...``
    * ``trig``: ``(a0,)`` in ``coeffs``; cosine amplitudes ``a_j`` and sine
      amplitudes ``b_j`` in ``cos`` and ``sin`` for frequencies ``2 pi j / l``.
    """

    kind: str = "zero"
    coeffs: tuple[float, ...] = ()
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in POTENTIAL_KINDS:
            raise GraphError(f"unknown potential kind {self.kind!r}")
        for name in ("coeffs", "cos", "sin"):
            vals = tuple(float(c) for c in getattr(self, name))
            if not all(math.isfinite(c) for c in vals):
                raise GraphError(f"potential {name} must be finite")
            object.__setattr__(self, name, vals)
        if self.kind == "zero" and (self.coeffs or self.cos or self.sin):
            raise GraphError("zero potential takes no parameters")
        if self.kind == "constant" and len(self.coeffs) != 1:
            raise GraphError("constant potential needs exactly one value")
        if self.kind == "polynomial" and not self.coeffs:
            raise GraphError("polynomial potential needs at least one coefficient")
        if self.kind == "trig":
            if len(self.coeffs) != 1:
                raise GraphError("trig potential needs a0")
            if len(self.cos) != len(self.sin):
                raise GraphError("trig potential needs equally many cos and sin terms")
        if self.kind != "trig" and (self.cos or self.sin):
            raise GraphError(f"{self.kind} potential takes no cos/sin terms")

    # constructors ------------------------------------------------------
    @classmethod
    def zero(cls) -> PotentialSpec:
        return cls("zero")

    @classmethod
    def constant(cls, c: float) -> PotentialSpec:
        return cls("constant", (c,))

    @classmethod
    def polynomial(cls, coefficients: Sequence[float]) -> PotentialSpec:
        return cls("polynomial", tuple(coefficients))

    @classmethod
    def trig(cls, a0: float, cos: Sequence[float] = (), sin: Sequence[float] = ()) -> PotentialSpec:
        n = max(len(cos), len(sin))
        cos = tuple(cos) + (0.0,) * (n - len(cos))
        sin = tuple(sin) + (0.0,) * (n - len(sin))
        return cls("trig", (a0,), cos, sin)

    # properties --------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        if self.kind == "zero":
            return True
        return not any(self.coeffs) and not any(self.cos) and not any(self.sin)

    @property
    def constant_value(self) -> float | None:
        """The value if the potential is constant on the edge, else None."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return self.coeffs[0]
        if self.kind == "polynomial" and not any(self.coeffs[1:]):
            return self.coeffs[0] if self.coeffs else 0.0
        if self.kind == "trig" and not any(self.cos) and not any(self.sin):
            return self.coeffs[0]
        return None

    def __call__(self, x, length: float):
        """Evaluate at ``x`` (scalar or array) on an edge of the given length."""
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "constant":
            return np.full_like(x, self.coeffs[0])
        if self.kind == "polynomial":
            return np.polynomial.polynomial.polyval(x, self.coeffs) + 0.0 * x
        out = np.full_like(x, self.coeffs[0])
        w = 2.0 * math.pi / length
        for j, (a, b) in enumerate(zip(self.cos, self.sin), start=1):
            if a:
                out = out + a * np.cos(j * w * x)
            if b:
                out = out + b * np.sin(j * w * x)
        return out

    def integral(self, length: float) -> float:
        """Exact value of the integral of the potential over [0, length]."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return self.coeffs[0] * length
        if self.kind == "polynomial":
            return math.fsum(c * length ** (i + 1) / (i + 1) for i, c in enumerate(self.coeffs))
        # full periods of every harmonic integrate to zero
        return self.coeffs[0] * length

    def derivative_bound(self, length: float) -> float:
        """Upper bound for sup |v'| on [0, length]."""
        if self.kind in ("zero", "constant"):
            return 0.0
        if self.kind == "polynomial":
            return math.fsum(i * abs(c) * length ** (i - 1) for i, c in enumerate(self.coeffs) if i > 0)
        w = 2.0 * math.pi / length
        return math.fsum(j * w * (abs(a) + abs(b)) for j, (a, b) in enumerate(zip(self.cos, self.sin), 1))

    def bounds(self, length: float, samples: int = 2049) -> tuple[float, float]:
        """Guaranteed (lower, upper) bounds of the potential on the edge.

        Dense sampling widened by ``h/2 * sup|v'|``, which over-approximates
        the true range.
        """
        c = self.constant_value
        if c is not None:
            return c, c
        x = np.linspace(0.0, length, samples)
        vals = self(x, length)
        margin = 0.5 * (length / (samples - 1)) * self.derivative_bound(length)
        return float(vals.min() - margin), float(vals.max() + margin)

    def sup_norm(self, length: float) -> float:
        lo, hi = self.bounds(length)
        return max(abs(lo), abs(hi))

    def negative_part(self, x, length: float):
        """V_-(x) = -min(0, V(x))."""
        return -np.minimum(0.0, self(x, length))

    def negative_part_sup(self, length: float) -> float:
        lo, _ = self.bounds(length)
        return max(0.0, -lo)

    def max_frequency(self, length: float) -> float:
        """Angular frequency scale of the potential's variation (0 if constant)."""
        if self.kind == "trig":
            return 2.0 * math.pi * len(self.cos) / length
        if self.kind == "polynomial" and len(self.coeffs) > 2:
            return 2.0 * math.pi * (len(self.coeffs) - 1) / length
        return 0.0

    def scaled(self, factor: float) -> PotentialSpec:
        if self.kind == "zero":
            return self
        return replace(
            self,
            coeffs=tuple(factor * c for c in self.coeffs),
            cos=tuple(factor * c for c in self.cos),
            sin=tuple(factor * c for c in self.sin),
        )

    def shifted(self, c: float) -> PotentialSpec:
        if self.kind == "zero":
            return PotentialSpec.constant(c)
        if self.kind == "polynomial":
            coeffs = self.coeffs or (0.0,)
            return replace(self, coeffs=(coeffs[0] + c,) + coeffs[1:])
        return replace(self, coeffs=(self.coeffs[0] + c,))

    # serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        if self.kind == "zero":
            params: dict = {}
        elif self.kind == "constant":
            params = {"c": self.coeffs[0]}
        elif self.kind == "polynomial":
            params = {"coefficients": list(self.coeffs)}
        else:
            params = {"a0": self.coeffs[0], "cos": list(self.cos), "sin": list(self.sin)}
        return {"kind": self.kind, "params": params}

    @classmethod
    def from_dict(cls, data: Mapping, where: str = "potential") -> PotentialSpec:
        if not isinstance(data, Mapping):
            raise GraphError(f"{where}: expected an object")
        _check_keys(data, {"kind"}, {"params"}, where)
        kind = data["kind"]
        params = data.get("params", {})
        if not isinstance(params, Mapping):
            raise GraphError(f"{where}.params: expected an object")
        if kind not in POTENTIAL_KINDS:
            raise GraphError(f"{where}.kind: unknown potential kind {kind!r}")
        try:
            if kind == "zero":
                _check_keys(params, set(), set(), f"{where}.params")
                return cls.zero()
            if kind == "constant":
                _check_keys(params, {"c"}, set(), f"{where}.params")
                return cls.constant(_number(params["c"], f"{where}.params.c"))
            if kind == "polynomial":
                _check_keys(params, {"coefficients"}, set(), f"{where}.params")
                return cls.polynomial(_numbers(params["coefficients"], f"{where}.params.coefficients"))
            _check_keys(params, {"a0"}, {"cos", "sin"}, f"{where}.params")
            return cls.trig(
                _number(params["a0"], f"{where}.params.a0"),
                _numbers(params.get("cos", []), f"{where}.params.cos"),
                _numbers(params.get("sin", []), f"{where}.params.sin"),
            )
        except GraphError as exc:
            if str(exc).startswith(where):
                raise
            raise GraphError(f"{where}: {exc}") from None


@dataclass(frozen=True)
class Edge:
    id: str
    start: int
    end: int
    length: float
    potential: PotentialSpec = field(default_factory=PotentialSpec.zero)

    @property
    def is_loop(self) -> bool:
        return self.start == self.end


@dataclass(frozen=True)
class MetricGraph:
    """Compact connected metric graph with delta couplings and edge potentials.

    ``vertices`` holds vertex ids; edges refer to vertices by index.
    """

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    sigma: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(str(v) for v in self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "sigma", tuple(float(s) for s in self.sigma))
        self._validate()

    def _validate(self) -> None:
        nv = len(self.vertices)
        if nv == 0:
            raise GraphError("graph has no vertices")
        if len(set(self.vertices)) != nv:
            raise GraphError("duplicate vertex id")
        if len(self.sigma) != nv:
            raise GraphError("sigma must have one entry per vertex")
        for v, s in zip(self.vertices, self.sigma):
            if math.isnan(s) or s == -math.inf:
                raise GraphError(f"vertex {v}: sigma must be finite or dirichlet")
        if not self.edges:
            raise GraphError("graph has no edges")
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise GraphError("duplicate edge id")
        for e in self.edges:
            if not (0 <= e.start < nv and 0 <= e.end < nv):
                raise GraphError(f"edge {e.id}: endpoint out of range")
            if not (e.length > 0.0 and math.isfinite(e.length)):
                raise GraphError(f"edge {e.id}: non-positive length {e.length!r}")
        deg = self.degrees
        for v, d in zip(self.vertices, deg):
            if d < 1:
                raise GraphError(f"vertex {v}: isolated vertex (degree 0); graph is disconnected")
        if not self._connected():
            raise GraphError("graph is disconnected")

    def _connected(self) -> bool:
        adj: list[list[int]] = [[] for _ in self.vertices]
        for e in self.edges:
            adj[e.start].append(e.end)
            adj[e.end].append(e.start)
        seen = {0}
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == len(self.vertices)

    # derived quantities -----------------------------------------------
    @property
    def degrees(self) -> tuple[int, ...]:
        deg = [0] * len(self.vertices)
        for e in self.edges:
            deg[e.start] += 1
            deg[e.end] += 1
        return tuple(deg)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([e.length for e in self.edges])

    @property
    def total_length(self) -> float:
        return math.fsum(e.length for e in self.edges)

    @property
    def has_dirichlet(self) -> bool:
        return any(math.isinf(s) for s in self.sigma)

    @property
    def potential_free(self) -> bool:
        return all(e.potential.is_zero for e in self.edges)

    def vertex_index(self, vid: str | int) -> int:
        try:
            return self.vertices.index(str(vid))
        except ValueError:
            raise GraphError(f"unknown vertex {vid!r}") from None

    def edge_index(self, eid: str | int) -> int:
        for i, e in enumerate(self.edges):
            if e.id == str(eid):
                return i
        raise GraphError(f"unknown edge {eid!r}")

    def edge_ends(self) -> list[list[tuple[int, int]]]:
        """Per vertex, the incident edge-ends as (edge index, 0 or 1)."""
        ends: list[list[tuple[int, int]]] = [[] for _ in self.vertices]
        for j, e in enumerate(self.edges):
            ends[e.start].append((j, 0))
            ends[e.end].append((j, 1))
        return ends

    def sigma_of(self, vid: str | int) -> float:
        return self.sigma[self.vertex_index(vid)]

    # variants -----------------------------------------------------------
    def with_sigma(self, sigma: Mapping[str, float] | Sequence[float]) -> MetricGraph:
        """Copy with new couplings; a mapping overrides only the listed vertices."""
        if isinstance(sigma, Mapping):
            new = list(self.sigma)
            for vid, s in sigma.items():
                new[self.vertex_index(vid)] = float(s)
        else:
            new = [float(s) for s in sigma]
        return replace(self, sigma=tuple(new))

    def scaled_sigma(self, tau: float) -> MetricGraph:
        return replace(self, sigma=tuple(tau * s if math.isfinite(s) else s for s in self.sigma))

    def neumann(self) -> MetricGraph:
        """Same graph and potential with every coupling set to zero."""
        return replace(self, sigma=(0.0,) * len(self.vertices))

    def dirichlet(self) -> MetricGraph:
        return replace(self, sigma=(DIRICHLET,) * len(self.vertices))

    def with_potentials(self, potentials: Sequence[PotentialSpec] | PotentialSpec) -> MetricGraph:
        if isinstance(potentials, PotentialSpec):
            potentials = [potentials] * len(self.edges)
        edges = tuple(replace(e, potential=p) for e, p in zip(self.edges, potentials, strict=True))
        return replace(self, edges=edges)

    def free(self) -> MetricGraph:
        """Same metric graph with zero potential and zero couplings."""
        return self.neumann().with_potentials(PotentialSpec.zero())

    def scaled_potential(self, tau: float) -> MetricGraph:
        return self.with_potentials([e.potential.scaled(tau) for e in self.edges])

    def shifted_potential(self, c: float) -> MetricGraph:
        return self.with_potentials([e.potential.shifted(c) for e in self.edges])

    def dilated(self, factor: float) -> MetricGraph:
        """Uniformly stretch every edge length (potentials must be zero)."""
        if not self.potential_free:
            raise GraphError("dilation is only defined here for potential-free graphs")
        return replace(self, edges=tuple(replace(e, length=e.length * factor) for e in self.edges))

    def potential_integral(self) -> float:
        return math.fsum(e.potential.integral(e.length) for e in self.edges)

    def potential_bounds(self) -> tuple[float, float]:
        lo, hi = zip(*(e.potential.bounds(e.length) for e in self.edges))
        return min(lo), max(hi)

    def fingerprint(self) -> str:
        import hashlib

        return hashlib.sha256(dumps_graph(self).encode()).hexdigest()[:16]


def _check_keys(data: Mapping, required: set[str], optional: set[str], where: str) -> None:
    keys = set(data)
    missing = required - keys
    if missing:
        raise GraphError(f"{where}: missing key(s) {sorted(missing)}")
    unknown = keys - required - optional
    if unknown:
        raise GraphError(f"{where}: unknown key(s) {sorted(unknown)}")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise GraphError(f"{where}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise GraphError(f"{where}: expected a finite number")
    return value


def _numbers(values, where: str) -> list[float]:
    if not isinstance(values, list):
        raise GraphError(f"{where}: expected a list of numbers")
    return [_number(v, f"{where}[{i}]") for i, v in enumerate(values)]


def _ident(value, where: str) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise GraphError(f"{where}: expected a string or integer id")
    return str(value)


def graph_from_dict(data: Mapping) -> MetricGraph:
    if not isinstance(data, Mapping):
        raise GraphError("document: expected a JSON object")
    _check_keys(data, {"vertices", "edges"}, set(), "document")
    if not isinstance(data["vertices"], list) or not isinstance(data["edges"], list):
        raise GraphError("document: 'vertices' and 'edges' must be lists")
    vids: list[str] = []
    sigma: list[float] = []
    for i, v in enumerate(data["vertices"]):
        where = f"vertices[{i}]"
        if not isinstance(v, Mapping):
            raise GraphError(f"{where}: expected an object")
        _check_keys(v, {"id"}, {"sigma"}, where)
        vid = _ident(v["id"], f"{where}.id")
        if vid in vids:
            raise GraphError(f"{where}.id: duplicate vertex id {vid!r}")
        s = v.get("sigma", 0.0)
        if isinstance(s, str):
            if s.lower() != "dirichlet":
                raise GraphError(f"{where}.sigma: expected a number or 'dirichlet', got {s!r}")
            s = DIRICHLET
        else:
            s = _number(s, f"{where}.sigma")
        vids.append(vid)
        sigma.append(s)
    index = {v: i for i, v in enumerate(vids)}
    edges: list[Edge] = []
    for i, e in enumerate(data["edges"]):
        where = f"edges[{i}]"
        if not isinstance(e, Mapping):
            raise GraphError(f"{where}: expected an object")
        _check_keys(e, {"id", "from", "to", "length"}, {"potential"}, where)
        eid = _ident(e["id"], f"{where}.id")
        ends = []
        for key in ("from", "to"):
            vid = _ident(e[key], f"{where}.{key}")
            if vid not in index:
                raise GraphError(f"{where}.{key}: unknown vertex {vid!r}")
            ends.append(index[vid])
        length = _number(e["length"], f"{where}.length")
        if length <= 0.0:
            raise GraphError(f"{where}.length: non-positive length {length!r}")
        pot = PotentialSpec.from_dict(e["potential"], f"{where}.potential") if "potential" in e else PotentialSpec.zero()
        edges.append(Edge(eid, ends[0], ends[1], length, pot))
    return MetricGraph(tuple(vids), tuple(edges), tuple(sigma))


def parse_graph(text: str) -> MetricGraph:
    """Parse a JSON graph description (see README for the schema)."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"malformed document: {exc}") from None
    return graph_from_dict(data)


def load_graph(path) -> MetricGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def graph_to_dict(g: MetricGraph) -> dict:
    return {
        "vertices": [
            {"id": v, "sigma": "dirichlet" if math.isinf(s) else s} for v, s in zip(g.vertices, g.sigma)
        ],
        "edges": [
            {
                "id": e.id,
                "from": g.vertices[e.start],
                "to": g.vertices[e.end],
                "length": e.length,
                "potential": e.potential.to_dict(),
            }
            for e in g.edges
        ],
    }


def dumps_graph(g: MetricGraph) -> str:
    """Canonical JSON form; ``parse_graph(dumps_graph(g)) == g``."""
    return json.dumps(graph_to_dict(g), indent=2, sort_keys=True)


def total_length(g: MetricGraph) -> float:
    return g.total_length


def circumference(g: MetricGraph) -> float:
    """Combinatorial circumference: sum over vertices of 1/deg_v."""
    return float(sum(Fraction(1, d) for d in g.degrees))


def _effective_circumference_exact(g: MetricGraph) -> Fraction:
    if g.has_dirichlet:
        bad = [v for v, s in zip(g.vertices, g.sigma) if math.isinf(s)]
        raise GraphError(f"effective circumference undefined with Dirichlet vertices {bad}")
    return sum((Fraction(s) / d for s, d in zip(g.sigma, g.degrees)), Fraction(0))


def effective_circumference(g: MetricGraph) -> float:
    """Sum over vertices of sigma_v/deg_v (finite couplings only)."""
    return float(_effective_circumference_exact(g))


def epsilon_boundary(g: MetricGraph, eps: float) -> set[str]:
    """Vertices with sigma_v/deg_v > eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return {v for v, s, d in zip(g.vertices, g.sigma, g.degrees) if s / d > eps}


def build_graph(
    edges: Iterable[tuple[str, str, float]] | Iterable[tuple[str, str, float, PotentialSpec]],
    sigma: Mapping[str, float] | None = None,
    edge_ids: Sequence[str] | None = None,
) -> MetricGraph:
    """Convenience constructor from ``(from, to, length[, potential])`` tuples.

    Vertices are ordered by first appearance.
    """
    vids: list[str] = []
    rows = []
    for item in edges:
        a, b, length, *rest = item
        for v in (str(a), str(b)):
            if v not in vids:
                vids.append(v)
        rows.append((str(a), str(b), float(length), rest[0] if rest else PotentialSpec.zero()))
    sigma = {str(k): v for k, v in (sigma or {}).items()}
    unknown = set(sigma) - set(vids)
    if unknown:
        raise GraphError(f"sigma given for unknown vertices {sorted(unknown)}")
    ids = list(edge_ids) if edge_ids is not None else [f"e{i + 1}" for i in range(len(rows))]
    es = tuple(
        Edge(eid, vids.index(a), vids.index(b), length, pot) for eid, (a, b, length, pot) in zip(ids, rows, strict=True)
    )
    return MetricGraph(tuple(vids), es, tuple(float(sigma.get(v, 0.0)) for v in vids))
