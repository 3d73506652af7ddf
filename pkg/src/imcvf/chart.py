"""Block Lorentzian metrics on the chart (t, r, theta, phi).

The metric layout is fixed:

    g_tt = -v^2   g_tr = d    g_tth = e    g_tph = f
    g_rr = u^2    g_rth = 0   g_rph = 0
    g_thth = a    g_thph = c
    g_phph = b

with the eight components arbitrary field expressions.  The determinant
and inverse are evaluated from closed forms (cross-checked against brute
force in the tests).  Coordinate order is (t, r, th, ph) everywhere; use
the index constants T, R, TH, PH rather than raw integers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import SingularMetricError
from .expr import FieldExpr, diff, evaluate, parse, to_source

T, R, TH, PH = 0, 1, 2, 3
COMPONENTS = ("v", "d", "e", "f", "u", "a", "b", "c")

DEFAULT_THETA_MIN = 1e-3
DEFAULT_R_MIN = 1.0

__all__ = ["T", "R", "TH", "PH", "COMPONENTS", "CoordinatePoint", "BlockMetric",
           "SphericalMetric", "metric_at", "det_metric", "inverse_metric",
           "load_chart", "save_chart", "ChartFile",
           "DEFAULT_THETA_MIN", "DEFAULT_R_MIN"]


@dataclass(frozen=True)
class CoordinatePoint:
    """A chart point with r > 0 and theta in the open interval (0, pi);
    the poles are coordinate singularities and are excluded.  phi is
    normalized into [0, 2 pi) by periodicity."""

    t: float
    r: float
    th: float
    ph: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"r must be positive, got {self.r}")
        if not 0.0 < self.th < np.pi:
            raise ValueError(f"th must lie in (0, pi), got {self.th}")
        object.__setattr__(self, "ph", float(self.ph) % (2.0 * np.pi))

    def env(self) -> dict:
        return {"t": self.t, "r": self.r, "th": self.th, "ph": self.ph}


class BlockMetric:
    """The eight-component block metric.  Immutable; derivative expressions
    are cached, so instances are cheap to evaluate repeatedly."""

    def __init__(self, *, v, d, e, f, u, a, b, c,
                 theta_min: float = DEFAULT_THETA_MIN,
                 r_min: float = DEFAULT_R_MIN):
        comps = {"v": v, "d": d, "e": e, "f": f, "u": u, "a": a, "b": b, "c": c}
        self.comps = {k: _as_expr(x) for k, x in comps.items()}
        self.theta_min = float(theta_min)
        self.r_min = float(r_min)
        self._d1 = {}

    # individual components as attributes (read-only by convention)
    def __getattr__(self, name):
        comps = self.__dict__.get("comps")
        if comps is not None and name in comps:
            return comps[name]
        raise AttributeError(name)

    def deriv(self, name: str, *vars_: str) -> FieldExpr:
        """Cached partial derivative of a component, e.g. deriv('a','th','r')."""
        expr = self.comps[name]
        for v in vars_:
            key = (id(expr), v)
            cached = self._d1.get(key)
            if cached is None:
                cached = diff(expr, v)
                self._d1[key] = cached
            expr = cached
        return expr

    def component_values(self, env: Mapping) -> dict:
        return {k: evaluate(x, env) for k, x in self.comps.items()}

    def with_d(self, d) -> "BlockMetric":
        kw = dict(self.comps)
        kw["d"] = _as_expr(d)
        return BlockMetric(**kw, theta_min=self.theta_min, r_min=self.r_min)

    def is_spherical(self) -> bool:
        from .expr import Lit
        return all(isinstance(self.comps[k], Lit) and self.comps[k].value == 0.0
                   for k in ("d", "e", "f", "c"))


class SphericalMetric:
    """Spherically symmetric specialization: u, v functions of (t, r) only,
    a = r^2, b = r^2 sin^2(th), all off-block terms zero."""

    def __init__(self, u, v):
        self.u = _as_expr(u)
        self.v = _as_expr(v)

    def block(self, theta_min: float = DEFAULT_THETA_MIN) -> BlockMetric:
        return BlockMetric(v=self.v, d=0.0, e=0.0, f=0.0, u=self.u,
                           a=parse("r^2"), b=parse("r^2*sin(th)^2"), c=0.0,
                           theta_min=theta_min)


def _as_expr(x) -> FieldExpr:
    if isinstance(x, FieldExpr):
        return x
    if isinstance(x, str):
        return parse(x)
    if isinstance(x, (int, float)):
        from .expr import lit
        return lit(x)
    raise TypeError(f"cannot interpret {type(x).__name__} as a field expression")


# ---------------------------------------------------------------------------
# pointwise / vectorized evaluation
# ---------------------------------------------------------------------------

def _broadcast_shape(vals, env):
    shape = np.broadcast_shapes(*(np.shape(v) for v in vals.values()),
                                *(np.shape(v) for v in env.values()))
    return shape


def metric_values(g: BlockMetric, env: Mapping) -> np.ndarray:
    """Metric matrix with shape env_broadcast + (4, 4)."""
    c = g.component_values(env)
    shape = _broadcast_shape(c, env)
    m = np.zeros(shape + (4, 4))
    m[..., T, T] = -np.asarray(c["v"]) ** 2
    m[..., T, R] = m[..., R, T] = c["d"]
    m[..., T, TH] = m[..., TH, T] = c["e"]
    m[..., T, PH] = m[..., PH, T] = c["f"]
    m[..., R, R] = np.asarray(c["u"]) ** 2
    m[..., TH, TH] = c["a"]
    m[..., TH, PH] = m[..., PH, TH] = c["c"]
    m[..., PH, PH] = c["b"]
    return m


def det_values(g: BlockMetric, env: Mapping) -> np.ndarray:
    return det_from_components(g.component_values(env))


def det_from_components(c: Mapping) -> np.ndarray:
    """|g| = (-u^2 v^2 - d^2)(ab - c^2) + u^2 (2cef - be^2 - af^2)."""
    u2 = np.asarray(c["u"], dtype=float) ** 2
    v2 = np.asarray(c["v"], dtype=float) ** 2
    d, e, f = (np.asarray(c[k], dtype=float) for k in ("d", "e", "f"))
    a, b, cc = (np.asarray(c[k], dtype=float) for k in ("a", "b", "c"))
    w = a * b - cc * cc
    return (-u2 * v2 - d * d) * w + u2 * (2 * cc * e * f - b * e * e - a * f * f)


def inverse_values(g: BlockMetric, env: Mapping, *, check=True) -> np.ndarray:
    """Closed-form inverse metric, shape env_broadcast + (4, 4)."""
    c = g.component_values(env)
    det = det_from_components(c)
    if check and np.any(np.abs(det) < 1e-14):
        raise SingularMetricError("metric determinant vanishes at a sampled point")
    u2 = np.asarray(c["u"], dtype=float) ** 2
    v2 = np.asarray(c["v"], dtype=float) ** 2
    d, e, f = (np.asarray(c[k], dtype=float) for k in ("d", "e", "f"))
    a, b, cc = (np.asarray(c[k], dtype=float) for k in ("a", "b", "c"))
    w = a * b - cc * cc
    cf_be = cc * f - b * e
    ce_af = cc * e - a * f
    shape = _broadcast_shape(c, env)
    inv = np.zeros(shape + (4, 4))
    inv[..., T, T] = u2 * w
    inv[..., T, R] = inv[..., R, T] = -d * w
    inv[..., T, TH] = inv[..., TH, T] = u2 * cf_be
    inv[..., T, PH] = inv[..., PH, T] = u2 * ce_af
    inv[..., R, R] = -v2 * w + f * ce_af + e * cf_be
    inv[..., R, TH] = inv[..., TH, R] = -d * cf_be
    inv[..., R, PH] = inv[..., PH, R] = -d * ce_af
    inv[..., TH, TH] = -u2 * v2 * b - u2 * f * f - b * d * d
    inv[..., TH, PH] = inv[..., PH, TH] = u2 * v2 * cc + u2 * e * f + cc * d * d
    inv[..., PH, PH] = -u2 * v2 * a - u2 * e * e - a * d * d
    inv /= det[..., None, None]
    return inv


def metric_at(g: BlockMetric, p: CoordinatePoint) -> np.ndarray:
    """4x4 symmetric metric matrix at a point."""
    return metric_values(g, p.env())


def det_metric(g: BlockMetric, p: CoordinatePoint) -> float:
    """Closed-form determinant at a point."""
    return float(det_values(g, p.env()))


def inverse_metric(g: BlockMetric, p: CoordinatePoint) -> np.ndarray:
    """Closed-form inverse at a point; raises SingularMetricError when
    |det| < 1e-14."""
    return inverse_values(g, p.env())


# ---------------------------------------------------------------------------
# chart files
# ---------------------------------------------------------------------------

@dataclass
class ChartFile:
    """Parsed chart definition.  ``d`` may be None when the file asks the
    builder to solve for it (key "solve_d": true)."""

    exprs: dict
    params: dict = field(default_factory=dict)
    theta_min: float = DEFAULT_THETA_MIN
    solve_d: bool = False

    def metric(self) -> BlockMetric:
        if self.exprs.get("d") is None:
            raise ValueError("chart has no 'd' component; run the builder first")
        return BlockMetric(**self.exprs, theta_min=self.theta_min)


def load_chart(source) -> ChartFile:
    """Load a chart definition from a path, file object or dict.

    Expression strings are parsed with the file's "params" substituted.
    "d" may be omitted only when "solve_d" is true.
    """
    if isinstance(source, (str, bytes)):
        with open(source, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    elif isinstance(source, dict):
        raw = source
    else:
        raw = json.load(source)
    params = dict(raw.get("params", {}))
    solve_d = bool(raw.get("solve_d", False))
    exprs = {}
    for key in COMPONENTS:
        if key not in raw:
            if key == "d" and solve_d:
                exprs["d"] = None
                continue
            raise KeyError(f"chart file is missing component {key!r}")
        exprs[key] = parse(str(raw[key]), params=params)
    return ChartFile(exprs=exprs, params=params,
                     theta_min=float(raw.get("theta_min", DEFAULT_THETA_MIN)),
                     solve_d=solve_d)


def save_chart(g: BlockMetric, path, params=None) -> None:
    """Serialize a metric back to the JSON chart format."""
    doc = {k: to_source(x) for k, x in g.comps.items()}
    doc["theta_min"] = g.theta_min
    if params:
        doc["params"] = dict(params)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
