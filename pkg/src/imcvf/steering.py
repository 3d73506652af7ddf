"""Coordinate-free steering of the spacetime metric.

Works in the frame {e_t, e_r, d_th, d_ph} where e_r = (1/u) d_r is the unit
outward normal of the sphere inside the slice and e_t is the unit future
normal orthogonal to it.  Adding Q on the (e_t, e_r) off-diagonal of the
frame metric steers the mean curvature vector into the slice; the unique Q
solves a zeroth-order equation built from two directional derivatives of
the sphere area density ab - c^2 and two frame commutator coefficients.

The frame is realized concretely from a block chart: e_t is the normalized
n of the normal bundle and commutators come from exact derivatives of its
coefficient fields, so every FrameData entry is spectrally clean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import BlockMetric
from .errors import NotAreaExpandingError
from .expr import FieldExpr, call, diff, evaluate
from .sphere import mean_curvature_values

__all__ = ["FrameData", "frame_data", "steering_parameter", "steer_metric",
           "tangentiality_residual", "minimal_surface_lemma_check",
           "steered_normal_component"]


@dataclass(frozen=True)
class FrameData:
    """Per-node frame ingredients; every field is a scalar or grid array.

    The commutator coefficients are named C_<out>_<i><j> for [alpha_i,
    alpha_j] = C^out_ij alpha_out; the radial ones C^th_rth and C^ph_rph
    vanish identically in this realization and are recorded as zeros.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    W: np.ndarray
    et_W: np.ndarray
    er_W: np.ndarray
    C_th_tth: np.ndarray
    C_ph_tph: np.ndarray
    C_th_tph: np.ndarray
    C_ph_tth: np.ndarray
    et_a: np.ndarray
    et_b: np.ndarray
    et_c: np.ndarray
    er_a: np.ndarray
    er_b: np.ndarray
    er_c: np.ndarray
    C_th_rth: float = 0.0
    C_ph_rph: float = 0.0

    @property
    def area_expanding(self) -> bool:
        return bool(np.all(np.asarray(self.er_W) > 0.0))


def _frame_exprs(g: BlockMetric) -> dict:
    """Symbolic frame coefficient fields of the chart realization."""
    a, b, c = g.comps["a"], g.comps["b"], g.comps["c"]
    d, e, f = g.comps["d"], g.comps["e"], g.comps["f"]
    u, v = g.comps["u"], g.comps["v"]
    w = a * b - c * c
    det = (-(u * u) * (v * v) - d * d) * w + (u * u) * (2.0 * c * e * f
                                                       - b * e * e - a * f * f)
    lam = call("sqrt", -(u * u) * w / det)    # 1/||n||, det < 0
    return {"a": a, "b": b, "c": c, "w": w, "det": det, "lam": lam,
            "p": (c * f - b * e) / w, "q": (c * e - a * f) / w,
            "x": -d / (u * u), "u": u}


def frame_data(g: BlockMetric, env) -> FrameData:
    """Evaluate the frame ingredients of a chart on an env grid."""
    ex = _frame_exprs(g)

    def val(expr):
        return np.asarray(evaluate(expr, env), dtype=float)

    lam, p, q, x = val(ex["lam"]), val(ex["p"]), val(ex["q"]), val(ex["x"])
    u = val(ex["u"])

    def e_t(expr: FieldExpr):
        return lam * (val(diff(expr, "t")) + x * val(diff(expr, "r"))
                      + p * val(diff(expr, "th")) + q * val(diff(expr, "ph")))

    def e_r(expr: FieldExpr):
        return val(diff(expr, "r")) / u

    return FrameData(
        a=val(ex["a"]), b=val(ex["b"]), c=val(ex["c"]), W=val(ex["w"]),
        et_W=e_t(ex["w"]), er_W=e_r(ex["w"]),
        C_th_tth=-lam * val(diff(ex["p"], "th")),
        C_ph_tph=-lam * val(diff(ex["q"], "ph")),
        C_th_tph=-lam * val(diff(ex["p"], "ph")),
        C_ph_tth=-lam * val(diff(ex["q"], "th")),
        et_a=e_t(ex["a"]), et_b=e_t(ex["b"]), et_c=e_t(ex["c"]),
        er_a=e_r(ex["a"]), er_b=e_r(ex["b"]), er_c=e_r(ex["c"]))


def steering_parameter(fd: FrameData):
    """The unique Q making the mean curvature vector tangential.

    Raises NotAreaExpandingError when e_r(ab - c^2) <= 0 anywhere: by the
    first-variation identity that marks a minimal surface in the slice.
    """
    if not fd.area_expanding:
        raise NotAreaExpandingError("e_r(ab - c^2) <= 0: surface is minimal, "
                                    "no steering parameter exists")
    return (fd.et_W - 2.0 * fd.W * (fd.C_th_tth + fd.C_ph_tph)) / fd.er_W


def tangentiality_residual(fd: FrameData, q):
    """Left side of the steering condition; zero exactly at the solution."""
    return fd.er_W * q - fd.et_W + 2.0 * fd.W * (fd.C_th_tth + fd.C_ph_tph)


def steer_metric(a, b, c, q) -> np.ndarray:
    """Frame-dual matrix of the steered metric: diag(-1, 1, g_S) plus Q on
    the (e_t, e_r) off-diagonal.  Scalar inputs give a single 4x4."""
    a, b, c, q = np.broadcast_arrays(*(np.asarray(x, dtype=float)
                                       for x in (a, b, c, q)))
    m = np.zeros(a.shape + (4, 4))
    m[..., 0, 0] = -1.0
    m[..., 0, 1] = m[..., 1, 0] = q
    m[..., 1, 1] = 1.0
    m[..., 2, 2] = a
    m[..., 2, 3] = m[..., 3, 2] = c
    m[..., 3, 3] = b
    return m


def minimal_surface_lemma_check(fd: FrameData, h_er):
    """|2 H_{e_r} (ab - c^2) - e_r(ab - c^2)| per node."""
    return np.abs(2.0 * np.asarray(h_er) * fd.W - fd.er_W)


def steered_normal_component(fd: FrameData, q):
    """<H, e_n> of the sphere in the steered metric, assembled from the
    frame connection coefficients (not from the simplified Q equation):

        omega^t_ij = (W / 2|g_Q|) [ (-e_t(g_ij) + commutator terms)
                                    - Q (-e_r(g_ij) + radial commutators) ]
        <H, e_n>   = -(1 + Q^2)^(1/2) (b w_thth - 2c w_thph + a w_phph) / W

    with |g_Q| = -(1 + Q^2) W.  Zero at the steering solution."""
    q = np.asarray(q, dtype=float)
    det_q = -(1.0 + q * q) * fd.W
    pref = fd.W / (2.0 * det_q)
    w_hh = pref * ((-fd.et_a + 2.0 * fd.a * fd.C_th_tth + 2.0 * fd.c * fd.C_ph_tth)
                   - q * (-fd.er_a))
    w_hp = pref * ((-fd.et_c + fd.c * fd.C_th_tth + fd.b * fd.C_ph_tth
                    + fd.a * fd.C_th_tph + fd.c * fd.C_ph_tph)
                   - q * (-fd.er_c))
    w_pp = pref * ((-fd.et_b + 2.0 * fd.c * fd.C_th_tph + 2.0 * fd.b * fd.C_ph_tph)
                   - q * (-fd.er_b))
    contraction = (fd.b * w_hh - 2.0 * fd.c * w_hp + fd.a * w_pp) / fd.W
    return -np.sqrt(1.0 + q * q) * contraction


def trace_h_er(g: BlockMetric, env, fields=None):
    """H_{e_r} = -<H, e_r> from the generic trace formula (for the lemma
    check against frame data)."""
    h_r, _, _ = mean_curvature_values(g, env, method="trace", fields=fields)
    return -h_r
