"""Curvature of a block metric from exact symbolic derivatives.

The generic engine assembles Christoffel symbols and their coordinate
derivatives from the symbolic first and second partials of the eight
metric components (no finite differencing), then contracts

    Ric_ij = dGamma^k_ij/dx^k - dGamma^k_ik/dx^j
             + Gamma^k_km Gamma^m_ij - Gamma^k_jm Gamma^m_ik
    R      = g^ij Ric_ij
    G      = Ric - (1/2) R g

The spherically symmetric closed forms (diagonal u, v chart with
a = r^2, b = r^2 sin^2 th) are provided alongside as independent oracles,
together with the conformal scalar-curvature transformation laws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import PH, R, T, TH, BlockMetric, CoordinatePoint, inverse_values, metric_values
from .expr import COORDS, FieldExpr, evaluate

__all__ = ["ConnectionCoefficients", "CurvaturePack", "christoffel",
           "christoffel_values", "curvature_pack", "curvature_values",
           "spherical_oracle", "scalar_curvature_spherical", "conformal_scalar"]

_IDX = {"t": T, "r": R, "th": TH, "ph": PH}


@dataclass(frozen=True)
class ConnectionCoefficients:
    """Gamma^k_ij at one point, stored as gamma[k, i, j]."""

    gamma: np.ndarray
    point: CoordinatePoint

    def __getitem__(self, kij):
        k, i, j = (_IDX.get(x, x) for x in kij)
        return self.gamma[..., k, i, j]


@dataclass(frozen=True)
class CurvaturePack:
    """Ricci tensor, scalar curvature and Einstein tensor at one point."""

    ricci: np.ndarray
    scalar: float
    einstein: np.ndarray
    point: CoordinatePoint


# ---------------------------------------------------------------------------
# generic engine
# ---------------------------------------------------------------------------

def _component_jets(g: BlockMetric, env, order=2):
    """Values and exact partials of the eight components on the env grid."""
    vals, d1, d2 = {}, {}, {}
    for name in g.comps:
        vals[name] = np.asarray(evaluate(g.comps[name], env), dtype=float)
        d1[name] = {m: np.asarray(evaluate(g.deriv(name, m), env), dtype=float)
                    for m in COORDS}
        if order >= 2:
            d2[name] = {}
            for i, m in enumerate(COORDS):
                for n in COORDS[i:]:
                    d2[name][(m, n)] = np.asarray(
                        evaluate(g.deriv(name, m, n), env), dtype=float)
    return vals, d1, d2


def _metric_jets(g: BlockMetric, env, order=2):
    """dg[..., m, i, j] and d2g[..., m, n, i, j] for the block layout."""
    vals, d1, d2 = _component_jets(g, env, order)
    shape = np.broadcast_shapes(*(np.shape(v) for v in vals.values()),
                                *(np.shape(v) for v in env.values()))
    slots = (("d", T, R), ("e", T, TH), ("f", T, PH),
             ("a", TH, TH), ("c", TH, PH), ("b", PH, PH))

    dg = np.zeros(shape + (4, 4, 4))
    for mi, m in enumerate(COORDS):
        dg[..., mi, T, T] = -2.0 * vals["v"] * d1["v"][m]
        dg[..., mi, R, R] = 2.0 * vals["u"] * d1["u"][m]
        for name, i, j in slots:
            dg[..., mi, i, j] = dg[..., mi, j, i] = d1[name][m]
        dg[..., mi, T, R] = dg[..., mi, R, T] = d1["d"][m]

    if order < 2:
        return dg, None

    d2g = np.zeros(shape + (4, 4, 4, 4))
    for mi, m in enumerate(COORDS):
        for ni in range(mi, 4):
            n = COORDS[ni]
            d2g[..., mi, ni, T, T] = -2.0 * (d1["v"][m] * d1["v"][n]
                                             + vals["v"] * d2["v"][(m, n)])
            d2g[..., mi, ni, R, R] = 2.0 * (d1["u"][m] * d1["u"][n]
                                            + vals["u"] * d2["u"][(m, n)])
            for name, i, j in slots:
                d2g[..., mi, ni, i, j] = d2g[..., mi, ni, j, i] = d2[name][(m, n)]
            d2g[..., mi, ni, T, R] = d2g[..., mi, ni, R, T] = d2["d"][(m, n)]
            if ni != mi:
                d2g[..., ni, mi, :, :] = d2g[..., mi, ni, :, :]
    return dg, d2g


def christoffel_values(g: BlockMetric, env) -> np.ndarray:
    """Gamma[..., k, i, j] on an env grid."""
    dg, _ = _metric_jets(g, env, order=1)
    ginv = inverse_values(g, env)
    # P_ijl = g_jl,i + g_il,j - g_ij,l
    pijl = (np.einsum("...ijl->...ijl", dg)
            + np.einsum("...jil->...ijl", dg)
            - np.einsum("...lij->...ijl", dg))
    return 0.5 * np.einsum("...kl,...ijl->...kij", ginv, pijl)


def christoffel(g: BlockMetric, p: CoordinatePoint) -> ConnectionCoefficients:
    """Connection coefficients at a point, symmetric in the lower indices."""
    return ConnectionCoefficients(christoffel_values(g, p.env()), p)


def curvature_values(g: BlockMetric, env) -> dict:
    """Ricci, scalar and Einstein curvature on an env grid."""
    dg, d2g = _metric_jets(g, env, order=2)
    gmat = metric_values(g, env)
    ginv = inverse_values(g, env)

    pijl = (np.einsum("...ijl->...ijl", dg)
            + np.einsum("...jil->...ijl", dg)
            - np.einsum("...lij->...ijl", dg))
    gamma = 0.5 * np.einsum("...kl,...ijl->...kij", ginv, pijl)

    # dGamma[..., m, k, i, j] = partial_m Gamma^k_ij, all derivatives exact
    dginv = -np.einsum("...ka,...mab,...bl->...mkl", ginv, dg, ginv)
    dpijl = (np.einsum("...mijl->...mijl", d2g)
             + np.einsum("...mjil->...mijl", d2g)
             - np.einsum("...mlij->...mijl", d2g))
    dgamma = 0.5 * (np.einsum("...mkl,...ijl->...mkij", dginv, pijl)
                    + np.einsum("...kl,...mijl->...mkij", ginv, dpijl))

    ric = (np.einsum("...kkij->...ij", dgamma)
           - np.einsum("...jkik->...ij", dgamma)
           + np.einsum("...kkm,...mij->...ij", gamma, gamma)
           - np.einsum("...kjm,...mik->...ij", gamma, gamma))
    scal = np.einsum("...ij,...ij->...", ginv, ric)
    einstein = ric - 0.5 * scal[..., None, None] * gmat
    return {"ricci": ric, "scalar": scal, "einstein": einstein, "gamma": gamma}


def curvature_pack(g: BlockMetric, p: CoordinatePoint) -> CurvaturePack:
    out = curvature_values(g, p.env())
    return CurvaturePack(ricci=out["ricci"], scalar=float(out["scalar"]),
                         einstein=out["einstein"], point=p)


# ---------------------------------------------------------------------------
# spherically symmetric closed forms (independent oracles)
# ---------------------------------------------------------------------------

def spherical_oracle(u: FieldExpr, v: FieldExpr, env) -> dict:
    """Closed-form curvature of the diagonal chart diag(-v^2, u^2, r^2,
    r^2 sin^2 th) with u, v functions of (t, r).

    Returns every nonzero Ricci and Einstein component, the scalar
    curvature, and the Christoffel matrix entries used elsewhere.
    """
    from .expr import diff

    r = np.asarray(env["r"], dtype=float)
    th = np.asarray(env.get("th", np.pi / 2), dtype=float)
    U = np.asarray(evaluate(u, env), dtype=float)
    V = np.asarray(evaluate(v, env), dtype=float)
    u_t = np.asarray(evaluate(diff(u, "t"), env), dtype=float)
    u_r = np.asarray(evaluate(diff(u, "r"), env), dtype=float)
    u_tt = np.asarray(evaluate(diff(diff(u, "t"), "t"), env), dtype=float)
    v_t = np.asarray(evaluate(diff(v, "t"), env), dtype=float)
    v_r = np.asarray(evaluate(diff(v, "r"), env), dtype=float)
    v_rr = np.asarray(evaluate(diff(diff(v, "r"), "r"), env), dtype=float)
    sth, cth = np.sin(th), np.cos(th)

    ric_tt = ((V * v_rr + 2.0 / r * V * v_r) / U**2
              - (u_r / U**3) * V * v_r + (u_t * v_t / V - u_tt) / U)
    ric_tr = 2.0 / r * u_t / U
    ric_rr = (-v_rr / V + 2.0 / r * u_r / U - (v_t / V**3) * U * u_t
              + (U * u_tt / V + v_r * u_r / U) / V)
    ric_hh = (1.0 - 1.0 / U**2) + r * u_r / U**3 - r * (v_r / V) / U**2
    ric_pp = sth**2 * ric_hh

    scal = (-2.0 / U**2 * v_rr / V + 2.0 * (u_r / U**3) * (v_r / V)
            - 2.0 * (u_t / U) * (v_t / V**3) + 2.0 * (u_tt / U) / V**2
            + 4.0 / r * u_r / U**3 - 4.0 / r * (v_r / V) / U**2
            + 2.0 / r**2 * (1.0 - 1.0 / U**2))

    g_tt = 2.0 / r * (u_r / U**3) * V**2 + V**2 / r**2 * (1.0 - 1.0 / U**2)
    g_tr = 2.0 / r * u_t / U
    g_rr = 2.0 / r * v_r / V - U**2 / r**2 + 1.0 / r**2
    g_hh = (r**2 / U**2 * v_rr / V - r**2 * (u_r / U**3) * (v_r / V)
            + r**2 * (u_t / U) * (v_t / V**3) - r**2 * (u_tt / U) / V**2
            - r * u_r / U**3 + r * (v_r / V) / U**2)
    g_pp = sth**2 * g_hh

    return {
        "Ric_tt": ric_tt, "Ric_tr": ric_tr, "Ric_rr": ric_rr,
        "Ric_thth": ric_hh, "Ric_phph": ric_pp, "R": scal,
        "G_tt": g_tt, "G_tr": g_tr, "G_rr": g_rr,
        "G_thth": g_hh, "G_phph": g_pp,
        "Gamma_t_tt": v_t / V, "Gamma_t_tr": v_r / V,
        "Gamma_t_rr": U * u_t / V**2,
        "Gamma_r_tt": V * v_r / U**2, "Gamma_r_tr": u_t / U,
        "Gamma_r_rr": u_r / U,
        "Gamma_r_thth": -r / U**2, "Gamma_r_phph": -r * sth**2 / U**2,
        "Gamma_th_rth": 1.0 / r, "Gamma_th_phph": -sth * cth,
        "Gamma_ph_rph": 1.0 / r, "Gamma_ph_thph": cth / sth,
    }


def scalar_curvature_spherical(u: FieldExpr, v: FieldExpr,
                               p: CoordinatePoint) -> float:
    """Seven-term closed-form scalar curvature of the u, v chart."""
    return float(spherical_oracle(u, v, p.env())["R"])


def conformal_scalar(scalar: float, u_val: float, lap_u: float, n: int) -> float:
    """Scalar curvature after a conformal change of metric.

    Dimension n >= 3 uses the factor u^(4/(n-2)); n = 2 uses e^(2u).
    """
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    if n == 2:
        return float(np.exp(-2.0 * u_val) * (scalar - 2.0 * lap_u))
    if not u_val > 0:
        raise ValueError("conformal factor must be positive")
    return float(u_val ** (-(n + 2.0) / (n - 2.0))
                 * (scalar * u_val - 4.0 * (n - 1.0) / (n - 2.0) * lap_u))
