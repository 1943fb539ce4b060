"""Base-manifold connection calculus.

Index conventions used throughout (n = chart dimension):

* ``gamma[k, i, j]``  = Gamma^k_ij, the d_k-component of nabla_{d_i} d_j
* ``dgamma[l, k, i, j]`` = d_l Gamma^k_ij
* ``NH[i, j, k]``     = (nabla_{d_i} h)(d_j, d_k)
* ``T[k, i, j]``      = torsion component, Gamma^k_ij - Gamma^k_ji
* ``R[i, j, k, l]``   = l-component of R(d_i, d_j) d_k
* ``NJ[i, k, j]``     = k-component of (nabla_{d_i} J) d_j
* ``F[i, j, k]``      = h((nabla_{d_i} J) d_j, d_k)

Connection coefficients are carried as Jet1 entries so that every
derived connection (dual, alpha, twin, Levi-Civita) still knows its own
first partials; curvature needs exactly that and nothing deeper.

The covariant action on covectors is the one induced by the connection,
and curvature acts on covectors by (R(X,Y) gamma)(Z) = -gamma(R(X,Y)Z).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import jets
from .fields import MetricAt, OperatorAt, ValidationError

__all__ = [
    "ConnectionAt",
    "ZeroConnection",
    "ExprConnection",
    "LeviCivitaConnection",
    "DualConnection",
    "AlphaConnection",
    "TwinDualConnection",
    "TwinAlphaConnection",
    "levi_civita_at",
    "dual_at",
    "alpha_at",
    "twin_dual_at",
    "twin_alpha_at",
    "nabla_h",
    "nabla_h_j1",
    "torsion",
    "d_nabla_h",
    "curvature",
    "ricci_base",
    "scalar_base",
    "nabla_J",
    "nabla_J_j1",
    "F_tensor",
    "F_conditions",
    "metallic_obstruction",
    "dual_covector_rule",
    "covector_derivative",
]


@dataclass
class ConnectionAt:
    """Connection coefficients at one point, with their first partials."""

    x: np.ndarray
    g1: np.ndarray          # object (n, n, n) of Jet1
    gamma: np.ndarray       # (n, n, n) floats
    dgamma: np.ndarray      # (n, n, n, n) floats, [l, k, i, j]

    @property
    def n(self) -> int:
        return self.gamma.shape[0]

    def gamma_matrix(self, i: int) -> np.ndarray:
        """G_i with G_i[k, j] = Gamma^k_ij (vector action of nabla_{d_i})."""
        return self.gamma[:, i, :]

    def g1_matrix(self, i: int) -> np.ndarray:
        return self.g1[:, i, :]


def _connection_at(x, g1: np.ndarray) -> ConnectionAt:
    gamma = jets.jvalues(g1)
    dgamma = np.moveaxis(jets.jgrads(g1), -1, 0)
    return ConnectionAt(np.asarray(x, dtype=float), g1, gamma, dgamma)


class ZeroConnection:
    def __init__(self, n: int):
        self.n = n

    def at(self, x) -> ConnectionAt:
        n = self.n
        g1 = jets.j1_const_array(np.zeros((n, n, n)), n)
        return _connection_at(x, g1)


class ExprConnection:
    """Coefficients given componentwise by expressions, entries[k][i][j]."""

    def __init__(self, spec, n: int):
        self.spec = spec
        self.n = n

    @classmethod
    def parse(cls, entries, n: int) -> "ExprConnection":
        from .fields import FieldSpec

        return cls(FieldSpec.parse((1, 2), entries, n), n)

    def at(self, x) -> ConnectionAt:
        return _connection_at(x, jets.to_j1(self.spec.eval_jets(x)))


def levi_civita_at(met: MetricAt) -> ConnectionAt:
    """Christoffel symbols of a symmetric metric, with exact partials."""
    n = met.n
    h1 = jets.to_j1(met.h_jets)
    hinv1 = jets.to_j1(met.h_inv_jets())
    dh1 = [jets.partial_j1(met.h_jets, k) for k in range(n)]
    g1 = jets.oarray((n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                acc = jets.Jet1(0.0, np.zeros(n))
                for l in range(n):
                    acc = acc + hinv1[k, l] * (dh1[i][j, l] + dh1[j][i, l] - dh1[l][i, j])
                g1[k, i, j] = 0.5 * acc
    return _connection_at(met.x, g1)


class LeviCivitaConnection:
    def __init__(self, metric_field):
        self.metric_field = metric_field
        self.n = metric_field.n

    def at(self, x) -> ConnectionAt:
        return levi_civita_at(self.metric_field.at(x))


def nabla_h_j1(conn: ConnectionAt, met: MetricAt) -> np.ndarray:
    """(nabla h) with entries NH[i, j, k], as Jet1."""
    n = met.n
    h1 = jets.to_j1(met.h_jets)
    out = jets.oarray((n, n, n))
    for i in range(n):
        dh_i = jets.partial_j1(met.h_jets, i)
        gi = conn.g1_matrix(i)
        for j in range(n):
            for k in range(n):
                acc = dh_i[j, k]
                for m in range(n):
                    acc = acc - gi[m, j] * h1[m, k] - gi[m, k] * h1[j, m]
                out[i, j, k] = acc
    return out


def nabla_h(conn: ConnectionAt, met: MetricAt) -> np.ndarray:
    n = met.n
    NH = np.empty((n, n, n))
    for i in range(n):
        gi = conn.gamma_matrix(i)
        NH[i] = met.dh[i] - gi.T @ met.h - met.h @ gi
    return NH


def torsion(conn: ConnectionAt) -> np.ndarray:
    """T[k, i, j] = Gamma^k_ij - Gamma^k_ji."""
    return conn.gamma - np.swapaxes(conn.gamma, 1, 2)


def d_nabla_h(conn: ConnectionAt, met: MetricAt) -> np.ndarray:
    """DH[i, j, k] = (nabla_i h)(j,k) - (nabla_j h)(i,k) + h(T(i,j), k)."""
    NH = nabla_h(conn, met)
    T = torsion(conn)
    return NH - np.swapaxes(NH, 0, 1) + np.einsum("mij,mk->ijk", T, met.h)


def dual_at(conn: ConnectionAt, met: MetricAt) -> ConnectionAt:
    """Coefficients of the connection dual to `conn` w.r.t. h.

    Gamma*^k_ij = Gamma^k_ij + sharp((nabla_i h)(d_j, .))^k, valid for
    symmetric and skew h (the two cases where the dual has this closed
    form).  A metric declared 'general' is rejected.
    """
    if met.symmetry_kind not in ("symmetric", "skew"):
        raise ValidationError(
            "dual connection needs a symmetric or skew metric, "
            f"got {met.symmetry_kind}"
        )
    n = met.n
    NH1 = nabla_h_j1(conn, met)
    s1 = jets.to_j1(met.h_inv_jets()).T  # sharp matrix as Jet1
    g1 = jets.oarray((n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                acc = conn.g1[k, i, j]
                for m in range(n):
                    acc = acc + s1[k, m] * NH1[i, j, m]
                g1[k, i, j] = acc
    return _connection_at(met.x, g1)


class DualConnection:
    def __init__(self, base, metric_field):
        self.base = base
        self.metric_field = metric_field
        self.n = base.n

    def at(self, x) -> ConnectionAt:
        return dual_at(self.base.at(x), self.metric_field.at(x))


def alpha_at(conn: ConnectionAt, dual: ConnectionAt, alpha: float) -> ConnectionAt:
    """The interpolated connection ((1+a)/2) nabla + ((1-a)/2) nabla*."""
    g1 = 0.5 * (1.0 + alpha) * conn.g1 + 0.5 * (1.0 - alpha) * dual.g1
    return _connection_at(conn.x, g1)


class AlphaConnection:
    def __init__(self, base, metric_field, alpha: float):
        self.base = base
        self.metric_field = metric_field
        self.alpha = alpha
        self.n = base.n

    def at(self, x) -> ConnectionAt:
        c = self.base.at(x)
        return alpha_at(c, dual_at(c, self.metric_field.at(x)), self.alpha)


def curvature(conn: ConnectionAt) -> np.ndarray:
    """R[i, j, k, l]: the l-component of R(d_i, d_j) d_k."""
    g, dg = conn.gamma, conn.dgamma
    term1 = np.einsum("iljk->ijkl", dg)
    term2 = np.einsum("jlik->ijkl", dg)
    term3 = np.einsum("mjk,lim->ijkl", g, g)
    term4 = np.einsum("mik,ljm->ijkl", g, g)
    return term1 - term2 + term3 - term4


def curvature_on_covector(R: np.ndarray, i: int, j: int) -> np.ndarray:
    """Matrix of gamma -> R(d_i, d_j) gamma, i.e. -(R(d_i,d_j))^T."""
    return -R[i, j].copy()  # [k, l] with (R gamma)_k = -R[i,j,k,l] gamma_l


def ricci_base(conn: ConnectionAt, met: MetricAt, frame: np.ndarray) -> np.ndarray:
    """Ric[y, z] = sum_i h(R(E_i, d_y) d_z, E_i) over an h-orthonormal frame."""
    R = curvature(conn)
    return np.einsum("ia,ayzl,lb,ib->yz", frame, R, met.h, frame)


def scalar_base(conn: ConnectionAt, met: MetricAt, frame: np.ndarray) -> float:
    ric = ricci_base(conn, met, frame)
    return float(np.einsum("ia,ib,ab->", frame, frame, ric))


def nabla_J_j1(conn: ConnectionAt, jop: OperatorAt) -> np.ndarray:
    """NJ[i, k, j] = (nabla_i J)^k_j, as Jet1."""
    n = jop.n
    J1 = jets.to_j1(jop.J_jets)
    out = jets.oarray((n, n, n))
    for i in range(n):
        dJ_i = jets.partial_j1(jop.J_jets, i)
        gi = conn.g1_matrix(i)
        for k in range(n):
            for j in range(n):
                acc = dJ_i[k, j]
                for m in range(n):
                    acc = acc + gi[k, m] * J1[m, j] - gi[m, j] * J1[k, m]
                out[i, k, j] = acc
    return out


def nabla_J(conn: ConnectionAt, jop: OperatorAt) -> np.ndarray:
    n = jop.n
    NJ = np.empty((n, n, n))
    for i in range(n):
        gi = conn.gamma_matrix(i)
        NJ[i] = jop.dJ[i] + gi @ jop.J - jop.J @ gi
    return NJ


def F_tensor(met: MetricAt, conn: ConnectionAt, jop: OperatorAt) -> np.ndarray:
    """F[i, j, k] = h((nabla_i J) d_j, d_k)."""
    NJ = nabla_J(conn, jop)
    return np.einsum("imj,mk->ijk", NJ, met.h)


def F_conditions(met: MetricAt, conn: ConnectionAt, jop: OperatorAt) -> dict:
    """The two cyclic F combinations and the antisymmetrized nabla J.

    C1[i,j,k] = F(i,j,k) + F(j,k,i) - F(i,k,j) - F(j,i,k)
    C2[i,j,k] = F(j,k,i) - F(i,k,j)
    d_nabla_J[i,j,k] = k-component of (nabla_i J) d_j - (nabla_j J) d_i
    """
    F = F_tensor(met, conn, jop)
    C1 = (
        F
        + np.transpose(F, (1, 2, 0))
        - np.transpose(F, (0, 2, 1))
        - np.transpose(F, (1, 0, 2))
    )
    C2 = np.transpose(F, (1, 2, 0)) - np.transpose(F, (0, 2, 1))
    NJ = nabla_J(conn, jop)
    dNJ = np.einsum("ikj->ijk", NJ) - np.einsum("jki->ijk", NJ)
    return {"C1": C1, "C2": C2, "d_nabla_J": dNJ, "F": F}


def twin_dual_at(conn: ConnectionAt, jop: OperatorAt) -> ConnectionAt:
    """Gamma + J^-1 (nabla J): the dual of the Levi-Civita connection
    w.r.t. the twin metric g(., J.)."""
    n = jop.n
    NJ1 = nabla_J_j1(conn, jop)
    jinv1 = jets.to_j1(jop.J_inv_jets())
    g1 = jets.oarray((n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                acc = conn.g1[k, i, j]
                for m in range(n):
                    acc = acc + jinv1[k, m] * NJ1[i, m, j]
                g1[k, i, j] = acc
    return _connection_at(conn.x, g1)


def twin_alpha_at(conn: ConnectionAt, jop: OperatorAt, alpha: float) -> ConnectionAt:
    """Gamma + ((1-a)/2) J^-1 (nabla J).

    This is ((1+a)/2) nabla + ((1-a)/2) nabla* with nabla* the twin
    dual; a = 1 gives nabla and a = -1 the dual, as for every
    interpolated family here.
    """
    dual = twin_dual_at(conn, jop)
    g1 = conn.g1 + 0.5 * (1.0 - alpha) * (dual.g1 - conn.g1)
    return _connection_at(conn.x, g1)


class TwinDualConnection:
    def __init__(self, base, j_field):
        self.base = base
        self.j_field = j_field
        self.n = base.n

    def at(self, x) -> ConnectionAt:
        return twin_dual_at(self.base.at(x), self.j_field.at(x))


class TwinAlphaConnection:
    def __init__(self, base, j_field, alpha: float):
        self.base = base
        self.j_field = j_field
        self.alpha = alpha
        self.n = base.n

    def at(self, x) -> ConnectionAt:
        return twin_alpha_at(self.base.at(x), self.j_field.at(x), self.alpha)


def metallic_obstruction(
    conn: ConnectionAt, jop: OperatorAt, p: float, q: float, tol: float = 1e-9
) -> tuple:
    """Commutator (nabla_X J)J - J(nabla_X J) and its closed form
    (pI - 2J)(nabla_X J), for J satisfying J^2 = pJ + qI.

    Returns two (n, n, n) arrays indexed [i, k, j]; their difference
    vanishes identically.
    """
    J = jop.J
    n = jop.n
    res = np.max(np.abs(J @ J - p * J - q * np.eye(n)))
    if res > tol * (1.0 + np.max(np.abs(J @ J))):
        raise ValidationError(
            f"J fails the metallic identity J^2 = {p} J + {q} I "
            f"(residual {res:.2e}) at point {jop.x.tolist()}"
        )
    NJ = nabla_J(conn, jop)
    commutator = np.empty_like(NJ)
    closed = np.empty_like(NJ)
    lead = p * np.eye(n) - 2 * J
    for i in range(n):
        commutator[i] = NJ[i] @ J - J @ NJ[i]
        closed[i] = lead @ NJ[i]
    return commutator, closed


def covector_derivative(conn: ConnectionAt, beta: np.ndarray) -> np.ndarray:
    """(nabla_i beta)_j for a constant covector beta: -Gamma^m_ij beta_m."""
    return -np.einsum("mij,m->ij", conn.gamma, beta)


def dual_covector_rule(
    conn: ConnectionAt, met: MetricAt, beta: np.ndarray
) -> np.ndarray:
    """nabla*_X beta = nabla_X beta - (nabla_X h)(sharp(beta), .),
    evaluated on a constant covector.  Matches the coefficient route
    through dual_at."""
    NH = nabla_h(conn, met)
    w = met.sharp(beta)
    return covector_derivative(conn, beta) - np.einsum("iwm,w->im", NH, w)
