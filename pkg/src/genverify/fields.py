"""Charts, tensor fields and pointwise metric linear algebra.

A chart is one coordinate box; fields are arrays of expressions (or
derived products of them) evaluated in jet arithmetic at sampled points.
``MetricAt`` bundles everything downstream code needs about h at one
point: values, first and second partials, the inverse and *its* partials
(obtained from d(h^-1) = -h^-1 dh h^-1, so they are exact), and the
declared symmetry kind.

Musical convention: flat(X) = h(X, .), i.e. flat(X)_j = h_ij X^i, and
sharp is its inverse.  This is the convention that makes the duality
identity hold for skew h as well as symmetric h.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import exprlang, jets

__all__ = [
    "Chart",
    "FieldSpec",
    "MetricAt",
    "OperatorAt",
    "DegeneracyError",
    "FrameError",
    "ValidationError",
    "invert",
    "flat",
    "sharp",
    "orthonormal_frame",
    "ExprMetricField",
    "TwinMetricField",
    "ExprOperatorField",
]

RCOND_MIN = 1e-10


class DegeneracyError(ValueError):
    """h (or J) is numerically singular at a point."""


class FrameError(ValueError):
    """No orthonormal frame: h is not positive definite at the point."""


class ValidationError(ValueError):
    """Declared structure (symmetry kind, J-symmetry, ...) fails numerically."""


@dataclass(frozen=True)
class Chart:
    """An axis-aligned coordinate box with a deterministic sampler."""

    n: int
    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != self.n or len(self.hi) != self.n:
            raise ValueError("domain bounds must match the chart dimension")
        for a, b in zip(self.lo, self.hi):
            if not a < b:
                raise ValueError(f"empty axis range [{a}, {b}]")

    def sample(self, seed: int, count: int) -> np.ndarray:
        """`count` points strictly inside the box, reproducible from seed."""
        rng = np.random.default_rng(seed)
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        margin = 0.01 * (hi - lo)
        return rng.uniform(lo + margin, hi - margin, size=(count, self.n))

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x > self.lo) and np.all(x < self.hi))


@dataclass(frozen=True)
class FieldSpec:
    """A tensor field given componentwise by expressions.

    valence (r, s) counts contravariant/covariant slots; components is
    an object array of Expr with r+s axes of length n each.
    """

    valence: tuple
    components: np.ndarray

    @classmethod
    def parse(cls, valence, entries, n: int) -> "FieldSpec":
        rank = valence[0] + valence[1]
        comps = np.asarray(entries, dtype=object)
        if comps.shape != (n,) * rank:
            raise ValueError(f"expected a {(n,) * rank} component array, got {comps.shape}")
        out = jets.oarray(comps.shape)
        for idx in np.ndindex(comps.shape):
            entry = comps[idx]
            out[idx] = entry if not isinstance(entry, str) else exprlang.parse(entry, n)
        return cls(tuple(valence), out)

    def eval_jets(self, x) -> np.ndarray:
        """Every component as a Jet2 seeded at x."""
        env = jets.seed_point(x)
        n = len(env)
        out = jets.oarray(self.components.shape)
        for idx in np.ndindex(self.components.shape):
            val = exprlang.evaluate(self.components[idx], env)
            out[idx] = val if isinstance(val, jets.Jet2) else jets.const(val, n)
        return out


def eval_field(spec: FieldSpec, x) -> np.ndarray:
    return spec.eval_jets(x)


def _norm1(m: np.ndarray) -> float:
    return float(np.max(np.sum(np.abs(m), axis=0))) if m.size else 0.0


def invert(h: np.ndarray, point=None) -> tuple:
    """Matrix inverse with a reciprocal-condition estimate.

    Returns (h_inv, rcond); raises DegeneracyError when singular or when
    rcond falls below 1e-10 (numerical breakdown rather than the assumed
    non-degeneracy).
    """
    h = np.asarray(h, dtype=float)
    where = "" if point is None else f" at point {np.asarray(point).tolist()}"
    try:
        h_inv = np.linalg.inv(h)
    except np.linalg.LinAlgError as err:
        raise DegeneracyError(f"singular matrix{where}") from err
    rcond = 1.0 / max(_norm1(h) * _norm1(h_inv), 1.0e-300)
    if not np.isfinite(h_inv).all() or rcond < RCOND_MIN:
        raise DegeneracyError(f"matrix numerically degenerate (rcond={rcond:.2e}){where}")
    return h_inv, rcond


def flat(h: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Covector h(X, .) of a vector: flat(X)_j = h_ij X^i."""
    return np.asarray(h).T @ np.asarray(vec)


def sharp(h_inv: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Inverse of flat: sharp(flat(X)) = X."""
    return np.asarray(h_inv).T @ np.asarray(cov)


@dataclass
class MetricAt:
    """h and every derivative of it the rest of the package consumes."""

    x: np.ndarray
    h: np.ndarray          # (n, n)
    dh: np.ndarray         # (n, n, n): dh[k, i, j] = d_k h_ij
    ddh: np.ndarray        # (n, n, n, n): ddh[k, l, i, j] = d_k d_l h_ij
    h_inv: np.ndarray
    dh_inv: np.ndarray
    ddh_inv: np.ndarray
    symmetry_kind: str     # 'symmetric' | 'skew' | 'general'
    rcond: float
    h_jets: np.ndarray = field(repr=False, default=None)  # (n, n) of Jet2

    @property
    def n(self) -> int:
        return self.h.shape[0]

    def flat(self, vec):
        return flat(self.h, vec)

    def sharp(self, cov):
        return sharp(self.h_inv, cov)

    def h_inv_jets(self) -> np.ndarray:
        """h^-1 as Jet2 components (exact: h^-1 is algebraic in h)."""
        return jets.j2_array(self.h_inv, np.moveaxis(self.dh_inv, 0, -1),
                             np.moveaxis(np.moveaxis(self.ddh_inv, 0, -2), 0, -1))


def _symmetry_residual(h: np.ndarray, kind: str) -> float:
    if kind == "symmetric":
        return float(np.max(np.abs(h - h.T)))
    if kind == "skew":
        return float(np.max(np.abs(h + h.T)))
    return 0.0


def metric_at_from_jets(hj: np.ndarray, x, kind: str) -> MetricAt:
    """Assemble a MetricAt from Jet2 components of h."""
    x = np.asarray(x, dtype=float)
    h = jets.jvalues(hj)
    scale = 1.0 + float(np.max(np.abs(h)))
    res = _symmetry_residual(h, kind)
    if res > 1e-9 * scale:
        raise ValidationError(
            f"metric declared {kind} but residual {res:.2e} at point {x.tolist()}"
        )
    dh = np.moveaxis(jets.jgrads(hj), -1, 0)
    ddh = np.moveaxis(np.moveaxis(jets.jhesses(hj), -1, 0), -1, 1)
    h_inv, rcond = invert(h, point=x)
    n = h.shape[0]
    dh_inv = np.empty_like(dh)
    for k in range(n):
        dh_inv[k] = -h_inv @ dh[k] @ h_inv
    ddh_inv = np.empty_like(ddh)
    for k in range(n):
        for l in range(n):
            ddh_inv[k, l] = -(
                dh_inv[l] @ dh[k] @ h_inv
                + h_inv @ ddh[k, l] @ h_inv
                + h_inv @ dh[k] @ dh_inv[l]
            )
    return MetricAt(x, h, dh, ddh, h_inv, dh_inv, ddh_inv, kind, rcond, hj)


class ExprMetricField:
    """A metric given componentwise by expressions, with a declared kind."""

    def __init__(self, spec: FieldSpec, kind: str, n: int):
        if kind not in ("symmetric", "skew", "general"):
            raise ValueError(f"unknown symmetry kind {kind!r}")
        self.spec = spec
        self.kind = kind
        self.n = n

    @classmethod
    def parse(cls, entries, kind: str, n: int) -> "ExprMetricField":
        return cls(FieldSpec.parse((0, 2), entries, n), kind, n)

    def component_jets(self, x) -> np.ndarray:
        return self.spec.eval_jets(x)

    def at(self, x) -> MetricAt:
        return metric_at_from_jets(self.component_jets(x), x, self.kind)


class TwinMetricField:
    """The metric (X, Y) -> g(X, JY), built from g and an invertible
    g-symmetric J.  Components are g_ik J^k_j, multiplied out in jet
    arithmetic so second partials stay exact."""

    def __init__(self, g_field, j_field):
        self.g_field = g_field
        self.j_field = j_field
        self.n = g_field.n
        self.kind = "symmetric"

    def component_jets(self, x) -> np.ndarray:
        gj = self.g_field.component_jets(x)
        jj = self.j_field.component_jets(x)
        return np.dot(gj, jj)

    def at(self, x) -> MetricAt:
        g = jets.jvalues(self.g_field.component_jets(x))
        jv = jets.jvalues(self.j_field.component_jets(x))
        res = float(np.max(np.abs(g @ jv - (g @ jv).T)))
        if res > 1e-9 * (1.0 + float(np.max(np.abs(g @ jv)))):
            raise ValidationError(
                f"J is not g-symmetric (residual {res:.2e}) at point {np.asarray(x).tolist()}"
            )
        return metric_at_from_jets(self.component_jets(x), x, self.kind)


@dataclass
class OperatorAt:
    """A (1,1)-tensor J at a point: J[k, j] is the k-component of J(e_j)."""

    x: np.ndarray
    J: np.ndarray
    dJ: np.ndarray        # dJ[k, i, j] = d_k J^i_j
    ddJ: np.ndarray       # ddJ[k, l, i, j]
    J_inv: np.ndarray
    dJ_inv: np.ndarray
    rcond: float
    J_jets: np.ndarray = field(repr=False, default=None)

    @property
    def n(self) -> int:
        return self.J.shape[0]

    def J_inv_jets(self) -> np.ndarray:
        jj = self.J_jets
        n = self.n
        ddJ_inv = np.empty_like(self.ddJ)
        dJi = self.dJ_inv
        Ji = self.J_inv
        for k in range(n):
            for l in range(n):
                ddJ_inv[k, l] = -(
                    dJi[l] @ self.dJ[k] @ Ji + Ji @ self.ddJ[k, l] @ Ji + Ji @ self.dJ[k] @ dJi[l]
                )
        return jets.j2_array(Ji, np.moveaxis(dJi, 0, -1),
                             np.moveaxis(np.moveaxis(ddJ_inv, 0, -2), 0, -1))


class ExprOperatorField:
    """A (1,1)-tensor field given componentwise by expressions."""

    def __init__(self, spec: FieldSpec, n: int):
        self.spec = spec
        self.n = n

    @classmethod
    def parse(cls, entries, n: int) -> "ExprOperatorField":
        return cls(FieldSpec.parse((1, 1), entries, n), n)

    def component_jets(self, x) -> np.ndarray:
        return self.spec.eval_jets(x)

    def at(self, x) -> OperatorAt:
        jj = self.component_jets(x)
        J = jets.jvalues(jj)
        dJ = np.moveaxis(jets.jgrads(jj), -1, 0)
        ddJ = np.moveaxis(np.moveaxis(jets.jhesses(jj), -1, 0), -1, 1)
        J_inv, rcond = invert(J, point=x)
        n = J.shape[0]
        dJ_inv = np.empty_like(dJ)
        for k in range(n):
            dJ_inv[k] = -J_inv @ dJ[k] @ J_inv
        return OperatorAt(np.asarray(x, dtype=float), J, dJ, ddJ, J_inv, dJ_inv, rcond, jj)


def check_h_symmetric_operator(met: MetricAt, J: np.ndarray, tol: float = 1e-9) -> float:
    """Residual of h(JX, Y) = h(X, JY) over basis pairs; raises if large."""
    res = float(np.max(np.abs(J.T @ met.h - met.h @ J)))
    scale = 1.0 + float(np.max(np.abs(met.h @ J)))
    if res > tol * scale:
        raise ValidationError(
            f"operator not h-symmetric (residual {res:.2e}) at point {met.x.tolist()}"
        )
    return res


def orthonormal_frame(met: MetricAt, seed_basis: np.ndarray = None) -> np.ndarray:
    """Gram-Schmidt frame rows E_i with h(E_i, E_j) = delta_ij.

    Applied to the coordinate basis in index order (deterministic), or to
    the rows of seed_basis when given.  Requires symmetric positive
    definite h.
    """
    if met.symmetry_kind != "symmetric":
        raise FrameError(
            f"orthonormal frame needs a symmetric metric, got {met.symmetry_kind}"
        )
    n = met.n
    basis = np.eye(n) if seed_basis is None else np.asarray(seed_basis, dtype=float)
    E = np.zeros((n, n))
    for i in range(n):
        v = basis[i].copy()
        for j in range(i):
            v -= (E[j] @ met.h @ v) * E[j]
        nrm2 = float(v @ met.h @ v)
        if nrm2 <= 1e-12:
            raise FrameError(
                f"metric not positive definite at point {met.x.tolist()}"
            )
        E[i] = v / np.sqrt(nrm2)
    return E


def orthonormal_frame_j1(met: MetricAt, seed_basis: np.ndarray = None) -> np.ndarray:
    """The Gram-Schmidt frame as Jet1 entries (frame plus its derivatives)."""
    if met.symmetry_kind != "symmetric":
        raise FrameError(
            f"orthonormal frame needs a symmetric metric, got {met.symmetry_kind}"
        )
    n = met.n
    h1 = jets.to_j1(met.h_jets)
    basis = np.eye(n) if seed_basis is None else np.asarray(seed_basis, dtype=float)
    b1 = jets.j1_const_array(basis, n)
    E = jets.oarray((n, n))
    for i in range(n):
        v = b1[i].copy()
        for j in range(i):
            coef = np.dot(np.dot(E[j], h1), v)
            v = v - coef * E[j]
        nrm2 = np.dot(np.dot(v, h1), v)
        if nrm2.value <= 1e-12:
            raise FrameError(
                f"metric not positive definite at point {met.x.tolist()}"
            )
        inv_norm = 1.0 / nrm2.sqrt()
        for k in range(n):
            E[i, k] = v[k] * inv_norm
    return E
