"""Positivity cones of function families and order-isomorphism certificates.

The positivity cone of a family lives in coefficient space: all coefficient
vectors whose span element is nonnegative at every point. Its H-description is
the point-evaluation inequalities; the V-description (extreme rays) is
enumerated exactly at desk scale, with an LP fallback beyond the cap.

An operator between families is certified as an order isomorphism exactly when
it maps the domain cone onto the codomain cone; for a linear bijection the two
into-inclusions (forward and inverse) force equality, so the certificate
checks both and a rejection carries a concrete witness function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

import numpy as np

from . import linalg
from .linalg import SingularMatrixError, is_exact, mat_mat, mat_vec
from .spaces import DEFAULT_TOL, DimensionMismatchError, FunctionFamily, values_of

__all__ = [
    "ConeRep",
    "cone_rep",
    "OperatorModel",
    "Certificate",
    "is_order_isomorphism",
    "ENUMERATION_CAP",
]

ENUMERATION_CAP = 12
_SUBSET_BUDGET = 200_000


def _canonical_exact_ray(v) -> tuple:
    """Scale a rational vector to a primitive integer vector, first nonzero > 0."""
    den_lcm = 1
    for x in v:
        den_lcm = den_lcm * x.denominator // math.gcd(den_lcm, x.denominator)
    ints = [int(x * den_lcm) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, abs(x))
    if g == 0:
        return tuple(0 for _ in ints)
    ints = [x // g for x in ints]
    for x in ints:
        if x != 0:
            if x < 0:
                ints = [-y for y in ints]
            break
    return tuple(ints)


def _canonical_float_ray(v, tol: float = 1e-9) -> tuple:
    norm = float(np.max(np.abs(v)))
    if norm <= tol:
        return tuple(0.0 for _ in v)
    w = np.asarray(v, dtype=float) / norm
    for x in w:
        if abs(x) > tol:
            if x < 0:
                w = -w
            break
    return tuple(round(float(x), 9) + 0.0 for x in w)


def _canonical_ray(v, exact: bool):
    return _canonical_exact_ray(v) if exact else _canonical_float_ray(v)


@dataclass(frozen=True)
class ConeRep:
    """Double description of a positivity cone in coefficient space.

    facet_normals: rows are supporting inequalities a (feasible c satisfy
    a . c >= 0); these are the deduplicated point evaluations.
    extreme_rays: rows are extreme rays, or None in "lp" mode (enumeration
    skipped past the cap).
    """

    facet_normals: np.ndarray
    extreme_rays: Optional[np.ndarray]
    mode: str  # "exact" (rays enumerated) or "lp"

    def __post_init__(self):
        if self.mode not in ("exact", "lp"):
            raise ValueError("mode must be 'exact' or 'lp'")

    @property
    def dim(self) -> int:
        return self.facet_normals.shape[1]

    def contains(self, coeffs, tol: float = DEFAULT_TOL) -> bool:
        vals = mat_vec(self.facet_normals, np.asarray(coeffs))
        if vals.dtype == object:
            return all(x >= 0 for x in vals)
        return bool(np.all(vals >= -tol))


def _dedupe_rows(rows, exact: bool):
    seen = {}
    for row in rows:
        key = _canonical_ray(row, exact)
        if any(key):
            seen.setdefault(key, row)
    keys = sorted(seen.keys())
    return keys, [seen[k] for k in keys]


def cone_rep(fam: FunctionFamily, cap: int = ENUMERATION_CAP,
             tol: float = DEFAULT_TOL) -> ConeRep:
    """Facet and extreme-ray description of the family's positivity cone.

    Full families shortcut through the inverse of the evaluation matrix; proper
    subfamilies enumerate candidate rays over rank-(dim-1) subsets of the point
    inequalities in lexicographic order (deterministic). Dimensions beyond
    `cap` (or subset counts beyond the budget) return facets only, mode "lp".
    """
    g = fam.generators
    k, n = g.shape
    ineqs = g.T  # one row per point
    exact = fam.exact
    keys, rows = _dedupe_rows(list(ineqs), exact)
    if exact:
        facets = np.array([list(map(Fraction, key)) for key in keys], dtype=object)
    else:
        facets = np.array([np.asarray(r, dtype=float) for r in rows])

    if fam.is_full:
        inv_t = linalg.inv(ineqs)  # cone = image of the orthant
        rays = inv_t.T
        canon = sorted(_canonical_ray(r, exact) for r in rays)
        rays = _rays_matrix(canon, exact)
        return ConeRep(facets, rays, "exact")

    if k > cap or math.comb(facets.shape[0], max(k - 1, 0)) > _SUBSET_BUDGET:
        return ConeRep(facets, None, "lp")

    rays = _enumerate_rays(facets, exact, tol)
    return ConeRep(facets, rays, "exact")


def _rays_matrix(canon_keys, exact: bool):
    if not canon_keys:
        return (np.empty((0, 0), dtype=object) if exact else np.empty((0, 0)))
    if exact:
        return np.array([[Fraction(x) for x in key] for key in canon_keys], dtype=object)
    return np.array([list(key) for key in canon_keys], dtype=float)


def _enumerate_rays(ineqs, exact: bool, tol: float):
    """Extreme rays of {c : ineqs @ c >= 0} for a pointed cone.

    Every extreme ray is the 1-dimensional nullspace of some rank-(k-1) subset
    of active inequalities; subsets are scanned in lexicographic order and
    survivors are canonicalized, so the result is deterministic.
    """
    m, k = ineqs.shape
    found = set()
    if k == 1:
        for cand in ([Fraction(1)] if exact else [1.0], [Fraction(-1)] if exact else [-1.0]):
            v = np.array(cand, dtype=object if exact else float)
            if _feasible(ineqs, v, exact, tol):
                found.add(_canonical_ray(v, exact))
        return _rays_matrix(sorted(found), exact)

    for subset in combinations(range(m), k - 1):
        sub = ineqs[list(subset)]
        if exact:
            null = linalg.exact_nullspace(sub)
        else:
            null = linalg.float_nullspace(sub)
        if len(null) != 1:
            continue
        v = null[0]
        if _feasible(ineqs, v, exact, tol):
            found.add(_canonical_ray(v, exact))
        else:
            neg = np.array([-x for x in v], dtype=v.dtype) if exact else -v
            if _feasible(ineqs, neg, exact, tol):
                found.add(_canonical_ray(neg, exact))
    return _rays_matrix(sorted(found), exact)


def _feasible(ineqs, v, exact: bool, tol: float) -> bool:
    vals = mat_vec(ineqs, v)
    if exact:
        return all(x >= 0 for x in vals)
    return bool(np.all(vals >= -tol * max(1.0, float(np.max(np.abs(ineqs))))))


class OperatorModel:
    """A linear bijection between two function families.

    basis "generator": the matrix maps domain generator coefficients to
    codomain generator coefficients (column convention, c' = M @ c).
    basis "point": both families are full and the matrix maps value vectors to
    value vectors (v' = M @ v).
    """

    def __init__(self, matrix, domain: FunctionFamily, codomain: FunctionFamily,
                 basis: str = "point"):
        if basis not in ("point", "generator"):
            raise ValueError("basis must be 'point' or 'generator'")
        m = np.asarray(matrix)
        if m.dtype != object:
            m = np.asarray(m, dtype=float)
            if not np.all(np.isfinite(m)):
                raise ValueError("operator entries must be finite")
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator matrix must be square")
        exact = m.dtype == object
        if exact != domain.exact or exact != codomain.exact:
            raise ValueError("operator and families must share one arithmetic mode")
        if domain.rank != codomain.rank:
            raise DimensionMismatchError("domain and codomain ranks must agree")
        if basis == "point":
            if not (domain.is_full and codomain.is_full):
                raise ValueError("point basis requires full families")
            if m.shape != (codomain.space.size, domain.space.size):
                raise DimensionMismatchError("point matrix shape must match the spaces")
        else:
            if m.shape != (codomain.rank, domain.rank):
                raise DimensionMismatchError("generator matrix shape must match the ranks")
        self.matrix = m
        self.matrix.setflags(write=False)
        self.basis = basis
        self.domain = domain
        self.codomain = codomain
        self._inv_matrix = None
        if exact:
            self._inv_matrix = linalg.exact_inv(m)  # raises if singular
            self.condition = float("nan")
        else:
            self.condition = float(np.linalg.cond(m))
            if not np.isfinite(self.condition):
                raise SingularMatrixError("operator matrix is numerically singular")
            self._inv_matrix = linalg.inv(m)

    @property
    def exact(self) -> bool:
        return self.matrix.dtype == object

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def inverse_matrix(self) -> np.ndarray:
        return self._inv_matrix

    def inverse(self) -> "OperatorModel":
        return OperatorModel(self._inv_matrix, domain=self.codomain,
                             codomain=self.domain, basis=self.basis)

    def apply_coeffs(self, coeffs) -> np.ndarray:
        """Codomain coefficients of T f for domain coefficients of f."""
        if self.basis == "point":
            return self.apply_values(coeffs)
        return mat_vec(self.matrix, np.asarray(coeffs))

    def apply_values(self, v) -> np.ndarray:
        """Values of T f at the codomain points, from the values of f."""
        v = values_of(v)
        if self.basis == "point":
            return mat_vec(self.matrix, v)
        c = self.domain.coefficients_of(v)
        return self.codomain.values(mat_vec(self.matrix, c))

    def image_values(self, coeffs) -> np.ndarray:
        """Values of T f at the codomain points, from domain coefficients."""
        if self.basis == "point":
            return mat_vec(self.matrix, np.asarray(coeffs))
        return self.codomain.values(mat_vec(self.matrix, np.asarray(coeffs)))

    def point_matrix(self) -> np.ndarray:
        """The value-to-value matrix (requires full families)."""
        if self.basis == "point":
            return self.matrix
        if not (self.domain.is_full and self.codomain.is_full):
            raise ValueError("point matrix requires full families")
        gx_t_inv = linalg.inv(self.domain.generators.T)
        return mat_mat(self.codomain.generators.T, mat_mat(self.matrix, gx_t_inv))

    @classmethod
    def weighted_permutation(cls, sigma, weight, domain: Optional[FunctionFamily] = None,
                             codomain: Optional[FunctionFamily] = None) -> "OperatorModel":
        """Point-basis operator (T f)(y) = weight[y] * f(sigma[y]).

        sigma maps codomain point indices to domain point indices.
        """
        from .spaces import PointSpace
        sig = np.asarray(sigma, dtype=int)
        n = sig.shape[0]
        if sorted(sig.tolist()) != list(range(n)):
            raise ValueError("sigma must be a bijection of point indices")
        w = np.asarray(weight)
        exact = w.dtype == object
        if domain is None:
            domain = FunctionFamily.full(PointSpace.discrete(n, "x"), exact=exact)
        if codomain is None:
            codomain = FunctionFamily.full(PointSpace.discrete(n, "y"), exact=exact)
        m = linalg.zeros_like_mode((n, n), exact)
        for y in range(n):
            m[y, sig[y]] = w[y]
        return cls(m, domain=domain, codomain=codomain, basis="point")


@dataclass(frozen=True)
class Certificate:
    """Outcome of the cone test: ACCEPT, or REJECT with a witness.

    A rejection witness is a function in one family's positivity cone whose
    image (side "domain": under T; side "codomain": under the inverse) is
    negative at `point` in the other model, i.e. it leaves the cone there.
    """

    accept: bool
    mode: str  # "exact" | "lp"
    arithmetic: str  # "rational" | "float"
    witness_coeffs: Optional[tuple] = None
    witness_values: Optional[tuple] = None
    side: Optional[str] = None
    point: Optional[int] = None
    detail: str = ""

    def to_json_dict(self) -> dict:
        out = {
            "schema": "oiso/1",
            "accept": self.accept,
            "mode": self.mode,
        }
        if not self.accept:
            out["witness"] = [_jsonable(v) for v in (self.witness_values or ())]
            out["witness_side"] = self.side
            out["witness_point"] = self.point
            out["detail"] = self.detail
        return out


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _nonneg_violation(m, tol: float):
    """Most negative entry of a matrix, as (i, j) or None."""
    if m.dtype == object:
        worst = None
        for i in range(m.shape[0]):
            row = m[i]
            for j in range(m.shape[1]):
                # ints and Fractions both carry the sign on .numerator
                if row[j].numerator < 0 and (worst is None or row[j] < m[worst]):
                    worst = (i, j)
        return worst
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    i, j = np.unravel_index(np.argmin(m), m.shape)
    return (int(i), int(j)) if m[i, j] < -tol * scale else None


def _indicator(n: int, j: int, exact: bool):
    v = linalg.zeros_like_mode((n,), exact)
    v[j] = Fraction(1) if exact else 1.0
    return v


def is_order_isomorphism(t: OperatorModel, tol: float = DEFAULT_TOL,
                         cap: int = ENUMERATION_CAP) -> Certificate:
    """Certify that T maps the domain positivity cone onto the codomain cone.

    Point basis (full families): T is an order isomorphism exactly when T and
    its inverse are entrywise nonnegative, i.e. T is a weighted permutation
    with positive weights. Generator basis: the extreme rays of each cone are
    pushed through T (resp. the inverse) and checked pointwise; past the
    enumeration cap each point inequality is checked by an LP over the other
    cone instead.
    """
    arith = "rational" if t.exact else "float"
    if t.basis == "point":
        n = t.size
        for mat, side in ((t.matrix, "domain"), (t.inverse_matrix, "codomain")):
            hit = _nonneg_violation(mat, tol)
            if hit is not None:
                i, j = hit
                w = _indicator(n, j, t.exact)
                return Certificate(
                    accept=False, mode="exact", arithmetic=arith,
                    witness_coeffs=tuple(w), witness_values=tuple(w),
                    side=side, point=i,
                    detail=(f"indicator of {side} point {j} maps to a negative "
                            f"value at point {i}"))
        return Certificate(accept=True, mode="exact", arithmetic=arith)

    dom_rep = cone_rep(t.domain, cap=cap, tol=tol)
    cod_rep = cone_rep(t.codomain, cap=cap, tol=tol)
    if dom_rep.mode == "exact" and cod_rep.mode == "exact":
        for rep, op, side, target in (
            (dom_rep, t, "domain", t.codomain),
            (cod_rep, t.inverse(), "codomain", t.domain),
        ):
            for ray in rep.extreme_rays:
                img = op.image_values(ray)
                bad = _first_negative(img, tol)
                if bad is not None:
                    return Certificate(
                        accept=False, mode="exact", arithmetic=arith,
                        witness_coeffs=tuple(ray),
                        witness_values=tuple(values_of_side(t, side, ray)),
                        side=side, point=bad,
                        detail=f"extreme ray of the {side} cone leaves the image cone")
        return Certificate(accept=True, mode="exact", arithmetic=arith)

    return _lp_certificate(t, tol)


def values_of_side(t: OperatorModel, side: str, coeffs) -> np.ndarray:
    fam = t.domain if side == "domain" else t.codomain
    return fam.values(np.asarray(coeffs))


def _first_negative(vals, tol: float):
    if vals.dtype == object:
        for i, x in enumerate(vals):
            if x < 0:
                return i
        return None
    scale = max(1.0, float(np.max(np.abs(vals)))) if vals.size else 1.0
    i = int(np.argmin(vals))
    return i if vals[i] < -tol * scale else None


def _lp_certificate(t: OperatorModel, tol: float) -> Certificate:
    """Per-point LP screen: minimize each image coordinate over the unit box
    slice of the source cone; a strictly negative minimum is a witness."""
    from scipy.optimize import linprog

    for op, side in ((t, "domain"), (t.inverse(), "codomain")):
        src = op.domain
        dst = op.codomain
        a_src = linalg.as_float(src.generators).T          # rows: source points
        img = linalg.as_float(dst.generators).T @ linalg.as_float(op.matrix)
        for j in range(dst.space.size):
            res = linprog(c=img[j], A_ub=-a_src, b_ub=np.zeros(a_src.shape[0]),
                          bounds=[(-1.0, 1.0)] * a_src.shape[1], method="highs")
            if not res.success:  # pragma: no cover - bounded feasible by construction
                raise RuntimeError(f"LP solver failed: {res.message}")
            if res.fun < -tol:
                w = res.x
                return Certificate(
                    accept=False, mode="lp", arithmetic="float",
                    witness_coeffs=tuple(float(x) for x in w),
                    witness_values=tuple(float(x) for x in (w @ linalg.as_float(src.generators))),
                    side=side, point=j,
                    detail=f"LP found a {side}-cone function mapping negative at point {j}")
    return Certificate(accept=True, mode="lp", arithmetic="float")
