"""Constructive recovery of the weighted-composition form of an accepted operator.

For each domain anchor point the images of the nonnegative span functions
vanishing there share a common zero in the codomain; collecting those zero
sets and intersecting them pins down a unique codomain point. Running over all
anchors yields a point bijection, and evaluating T on the constants yields the
weight, so that T f = weight * (f o sigma) on the codomain model.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import linalg
from .linalg import mat_vec
from .cones import Certificate, OperatorModel, is_order_isomorphism
from .spaces import DEFAULT_TOL, FunctionFamily, ZeroSet

__all__ = [
    "NotOrderIsomorphismError",
    "AmbiguousIntersectionError",
    "InternalContradictionError",
    "ZeroFamilyMember",
    "ZeroSetFamily",
    "zero_family",
    "recover_point",
    "recover_map",
    "Decomposition",
    "decompose",
    "verify_representation",
    "NormalizedOperator",
    "normalize",
    "fip_check",
    "MARGIN_FACTOR",
]

MARGIN_FACTOR = 10.0


class NotOrderIsomorphismError(ValueError):
    """The operator failed the cone certificate."""

    def __init__(self, certificate: Certificate):
        self.certificate = certificate
        super().__init__(f"operator rejected: {certificate.detail or 'cone test failed'}")


class AmbiguousIntersectionError(ValueError):
    """The zero-set intersection did not isolate a unique point."""


class InternalContradictionError(RuntimeError):
    """An accepted operator violated a structural consequence of acceptance."""


@dataclass(frozen=True)
class ZeroFamilyMember:
    """One nonnegative span function vanishing at the anchor, with the zero
    set of its image."""

    description: str
    preimage_values: tuple
    image_values: tuple
    image_zeros: ZeroSet


@dataclass(frozen=True)
class ZeroSetFamily:
    anchor: int
    members: tuple

    def intersection_mask(self, n_codomain: int) -> np.ndarray:
        mask = np.ones(n_codomain, dtype=bool)
        for m in self.members:
            mask &= m.image_zeros.mask
        return mask


def _resolve_anchor(t: OperatorModel, x0) -> int:
    return t.domain.space.index(x0)


def zero_family(t: OperatorModel, x0, tol: float = DEFAULT_TOL) -> ZeroSetFamily:
    """Images of a generating set of {f in span : f >= 0, f(x0) = 0}.

    On a full family the generating set is the coordinate indicators e_j,
    j != x0 (on a one-point space it is empty and the intersection is the
    whole codomain). Rank-deficient families cannot separate points on a
    finite model, so no generating set exists and recovery is refused.
    """
    x0 = _resolve_anchor(t, x0)
    fam = t.domain
    if not fam.is_full:
        raise ValueError("recovery needs a family that separates points "
                         "(full rank on a finite model)")
    n = fam.space.size
    members = []
    for j in range(n):
        if j == x0:
            continue
        e = linalg.zeros_like_mode((n,), fam.exact)
        e[j] = Fraction(1) if fam.exact else 1.0
        img = t.apply_values(e)
        members.append(ZeroFamilyMember(
            description=f"indicator({fam.space.labels[j]})",
            preimage_values=tuple(e),
            image_values=tuple(img),
            image_zeros=ZeroSet.of(img, tol)))
    return ZeroSetFamily(anchor=x0, members=tuple(members))


def recover_point(t: OperatorModel, x0, tol: float = DEFAULT_TOL,
                  margin_factor: float = MARGIN_FACTOR) -> int:
    """The codomain point where every zero-family image vanishes.

    Exact mode demands a unique exact common zero. Float mode scores each
    codomain point by the worst member-image magnitude and requires the best
    score to beat the runner-up by margin_factor * tol.
    """
    zf = zero_family(t, x0, tol=tol)
    n_cod = t.codomain.space.size
    if not zf.members:
        if n_cod == 1:
            return 0
        raise AmbiguousIntersectionError("empty member list on a multi-point codomain")
    if t.exact:
        mask = zf.intersection_mask(n_cod)
        hits = np.nonzero(mask)[0]
        if hits.shape[0] != 1:
            raise AmbiguousIntersectionError(
                f"zero-set intersection has {hits.shape[0]} points, expected 1")
        return int(hits[0])
    scores = np.zeros(n_cod)
    for m in zf.members:
        scores = np.maximum(scores, np.abs(np.asarray(m.image_values, dtype=float)))
    order = np.argsort(scores, kind="stable")
    best = int(order[0])
    if n_cod > 1:
        margin = scores[order[1]] - scores[best]
        if margin < margin_factor * tol:
            raise AmbiguousIntersectionError(
                f"runner-up within margin ({margin:.3e} < {margin_factor * tol:.3e})")
    return best


def recover_map(t: OperatorModel, tol: float = DEFAULT_TOL,
                margin_factor: float = MARGIN_FACTOR) -> np.ndarray:
    """recover_point at every anchor, returned as an index map h[x] = y.

    Point-basis fast path: the anchor-x score of codomain point y is the
    largest |T e_j|(y) over j != x, i.e. the row maximum of |M| excluding
    column x, so one pass over max / second-max per row covers all anchors.
    """
    fam = t.domain
    if not fam.is_full:
        raise ValueError("recovery needs a full-rank family")
    n = fam.space.size
    if n == 1:
        return np.zeros(1, dtype=int)
    if t.basis == "point":
        m = t.matrix
        if t.exact:
            return _recover_map_exact(m)
        return _recover_map_float(np.abs(np.asarray(m, dtype=float)), tol, margin_factor)
    return np.array([recover_point(t, x, tol, margin_factor) for x in range(n)], dtype=int)


def _recover_map_exact(m) -> np.ndarray:
    # anchor x sees codomain point y iff every nonzero of row y sits in column x,
    # so only rows with a single nonzero ever match, bucketed by that column
    n = m.shape[0]
    buckets = [[] for _ in range(n)]
    for y in range(n):
        nz = [j for j in range(n) if m[y, j]]
        if len(nz) == 1:
            buckets[nz[0]].append(y)
    h = np.empty(n, dtype=int)
    for x in range(n):
        hits = buckets[x]
        if len(hits) != 1:
            raise AmbiguousIntersectionError(
                f"zero-set intersection has {len(hits)} points, expected 1")
        h[x] = hits[0]
    return h


def _recover_map_float(absm: np.ndarray, tol: float, margin_factor: float) -> np.ndarray:
    n = absm.shape[0]
    idx = np.argsort(-absm, axis=1, kind="stable")
    max1 = absm[np.arange(n), idx[:, 0]]
    arg1 = idx[:, 0]
    max2 = absm[np.arange(n), idx[:, 1]]
    # score[y, x]: worst member-image magnitude at y for anchor x
    scores = np.where(arg1[:, None] == np.arange(n)[None, :], max2[:, None], max1[:, None])
    h = np.empty(n, dtype=int)
    for x in range(n):
        col = scores[:, x]
        order = np.argsort(col, kind="stable")
        best = int(order[0])
        if col[order[1]] - col[best] < margin_factor * tol:
            raise AmbiguousIntersectionError(
                f"anchor {x}: runner-up within margin")
        h[x] = best
    return h


@dataclass(frozen=True)
class Decomposition:
    """T f = weight * (f o sigma): sigma maps codomain points to domain points."""

    sigma: tuple
    weight: tuple
    residual: float
    exact: bool

    def sigma_array(self) -> np.ndarray:
        return np.asarray(self.sigma, dtype=int)

    def weight_array(self) -> np.ndarray:
        if self.exact:
            return np.array(self.weight, dtype=object)
        return np.asarray(self.weight, dtype=float)


def _ones_image(t: OperatorModel):
    ones = t.domain.ones()
    return t.apply_values(ones)


def decompose(t: OperatorModel, tol: float = DEFAULT_TOL,
              cert: Optional[Certificate] = None,
              margin_factor: float = MARGIN_FACTOR) -> Decomposition:
    """Recover (sigma, weight) for an accepted operator with constants.

    Raises NotOrderIsomorphismError when the cone certificate rejects, and
    InternalContradictionError when recovery contradicts acceptance (non
    bijective anchor map or nonpositive weight), which cannot happen for a
    genuinely accepted operator.
    """
    if cert is None:
        cert = is_order_isomorphism(t, tol=tol)
    if not cert.accept:
        raise NotOrderIsomorphismError(cert)
    if not t.domain.has_constants():
        raise ValueError("decompose needs the domain family to contain constants")
    h = recover_map(t, tol=tol, margin_factor=margin_factor)
    n = h.shape[0]
    if sorted(h.tolist()) != list(range(n)):
        raise InternalContradictionError("anchor recovery map is not a bijection")
    sigma = np.empty(n, dtype=int)
    for x in range(n):
        sigma[h[x]] = x
    weight = _ones_image(t)
    if t.exact:
        if any(w <= 0 for w in weight):
            raise InternalContradictionError("nonpositive weight on an accepted operator")
    else:
        if np.any(np.asarray(weight, dtype=float) <= tol):
            raise InternalContradictionError("nonpositive weight on an accepted operator")
    residual = _representation_residual(t, sigma, weight)
    return Decomposition(sigma=tuple(int(v) for v in sigma),
                         weight=tuple(weight),
                         residual=residual, exact=t.exact)


def _representation_residual(t: OperatorModel, sigma, weight) -> float:
    """max over generators f and codomain points y of |Tf(y) - w(y) f(sigma(y))|."""
    gens = t.domain.generators
    sig = np.asarray(sigma, dtype=int)
    if t.basis == "point":
        # The generators are the indicators, so the max over them is the
        # entrywise gap between the matrix and the monomial matrix it claims.
        m = t.matrix
        if t.exact:
            worst = Fraction(0)
            for y in range(len(sig)):
                row, sy, wy = m[y], int(sig[y]), weight[y]
                for j in range(len(sig)):
                    d = row[j] - wy if j == sy else row[j]
                    if d and abs(d) > worst:
                        worst = abs(d)
            return float(worst)
        expected = np.zeros(m.shape)
        expected[np.arange(len(sig)), sig] = np.asarray(weight, dtype=float)
        return float(np.max(np.abs(m - expected)))
    worst = Fraction(0) if t.exact else 0.0
    for i in range(gens.shape[0]):
        f = gens[i]
        img = t.apply_values(f)
        if t.exact:
            for y in range(len(sig)):
                d = abs(img[y] - weight[y] * f[sig[y]])
                if d > worst:
                    worst = d
        else:
            d = np.max(np.abs(np.asarray(img, dtype=float)
                              - np.asarray(weight, dtype=float) * np.asarray(f, dtype=float)[sig]))
            worst = max(worst, float(d))
    return float(worst)


def verify_representation(t: OperatorModel, d: Decomposition, samples: int = 32,
                          seed: int = 0) -> float:
    """Residual of T f = weight * (f o sigma) on fresh random span elements."""
    rng = np.random.default_rng(seed)
    n = t.domain.space.size
    sig = d.sigma_array()
    w = d.weight_array()
    worst = 0.0
    for _ in range(samples):
        if t.exact:
            ints = rng.integers(-9, 10, size=n)
            v = np.array([Fraction(int(x)) for x in ints], dtype=object)
            img = t.apply_values(v)
            res = max(abs(img[y] - w[y] * v[sig[y]]) for y in range(n))
            worst = max(worst, float(res))
        else:
            v = rng.standard_normal(n)
            img = np.asarray(t.apply_values(v), dtype=float)
            res = float(np.max(np.abs(img - np.asarray(w, dtype=float) * v[sig])))
            worst = max(worst, res)
    return worst


@dataclass(frozen=True)
class NormalizedOperator:
    """Unital rescaling S f = T(u f) / T u with u = 1 + T^{-1} 1.

    S fixes the constants (S 1 = 1 identically), keeps the same point
    bijection as T, and weight_agreement records how well the weight
    re-derived from S (T u / u o sigma) matches the direct decomposition.
    """

    u: tuple
    operator: OperatorModel
    sigma: tuple
    weight_agreement: float

    @property
    def exact(self) -> bool:
        return self.operator.exact


def normalize(t: OperatorModel, tol: float = DEFAULT_TOL,
              cert: Optional[Certificate] = None) -> NormalizedOperator:
    if t.basis != "point":
        t = OperatorModel(t.point_matrix(),
                          domain=FunctionFamily.full(t.domain.space, exact=t.exact),
                          codomain=FunctionFamily.full(t.codomain.space, exact=t.exact),
                          basis="point")
    if cert is None:
        cert = is_order_isomorphism(t, tol=tol)
    if not cert.accept:
        raise NotOrderIsomorphismError(cert)
    base = decompose(t, tol=tol, cert=cert)
    ones_dom = t.domain.ones()
    ones_cod = t.codomain.ones()
    u = ones_dom + mat_vec(t.inverse_matrix, ones_cod)
    tu = t.apply_values(u)
    if t.exact:
        s_mat = np.empty(t.matrix.shape, dtype=object)
        for y in range(t.size):
            for x in range(t.size):
                s_mat[y, x] = t.matrix[y, x] * u[x] / tu[y]
    else:
        s_mat = (np.asarray(t.matrix, dtype=float)
                 * np.asarray(u, dtype=float)[None, :]
                 / np.asarray(tu, dtype=float)[:, None])
    s = OperatorModel(s_mat, domain=t.domain, codomain=t.codomain, basis="point")
    d_s = decompose(s, tol=tol)
    sig = d_s.sigma_array()
    # re-derive the weight of T from the unital S: T f = (T u / u o sigma) * (f o sigma)
    if t.exact:
        rederived = np.array([tu[y] / u[sig[y]] for y in range(t.size)], dtype=object)
        agreement = float(max(abs(rederived[y] - base.weight[y]) for y in range(t.size)))
    else:
        rederived = np.asarray(tu, dtype=float) / np.asarray(u, dtype=float)[sig]
        agreement = float(np.max(np.abs(rederived - np.asarray(base.weight, dtype=float))))
    if d_s.sigma != base.sigma:
        raise InternalContradictionError("normalization changed the point bijection")
    return NormalizedOperator(u=tuple(u), operator=s, sigma=d_s.sigma,
                              weight_agreement=agreement)


def fip_check(t: OperatorModel, x0, k: int = 3, trials: int = 64,
              seed: int = 0, tol: float = DEFAULT_TOL) -> bool:
    """Finite-intersection screen: every sampled k-subset of the zero family
    has a nonempty common zero set. False signals the operator cannot be an
    order isomorphism (negative control); True is necessary, not sufficient."""
    zf = zero_family(t, x0, tol=tol)
    n_cod = t.codomain.space.size
    if not zf.members:
        return True
    rng = np.random.default_rng(seed)
    m = len(zf.members)
    kk = min(k, m)
    for _ in range(trials):
        pick = rng.choice(m, size=kk, replace=False)
        mask = np.ones(n_cod, dtype=bool)
        for i in pick:
            mask &= zf.members[i].image_zeros.mask
        if not mask.any():
            return False
    return True
