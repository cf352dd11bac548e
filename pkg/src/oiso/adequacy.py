"""Adequacy flags for function families and the clamp-based bump constructions.

A family is adequate when it separates points from closed sets together with
the constants, is invariant under the piecewise-linear clamp (0 below 0,
identity on [0,1], 1 above 1), and its positivity cone generates the span.
On a finite discrete model every subset is closed, so separating an anchor
from its complement (the maximal closed set) settles every smaller closed set
with the same witness.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .spaces import (DEFAULT_TOL, FunctionFamily, FunctionVec, span_membership,
                     values_of)

__all__ = [
    "SeparationInfeasibleError",
    "clamp",
    "AdequacyReport",
    "check_adequate",
    "build_subbasic_bump",
    "build_precise_bump",
]


class SeparationInfeasibleError(ValueError):
    """No span function attains 1 at the anchor and 0 on the closed set."""


def clamp(t):
    """Saturate into [0,1]: 0 below 0, identity inside, 1 above 1. Idempotent."""
    if isinstance(t, Fraction):
        return Fraction(0) if t <= 0 else (Fraction(1) if t >= 1 else t)
    if isinstance(t, np.ndarray) and t.dtype == object:
        return np.array([clamp(x) for x in t], dtype=object)
    if isinstance(t, (int, float, np.floating, np.integer)):
        return 0.0 if t <= 0 else (1.0 if t >= 1 else float(t))
    return np.clip(np.asarray(t, dtype=float), 0.0, 1.0)


@dataclass(frozen=True)
class AdequacyReport:
    separates: bool
    separation_witnesses: tuple  # per point: coefficient tuple or None
    has_constants: bool
    g_invariant: bool
    g_residual: float
    cone_generates: bool
    cone_witness: Optional[dict]
    adequate: bool

    def to_json_dict(self) -> dict:
        return {
            "schema": "oiso/1",
            "separates": self.separates,
            "has_constants": self.has_constants,
            "g_invariant": self.g_invariant,
            "g_residual": self.g_residual,
            "cone_generates": self.cone_generates,
            "adequate": self.adequate,
        }


def _indicator_vec(fam: FunctionFamily, j: int):
    v = linalg.zeros_like_mode((fam.space.size,), fam.exact)
    v[j] = Fraction(1) if fam.exact else 1.0
    return v


def check_adequate(fam: FunctionFamily, tol: float = DEFAULT_TOL,
                   samples: int = 64, seed: int = 0) -> AdequacyReport:
    """Evaluate all four adequacy flags with witnesses.

    Separation is decided against the maximal closed set per anchor (see the
    module docstring); clamp invariance is probed on every generator plus
    seeded random span elements; cone generation uses the explicit shift
    f = c*1 - (c*1 - f) when constants are present and an LP otherwise.
    """
    n = fam.space.size
    witnesses = []
    for x in range(n):
        ok, c = span_membership(fam, _indicator_vec(fam, x), tol=tol)
        witnesses.append(tuple(c) if ok else None)
    separates = all(w is not None for w in witnesses)

    has_const = fam.has_constants(tol=tol)

    rng = np.random.default_rng(seed)
    probes = [fam.generators[i] for i in range(fam.rank)]
    for _ in range(samples):
        if fam.exact:
            ints = rng.integers(-3, 4, size=fam.rank)
            coeffs = np.array([Fraction(int(v)) for v in ints], dtype=object)
        else:
            coeffs = rng.standard_normal(fam.rank)
        probes.append(fam.values(coeffs))
    g_residual = 0.0
    g_invariant = True
    for v in probes:
        ok, _ = span_membership(fam, clamp(v), tol=tol)
        if not ok:
            g_invariant = False
            if not fam.exact:
                a = np.asarray(fam.generators, dtype=float).T
                cv = np.asarray(clamp(np.asarray(v, dtype=float)), dtype=float)
                c, *_ = np.linalg.lstsq(a, cv, rcond=None)
                g_residual = max(g_residual, float(np.max(np.abs(a @ c - cv))))
            else:
                g_residual = float("inf")

    cone_ok, cone_witness = _cone_generates(fam, tol)
    adequate = separates and has_const and g_invariant and cone_ok
    return AdequacyReport(separates=separates,
                          separation_witnesses=tuple(witnesses),
                          has_constants=has_const,
                          g_invariant=g_invariant,
                          g_residual=g_residual,
                          cone_generates=cone_ok,
                          cone_witness=cone_witness,
                          adequate=adequate)


def _cone_generates(fam: FunctionFamily, tol: float):
    """Each generator as a difference of two nonnegative span elements."""
    if fam.has_constants(tol=tol):
        ones = fam.ones()
        _, c_one = span_membership(fam, ones, tol=tol)
        worst = None
        for i in range(fam.rank):
            f = fam.generators[i]
            if fam.exact:
                shift = max(max(f), Fraction(0))
            else:
                shift = max(float(np.max(np.asarray(f, dtype=float))), 0.0)
            level = float(shift)
            if worst is None or level > worst["shift"]:
                worst = {"generator": fam.names[i], "shift": level,
                         "form": "f = shift*1 - (shift*1 - f)"}
        return True, worst
    try:
        from scipy.optimize import linprog
    except ImportError:  # pragma: no cover
        return False, None
    a = linalg.as_float(fam.generators).T
    n, k = a.shape
    worst = None
    gens_f = linalg.as_float(fam.generators)
    for i in range(fam.rank):
        f = gens_f[i]
        a_eq = np.hstack([a, -a])  # (c1 - c2) evaluated at each point
        a_ub = np.vstack([np.hstack([-a, np.zeros((n, k))]),
                          np.hstack([np.zeros((n, k)), -a])])  # both parts nonneg
        res = linprog(c=np.zeros(2 * k), A_eq=a_eq, b_eq=f,
                      A_ub=a_ub, b_ub=np.zeros(2 * n),
                      bounds=[(None, None)] * (2 * k), method="highs")
        if not res.success:
            return False, {"generator": fam.names[i], "infeasible": True}
        mass = float(np.sum(np.abs(res.x)))
        if worst is None or mass > worst["shift"]:
            worst = {"generator": fam.names[i], "shift": mass, "form": "lp"}
    return True, worst


def build_subbasic_bump(fam: FunctionFamily, x0, f, eps, tol: float = DEFAULT_TOL) -> FunctionVec:
    """Tent bump h = 1 + clamp(f1) - clamp(f1 + 1), f1 = (f - f(x0)) / eps.

    h is 0 at the anchor, 1 outside the neighborhood {|f - f(x0)| < eps}, and
    |f1| in between; it stays in the family by clamp invariance and constants.
    """
    x0 = fam.space.index(x0)
    v = values_of(f)
    if v.shape != (fam.space.size,):
        raise ValueError("f must be a value vector on the family's space")
    ok, _ = span_membership(fam, v, tol=tol)
    if not ok:
        raise ValueError("f must lie in the span of the family")
    if fam.exact:
        eps = Fraction(eps) if not isinstance(eps, Fraction) else eps
        if eps <= 0:
            raise ValueError("eps must be positive")
        f1 = np.array([(x - v[x0]) / eps for x in v], dtype=object)
        one = Fraction(1)
        h = np.array([1 + clamp(x) - clamp(x + one) for x in f1], dtype=object)
    else:
        eps = float(eps)
        if eps <= 0:
            raise ValueError("eps must be positive")
        f1 = (np.asarray(v, dtype=float) - float(v[x0])) / eps
        h = 1.0 + clamp(f1) - clamp(f1 + 1.0)
    _assert_bump_in_family(fam, h, tol)
    return FunctionVec(h)


def build_precise_bump(fam: FunctionFamily, x0, closed_set: Sequence,
                       tol: float = DEFAULT_TOL) -> FunctionVec:
    """Bump h = 1 - clamp(sum of tent bumps): 1 at the anchor, 0 on the closed
    set, values in [0,1], built from per-point separating functions.

    The empty closed set yields the constant 1. Raises
    SeparationInfeasibleError when some point of the set cannot be separated
    from the anchor inside the family.
    """
    x0 = fam.space.index(x0)
    idxs = sorted({fam.space.index(z) for z in closed_set})
    if x0 in idxs:
        raise ValueError("the closed set must not contain the anchor")
    n = fam.space.size
    if not idxs:
        return FunctionVec(fam.ones())
    tents = []
    seen = set()
    for z in idxs:
        fz = _separating_function(fam, x0, z, tol)
        key = tuple(fz)
        if key in seen:
            continue
        seen.add(key)
        tents.append(build_subbasic_bump(fam, x0, fz, eps=1, tol=tol).values)
    total = tents[0]
    for t_ in tents[1:]:
        total = total + t_
    if fam.exact:
        h = np.array([Fraction(1) - clamp(x) for x in total], dtype=object)
    else:
        h = 1.0 - clamp(np.asarray(total, dtype=float))
    _assert_bump_in_family(fam, h, tol)
    hv = np.asarray(h, dtype=float) if not fam.exact else h
    if fam.exact:
        if h[x0] != 1 or any(h[z] != 0 for z in idxs) or any(x < 0 or x > 1 for x in h):
            raise SeparationInfeasibleError("bump construction missed its contract")
    else:
        if (abs(hv[x0] - 1.0) > tol or np.any(np.abs(hv[idxs]) > tol)
                or np.any(hv < -tol) or np.any(hv > 1 + tol)):
            raise SeparationInfeasibleError("bump construction missed its contract")
    return FunctionVec(h)


def _separating_function(fam: FunctionFamily, x0: int, z: int, tol: float):
    """A span function with f(x0) = 1, f(z) = 0 (deterministic solution)."""
    if fam.exact:
        a = np.array([list(fam.generators[:, x0]), list(fam.generators[:, z])],
                     dtype=object)
        sol = _exact_particular(a, [Fraction(1), Fraction(0)])
        if sol is None:
            raise SeparationInfeasibleError(
                f"cannot separate {fam.space.labels[x0]} from {fam.space.labels[z]}")
        return fam.values(sol)
    a = np.asarray(fam.generators, dtype=float)[:, [x0, z]].T
    c, *_ = np.linalg.lstsq(a, np.array([1.0, 0.0]), rcond=None)
    if np.max(np.abs(a @ c - np.array([1.0, 0.0]))) > tol:
        raise SeparationInfeasibleError(
            f"cannot separate {fam.space.labels[x0]} from {fam.space.labels[z]}")
    return fam.values(c)


def _exact_particular(a, b):
    """Particular rational solution of a @ x = b (free variables zero)."""
    rows = [list(a[i]) + [b[i]] for i in range(a.shape[0])]
    rref, pivots = linalg._exact_rref(rows)
    k = a.shape[1]
    x = [Fraction(0)] * k
    for r, col in enumerate(pivots):
        if col == k:
            return None
        x[col] = rref[r][k]
    xv = np.array(x, dtype=object)
    chk = linalg.mat_vec(a, xv)
    for i in range(a.shape[0]):
        if chk[i] != b[i]:
            return None
    return xv


def _assert_bump_in_family(fam: FunctionFamily, h, tol: float):
    ok, _ = span_membership(fam, h, tol=max(tol, 10 * tol))
    if not ok:
        raise ValueError("bump left the family span; family is not clamp-invariant")
