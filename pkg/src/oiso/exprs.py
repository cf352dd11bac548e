"""Symbolic one-variable expressions for the clamp-closure example space.

Two nested hierarchies over span{1, t}: the clamped side composes with the
saturating sine ramp (0 below 0, sin(pi t / 2) on (0,1), 1 above 1) and the
analytic side composes with the plain sine ramp sin(pi t / 2). The two
profiles agree on [0,1], which is what the local-form certifier exploits: on a
small enough interval every clamped expression coincides with an analytic one,
found by interval-arithmetic bisection.

Note the clamp here is the sine-profile saturation, not the piecewise-linear
clamp of the adequacy module.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Expr",
    "Const",
    "Ident",
    "Clamp",
    "SinRamp",
    "LinComb",
    "sin_ramp",
    "clamped_sin_ramp",
    "eval_expr",
    "IntervalBox",
    "interval_eval",
    "separation_witness",
    "LocalForm",
    "local_form",
    "InconclusiveError",
    "decay_check",
    "DECAY_THRESHOLD",
    "parse_sexpr",
    "to_sexpr",
]

DECAY_THRESHOLD = 1e-6
MIN_INTERVAL_WIDTH = 1e-12


def sin_ramp(t):
    """sin(pi t / 2): odd, increasing on [-1, 1], fixes -1, 0, 1."""
    return np.sin(np.pi * np.asarray(t, dtype=float) / 2) if isinstance(
        t, np.ndarray) else math.sin(math.pi * t / 2)


def clamped_sin_ramp(t):
    """0 for t <= 0, sin(pi t / 2) on (0, 1), 1 for t >= 1."""
    if isinstance(t, np.ndarray):
        t = np.asarray(t, dtype=float)
        return np.where(t <= 0, 0.0, np.where(t >= 1, 1.0, np.sin(np.pi * t / 2)))
    if t <= 0:
        return 0.0
    if t >= 1:
        return 1.0
    return math.sin(math.pi * t / 2)


class Expr:
    """Base expression node; subclasses are frozen dataclasses."""

    __slots__ = ()

    @property
    def level(self) -> int:
        raise NotImplementedError

    @property
    def has_clamp(self) -> bool:
        raise NotImplementedError

    @property
    def has_sin_ramp(self) -> bool:
        raise NotImplementedError

    @property
    def is_analytic(self) -> bool:
        return not self.has_clamp


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))

    level = property(lambda self: 1)
    has_clamp = property(lambda self: False)
    has_sin_ramp = property(lambda self: False)


@dataclass(frozen=True)
class Ident(Expr):
    level = property(lambda self: 1)
    has_clamp = property(lambda self: False)
    has_sin_ramp = property(lambda self: False)


@dataclass(frozen=True)
class Clamp(Expr):
    child: Expr

    def __post_init__(self):
        if self.child.has_sin_ramp:
            raise ValueError("clamped-side expressions cannot contain analytic ramps")

    level = property(lambda self: self.child.level + 1)
    has_clamp = property(lambda self: True)
    has_sin_ramp = property(lambda self: False)


@dataclass(frozen=True)
class SinRamp(Expr):
    child: Expr

    def __post_init__(self):
        if self.child.has_clamp:
            raise ValueError("analytic expressions cannot contain clamps")

    level = property(lambda self: self.child.level + 1)
    has_clamp = property(lambda self: False)
    has_sin_ramp = property(lambda self: True)


@dataclass(frozen=True)
class LinComb(Expr):
    coeffs: tuple
    children: tuple

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        children = tuple(self.children)
        if len(coeffs) != len(children) or not children:
            raise ValueError("one coefficient per child required, at least one child")
        if any(not isinstance(ch, Expr) for ch in children):
            raise TypeError("children must be expressions")
        if any(ch.has_clamp for ch in children) and any(ch.has_sin_ramp for ch in children):
            raise ValueError("cannot mix clamped and analytic children")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "children", children)

    level = property(lambda self: max(ch.level for ch in self.children))
    has_clamp = property(lambda self: any(ch.has_clamp for ch in self.children))
    has_sin_ramp = property(lambda self: any(ch.has_sin_ramp for ch in self.children))


def eval_expr(e: Expr, t):
    """Evaluate at a scalar or numpy array of points."""
    if isinstance(e, Const):
        if isinstance(t, np.ndarray):
            return np.full_like(np.asarray(t, dtype=float), e.value)
        return e.value
    if isinstance(e, Ident):
        return np.asarray(t, dtype=float) if isinstance(t, np.ndarray) else float(t)
    if isinstance(e, Clamp):
        return clamped_sin_ramp(eval_expr(e.child, t))
    if isinstance(e, SinRamp):
        return sin_ramp(eval_expr(e.child, t))
    if isinstance(e, LinComb):
        acc = None
        for c, ch in zip(e.coeffs, e.children):
            term = c * eval_expr(ch, t)
            acc = term if acc is None else acc + term
        return acc
    raise TypeError(f"not an expression: {e!r}")


def _down(x: float, steps: int = 4) -> float:
    for _ in range(steps):
        x = math.nextafter(x, -math.inf)
    return x


def _up(x: float, steps: int = 4) -> float:
    for _ in range(steps):
        x = math.nextafter(x, math.inf)
    return x


@dataclass(frozen=True)
class IntervalBox:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
            raise ValueError(f"invalid interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def halves(self):
        m = self.midpoint
        return IntervalBox(self.lo, m), IntervalBox(m, self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def sample(self, count: int) -> np.ndarray:
        return np.linspace(self.lo, self.hi, count)


def interval_eval(e: Expr, box: IntervalBox) -> IntervalBox:
    """Sound enclosure of the range of e over the box.

    Monotone profiles are evaluated at the endpoints with outward widening for
    the float rounding; the analytic ramp falls back to its global range
    [-1, 1] when the child's box leaves the monotone window.
    """
    if isinstance(e, Const):
        return IntervalBox(e.value, e.value)
    if isinstance(e, Ident):
        return box
    if isinstance(e, Clamp):
        inner = interval_eval(e.child, box)
        # the saturation branches are exact; only the sine branch rounds
        lo = clamped_sin_ramp(inner.lo)
        if 0.0 < inner.lo < 1.0:
            lo = max(_down(lo), 0.0)
        hi = clamped_sin_ramp(inner.hi)
        if 0.0 < inner.hi < 1.0:
            hi = min(_up(hi), 1.0)
        return IntervalBox(lo, hi)
    if isinstance(e, SinRamp):
        inner = interval_eval(e.child, box)
        if -1.0 <= inner.lo and inner.hi <= 1.0:
            return IntervalBox(max(_down(sin_ramp(inner.lo)), -1.0),
                               min(_up(sin_ramp(inner.hi)), 1.0))
        return IntervalBox(-1.0, 1.0)
    if isinstance(e, LinComb):
        lo = 0.0
        hi = 0.0
        for c, ch in zip(e.coeffs, e.children):
            inner = interval_eval(ch, box)
            if c >= 0:
                lo += c * inner.lo
                hi += c * inner.hi
            else:
                lo += c * inner.hi
                hi += c * inner.lo
        if lo == hi:
            return IntervalBox(lo, hi)
        return IntervalBox(_down(lo), _up(hi))
    raise TypeError(f"not an expression: {e!r}")


def separation_witness(a: float, b: float) -> Expr:
    """Clamp of the ramp (t - a)/(b - a): 0 at or below a, 1 at or above b,
    strictly between on (a, b). Requires 0 <= a < b <= 1."""
    a, b = float(a), float(b)
    if not (0.0 <= a < b <= 1.0):
        raise ValueError("need 0 <= a < b <= 1")
    ramp = LinComb((-a / (b - a), 1.0 / (b - a)), (Const(1.0), Ident()))
    return Clamp(ramp)


class InconclusiveError(RuntimeError):
    """Bisection hit the depth cap before certifying a clamp case."""


@dataclass(frozen=True)
class LocalForm:
    interval: IntervalBox
    expr: Expr
    residual: float


def local_form(f: Expr, box: IntervalBox, depth_cap: int = 40,
               tol: float = 1e-10, check_points: int = 64) -> LocalForm:
    """Find a subinterval J of the box and an analytic expression equal to f on J.

    Each clamp node is resolved by bisecting (midpoint, left half first) until
    interval arithmetic certifies its argument's range is either entirely at
    or below 0 (clamp = 0), entirely at or above 1 (clamp = 1), or entirely
    inside (0,1), where the saturation equals the analytic ramp. Raises
    InconclusiveError past the depth cap. The result is verified pointwise on
    `check_points` samples before returning.
    """
    j, u = _local(f, box, depth_cap)
    ts = j.sample(check_points)
    residual = float(np.max(np.abs(eval_expr(f, ts) - eval_expr(u, ts))))
    if residual > tol:
        raise InconclusiveError(
            f"certified form disagrees with the input (residual {residual:.3e})")
    return LocalForm(interval=j, expr=u, residual=residual)


def _local(e: Expr, box: IntervalBox, depth_cap: int):
    if isinstance(e, (Const, Ident)):
        return box, e
    if isinstance(e, SinRamp):
        inner_box, inner = _local(e.child, box, depth_cap)
        return inner_box, SinRamp(inner)
    if isinstance(e, LinComb):
        cur = box
        parts = []
        for ch in e.children:
            cur, u = _local(ch, cur, depth_cap)
            parts.append(u)
        # earlier children were certified on larger intervals; shrinking is safe
        return cur, LinComb(e.coeffs, tuple(parts))
    if isinstance(e, Clamp):
        sub, case = _certify_clamp(e.child, box, depth_cap, 0)
        if case == "zero":
            return sub, Const(0.0)
        if case == "one":
            return sub, Const(1.0)
        inner_box, inner = _local(e.child, sub, depth_cap)
        return inner_box, SinRamp(inner)
    raise TypeError(f"not an expression: {e!r}")


def _certify_clamp(arg: Expr, box: IntervalBox, depth_cap: int, depth: int):
    env = interval_eval(arg, box)
    if env.hi <= 0.0:
        return box, "zero"
    if env.lo >= 1.0:
        return box, "one"
    if env.lo > 0.0 and env.hi < 1.0:
        return box, "inside"
    if depth >= depth_cap or box.width < 2 * MIN_INTERVAL_WIDTH:
        raise InconclusiveError(
            f"cannot certify saturation case on [{box.lo}, {box.hi}] at depth {depth}")
    left, right = box.halves()
    try:
        return _certify_clamp(arg, left, depth_cap, depth + 1)
    except InconclusiveError:
        return _certify_clamp(arg, right, depth_cap, depth + 1)


def decay_check(u: Expr, t_max: float = 1e6, grid: int = 257) -> bool:
    """Grid form of the quadratic-decay law: |u(t)| / t^2 on a log-spaced grid
    up to t_max must be eventually below DECAY_THRESHOLD and the last decade's
    maximum must not exceed the previous decade's (envelope decrease; the
    pointwise values oscillate for any expression with a sine term)."""
    t_max = float(t_max)
    if t_max < 100:
        raise ValueError("t_max must cover at least two decades")
    if grid < 16:
        raise ValueError("grid too coarse")
    ts = np.logspace(0.0, math.log10(t_max), grid)
    vals = np.abs(eval_expr(u, ts)) / ts**2
    if vals[-1] >= DECAY_THRESHOLD:
        return False
    last = ts >= t_max / 10
    prev = (ts >= t_max / 100) & ~last
    if not last.any() or not prev.any():  # pragma: no cover - guarded by t_max check
        raise ValueError("grid too coarse for a decade comparison")
    return bool(np.max(vals[last]) <= np.max(vals[prev]) + 1e-18)


def parse_sexpr(text: str) -> Expr:
    """Grammar: (const c) | t | (clamp e) | (sinramp e) |
    (lin (c0 c1 ...) (e1 e2 ...))."""
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of expression")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            head = tokens[pos]
            pos += 1
            if head == "const":
                val = float(tokens[pos]); pos += 1
                node = Const(val)
            elif head == "clamp":
                node = Clamp(read())
            elif head == "sinramp":
                node = SinRamp(read())
            elif head == "lin":
                if tokens[pos] != "(":
                    raise ValueError("lin expects a coefficient list")
                pos += 1
                coeffs = []
                while tokens[pos] != ")":
                    coeffs.append(float(tokens[pos])); pos += 1
                pos += 1
                if tokens[pos] != "(":
                    raise ValueError("lin expects a child list")
                pos += 1
                children = []
                while tokens[pos] != ")":
                    children.append(read())
                pos += 1
                node = LinComb(tuple(coeffs), tuple(children))
            else:
                raise ValueError(f"unknown form {head!r}")
            if tokens[pos] != ")":
                raise ValueError("missing closing parenthesis")
            pos += 1
            return node
        if tok == "t":
            return Ident()
        raise ValueError(f"unexpected token {tok!r}")

    try:
        node = read()
    except IndexError:
        raise ValueError("unexpected end of expression") from None
    if pos != len(tokens):
        raise ValueError("trailing tokens after expression")
    return node


def to_sexpr(e: Expr) -> str:
    if isinstance(e, Const):
        return f"(const {e.value!r})"
    if isinstance(e, Ident):
        return "t"
    if isinstance(e, Clamp):
        return f"(clamp {to_sexpr(e.child)})"
    if isinstance(e, SinRamp):
        return f"(sinramp {to_sexpr(e.child)})"
    if isinstance(e, LinComb):
        cs = " ".join(repr(c) for c in e.coeffs)
        chs = " ".join(to_sexpr(ch) for ch in e.children)
        return f"(lin ({cs}) ({chs}))"
    raise TypeError(f"not an expression: {e!r}")
