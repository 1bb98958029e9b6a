"""Single eigenvalue branch per fiber: regular values and the density of states.

Fiber ``m`` carries one eigenvalue ``E(m)`` with projection ``P_m``. For a
regular value ``lam`` the preimages ``m_i`` of ``lam`` are finite and the
density of states is

    sum_i <P_{m_i} f_{m_i}, g_{m_i}> / |E'(m_i)|.

Branches are piecewise polynomials on ``[0, 1]``; root isolation is exact up
to bisection tolerance because every piece splits into monotone runs at the
real roots of its derivative.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from ._quad import panel_rule, richardson
from .core import DomainError, ParameterError

_ROOT_TOL = 1e-14
_DERIV_TOL = 1e-12
_ORACLE_ORDER = 16


class EmbeddedEigenvalueError(DomainError):
    """``lam`` is the value of the branch on a set of positive measure: an eigenvalue of ``A``."""


# --------------------------------------------------------------------------- #
# Branch expressions
# --------------------------------------------------------------------------- #

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|(m)|(\*\*|[-+*^()]))")


def _tokenize(text: str):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt or mt.end() == pos:
            raise ParameterError(f"cannot parse branch expression at {text[pos:]!r}")
        num, var, op = mt.groups()
        out.append(("num", float(num)) if num else ("m", None) if var else ("op", "^" if op == "**" else op))
        pos = mt.end()
    return out


class _Parser:
    """expr := term (('+'|'-') term)* ; term := unary ('*' unary)* ;
    unary := ('+'|'-') unary | power ; power := atom ('^' integer)? ;
    atom := number | 'm' | '(' expr ')'"""

    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, op=None):
        tok = self.peek()
        if op is not None and tok != ("op", op):
            raise ParameterError(f"expected {op!r} in branch expression")
        self.i += 1
        return tok

    def parse(self) -> Polynomial:
        poly = self.expr()
        if self.i != len(self.toks):
            raise ParameterError("trailing input in branch expression")
        return poly

    def expr(self):
        poly = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            sign = self.take()[1]
            rhs = self.term()
            poly = poly + rhs if sign == "+" else poly - rhs
        return poly

    def term(self):
        poly = self.unary()
        while self.peek() == ("op", "*"):
            self.take()
            poly = poly * self.unary()
        return poly

    def unary(self):
        if self.peek() in (("op", "+"), ("op", "-")):
            sign = self.take()[1]
            inner = self.unary()
            return inner if sign == "+" else -inner
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num" or val != int(val) or val < 0:
                raise ParameterError("exponents must be nonnegative integers")
            base = base ** int(val)
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return Polynomial([val])
        if kind == "m":
            return Polynomial([0.0, 1.0])
        if (kind, val) == ("op", "("):
            poly = self.expr()
            self.take(")")
            return poly
        raise ParameterError("unexpected token in branch expression")


def parse_branch(text: str) -> Polynomial:
    """Polynomial in ``m`` from a small grammar: numbers, ``m``, ``+ - *``, integer powers, parentheses.

    >>> parse_branch("(m-0.5)^2").coef.tolist()
    [0.25, -1.0, 1.0]
    """
    return _Parser(text).parse()


# --------------------------------------------------------------------------- #
# Branches
# --------------------------------------------------------------------------- #

@dataclass(frozen=True, eq=False)
class EnergyBranch:
    """C^1 piecewise-polynomial eigenvalue branch on ``[0, 1]``.

    Parameters
    ----------
    breaks : sequence of float
        ``0 = b_0 < ... < b_n = 1``.
    pieces : sequence of Polynomial
        ``pieces[i]`` is the branch on ``[b_i, b_{i+1}]``.
    window : (a, b), optional
        Energy window containing the range; defaults to the range itself.
    """

    breaks: tuple
    pieces: tuple
    window: tuple | None = None
    constant_segments: tuple = field(init=False, default=())

    def __post_init__(self):
        breaks = tuple(float(b) for b in self.breaks)
        pieces = tuple(Polynomial(p) if not isinstance(p, Polynomial) else p for p in self.pieces)
        if len(pieces) != len(breaks) - 1 or len(pieces) < 1:
            raise ParameterError("need one polynomial piece per break interval")
        if breaks[0] != 0.0 or breaks[-1] != 1.0 or any(b <= a for a, b in zip(breaks, breaks[1:])):
            raise ParameterError("breaks must increase from 0 to 1")
        for x, left, right in zip(breaks[1:-1], pieces[:-1], pieces[1:]):
            scale = 1.0 + abs(left(x))
            if abs(left(x) - right(x)) > 1e-10 * scale:
                raise ParameterError(f"branch is discontinuous at m = {x}")
            if abs(left.deriv()(x) - right.deriv()(x)) > 1e-8 * (1.0 + abs(left.deriv()(x))):
                raise ParameterError(f"branch derivative jumps at m = {x}: not C^1")
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "pieces", pieces)
        consts = []
        for (a, b), p in zip(zip(breaks, breaks[1:]), pieces):
            if np.all(np.abs(p.deriv().coef) <= _DERIV_TOL):
                consts.append((a, b, float(p(a))))
        object.__setattr__(self, "constant_segments", tuple(consts))
        lo, hi = self.range()
        if self.window is None:
            object.__setattr__(self, "window", (lo, hi))
        else:
            a, b = (float(v) for v in self.window)
            if not (a < b):
                raise ParameterError("energy window must be a nonempty interval")
            if lo < a - 1e-12 or hi > b + 1e-12:
                raise ParameterError(f"branch range [{lo}, {hi}] leaves the window ({a}, {b})")
            object.__setattr__(self, "window", (a, b))

    @classmethod
    def polynomial(cls, poly, window=None) -> "EnergyBranch":
        if isinstance(poly, str):
            poly = parse_branch(poly)
        if not isinstance(poly, Polynomial):
            poly = Polynomial(poly)
        return cls((0.0, 1.0), (poly,), window)

    @classmethod
    def linear(cls, a: float, b: float) -> "EnergyBranch":
        """``E(m) = a + (b - a) m`` on the window ``(a, b)``."""
        return cls.polynomial(Polynomial([a, b - a]), (min(a, b), max(a, b)))

    def _piece_index(self, m):
        idx = np.searchsorted(self.breaks, m, side="right") - 1
        return np.clip(idx, 0, len(self.pieces) - 1)

    def __call__(self, m):
        m = np.asarray(m, dtype=float)
        if np.any(m < 0) or np.any(m > 1):
            raise DomainError("branch is defined on [0, 1]")
        idx = self._piece_index(m)
        out = np.empty(m.shape)
        for i, p in enumerate(self.pieces):
            sel = idx == i
            out[sel] = p(m[sel])
        return out

    def derivative(self, m):
        m = np.asarray(m, dtype=float)
        idx = self._piece_index(m)
        out = np.empty(m.shape)
        for i, p in enumerate(self.pieces):
            sel = idx == i
            out[sel] = p.deriv()(m[sel])
        return out

    def monotone_runs(self):
        """``(lo, hi, piece)`` subintervals on which the branch is strictly monotone or constant."""
        runs = []
        for (a, b), p in zip(zip(self.breaks, self.breaks[1:]), self.pieces):
            cuts = [a, b]
            dp = p.deriv()
            if np.any(np.abs(dp.coef) > _DERIV_TOL):
                for r in dp.roots():
                    if abs(r.imag) < 1e-12 and a < r.real < b:
                        cuts.append(float(r.real))
            cuts = sorted(set(cuts))
            runs.extend((lo, hi, p) for lo, hi in zip(cuts, cuts[1:]))
        return runs

    def critical_points(self):
        """Interior and end points where ``E' = 0``, as ``(m, E(m))``."""
        pts = []
        for lo, hi, p in self.monotone_runs():
            for x in (lo, hi):
                if abs(p.deriv()(x)) <= _DERIV_TOL and not any(abs(x - q) < 1e-12 for q, _ in pts):
                    pts.append((x, float(p(x))))
        return pts

    def range(self):
        vals = [float(p(x)) for lo, hi, p in self.monotone_runs() for x in (lo, hi)]
        return min(vals), max(vals)

    def event_values(self):
        """Critical values, range endpoints and constant-segment values."""
        lo, hi = self.range()
        ev = {lo, hi}
        ev.update(v for _, v in self.critical_points())
        ev.update(v for _, _, v in self.constant_segments)
        return sorted(ev)


def preimages(branch: EnergyBranch, lam: float) -> list[tuple[float, float]]:
    """All ``(m_i, E'(m_i))`` with ``E(m_i) = lam``, sorted by ``m``.

    Raises
    ------
    EmbeddedEigenvalueError
        If the branch equals ``lam`` on a segment of positive length.
    """
    lam = float(lam)
    for a, b, v in branch.constant_segments:
        if abs(v - lam) <= 1e-12 * (1.0 + abs(v)):
            raise EmbeddedEigenvalueError(
                f"lambda = {lam} is an embedded eigenvalue: the branch is constant on [{a}, {b}]"
            )
    roots = []
    for lo, hi, p in branch.monotone_runs():
        fa, fb = p(lo) - lam, p(hi) - lam
        if fa == 0.0:
            x = lo
        elif fb == 0.0:
            x = hi
        elif fa * fb < 0:
            x = brentq(lambda t: p(t) - lam, lo, hi, xtol=_ROOT_TOL, rtol=4 * np.finfo(float).eps)
        else:
            continue
        if not any(abs(x - r) < 1e-12 for r in roots):
            roots.append(float(x))
    roots.sort()
    return [(r, float(branch.derivative(r))) for r in roots]


def _nonregular_reason(branch: EnergyBranch, lam: float) -> str | None:
    a, b = branch.window
    if not a <= lam <= b:
        return f"lambda = {lam} lies outside the energy window ({a}, {b})"
    try:
        pre = preimages(branch, lam)
    except EmbeddedEigenvalueError as exc:
        return str(exc)
    for m, d in pre:
        if abs(d) <= _DERIV_TOL:
            return f"lambda = {lam} is a critical value: E'({m:.12g}) = 0"
    lo, hi = branch.range()
    if lam in (lo, hi) or min(abs(lam - lo), abs(lam - hi)) <= 1e-14 * (1 + abs(lam)):
        return f"lambda = {lam} is a critical value: it bounds the range [{lo:.12g}, {hi:.12g}] of the branch"
    return None


def is_regular(branch: EnergyBranch, lam: float) -> bool:
    """Every preimage has ``E' != 0`` and ``lam`` is not an endpoint of the range."""
    return _nonregular_reason(branch, float(lam)) is None


def _products(fiber_products, m):
    if fiber_products is None:
        return np.ones(np.shape(m), dtype=complex)
    if np.isscalar(fiber_products):
        return np.full(np.shape(m), complex(fiber_products))
    return np.asarray(fiber_products(np.asarray(m, dtype=float)), dtype=complex)


def dos_toy(branch: EnergyBranch, lam: float, fiber_products=None) -> complex:
    """``sum_i <P f, g>(m_i) / |E'(m_i)|`` at a regular value.

    ``fiber_products`` is a vectorised ``m -> <P_m f_m, g_m>`` (or a
    constant); the default is 1. A preimage at ``m = 0`` or ``m = 1`` counts
    with full weight.

    Raises
    ------
    DomainError
        If ``lam`` is not a regular value; the message names the critical value.
    """
    reason = _nonregular_reason(branch, float(lam))
    if reason is not None:
        raise DomainError(reason)
    pre = preimages(branch, lam)
    if not pre:
        return 0j
    m = np.array([x for x, _ in pre])
    d = np.abs([dx for _, dx in pre])
    return complex(np.sum(_products(fiber_products, m) / d))


@dataclass(frozen=True)
class ToyOracleResult:
    value: complex
    error: float
    flagged: bool
    reason: str = ""
    h_values: np.ndarray = field(repr=False, default=None)


def _level_set_integral(branch, lam, h, fiber_products):
    """``int_{lam < E(m) <= lam + h} <P f, g>(m) dm`` over the monotone runs."""
    total = 0j
    for lo, hi, p in branch.monotone_runs():
        ea, eb = p(lo), p(hi)
        if ea == eb:
            continue
        emin, emax = min(ea, eb), max(ea, eb)
        e1, e2 = max(lam, emin), min(lam + h, emax)
        if e2 <= e1:
            continue

        def inv(e):
            if e <= emin:
                return lo if ea == emin else hi
            if e >= emax:
                return hi if eb == emax else lo
            return brentq(lambda t: p(t) - e, lo, hi, xtol=_ROOT_TOL, rtol=4 * np.finfo(float).eps)

        x1, x2 = sorted((inv(e1), inv(e2)))
        nodes, weights = panel_rule(np.array([x1, x2]), _ORACLE_ORDER)
        total += np.sum(weights * _products(fiber_products, nodes))
    return total


def dos_toy_oracle(branch: EnergyBranch, lam: float, fiber_products=None, h=None, *,
                   levels: int = 7, tol: float = 1e-9) -> ToyOracleResult:
    """``lim (1/h) int_{lam < E <= lam + h} <P f, g> dm`` by quadrature and Richardson extrapolation.

    ``h`` is the largest step; by default a quarter of the distance from
    ``lam`` to the nearest critical value, range endpoint or window edge.
    Results are flagged, not rejected, when that distance is tiny, when a
    preimage sits at ``m = 0`` or ``m = 1`` (the one-sided quotient then
    misses the full-weight boundary term) or when the extrapolation has not
    settled.
    """
    lam = float(lam)
    a, b = branch.window
    events = list(branch.event_values()) + [a, b]
    dist = min(abs(lam - e) for e in events)
    reasons = []
    if h is None:
        h = 0.25 * dist if dist > 0 else 1e-3
    if lam + h > b:
        raise DomainError(f"lambda + h = {lam + h} leaves the energy window ({a}, {b})")
    if dist < 1e-3:
        reasons.append(f"within {dist:.2e} of a critical value or range endpoint")
    try:
        if any(m in (0.0, 1.0) for m, _ in preimages(branch, lam)):
            reasons.append("preimage on the boundary of [0, 1]")
    except EmbeddedEigenvalueError as exc:
        reasons.append(str(exc))
    hs = h * 2.0 ** -np.arange(levels)
    vals = np.array([_level_set_integral(branch, lam, hj, fiber_products) / hj for hj in hs])
    value, err, _ = richardson(vals)
    if err > 10.0 * tol * (1.0 + abs(value)):
        reasons.append(f"extrapolation error {err:.2e}")
    return ToyOracleResult(complex(value), err, bool(reasons), "; ".join(reasons), hs)
