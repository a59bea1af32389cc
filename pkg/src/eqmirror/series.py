"""Truncated multivariate q-series over the exact coefficient tower.

A :class:`QSeries` stores terms keyed by ``(degrees, log_exponents)``: the
monomial ``prod_i q_i^{d_i} * prod_i (log q_i)^{L_i}`` with a
:class:`~eqmirror.exact_core.RingElem` coefficient.  Degrees are truncated to
a rectangular box; log exponents are never truncated (they stay small, they
come from mirror maps and their squares).

A series may be flagged ``prefactor=True``, meaning it represents

    exp(sum_i p_i log q_i / hbar) * (stored terms).

The flag changes nothing about ring arithmetic, but logarithmic derivatives
must account for the prefactor: ``theta_weighted`` implements
``hbar q_i d/dq_i`` acting through it, picking up ``p_i + d_i hbar`` on a
degree-d term.  Plain ``theta`` (``q_i d/dq_i`` with ``theta log q_i = 1``)
is only legal on unflagged series, and exp/log/invert/subs refuse flagged
input so the prefactor can never be silently duplicated or dropped.
"""

from __future__ import annotations

import itertools
import math
import numbers
from dataclasses import dataclass

from .exact_core import (
    CoeffRing,
    CohomAlgebra,
    CoefficientError,
    RingElem,
    elem_invert,
    rat,
)

__all__ = [
    "QSeries",
    "RationalFunctionQ",
    "SeriesError",
    "SeriesRing",
    "polylog_series",
    "scalar_coeff_ring",
    "series_reversion",
]

_R0 = rat(0)
_R1 = rat(1)


class SeriesError(ValueError):
    """Raised on invalid series operations (shape, leading term, reversion)."""


def scalar_coeff_ring(hbar_min: int = 0, hbar_max: int = 0) -> CoeffRing:
    """Coefficient tower with trivial cohomology and no weight variables."""
    algebra = CohomAlgebra((), ((),), {(0, 0): ((0, _R1),)}, 0)
    return CoeffRing(algebra, (), (), hbar_min, hbar_max)


@dataclass(frozen=True)
class SeriesRing:
    """Variable names plus a rectangular degree box over a coefficient ring."""

    coeff: CoeffRing
    variables: tuple
    box: tuple

    def __post_init__(self):
        if len(self.variables) != len(self.box):
            raise SeriesError("one degree bound per variable is required")
        if any(b < 0 for b in self.box):
            raise SeriesError("degree bounds must be non-negative")

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def zero_key(self):
        z = (0,) * self.nvars
        return (z, z)

    def zero(self) -> "QSeries":
        return QSeries(self, {})

    def one(self) -> "QSeries":
        return QSeries(self, {self.zero_key(): self.coeff.one()})

    def monomial(self, degs, logs=None, coeff=1) -> "QSeries":
        degs = tuple(degs)
        logs = (0,) * self.nvars if logs is None else tuple(logs)
        if not isinstance(coeff, RingElem):
            coeff = self.coeff.scalar(coeff)
        return QSeries(self, {(degs, logs): coeff})

    def variable(self, i) -> "QSeries":
        if not isinstance(i, int):
            i = self.variables.index(i)
        degs = tuple(1 if j == i else 0 for j in range(self.nvars))
        return self.monomial(degs)

    def log_variable(self, i) -> "QSeries":
        if not isinstance(i, int):
            i = self.variables.index(i)
        logs = tuple(1 if j == i else 0 for j in range(self.nvars))
        return self.monomial((0,) * self.nvars, logs)

    def from_rational_terms(self, terms: dict) -> "QSeries":
        """Build a series from ``{degs: rational}`` (log-free scalar data)."""
        data = {}
        z = (0,) * self.nvars
        for degs, c in terms.items():
            data[(tuple(degs), z)] = self.coeff.scalar(c)
        return QSeries(self, data)

    def with_coeff(self, coeff: CoeffRing) -> "SeriesRing":
        return SeriesRing(coeff, self.variables, self.box)

    def degree_keys(self):
        """All degree tuples inside the box, in graded order."""
        keys = itertools.product(*(range(b + 1) for b in self.box))
        return sorted(keys, key=lambda d: (sum(d), d))


class QSeries:
    """Immutable truncated series; see module docstring for key semantics."""

    __slots__ = ("sring", "data", "prefactor")

    def __init__(self, sring: SeriesRing, data: dict, prefactor: bool = False):
        box = sring.box
        kept = {}
        for (degs, logs), c in data.items():
            if not isinstance(c, RingElem):
                c = sring.coeff.scalar(c)
            elif c.ring is not sring.coeff:
                c = sring.coeff.convert(c)
            if c.is_zero():
                continue
            if any(d > b for d, b in zip(degs, box)):
                continue
            kept[(degs, logs)] = c
        object.__setattr__(self, "sring", sring)
        object.__setattr__(self, "data", kept)
        object.__setattr__(self, "prefactor", prefactor)

    def __setattr__(self, *args):
        raise AttributeError("QSeries is immutable")

    # -- basic protocol ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.data

    def __bool__(self) -> bool:
        return bool(self.data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QSeries):
            return NotImplemented
        return (
            self.sring == other.sring
            and self.prefactor == other.prefactor
            and self.data == other.data
        )

    def __hash__(self):
        raise TypeError("QSeries is not hashable")

    def __repr__(self) -> str:
        if not self.data:
            return "0"
        names = self.sring.variables
        bits = []
        for (degs, logs), c in sorted(self.data.items(), key=lambda kv: (sum(kv[0][0]), kv[0])):
            factors = [f"({c!r})"]
            for n, d in zip(names, degs):
                if d == 1:
                    factors.append(n)
                elif d > 1:
                    factors.append(f"{n}^{d}")
            for n, e in zip(names, logs):
                if e == 1:
                    factors.append(f"log({n})")
                elif e > 1:
                    factors.append(f"log({n})^{e}")
            bits.append("*".join(factors))
        body = " + ".join(bits)
        return f"prefactor*[{body}]" if self.prefactor else body

    def with_prefactor(self, flag: bool) -> "QSeries":
        return QSeries(self.sring, self.data, flag)

    # -- arithmetic -----------------------------------------------------------

    def _compat(self, other: "QSeries"):
        if self.sring != other.sring:
            raise SeriesError("mixed series rings in arithmetic")

    def __add__(self, other):
        if isinstance(other, numbers.Rational):
            other = self.sring.monomial((0,) * self.sring.nvars, coeff=other)
        if not isinstance(other, QSeries):
            return NotImplemented
        self._compat(other)
        if self.prefactor != other.prefactor and self.data and other.data:
            raise SeriesError("cannot add prefactor and plain series")
        out = dict(self.data)
        for k, c in other.data.items():
            nc = out.get(k)
            nc = c if nc is None else nc + c
            if nc.is_zero():
                out.pop(k, None)
            else:
                out[k] = nc
        return QSeries(self.sring, out, self.prefactor or other.prefactor)

    __radd__ = __add__

    def __neg__(self):
        return QSeries(self.sring, {k: -c for k, c in self.data.items()}, self.prefactor)

    def __sub__(self, other):
        if isinstance(other, numbers.Rational):
            other = self.sring.monomial((0,) * self.sring.nvars, coeff=other)
        if not isinstance(other, QSeries):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (numbers.Rational, RingElem)):
            return self.map_coefficients(lambda c: c * other)
        if not isinstance(other, QSeries):
            return NotImplemented
        self._compat(other)
        if self.prefactor and other.prefactor:
            raise SeriesError("product would duplicate the series prefactor")
        box = self.sring.box
        out = {}
        for (d1, l1), c1 in self.data.items():
            for (d2, l2), c2 in other.data.items():
                degs = tuple(a + b for a, b in zip(d1, d2))
                if any(d > b for d, b in zip(degs, box)):
                    continue
                logs = tuple(a + b for a, b in zip(l1, l2))
                key = (degs, logs)
                c = c1 * c2
                nc = out.get(key)
                nc = c if nc is None else nc + c
                if nc.is_zero():
                    out.pop(key, None)
                else:
                    out[key] = nc
        return QSeries(self.sring, out, self.prefactor or other.prefactor)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise SeriesError("negative series powers go through invert()")
        result = self.sring.one()
        for _ in range(n):
            result = result * self
        return result

    def map_coefficients(self, f) -> "QSeries":
        out = {}
        for k, c in self.data.items():
            nc = f(c)
            if not nc.is_zero():
                out[k] = nc
        return QSeries(self.sring, out, self.prefactor)

    # -- access ----------------------------------------------------------------

    def coefficient(self, degs, logs=None) -> RingElem:
        logs = (0,) * self.sring.nvars if logs is None else tuple(logs)
        return self.data.get((tuple(degs), logs), self.sring.coeff.zero())

    def constant_term(self) -> RingElem:
        return self.coefficient((0,) * self.sring.nvars)

    def has_logs(self) -> bool:
        return any(any(logs) for (_, logs) in self.data)

    def rational_items(self):
        """Iterate ``((degs, logs), rational)``; fails on non-scalar values."""
        for k, c in sorted(self.data.items()):
            yield k, c.scalar_value()

    def truncated(self) -> bool:
        return any(c.truncated for c in self.data.values())

    # -- hbar structure ----------------------------------------------------------

    def hbar_slice(self, h: int) -> "QSeries":
        """Series of hbar^h coefficients (the prefactor flag is dropped)."""
        out = {}
        for k, c in self.data.items():
            sub = c.hbar_coefficient(h)
            if not sub.is_zero():
                out[k] = sub
        return QSeries(self.sring, out, False)

    def hbar_range(self):
        lo, hi = 0, 0
        for c in self.data.values():
            a, b = c.hbar_range()
            lo, hi = min(lo, a), max(hi, b)
        return lo, hi

    # -- logarithmic derivatives ---------------------------------------------

    def theta(self, i: int) -> "QSeries":
        """q_i d/dq_i with theta(log q_i) = 1; plain series only."""
        if self.prefactor:
            raise SeriesError("plain theta on a prefactor series loses terms")
        out = {}

        def accumulate(key, c):
            if c.is_zero():
                return
            prev = out.get(key)
            prev = c if prev is None else prev + c
            if prev.is_zero():
                out.pop(key, None)
            else:
                out[key] = prev

        for (degs, logs), c in self.data.items():
            if degs[i]:
                accumulate((degs, logs), c * rat(degs[i]))
            if logs[i]:
                lowered = tuple(e - (1 if j == i else 0) for j, e in enumerate(logs))
                accumulate((degs, lowered), c * rat(logs[i]))
        return QSeries(self.sring, out)

    def theta_weighted(self, i: int) -> "QSeries":
        """hbar q_i d/dq_i through the prefactor: (p_i + d_i hbar) on degree d."""
        if not self.prefactor:
            raise SeriesError("weighted theta requires a prefactor series")
        ring = self.sring.coeff
        gens = ring.algebra.generators
        p_i = ring.p(gens[i])
        hb = ring.hbar()
        out = {}

        def accumulate(key, c):
            if c.is_zero():
                return
            prev = out.get(key)
            prev = c if prev is None else prev + c
            if prev.is_zero():
                out.pop(key, None)
            else:
                out[key] = prev

        for (degs, logs), c in self.data.items():
            accumulate((degs, logs), c * (p_i + hb * rat(degs[i])))
            if logs[i]:
                lowered = tuple(e - (1 if j == i else 0) for j, e in enumerate(logs))
                accumulate((degs, lowered), c * hb * rat(logs[i]))
        return QSeries(self.sring, out, True)

    # -- analytic operations ----------------------------------------------------

    def _require_plain(self, op: str):
        if self.prefactor:
            raise SeriesError(f"{op} is undefined for prefactor series")

    def exp(self) -> "QSeries":
        self._require_plain("exp")
        z = (0,) * self.sring.nvars
        if any(degs == z for (degs, _) in self.data):
            raise SeriesError("exp requires vanishing constant term")
        total = self.sring.one()
        term = self.sring.one()
        for n in range(1, sum(self.sring.box) + 1):
            term = term * self * rat(1, n)
            if term.is_zero():
                break
            total = total + term
        return total

    def log(self) -> "QSeries":
        self._require_plain("log")
        z = (0,) * self.sring.nvars
        lead = self.data.get((z, z))
        if lead is None or lead != self.sring.coeff.one():
            raise SeriesError("log requires constant term exactly 1")
        if any(degs == z and logs != z for (degs, logs) in self.data):
            raise SeriesError("log requires a log-free unit constant term")
        v = self - self.sring.one()
        total = self.sring.zero()
        term = self.sring.one()
        for n in range(1, sum(self.sring.box) + 1):
            term = term * v
            if term.is_zero():
                break
            total = total + term * rat((-1) ** (n + 1), n)
        return total

    def invert(self) -> "QSeries":
        self._require_plain("invert")
        z = (0,) * self.sring.nvars
        lead = self.data.get((z, z))
        if lead is None:
            raise SeriesError("inverse requires an invertible constant term")
        if any(degs == z and logs != z for (degs, logs) in self.data):
            raise SeriesError("inverse requires a log-free constant term")
        lead_inv = elem_invert(lead)
        v = (self - QSeries(self.sring, {(z, z): lead})) * lead_inv
        total = self.sring.one()
        term = self.sring.one()
        for n in range(1, sum(self.sring.box) + 1):
            term = term * v * rat(-1)
            if term.is_zero():
                break
            total = total + term
        return total * lead_inv

    # -- substitution -------------------------------------------------------------

    def subs(self, images) -> "QSeries":
        """Substitute q_i -> images[i], each of the shape x_i * (1 + O(x)).

        Log-slot keys transform as log q_i -> log x_i + log U_i where
        U_i = images[i] / x_i.  The result lives in the ring of the images.
        """
        self._require_plain("substitution")
        images = tuple(images)
        if len(images) != self.sring.nvars:
            raise SeriesError("one image per variable is required")
        target = images[0].sring
        nv = target.nvars
        if nv != self.sring.nvars:
            raise SeriesError("substitution must preserve the variable count")
        z = (0,) * nv

        units = []
        for i, img in enumerate(images):
            if img.sring != target or img.prefactor or img.has_logs():
                raise SeriesError("images must be plain log-free series in one ring")
            shifted = {}
            for (degs, logs), c in img.data.items():
                if degs[i] < 1:
                    raise SeriesError(
                        f"image of variable {self.sring.variables[i]} is not divisible by it"
                    )
                shifted[(tuple(d - (1 if j == i else 0) for j, d in enumerate(degs)), logs)] = c
            unit = QSeries(target, shifted)
            if unit.constant_term() != target.coeff.one():
                raise SeriesError("images must have unit leading coefficient")
            units.append(unit)

        max_deg = [0] * nv
        max_log = [0] * nv
        for degs, logs in self.data:
            for i in range(nv):
                max_deg[i] = max(max_deg[i], degs[i])
                max_log[i] = max(max_log[i], logs[i])

        unit_pows = []
        for i, u in enumerate(units):
            pows = [target.one()]
            for _ in range(max_deg[i]):
                pows.append(pows[-1] * u)
            unit_pows.append(pows)
        logu_pows = []
        for i, u in enumerate(units):
            pows = [target.one()]
            if max_log[i]:
                lu = u.log()
                for _ in range(max_log[i]):
                    pows.append(pows[-1] * lu)
            logu_pows.append(pows)

        total = target.zero()
        for (degs, logs), c in self.data.items():
            term = target.monomial(degs, coeff=c)
            for i in range(nv):
                if degs[i]:
                    term = term * unit_pows[i][degs[i]]
            for i in range(nv):
                if logs[i]:
                    expanded = target.zero()
                    for a in range(logs[i] + 1):
                        logx = tuple(a if j == i else 0 for j in range(nv))
                        expanded = expanded + target.monomial(
                            z, logx, rat(math.comb(logs[i], a))
                        ) * logu_pows[i][logs[i] - a]
                    term = term * expanded
            total = total + term
        return total


# ---------------------------------------------------------------------------
# reversion of mirror-type coordinate changes
# ---------------------------------------------------------------------------


def series_reversion(gs, sring: SeriesRing):
    """Solve log q_i + g_i(q) = log x_i for q_i(x) = x_i exp(-g_i(q(x))).

    ``gs`` are the correction series (no constant term, no logs).  Returns
    the tuple of inverted coordinates in ``sring`` (whose variables are read
    as the flat coordinates x).  The round trip is verified exactly inside
    the degree box and a failure raises :class:`SeriesError`.
    """
    gs = tuple(gs)
    nv = sring.nvars
    if len(gs) != nv:
        raise SeriesError("one correction series per variable is required")
    z = (0,) * nv
    for g in gs:
        if g.prefactor or g.has_logs():
            raise SeriesError("corrections must be plain log-free series")
        if any(degs == z for (degs, _) in g.data):
            raise SeriesError("corrections must have no constant term")

    current = tuple(sring.variable(i) for i in range(nv))
    for _ in range(sum(sring.box) + 1):
        current = tuple(
            sring.variable(i) * (-(gs[i].subs(current))).exp() for i in range(nv)
        )

    # Round trip through the forward map x_i(q) = q_i exp(g_i(q)).  Composing
    # in this direction only raises degrees, so the identity is exact in the
    # rectangular box (the backward composition is not: log(q_i(x)/x_i) at
    # top degree would need coefficients beyond it).
    forward = tuple(sring.variable(i) * gs[i].exp() for i in range(nv))
    for i in range(nv):
        if not (current[i].subs(forward) - sring.variable(i)).is_zero():
            raise SeriesError("coordinate reversion failed its round-trip check")
    return current


def polylog_series(sring: SeriesRing, weight: int, beta, coeff=1) -> QSeries:
    """Truncation of ``coeff * Li_weight(q^beta)`` inside the ring's box."""
    beta = tuple(beta)
    if len(beta) != sring.nvars or all(b == 0 for b in beta) or any(b < 0 for b in beta):
        raise SeriesError("polylog direction must be a nonzero non-negative tuple")
    bound = min(
        (box // b for box, b in zip(sring.box, beta) if b),
        default=0,
    )
    terms = {}
    c = rat(coeff)
    for m in range(1, bound + 1):
        terms[tuple(m * b for b in beta)] = c / rat(m) ** weight
    return sring.from_rational_terms(terms)


# ---------------------------------------------------------------------------
# univariate rational functions with exact q-expansions
# ---------------------------------------------------------------------------


def _poly_trim(t):
    t = list(t)
    while t and t[-1] == 0:
        t.pop()
    return tuple(t)


def _poly_mul1(a, b):
    if not a or not b:
        return ()
    out = [_R0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _poly_trim(out)


class RationalFunctionQ:
    """num(q)/den(q) with exact rational coefficients, den(0) != 0."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=(1,)):
        num = _poly_trim(rat(c) for c in num)
        den = _poly_trim(rat(c) for c in den)
        if not den or den[0] == 0:
            raise SeriesError("denominator must be a unit at q = 0")
        self.num, self.den = num, den

    @classmethod
    def constant(cls, c) -> "RationalFunctionQ":
        return cls((rat(c),))

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalFunctionQ):
            return NotImplemented
        return _poly_mul1(self.num, other.den) == _poly_mul1(other.num, self.den)

    def __hash__(self):
        raise TypeError("RationalFunctionQ is not hashable")

    def __repr__(self) -> str:
        def fmt(p):
            if not p:
                return "0"
            bits = []
            for i, c in enumerate(p):
                if c == 0:
                    continue
                if i == 0:
                    bits.append(str(c))
                elif i == 1:
                    bits.append(f"{c}*q")
                else:
                    bits.append(f"{c}*q^{i}")
            return " + ".join(bits)

        if self.den == (_R1,):
            return fmt(self.num)
        return f"({fmt(self.num)})/({fmt(self.den)})"

    def __add__(self, other):
        if isinstance(other, numbers.Rational):
            other = RationalFunctionQ.constant(other)
        if not isinstance(other, RationalFunctionQ):
            return NotImplemented
        num = tuple(
            a + b
            for a, b in itertools.zip_longest(
                _poly_mul1(self.num, other.den), _poly_mul1(other.num, self.den), fillvalue=_R0
            )
        )
        return RationalFunctionQ(num, _poly_mul1(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return RationalFunctionQ(tuple(-c for c in self.num), self.den)

    def __sub__(self, other):
        if isinstance(other, numbers.Rational):
            other = RationalFunctionQ.constant(other)
        if not isinstance(other, RationalFunctionQ):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, numbers.Rational):
            return RationalFunctionQ(tuple(c * other for c in self.num), self.den)
        if not isinstance(other, RationalFunctionQ):
            return NotImplemented
        return RationalFunctionQ(
            _poly_mul1(self.num, other.num), _poly_mul1(self.den, other.den)
        )

    __rmul__ = __mul__

    def inv(self) -> "RationalFunctionQ":
        if not self.num or self.num[0] == 0:
            raise SeriesError("inverse would not be regular at q = 0")
        return RationalFunctionQ(self.den, self.num)

    def __pow__(self, n: int):
        if n < 0:
            return self.inv() ** (-n)
        out = RationalFunctionQ.constant(1)
        for _ in range(n):
            out = out * self
        return out

    def series(self, order: int):
        """First ``order + 1`` expansion coefficients at q = 0 (long division)."""
        out = []
        rem = list(self.num) + [_R0] * max(0, order + 1 - len(self.num))
        d0 = self.den[0]
        for n in range(order + 1):
            c = rem[n] / d0
            out.append(c)
            for j, dc in enumerate(self.den):
                if n + j <= order:
                    rem[n + j] -= c * dc
        return out

    def as_qseries(self, sring: SeriesRing, variable: int = 0) -> QSeries:
        """Expand into a series ring along one of its variables."""
        coeffs = self.series(sring.box[variable])
        terms = {}
        for n, c in enumerate(coeffs):
            if c != 0:
                terms[tuple(n if j == variable else 0 for j in range(sring.nvars))] = c
        return sring.from_rational_terms(terms)
