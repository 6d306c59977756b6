"""Exact sparse multivariate polynomial arithmetic over big rationals.

Polynomials are immutable values: a dict from exponent tuples to nonzero
Fraction coefficients.  Composition towers (iterating a polynomial vector
field) blow up coefficient sizes quickly, so coefficients are arbitrary
precision rationals and every product goes through a term-count ceiling
that turns an infeasible request into a clean error.

The canonical text form is ``coef*x0^e0*x1^e1 + ...`` with terms in
descending graded-lexicographic order; rendering is deterministic so the
form is usable for golden files.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .rationals import to_fraction

DEFAULT_MAX_TERMS = 10**6


class PolynomialSizeError(RuntimeError):
    """A product or composition would exceed the term-count ceiling."""


class PolyParseError(ValueError):
    """Polynomial text does not match the canonical form."""


def _grlex_key(exps: tuple[int, ...]):
    return (sum(exps), exps)


class RationalPoly:
    """Sparse polynomial in ``nvars`` variables with Fraction coefficients.

    Invariants: no stored zero coefficients; exponents are tuples of
    ``nvars`` non-negative ints; coefficients are Fractions in lowest
    terms with positive denominator (guaranteed by fractions.Fraction).
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple[int, ...], object] | None = None):
        if nvars < 0:
            raise ValueError("nvars must be non-negative")
        clean: dict[tuple[int, ...], Fraction] = {}
        if terms:
            for exps, coeff in terms.items():
                key = tuple(int(e) for e in exps)
                if len(key) != nvars or any(e < 0 for e in key):
                    raise ValueError(f"bad exponent tuple {exps!r} for {nvars} variables")
                c = to_fraction(coeff)
                if c != 0:
                    clean[key] = c
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("RationalPoly is immutable")

    # ----- constructors -----

    @classmethod
    def zero(cls, nvars: int) -> "RationalPoly":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, value) -> "RationalPoly":
        return cls(nvars, {(0,) * nvars: to_fraction(value)})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "RationalPoly":
        if not (0 <= index < nvars):
            raise IndexError(f"variable index {index} out of range for {nvars} variables")
        exps = tuple(int(i == index) for i in range(nvars))
        return cls(nvars, {exps: Fraction(1)})

    @classmethod
    def monomial(cls, nvars: int, coeff, exps: Sequence[int]) -> "RationalPoly":
        return cls(nvars, {tuple(exps): to_fraction(coeff)})

    # ----- queries -----

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def leading_term(self) -> tuple[tuple[int, ...], Fraction]:
        """Largest term in graded-lexicographic order."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        exps = max(self.terms, key=_grlex_key)
        return exps, self.terms[exps]

    def __eq__(self, other) -> bool:
        if isinstance(other, RationalPoly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == RationalPoly.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    # ----- ring operations -----

    def _coerce(self, other) -> "RationalPoly":
        if isinstance(other, RationalPoly):
            if other.nvars != self.nvars:
                raise ValueError("operands have different numbers of variables")
            return other
        return RationalPoly.constant(self.nvars, other)

    def __add__(self, other) -> "RationalPoly":
        other = self._coerce(other)
        terms = dict(self.terms)
        for exps, coeff in other.terms.items():
            total = terms.get(exps, Fraction(0)) + coeff
            if total == 0:
                terms.pop(exps, None)
            else:
                terms[exps] = total
        return RationalPoly(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self) -> "RationalPoly":
        return RationalPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "RationalPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RationalPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "RationalPoly":
        return self.mul(other)

    __rmul__ = __mul__

    def mul(self, other, max_terms: int = DEFAULT_MAX_TERMS) -> "RationalPoly":
        other = self._coerce(other)
        terms: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                total = terms.get(exps, Fraction(0)) + c1 * c2
                if total == 0:
                    terms.pop(exps, None)
                else:
                    terms[exps] = total
            if len(terms) > max_terms:
                raise PolynomialSizeError(
                    f"product exceeds term ceiling ({max_terms} terms)")
        return RationalPoly(self.nvars, terms)

    def __pow__(self, exponent: int) -> "RationalPoly":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = RationalPoly.constant(self.nvars, 1)
        base = self
        k = exponent
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # ----- calculus and substitution -----

    def partial(self, var: int) -> "RationalPoly":
        """Termwise power-rule partial derivative with respect to variable ``var``."""
        if not (0 <= var < self.nvars):
            raise IndexError(f"variable index {var} out of range for {self.nvars} variables")
        terms: dict[tuple[int, ...], Fraction] = {}
        for exps, coeff in self.terms.items():
            e = exps[var]
            if e == 0:
                continue
            new = list(exps)
            new[var] = e - 1
            terms[tuple(new)] = coeff * e
        return RationalPoly(self.nvars, terms)

    def compose(self, subs: Sequence["RationalPoly"], max_terms: int = DEFAULT_MAX_TERMS) -> "RationalPoly":
        """Substitute variable i by ``subs[i]``; exact.

        All substituted polynomials must share a variable count, which
        becomes the variable count of the result.
        """
        if len(subs) != self.nvars:
            raise ValueError(f"need {self.nvars} substitutions, got {len(subs)}")
        if not subs:
            return RationalPoly(0, dict(self.terms))
        out_nvars = subs[0].nvars
        if any(p.nvars != out_nvars for p in subs):
            raise ValueError("substituted polynomials must share a variable count")
        # Cache powers of each substituted polynomial up to the max needed exponent.
        max_exp = [0] * self.nvars
        for exps in self.terms:
            for i, e in enumerate(exps):
                max_exp[i] = max(max_exp[i], e)
        powers: list[list[RationalPoly]] = []
        for i, p in enumerate(subs):
            cache = [RationalPoly.constant(out_nvars, 1)]
            for _ in range(max_exp[i]):
                cache.append(cache[-1].mul(p, max_terms=max_terms))
            powers.append(cache)
        result = RationalPoly.zero(out_nvars)
        for exps, coeff in self.terms.items():
            term = RationalPoly.constant(out_nvars, coeff)
            for i, e in enumerate(exps):
                if e:
                    term = term.mul(powers[i][e], max_terms=max_terms)
            result = result + term
            if len(result.terms) > max_terms:
                raise PolynomialSizeError(
                    f"composition exceeds term ceiling ({max_terms} terms)")
        return result

    def evaluate(self, point: Sequence) -> object:
        """Evaluate at a point; exact for Fraction/int inputs, float for floats."""
        if len(point) != self.nvars:
            raise ValueError(f"need {self.nvars} coordinates, got {len(point)}")
        total = None
        for exps, coeff in self.terms.items():
            value = coeff
            for x, e in zip(point, exps):
                if e:
                    value = value * x**e
            total = value if total is None else total + value
        if total is None:
            return Fraction(0) if not any(isinstance(x, float) for x in point) else 0.0
        return total

    # ----- rendering and parsing -----

    def to_text(self, names: Sequence[str] | None = None) -> str:
        """Canonical form ``coef*x0^e0*x1^e1 + ...``, descending graded-lex order."""
        if not self.terms:
            return "0"
        if names is None:
            names = [f"x{i}" for i in range(self.nvars)]
        elif len(names) != self.nvars:
            raise ValueError("need one name per variable")
        pieces = []
        for exps in sorted(self.terms, key=_grlex_key, reverse=True):
            coeff = self.terms[exps]
            factors = [str(coeff)]
            for i, e in enumerate(exps):
                if e:
                    factors.append(f"{names[i]}^{e}")
            pieces.append("*".join(factors))
        return " + ".join(pieces)

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"RationalPoly({self.nvars}, {self.to_text()!r})"


_TERM_RE = re.compile(r"^(?P<coeff>[+-]?\d+(?:/\d+)?)?(?P<vars>(?:\*?[A-Za-z]\w*(?:\^\d+)?)*)$")
_VAR_RE = re.compile(r"([A-Za-z]\w*)(?:\^(\d+))?")


def parse_poly(text: str, nvars: int, names: Sequence[str] | None = None) -> RationalPoly:
    """Parse the canonical text form back into a polynomial.

    Accepts the output of ``to_text`` plus minor sugar (implicit
    coefficient 1, implicit exponent 1).
    """
    if names is None:
        names = [f"x{i}" for i in range(nvars)]
    index = {name: i for i, name in enumerate(names)}
    stripped = text.strip()
    if stripped == "0":
        return RationalPoly.zero(nvars)
    result = RationalPoly.zero(nvars)
    for raw in stripped.split("+"):
        term = raw.strip().replace(" ", "")
        if not term:
            raise PolyParseError(f"empty term in {text!r}")
        m = _TERM_RE.match(term)
        if not m or (m.group("coeff") is None and not m.group("vars")):
            raise PolyParseError(f"cannot parse term {raw.strip()!r}")
        coeff = Fraction(m.group("coeff")) if m.group("coeff") else Fraction(1)
        exps = [0] * nvars
        for name, exp in _VAR_RE.findall(m.group("vars")):
            if name not in index:
                raise PolyParseError(f"unknown variable {name!r} in {raw.strip()!r}")
            exps[index[name]] += int(exp) if exp else 1
        result = result + RationalPoly.monomial(nvars, coeff, exps)
    return result


def divide_exact(dividend: RationalPoly, divisor: RationalPoly) -> RationalPoly | None:
    """Return the quotient if ``divisor`` divides ``dividend`` exactly, else None.

    Single-divisor multivariate division in graded-lex order; for one
    divisor the remainder is unique, so a zero remainder decides
    divisibility.
    """
    if divisor.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if dividend.nvars != divisor.nvars:
        raise ValueError("operands have different numbers of variables")
    lead_exps, lead_coeff = divisor.leading_term()
    quotient = RationalPoly.zero(dividend.nvars)
    remainder = dividend
    while not remainder.is_zero():
        r_exps, r_coeff = remainder.leading_term()
        diff = tuple(a - b for a, b in zip(r_exps, lead_exps))
        if any(d < 0 for d in diff):
            return None
        t = RationalPoly.monomial(dividend.nvars, r_coeff / lead_coeff, diff)
        quotient = quotient + t
        remainder = remainder - t * divisor
    return quotient


def group_by_vars(poly: RationalPoly, group_vars: Sequence[int]) -> dict[tuple[int, ...], RationalPoly]:
    """Group terms by their exponents on ``group_vars``.

    Returns a dict from exponent tuples (over the grouped variables, in
    the given order) to polynomials in the remaining variables (original
    relative order preserved).
    """
    group = tuple(group_vars)
    rest = [v for v in range(poly.nvars) if v not in group]
    buckets: dict[tuple[int, ...], dict[tuple[int, ...], Fraction]] = {}
    for exps, coeff in poly.terms.items():
        key = tuple(exps[v] for v in group)
        rest_exps = tuple(exps[v] for v in rest)
        buckets.setdefault(key, {})[rest_exps] = coeff
    return {key: RationalPoly(len(rest), terms) for key, terms in buckets.items()}


class PolyField:
    """A tuple of polynomials used as an exact vector field.

    All components share a variable count.  In the plain case the number
    of components equals the number of variables.  For computations with
    symbolic coefficients the ring carries extra parameter variables and
    the coordinate variables are named explicitly (``coord_vars``) in the
    operations below.
    """

    __slots__ = ("components", "nvars")

    def __init__(self, components: Iterable[RationalPoly]):
        comps = tuple(components)
        if not comps:
            raise ValueError("a polynomial field needs at least one component")
        nvars = comps[0].nvars
        if any(p.nvars != nvars for p in comps):
            raise ValueError("components must share a variable count")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "nvars", nvars)

    def __setattr__(self, name, value):
        raise AttributeError("PolyField is immutable")

    @property
    def ncomponents(self) -> int:
        return len(self.components)

    @classmethod
    def from_texts(cls, texts: Sequence[str], nvars: int, names: Sequence[str] | None = None) -> "PolyField":
        return cls(parse_poly(t, nvars, names) for t in texts)

    @classmethod
    def linear(cls, matrix, offset=None) -> "PolyField":
        """The affine field x -> A x + b as exact polynomials."""
        rows = [list(row) for row in matrix]
        n = len(rows)
        comps = []
        for i in range(n):
            p = RationalPoly.zero(n)
            for j in range(n):
                p = p + RationalPoly.monomial(n, to_fraction(rows[i][j]),
                                              [int(j == t) for t in range(n)])
            if offset is not None:
                p = p + RationalPoly.constant(n, to_fraction(offset[i]))
            comps.append(p)
        return cls(comps)

    @classmethod
    def gradient_of(cls, potential: RationalPoly) -> "PolyField":
        """The exact gradient field of a polynomial potential."""
        return cls(potential.partial(v) for v in range(potential.nvars))

    def __eq__(self, other):
        if isinstance(other, PolyField):
            return self.components == other.components
        return NotImplemented

    def __hash__(self):
        return hash(self.components)

    def evaluate(self, point: Sequence) -> list:
        return [p.evaluate(point) for p in self.components]

    def to_texts(self, names: Sequence[str] | None = None) -> list[str]:
        return [p.to_text(names) for p in self.components]

    def __repr__(self):
        return f"PolyField({self.to_texts()!r})"


def _resolve_coords(field: PolyField, coord_vars: Sequence[int] | None) -> tuple[int, ...]:
    n = field.ncomponents
    if coord_vars is None:
        if field.nvars != n:
            raise ValueError(
                "component count differs from variable count; pass coord_vars")
        return tuple(range(n))
    coords = tuple(coord_vars)
    if len(coords) != n or len(set(coords)) != n:
        raise ValueError("coord_vars must name one distinct variable per component")
    if any(not (0 <= v < field.nvars) for v in coords):
        raise IndexError("coord_vars index out of range")
    return coords


def iterate_poly_field(field: PolyField, k: int, coord_vars: Sequence[int] | None = None,
                       max_terms: int = DEFAULT_MAX_TERMS) -> PolyField:
    """The k-fold self-composition of a polynomial field, exactly.

    Variables outside ``coord_vars`` are carried along unchanged, which
    is how symbolic coefficients ride through the composition.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    coords = _resolve_coords(field, coord_vars)
    current = field.components
    identity_subs = [RationalPoly.variable(field.nvars, v) for v in range(field.nvars)]
    for _ in range(k - 1):
        subs = list(identity_subs)
        for i, v in enumerate(coords):
            subs[v] = current[i]
        current = tuple(p.compose(subs, max_terms=max_terms) for p in field.components)
    return PolyField(current)


def jacobian_polys(field: PolyField, coord_vars: Sequence[int] | None = None) -> list[list[RationalPoly]]:
    """Matrix of exact partial derivatives of the components."""
    coords = _resolve_coords(field, coord_vars)
    return [[comp.partial(v) for v in coords] for comp in field.components]


def asymmetry_polys(field: PolyField, k: int, coord_vars: Sequence[int] | None = None,
                    max_terms: int = DEFAULT_MAX_TERMS) -> list[list[RationalPoly]]:
    """J(V^k) - J(V^k)^T as a matrix of exact polynomials.

    The iterated field is a gradient field over all of R^n exactly when
    every entry is the zero polynomial; the matrix is antisymmetric, so
    for n = 2 the (0, 1) entry determines it.
    """
    iterated = iterate_poly_field(field, k, coord_vars=coord_vars, max_terms=max_terms)
    jac = jacobian_polys(iterated, coord_vars=coord_vars)
    n = len(jac)
    return [[jac[i][j] - jac[j][i] for j in range(n)] for i in range(n)]


# ----- 2-D linear fields with exact or symbolic coefficients -----

def linear_asymmetry(a, b, c, d, k: int) -> Fraction:
    """Off-diagonal asymmetry of the k-th power of [[a, b], [c, d]], exactly.

    Zero exactly when the 2-D linear field x -> A x is k-conservative.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    from .rationals import mat_power
    A = [[to_fraction(a), to_fraction(b)], [to_fraction(c), to_fraction(d)]]
    P = mat_power(A, k)
    return P[0][1] - P[1][0]


def linear_asymmetry_symbolic(k: int, names: Sequence[str] = ("a", "b", "c", "d")) -> RationalPoly:
    """Same as linear_asymmetry but over the polynomial ring in the four entries."""
    if k < 1:
        raise ValueError("k must be >= 1")
    a, b, c, d = (RationalPoly.variable(4, i) for i in range(4))
    A = [[a, b], [c, d]]
    P = [[RationalPoly.constant(4, 1), RationalPoly.zero(4)],
         [RationalPoly.zero(4), RationalPoly.constant(4, 1)]]
    for _ in range(k):
        P = [[P[i][0] * A[0][j] + P[i][1] * A[1][j] for j in range(2)] for i in range(2)]
    return P[0][1] - P[1][0]


# ----- gradients of plane cubics with symbolic coefficients -----
#
# The potential a*x^3 + b*x^2*y + c*x*y^2 + d*y^3 lives in the six
# variable ring (a, b, c, d, x, y); its gradient field has the last two
# variables as coordinates.

CUBIC_RING_NAMES = ("a", "b", "c", "d", "x", "y")
CUBIC_COORD_VARS = (4, 5)


def cubic_gradient_symbolic() -> PolyField:
    """Gradient of the general plane cubic, coefficients symbolic."""
    def mono(coeff, ea, eb, ec, ed, ex, ey):
        return RationalPoly.monomial(6, coeff, (ea, eb, ec, ed, ex, ey))

    gx = mono(3, 1, 0, 0, 0, 2, 0) + mono(2, 0, 1, 0, 0, 1, 1) + mono(1, 0, 0, 1, 0, 0, 2)
    gy = mono(1, 0, 1, 0, 0, 2, 0) + mono(2, 0, 0, 1, 0, 1, 1) + mono(3, 0, 0, 0, 1, 0, 2)
    return PolyField([gx, gy])


def cubic_gate(a, b, c, d) -> Fraction:
    """3ac - b^2 + 3bd - c^2; zero exactly when the cubic's gradient is 2-conservative."""
    a, b, c, d = (to_fraction(v) for v in (a, b, c, d))
    return 3 * a * c - b * b + 3 * b * d - c * c


def cubic_gate_symbolic() -> RationalPoly:
    a, b, c, d = (RationalPoly.variable(4, i) for i in range(4))
    return 3 * a * c - b * b + 3 * b * d - c * c


def cubic_asymmetry_coefficients(k: int, max_terms: int = DEFAULT_MAX_TERMS) -> dict[tuple[int, int], RationalPoly]:
    """Coefficient polynomials (in a, b, c, d) of the cubic family's asymmetry at k.

    Keys are (x-exponent, y-exponent) of the scalar asymmetry entry
    J(V^k)[0][1] - J(V^k)[1][0]; values are exact polynomials in the four
    cubic coefficients.
    """
    field = cubic_gradient_symbolic()
    D = asymmetry_polys(field, k, coord_vars=CUBIC_COORD_VARS, max_terms=max_terms)
    return group_by_vars(D[0][1], CUBIC_COORD_VARS)
