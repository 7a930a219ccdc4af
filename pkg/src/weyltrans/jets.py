"""Truncated multivariate Taylor-coefficient arithmetic.

A :class:`Jet` holds the Taylor coefficients of a smooth scalar function at a
base point, up to a fixed total order ``r`` in ``m`` variables.  Coefficients
are Taylor-normalized: the entry for the multi-index ``alpha`` is
``d^alpha f / alpha!`` evaluated at the base point, which keeps the product
rule a plain convolution.  Arithmetic on jets mirrors pointwise arithmetic on
the underlying functions, so evaluating a composite expression on coordinate
jets yields the exact derivatives of the composite, up to truncation order
and floating-point rounding.

Coefficient arrays may carry leading batch axes, in which case a single Jet
represents the expansion of the same expression at many base points at once.
All operations broadcast over batch axes.

Multi-indices are enumerated in graded lexicographic order (total degree
first, then lexicographic on the exponent tuple), so serialized coefficient
vectors are reproducible across runs.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

__all__ = [
    "Jet",
    "JetError",
    "JetDomainError",
    "JetSpace",
    "jet_space",
    "compose",
    "GradJet",
]


class JetError(ValueError):
    """Structural misuse of jets: mismatched spaces or missing data."""


class JetDomainError(JetError):
    """An elementary function is undefined at the jet's base value."""


def _multi_indices(num_vars, order):
    """All exponent tuples with total degree <= order, graded-lex order."""
    out = []

    def fill(prefix, remaining):
        if len(prefix) == num_vars:
            out.append(tuple(prefix))
            return
        for e in range(remaining + 1):
            fill(prefix + [e], remaining - e)

    for grade in range(order + 1):
        block = []

        def exact(prefix, remaining):
            if len(prefix) == num_vars - 1:
                block.append(tuple(prefix + [remaining]))
                return
            for e in range(remaining + 1):
                exact(prefix + [e], remaining - e)

        exact([], grade)
        out.extend(sorted(block))
    return out


class JetSpace:
    """Index tables shared by all jets with a fixed (num_vars, order).

    Instances are interned by :func:`jet_space`; code may rely on identity
    comparison of spaces.
    """

    def __init__(self, num_vars, order):
        if num_vars < 1:
            raise JetError("jet space needs at least one variable")
        if order < 0:
            raise JetError("jet order must be nonnegative")
        self.num_vars = num_vars
        self.order = order
        self.exponents = _multi_indices(num_vars, order)
        self.size = len(self.exponents)
        self.position = {alpha: i for i, alpha in enumerate(self.exponents)}
        self.grades = np.array([sum(a) for a in self.exponents])
        self._exp_arr = np.array(self.exponents, dtype=np.int64)
        self._build_product_table()
        self._partial_tables = {}
        self._antiderivative_tables = {}
        self._restrict_tables = {}

    def _build_product_table(self):
        pi, pj, pk = [], [], []
        for i, a in enumerate(self.exponents):
            ga = sum(a)
            for j, b in enumerate(self.exponents):
                if ga + sum(b) > self.order:
                    continue
                pi.append(i)
                pj.append(j)
                pk.append(self.position[tuple(x + y for x, y in zip(a, b))])
        self._pi = np.array(pi)
        self._pj = np.array(pj)
        scatter = np.zeros((len(pk), self.size))
        scatter[np.arange(len(pk)), pk] = 1.0
        self._scatter = scatter

    def multiply(self, a, b):
        """Truncated Cauchy product of two coefficient arrays."""
        pairs = a[..., self._pi] * b[..., self._pj]
        return pairs @ self._scatter

    def partial_table(self, var):
        """(source index, factor) arrays realizing d/dx_var into order r-1."""
        if var not in self._partial_tables:
            target = jet_space(self.num_vars, self.order - 1)
            src = np.empty(target.size, dtype=np.int64)
            fac = np.empty(target.size)
            for k, alpha in enumerate(target.exponents):
                shifted = list(alpha)
                shifted[var] += 1
                src[k] = self.position[tuple(shifted)]
                fac[k] = shifted[var]
            self._partial_tables[var] = (src, fac)
        return self._partial_tables[var]

    def antiderivative_table(self, var):
        """(target mask, source index, factor) for integration in x_var."""
        if var not in self._antiderivative_tables:
            rows, src, fac = [], [], []
            for k, alpha in enumerate(self.exponents):
                if alpha[var] == 0:
                    continue
                shifted = list(alpha)
                shifted[var] -= 1
                rows.append(k)
                src.append(self.position[tuple(shifted)])
                fac.append(1.0 / alpha[var])
            self._antiderivative_tables[var] = (
                np.array(rows, dtype=np.int64),
                np.array(src, dtype=np.int64),
                np.array(fac),
            )
        return self._antiderivative_tables[var]

    def restrict_table(self, keep_vars):
        """Index map selecting coefficients constant in the dropped variables.

        ``keep_vars`` is a tuple of variable indices; the result maps into the
        space on those variables (same order).
        """
        if keep_vars not in self._restrict_tables:
            target = jet_space(len(keep_vars), self.order)
            dropped = [v for v in range(self.num_vars) if v not in keep_vars]
            src = np.empty(target.size, dtype=np.int64)
            for k, alpha in enumerate(target.exponents):
                full = [0] * self.num_vars
                for v, e in zip(keep_vars, alpha):
                    full[v] = e
                src[k] = self.position[tuple(full)]
            self._restrict_tables[keep_vars] = (target, src, tuple(dropped))
        return self._restrict_tables[keep_vars]

    def __repr__(self):
        return f"JetSpace(num_vars={self.num_vars}, order={self.order})"


@lru_cache(maxsize=None)
def jet_space(num_vars, order):
    """Interned jet space for the given variable count and order."""
    return JetSpace(num_vars, order)


def _is_scalar(x):
    return np.isscalar(x) or isinstance(x, np.ndarray)


def _broadcast_scalar(w, like):
    w = np.asarray(w, dtype=float)
    if w.ndim == 0:
        return w
    return w[..., None]


class Jet:
    """Truncated Taylor expansion of a scalar function at a base point.

    Values are immutable by convention: operations return fresh jets and
    never mutate coefficient arrays in place, so jets may be shared freely
    between threads.
    """

    __slots__ = ("space", "coeffs")

    def __init__(self, space, coeffs):
        self.space = space
        self.coeffs = coeffs

    # -- construction ------------------------------------------------------

    @classmethod
    def constant(cls, space, value):
        value = np.asarray(value, dtype=float)
        coeffs = np.zeros(value.shape + (space.size,))
        coeffs[..., 0] = value
        return cls(space, coeffs)

    @classmethod
    def variable(cls, space, var, value):
        """Jet of the coordinate function x_var at base value ``value``."""
        if not 0 <= var < space.num_vars:
            raise JetError(f"variable index {var} out of range")
        j = cls.constant(space, value)
        if space.order >= 1:
            unit = tuple(1 if v == var else 0 for v in range(space.num_vars))
            j.coeffs[..., space.position[unit]] = 1.0
        return j

    # -- inspection --------------------------------------------------------

    @property
    def value(self):
        """Value of the function at the base point (possibly a batch array)."""
        return self.coeffs[..., 0]

    @property
    def batch_shape(self):
        return self.coeffs.shape[:-1]

    def coefficient(self, alpha):
        """Taylor coefficient for the multi-index ``alpha``."""
        return self.coeffs[..., self.space.position[tuple(alpha)]]

    def derivative(self, alpha):
        """Partial derivative d^alpha f at the base point (coefficient * alpha!)."""
        fac = 1
        for e in alpha:
            fac *= math.factorial(e)
        return self.coefficient(alpha) * fac

    def __repr__(self):
        return f"Jet({self.space.num_vars} vars, order {self.space.order}, value={self.value!r})"

    # -- ring operations ---------------------------------------------------

    def _check(self, other):
        if other.space is not self.space:
            raise JetError(
                f"jet operands live in different spaces: {self.space} vs {other.space}"
            )

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.space, self.coeffs + other.coeffs)
        if _is_scalar(other):
            out = self.coeffs.copy()
            out[..., 0] = out[..., 0] + np.asarray(other, dtype=float)
            return Jet(self.space, out)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __sub__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.space, self.coeffs - other.coeffs)
        if _is_scalar(other):
            return self + (-np.asarray(other, dtype=float))
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.space, self.space.multiply(self.coeffs, other.coeffs))
        if _is_scalar(other):
            return Jet(self.space, self.coeffs * _broadcast_scalar(other, self))
        return NotImplemented

    __rmul__ = __mul__

    def _reciprocal(self):
        b0 = self.coeffs[..., 0]
        if np.any(b0 == 0.0):
            raise JetDomainError("division by a jet with zero constant term")
        u = Jet(self.space, self.coeffs / _broadcast_scalar(b0, self))
        u.coeffs[..., 0] -= 1.0
        acc = Jet.constant(self.space, np.ones(np.shape(b0)))
        for _ in range(self.space.order):
            acc = 1.0 - u * acc
        return Jet(self.space, acc.coeffs / _broadcast_scalar(b0, self))

    def __truediv__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return self * other._reciprocal()
        if _is_scalar(other):
            return self * (1.0 / np.asarray(other, dtype=float))
        return NotImplemented

    def __rtruediv__(self, other):
        if _is_scalar(other):
            return self._reciprocal() * np.asarray(other, dtype=float)
        return NotImplemented

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            return self.powf(float(n))
        if n < 0:
            return (self ** (-n))._reciprocal()
        result = Jet.constant(self.space, np.ones(self.batch_shape))
        base = self
        k = int(n)
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    # -- calculus ----------------------------------------------------------

    def partial(self, var):
        """Jet of df/dx_var at the same base point, order reduced by one."""
        if self.space.order == 0:
            raise JetError("no derivative information: jet has order 0")
        src, fac = self.space.partial_table(var)
        target = jet_space(self.space.num_vars, self.space.order - 1)
        return Jet(target, self.coeffs[..., src] * fac)

    def antiderivative(self, var):
        """Formal antiderivative in x_var with zero constant, same order.

        Coefficients whose integral would exceed the truncation order are
        dropped, so the result is exact only when ``self`` is exact to order
        ``r - 1``.
        """
        rows, src, fac = self.space.antiderivative_table(var)
        out = np.zeros_like(self.coeffs)
        out[..., rows] = self.coeffs[..., src] * fac
        return Jet(self.space, out)

    def truncate(self, order):
        """Forget coefficients above ``order`` (graded layout makes this a prefix)."""
        if order == self.space.order:
            return self
        if order > self.space.order:
            raise JetError("cannot truncate to a higher order")
        target = jet_space(self.space.num_vars, order)
        return Jet(target, self.coeffs[..., : target.size].copy())

    def restrict(self, keep_vars):
        """Set the non-kept variables' increments to zero and drop them."""
        target, src, _ = self.space.restrict_table(tuple(keep_vars))
        return Jet(target, self.coeffs[..., src].copy())

    # -- elementary functions ------------------------------------------------

    def _analytic(self, derivs):
        """Compose with a function given by its derivatives at the base value.

        ``derivs[p]`` must be f^(p) evaluated at the constant term, for
        p = 0..order.  Uses the usual nilpotent-part Horner evaluation.
        """
        r = self.space.order
        tilde = Jet(self.space, self.coeffs.copy())
        tilde.coeffs[..., 0] = 0.0
        acc = Jet.constant(self.space, derivs[r] / math.factorial(r))
        for p in range(r - 1, -1, -1):
            acc = acc * tilde + derivs[p] / math.factorial(p)
        return acc

    def exp(self):
        e = np.exp(self.coeffs[..., 0])
        return self._analytic([e] * (self.space.order + 1))

    def log(self):
        a0 = self.coeffs[..., 0]
        if np.any(a0 <= 0.0):
            raise JetDomainError("log undefined at base point: nonpositive value")
        derivs = [np.log(a0)]
        for p in range(1, self.space.order + 1):
            derivs.append((-1.0) ** (p - 1) * math.factorial(p - 1) / a0**p)
        return self._analytic(derivs)

    def sqrt(self):
        a0 = self.coeffs[..., 0]
        if np.any(a0 <= 0.0):
            raise JetDomainError("sqrt undefined at base point: nonpositive value")
        return self.powf(0.5)

    def powf(self, c):
        """Real power with non-integer exponent; base value must be positive."""
        a0 = self.coeffs[..., 0]
        if np.any(a0 <= 0.0):
            raise JetDomainError(
                "power with non-integer exponent undefined at base point:"
                " nonpositive value"
            )
        derivs = []
        factor = 1.0
        for p in range(self.space.order + 1):
            derivs.append(factor * a0 ** (c - p))
            factor *= c - p
        return self._analytic(derivs)

    def sin(self):
        a0 = self.coeffs[..., 0]
        table = [np.sin(a0), np.cos(a0), -np.sin(a0), -np.cos(a0)]
        return self._analytic([table[p % 4] for p in range(self.space.order + 1)])

    def cos(self):
        a0 = self.coeffs[..., 0]
        table = [np.cos(a0), -np.sin(a0), -np.cos(a0), np.sin(a0)]
        return self._analytic([table[p % 4] for p in range(self.space.order + 1)])


_COMPOSE = {
    "exp": Jet.exp,
    "log": Jet.log,
    "sin": Jet.sin,
    "cos": Jet.cos,
    "sqrt": Jet.sqrt,
}


def compose(tag, a, exponent=None):
    """Apply an elementary function to a jet by name tag.

    ``tag`` is one of exp/log/sin/cos/sqrt/pow_c; pow_c takes the exponent as
    the extra argument.
    """
    if tag == "pow_c":
        if exponent is None:
            raise JetError("pow_c needs an exponent")
        if float(exponent).is_integer():
            return a ** int(exponent)
        return a.powf(float(exponent))
    try:
        fn = _COMPOSE[tag]
    except KeyError:
        raise JetError(f"unknown elementary function tag {tag!r}") from None
    return fn(a)


class GradJet:
    """A jet paired with its gradient along auxiliary directions.

    Used to evaluate expressions at a jet-valued point while also tracking
    first derivatives with respect to the point's ambient coordinates (a
    forward-mode tangent over the jet ring).  Supports the same arithmetic
    surface as :class:`Jet`, so expression evaluation works unchanged.
    """

    __slots__ = ("val", "grad")

    def __init__(self, val, grad):
        self.val = val
        self.grad = tuple(grad)

    @classmethod
    def constant_like(cls, val, n_dirs):
        zero = val * 0.0
        return cls(val, (zero,) * n_dirs)

    @classmethod
    def seed(cls, val, direction, n_dirs):
        one = (val * 0.0) + 1.0
        zero = val * 0.0
        return cls(val, tuple(one if d == direction else zero for d in range(n_dirs)))

    def __add__(self, other):
        if isinstance(other, GradJet):
            return GradJet(self.val + other.val, tuple(a + b for a, b in zip(self.grad, other.grad)))
        return GradJet(self.val + other, self.grad)

    __radd__ = __add__

    def __neg__(self):
        return GradJet(-self.val, tuple(-g for g in self.grad))

    def __sub__(self, other):
        return self + (-other if isinstance(other, GradJet) else -1.0 * other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, GradJet):
            return GradJet(
                self.val * other.val,
                tuple(a * other.val + self.val * b for a, b in zip(self.grad, other.grad)),
            )
        return GradJet(self.val * other, tuple(g * other for g in self.grad))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, GradJet):
            inv = 1.0 / other.val
            q = self.val * inv
            return GradJet(q, tuple((a - q * b) * inv for a, b in zip(self.grad, other.grad)))
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        inv = 1.0 / self.val
        q = other * inv
        return GradJet(q, tuple(-q * inv * g for g in self.grad))

    def __pow__(self, n):
        if isinstance(n, (int, np.integer)):
            if n == 0:
                return GradJet(self.val**0, tuple(g * 0.0 for g in self.grad))
            d = float(n) * self.val ** (int(n) - 1)
            return GradJet(self.val ** int(n), tuple(d * g for g in self.grad))
        return self._chain(self.val.powf(float(n)), float(n) * self.val.powf(float(n) - 1.0))

    def _chain(self, f, df):
        return GradJet(f, tuple(df * g for g in self.grad))

    def exp(self):
        f = self.val.exp()
        return self._chain(f, f)

    def log(self):
        return self._chain(self.val.log(), 1.0 / self.val)

    def sqrt(self):
        f = self.val.sqrt()
        return self._chain(f, 0.5 / f)

    def powf(self, c):
        return self._chain(self.val.powf(c), c * self.val.powf(c - 1.0))

    def sin(self):
        return self._chain(self.val.sin(), self.val.cos())

    def cos(self):
        return self._chain(self.val.cos(), -self.val.sin())
