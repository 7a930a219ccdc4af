"""Differential forms and endomorphism-valued forms at a point.

Forms of degree p on an n-dimensional tangent space are stored densely over
strictly increasing index tuples, with the evaluation convention

    omega(e_{i_1}, ..., e_{i_p}) = stored coefficient of the tuple (i_1 < ... < i_p),

so the wedge product is a signed shuffle-merge with no factorial weights:
for one-forms, (a ^ b)(U, V) = a(U) b(V) - a(V) b(U).

An :class:`EndForm` carries an n-by-n matrix per tuple.  Its product combines
the wedge on the form slot with matrix multiplication on the endomorphism
slot, and the graded trace identity

    tr(a b) = (-1)^(deg a * deg b) tr(b a)

holds for homogeneous a, b.  Values of mixed degree are stored as
degree-indexed parts, since traces of series and their exponentials are
inhomogeneous.

Coefficients are either plain floats or jets (object arrays), sharing one
code path; the exterior derivative is defined for jet coefficients only,
where it reads off first partials.  Dimensions are capped at 8.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations

import numpy as np

from .jets import Jet

__all__ = [
    "FormError",
    "FormSpace",
    "form_space",
    "Form",
    "EndForm",
    "wedge",
    "wedge_end",
    "trace_end",
    "exp_even_form",
    "series_apply",
    "series_apply_spoly",
    "exterior_derivative",
    "pullback_boundary",
    "change_frame",
    "max_abs",
    "difference_max",
    "spoly_add",
    "spoly_scale",
    "spoly_mul",
    "spoly_trace",
    "spoly_exp_even",
    "spoly_eval",
]

MAX_DIM = 8


class FormError(ValueError):
    """Dimension/degree misuse in the form algebra."""


class FormSpace:
    """Tuple enumeration and product tables for forms in dimension n."""

    def __init__(self, dim):
        if not 1 <= dim <= MAX_DIM:
            raise FormError(f"form dimension must be between 1 and {MAX_DIM}")
        self.dim = dim
        self.tuples = [list(combinations(range(dim), p)) for p in range(dim + 1)]
        self.index = [
            {t: i for i, t in enumerate(tups)} for tups in self.tuples
        ]
        self._merge_tables = {}
        self._d_tables = {}

    def ncomp(self, p):
        return len(self.tuples[p])

    def merge_table(self, p, q):
        """Arrays (ia, ib, iout, sign) realizing the shuffle-merge for p ^ q."""
        key = (p, q)
        if key not in self._merge_tables:
            ia, ib, iout, sign = [], [], [], []
            if p + q <= self.dim:
                for i, A in enumerate(self.tuples[p]):
                    sa = set(A)
                    for j, B in enumerate(self.tuples[q]):
                        if sa & set(B):
                            continue
                        inversions = sum(1 for a in A for b in B if a > b)
                        ia.append(i)
                        ib.append(j)
                        iout.append(self.index[p + q][tuple(sorted(A + B))])
                        sign.append(-1.0 if inversions % 2 else 1.0)
            self._merge_tables[key] = (
                np.array(ia, dtype=np.int64),
                np.array(ib, dtype=np.int64),
                np.array(iout, dtype=np.int64),
                np.array(sign),
            )
        return self._merge_tables[key]

    def d_table(self, p):
        """Per out-tuple list of (sign, source index, variable) for d."""
        if p not in self._d_tables:
            entries = []
            for K in self.tuples[p + 1]:
                row = []
                for pos, var in enumerate(K):
                    rest = K[:pos] + K[pos + 1 :]
                    row.append(
                        ((-1.0) ** pos, self.index[p][rest], var)
                    )
                entries.append(row)
            self._d_tables[p] = entries
        return self._d_tables[p]


@lru_cache(maxsize=None)
def form_space(dim):
    return FormSpace(dim)


def _empty(space, p, shape_tail, dtype):
    return np.zeros((space.ncomp(p),) + shape_tail, dtype=dtype)


class _Graded:
    """Shared container logic for Form and EndForm."""

    __slots__ = ("space", "parts")
    _tail = ()

    def __init__(self, space, parts=None):
        self.space = space
        self.parts = dict(parts) if parts else {}

    @property
    def degrees(self):
        return sorted(self.parts)

    def part(self, p):
        """Coefficient array of the degree-p component (zeros if absent)."""
        if p in self.parts:
            return self.parts[p]
        n = self.space.dim
        tail = (n, n) if self._tail else ()
        return _empty(self.space, p, tail, float)

    def _check_dim(self, other):
        if other.space is not self.space:
            raise FormError("operands live in different dimensions")

    def __add__(self, other):
        self._check_dim(other)
        parts = dict(self.parts)
        for p, arr in other.parts.items():
            parts[p] = parts[p] + arr if p in parts else arr
        return type(self)(self.space, parts)

    def __neg__(self):
        return type(self)(self.space, {p: -a for p, a in self.parts.items()})

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, c):
        return type(self)(self.space, {p: a * c for p, a in self.parts.items()})

    def __mul__(self, c):
        if isinstance(c, (int, float, np.floating, Jet)):
            return self.scaled(c)
        return NotImplemented

    __rmul__ = __mul__

    def is_zero(self):
        return max_abs(self) == 0.0

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.space.dim}, degrees={self.degrees})"


class Form(_Graded):
    """Scalar-valued antisymmetric form, possibly of mixed degree."""

    _tail = False

    @classmethod
    def of_degree(cls, space, p, coeffs):
        coeffs = np.asarray(coeffs)
        if coeffs.shape != (space.ncomp(p),):
            raise FormError(
                f"degree-{p} form in dim {space.dim} needs {space.ncomp(p)} components"
            )
        return cls(space, {p: coeffs})

    @classmethod
    def one(cls, space, value=1.0):
        return cls(space, {0: np.array([value], dtype=object if isinstance(value, Jet) else float)})

    def coefficient(self, indices):
        t = tuple(indices)
        return self.part(len(t))[self.space.index[len(t)][t]]


class EndForm(_Graded):
    """Endomorphism-valued form: an n-by-n matrix per index tuple."""

    _tail = True

    @classmethod
    def of_degree(cls, space, p, coeffs):
        coeffs = np.asarray(coeffs)
        n = space.dim
        if coeffs.shape != (space.ncomp(p), n, n):
            raise FormError(
                f"degree-{p} EndForm in dim {space.dim} needs shape "
                f"({space.ncomp(p)}, {n}, {n})"
            )
        return cls(space, {p: coeffs})

    @classmethod
    def identity(cls, space, scale=1.0):
        return cls(space, {0: (np.eye(space.dim) * scale)[None, :, :]})

    def matrix(self, indices):
        t = tuple(indices)
        return self.part(len(t))[self.space.index[len(t)][t]]


def _is_object(arr):
    return arr.dtype == object


def wedge(a: Form, b: Form) -> Form:
    """Wedge product of scalar forms; degrees above the dimension vanish."""
    a._check_dim(b)
    space = a.space
    out = {}
    for p, ap in a.parts.items():
        for q, bq in b.parts.items():
            if p + q > space.dim:
                continue
            ia, ib, iout, sign = space.merge_table(p, q)
            if len(ia) == 0:
                continue
            obj = _is_object(ap) or _is_object(bq)
            tgt = out.get(p + q)
            if tgt is None:
                tgt = _empty(space, p + q, (), object if obj else float)
                out[p + q] = tgt
            if obj:
                for i, j, k, s in zip(ia, ib, iout, sign):
                    tgt[k] = tgt[k] + s * (ap[i] * bq[j])
            else:
                np.add.at(tgt, iout, sign * ap[ia] * bq[ib])
    return Form(space, out)


def wedge_end(a: EndForm, b: EndForm) -> EndForm:
    """Product (alpha x B)(beta x B') = (alpha ^ beta) x (B B')."""
    a._check_dim(b)
    space = a.space
    out = {}
    for p, ap in a.parts.items():
        for q, bq in b.parts.items():
            if p + q > space.dim:
                continue
            ia, ib, iout, sign = space.merge_table(p, q)
            if len(ia) == 0:
                continue
            obj = _is_object(ap) or _is_object(bq)
            tgt = out.get(p + q)
            if tgt is None:
                n = space.dim
                tgt = _empty(space, p + q, (n, n), object if obj else float)
                out[p + q] = tgt
            if obj:
                for i, j, k, s in zip(ia, ib, iout, sign):
                    tgt[k] = tgt[k] + s * np.dot(ap[i], bq[j])
            else:
                prod = np.matmul(ap[ia], bq[ib]) * sign[:, None, None]
                np.add.at(tgt, iout, prod)
    return EndForm(space, out)


def trace_end(a: EndForm) -> Form:
    """Matrix trace applied coefficient-wise: tr(omega x B) = tr(B) omega."""
    out = {}
    for p, ap in a.parts.items():
        out[p] = np.trace(ap, axis1=-2, axis2=-1)
    return Form(a.space, out)


def _scalar_exp(x):
    if isinstance(x, Jet):
        return x.exp()
    return math.exp(x)


def exp_even_form(a: Form) -> Form:
    """Exponential of a form with even-degree parts, truncated at degree n.

    The degree-0 part goes through the scalar exponential; the positive-degree
    parts are nilpotent, so the series is finite.
    """
    space = a.space
    for p in a.parts:
        if p % 2:
            raise FormError("exponential needs a form of even degrees")
    scalar = 1.0
    if 0 in a.parts:
        scalar = _scalar_exp(a.parts[0][0])
    positive = Form(space, {p: arr for p, arr in a.parts.items() if p > 0})
    result = Form.one(space)
    term = Form.one(space)
    for k in range(1, space.dim // 2 + 1):
        term = wedge(term, positive).scaled(1.0 / k)
        if not term.parts:
            break
        result = result + term
    return result.scaled(scalar)


def series_apply(terms, R: EndForm) -> EndForm:
    """Evaluate sum_k c_k R^k for the (power, coefficient) pairs ``terms``.

    R must have even positive degrees (curvature-like); powers whose form
    degree exceeds the dimension drop out automatically.
    """
    space = R.space
    for p in R.parts:
        if p % 2 or p == 0:
            raise FormError("series argument must have even positive degree")
    power_cache = {0: EndForm.identity(space)}
    highest = 0
    maxk = max((k for k, _ in terms), default=0)
    while highest < maxk:
        nxt = wedge_end(power_cache[highest], R)
        highest += 1
        power_cache[highest] = nxt
        if not nxt.parts:
            break
    acc = EndForm(space, {})
    for k, c in terms:
        pw = power_cache.get(k)
        if pw is None or not pw.parts:
            continue
        acc = acc + pw.scaled(c)
    return acc


# -- s-polynomials -------------------------------------------------------------
#
# An s-polynomial is a list of Form or EndForm coefficients indexed by the
# power of the deformation parameter s.


def _trim(poly):
    while poly and not poly[-1].parts:
        poly.pop()
    return poly


def spoly_add(A, B):
    n = max(len(A), len(B))
    out = []
    for i in range(n):
        if i < len(A) and i < len(B):
            out.append(A[i] + B[i])
        elif i < len(A):
            out.append(A[i])
        else:
            out.append(B[i])
    return _trim(out)


def spoly_scale(A, c):
    return [a.scaled(c) for a in A]


def spoly_mul(A, B, product):
    """Cauchy product in s with the given coefficient product (wedge/wedge_end)."""
    if not A or not B:
        return []
    out = [None] * (len(A) + len(B) - 1)
    for i, a in enumerate(A):
        for j, b in enumerate(B):
            ab = product(a, b)
            out[i + j] = ab if out[i + j] is None else out[i + j] + ab
    return _trim(out)


def spoly_trace(A):
    return [trace_end(a) for a in A]


def spoly_eval(A, s):
    """Evaluate the s-polynomial at a numeric s."""
    if not A:
        raise FormError("cannot evaluate an empty s-polynomial")
    acc = A[-1]
    for c in reversed(A[:-1]):
        acc = acc.scaled(s) + c
    return acc


def series_apply_spoly(terms, Rs):
    """series_apply for an s-polynomial curvature family."""
    if not Rs:
        return []
    space = Rs[0].space
    out = []
    power_cache = {0: [EndForm.identity(space)]}
    highest = 0
    maxk = max(k for k, _ in terms) if terms else 0
    while highest < maxk:
        nxt = spoly_mul(power_cache[highest], Rs, wedge_end)
        highest += 1
        power_cache[highest] = nxt
        if not nxt:
            break
    acc = []
    for k, c in terms:
        pw = power_cache.get(k)
        if not pw:
            continue
        acc = spoly_add(acc, spoly_scale(pw, c))
    return acc


def spoly_exp_even(A):
    """exp of an s-polynomial of even forms (degree-0 parts not supported)."""
    space = A[0].space if A else None
    if space is None:
        raise FormError("cannot exponentiate an empty s-polynomial")
    for a in A:
        for p in a.parts:
            if p % 2 or p == 0:
                raise FormError("exponential needs even positive degrees")
    result = [Form.one(space)]
    term = [Form.one(space)]
    for k in range(1, space.dim // 2 + 1):
        term = spoly_scale(spoly_mul(term, A, wedge), 1.0 / k)
        if not term:
            break
        result = spoly_add(result, term)
    return result


# -- calculus and geometry utilities -------------------------------------------


def _partial_entry(e, var):
    if isinstance(e, Jet):
        return e.partial(var)
    return 0.0


def exterior_derivative(x):
    """Exterior derivative of a jet-coefficient Form or EndForm.

    Reads first partials off the jet entries; the output coefficients are
    jets of one order lower (or numeric zeros where a component vanished
    identically).
    """
    space = x.space
    is_end = isinstance(x, EndForm)
    n = space.dim
    out = {}
    for p, arr in x.parts.items():
        if p + 1 > space.dim:
            continue
        table = space.d_table(p)
        tgt = np.zeros(
            (space.ncomp(p + 1),) + ((n, n) if is_end else ()), dtype=object
        )
        for k, row in enumerate(table):
            for sign, src, var in row:
                if is_end:
                    m = arr[src]
                    add = np.empty((n, n), dtype=object)
                    for r in range(n):
                        for c in range(n):
                            add[r, c] = _partial_entry(m[r, c], var)
                    tgt[k] = tgt[k] + sign * add
                else:
                    tgt[k] = tgt[k] + sign * _partial_entry(arr[src], var)
        key = p + 1
        out[key] = tgt if key not in out else out[key] + tgt
    return (EndForm if is_end else Form)(space, out)


def pullback_boundary(x, normal=0):
    """Discard components whose form slot contains the normal index.

    The endomorphism slot is left untouched; only the form slot is pulled
    back to the boundary.
    """
    out = {}
    for p, arr in x.parts.items():
        keep = arr.copy()
        for i, t in enumerate(x.space.tuples[p]):
            if normal in t:
                keep[i] = keep[i] * 0.0 if keep.dtype == object else 0.0
        out[p] = keep
    return type(x)(x.space, out)


def change_frame(x, frame):
    """Express a Form or EndForm in the frame whose columns are ``frame``.

    The new form slot coefficients are minors of the frame matrix contracted
    against the old ones; for an EndForm the matrices are conjugated into the
    frame as well.
    """
    space = x.space
    F = np.asarray(frame, dtype=float)
    Finv = np.linalg.inv(F)
    out = {}
    for p, arr in x.parts.items():
        tuples = space.tuples[p]
        T = np.empty((len(tuples), len(tuples)))
        for o, Kout in enumerate(tuples):
            for i, Kin in enumerate(tuples):
                T[o, i] = np.linalg.det(F[np.ix_(Kin, Kout)])
        if p == 0:
            T = np.eye(1)
        if isinstance(x, EndForm):
            if arr.dtype == object:
                n = space.dim
                new = np.zeros((len(tuples), n, n), dtype=object)
                for o in range(len(tuples)):
                    acc = np.zeros((n, n), dtype=object)
                    for i in range(len(tuples)):
                        if T[o, i] != 0.0:
                            acc = acc + T[o, i] * arr[i]
                    new[o] = np.dot(np.dot(Finv, acc), F)
                out[p] = new
            else:
                mixed = np.einsum("oi,iab->oab", T, arr)
                out[p] = np.einsum("ra,iab,bc->irc", Finv, mixed, F)
        else:
            out[p] = T @ arr
    return type(x)(space, out)


def _entry_abs_max(e):
    if isinstance(e, Jet):
        return float(np.max(np.abs(e.coeffs))) if e.coeffs.size else 0.0
    return abs(float(e))


def max_abs(x, values_only=False):
    """Largest absolute coefficient across all parts (jets: all Taylor coeffs)."""
    worst = 0.0
    for arr in x.parts.values():
        if arr.dtype == object:
            for e in arr.flat:
                if values_only and isinstance(e, Jet):
                    worst = max(worst, float(np.max(np.abs(e.value))))
                else:
                    worst = max(worst, _entry_abs_max(e))
        else:
            if arr.size:
                worst = max(worst, float(np.max(np.abs(arr))))
    return worst


def difference_max(a, b, values_only=False):
    return max_abs(a - b, values_only=values_only)
