"""Seeded random generators shared by unit and acceptance tests."""

import numpy as np

from weyltrans.expr import BinOp, Call, Neg, Num, Pi, Var

_LEAF_VARS = ("t", "x1", "x2", "x3")
_UNARY_FUNCS = ("exp", "log", "sin", "cos", "sqrt")


def random_ast(rng, depth=0, max_depth=5):
    """A random well-formed expression tree (not necessarily evaluable)."""
    if depth >= max_depth or rng.random() < 0.25:
        kind = rng.integers(0, 3)
        if kind == 0:
            return Num(float(np.round(rng.uniform(0, 10), 3)))
        if kind == 1:
            return Var(str(rng.choice(_LEAF_VARS)))
        return Pi()
    kind = rng.integers(0, 4)
    if kind == 0:
        return Neg(random_ast(rng, depth + 1, max_depth))
    if kind == 1:
        op = str(rng.choice(["+", "-", "*", "/"]))
        return BinOp(
            op,
            random_ast(rng, depth + 1, max_depth),
            random_ast(rng, depth + 1, max_depth),
        )
    if kind == 2:
        exponent = float(rng.choice([-3, -2, -1, 2, 3, 0.5, 1.5]))
        return BinOp("^", random_ast(rng, depth + 1, max_depth), Num(exponent))
    name = str(rng.choice(_UNARY_FUNCS))
    return Call(name, (random_ast(rng, depth + 1, max_depth),))


def random_trig_polynomial(rng, variables, n_terms, amplitude, max_freq=2):
    """Expression text for a small random trigonometric polynomial.

    Each term is amplitude * product over a random subset of variables of
    sin/cos(k * v).  Used to build slab metrics whose entries stay close to
    the identity.
    """
    terms = []
    for _ in range(n_terms):
        coeff = amplitude * rng.uniform(0.4, 1.0) * rng.choice([-1.0, 1.0])
        factors = []
        n_factors = rng.integers(1, 3)
        chosen = rng.choice(len(variables), size=n_factors, replace=False)
        for idx in chosen:
            v = variables[idx]
            k = int(rng.integers(1, max_freq + 1))
            fn = "sin" if rng.random() < 0.5 else "cos"
            arg = v if k == 1 else f"{k}*{v}"
            factors.append(f"{fn}({arg})")
        terms.append(f"{coeff:.6f}*" + "*".join(factors))
    if not terms:
        return "0.0"
    out = terms[0]
    for t in terms[1:]:
        out += " + " + t if not t.startswith("-") else " " + t
    return out
