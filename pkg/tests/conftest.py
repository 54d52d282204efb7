import random

import pytest
import sympy as sp

from jetsym import Workspace


@pytest.fixture
def ws2():
    """p=2, q=1 workspace in the wave-equation style."""
    ws = Workspace(["x1", "x2"], ["u"], order_cap=2)
    ws.add_parameter("lam")
    return ws


@pytest.fixture
def ws1():
    """p=1, q=1 workspace (ODE-like)."""
    return Workspace(["x"], ["u"], order_cap=3)


@pytest.fixture
def rng():
    return random.Random(20260809)


def random_poly(rng, syms, degree=2, terms=4, span=4):
    """Random sparse polynomial with small rational coefficients."""
    out = sp.Integer(0)
    for _ in range(terms):
        c = sp.Rational(rng.randint(-span, span), rng.randint(1, span))
        if c == 0:
            continue
        mono = sp.Integer(1)
        for s in syms:
            mono *= s ** rng.randint(0, degree)
        out += c * mono
    return out


def random_expr(rng, syms, depth=3):
    """Random expression over syms using +, *, integer powers, and kernels."""
    if depth == 0 or rng.random() < 0.3:
        kind = rng.random()
        if kind < 0.4:
            return rng.choice(list(syms))
        if kind < 0.7:
            return sp.Rational(rng.randint(-5, 5), rng.randint(1, 5))
        return rng.choice(list(syms)) ** rng.randint(1, 3)
    op = rng.random()
    if op < 0.35:
        return random_expr(rng, syms, depth - 1) + random_expr(rng, syms, depth - 1)
    if op < 0.7:
        return random_expr(rng, syms, depth - 1) * random_expr(rng, syms, depth - 1)
    if op < 0.85:
        arg = random_poly(rng, syms, degree=1, terms=2)
        return rng.choice([sp.sin, sp.cos, sp.exp])(arg)
    return random_expr(rng, syms, depth - 1) ** rng.randint(1, 2)
