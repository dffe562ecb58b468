"""Shared builders for the standard example calculi."""

import pytest
from gmpy2 import mpq

from ncdc.calculus import InitialData, Presentation, Relation
from ncdc.linalg import LinMap, Shape
from ncdc.scalars import Q, parse_scalar


def s(text):
    return parse_scalar(str(text))


def flip_b0(dim_v, dim_w=None):
    """Switch rule v (x) w -> w (x) v, optionally scaled later."""
    dim_w = dim_v if dim_w is None else dim_w
    dom = Shape(("V", "W"), (dim_v, dim_w))
    cod = Shape(("W", "V"), (dim_w, dim_v))
    cols = []
    for i in range(dim_v):
        for j in range(dim_w):
            cols.append({j * dim_v + i: mpq(1)})
    return LinMap(dom, cod, cols)


def identity_d0(dim):
    """d0 = id, identifying W with V."""
    dom = Shape(("V",), (dim,))
    cod = Shape(("W",), (dim,))
    return LinMap(dom, cod, [{i: mpq(1)} for i in range(dim)])


def make_initial_data(dim_v, dim_w, d0_cols, b0_cols):
    d0 = LinMap(Shape(("V",), (dim_v,)), Shape(("W",), (dim_w,)), d0_cols)
    b0 = LinMap(Shape(("V", "W"), (dim_v, dim_w)),
                Shape(("W", "V"), (dim_w, dim_v)), b0_cols)
    return InitialData(d0, b0)


@pytest.fixture
def wz_data():
    """Quantum-plane initial data: d0 = id (W = V, xi = dx, eta = dy) and
    the deformed commutation rule
    x.xi = q^2 xi.x, x.eta = q eta.x + (q^2-1) xi.y,
    y.xi = q xi.y,   y.eta = q^2 eta.y."""
    q2 = Q * Q
    b0_cols = [
        {0: q2},                      # x (x) xi -> q^2 xi (x) x
        {2: Q, 1: q2 - 1},            # x (x) eta -> q eta (x) x + (q^2-1) xi (x) y
        {1: Q},                       # y (x) xi -> q xi (x) y
        {3: q2},                      # y (x) eta -> q^2 eta (x) y
    ]
    d0_cols = [{0: mpq(1)}, {1: mpq(1)}]
    return make_initial_data(2, 2, d0_cols, b0_cols)


@pytest.fixture
def wz_presentation():
    """dim 2 generators x, y with the single relation x*y - q*y*x."""
    return Presentation(2, 2, relations=(Relation(2, {1: mpq(1), 2: -Q}),),
                        max_degree=6)


@pytest.fixture
def classical_data():
    """b0 = flip, d0 = id on two generators: the commutative calculus."""
    return InitialData(identity_d0(2), flip_b0(2))


@pytest.fixture
def classical_presentation():
    """Commutative plane: x*y - y*x, with the antisymmetrizer as twist."""
    vv = Shape(("V", "V"), (2, 2))
    c = LinMap.from_rows(vv, vv, [
        [0, 0, 0, 0],
        [0, 1, -1, 0],
        [0, -1, 1, 0],
        [0, 0, 0, 0],
    ])
    return Presentation(2, 2, relations=(Relation(2, {1: mpq(1), 2: mpq(-1)}),),
                        twist=c, max_degree=5)


def dual_numbers(beta):
    """dim V = dim W = 1, relation x*x, b0 the scalar beta, d0 = 1."""
    data = make_initial_data(1, 1, [{0: mpq(1)}], [{0: s(beta)} if s(beta) else {}])
    pres = Presentation(1, 1, relations=(Relation(2, {0: mpq(1)}),), max_degree=4)
    return data, pres


def generator_swap_data():
    """dim V = 2, dim W = 1: x (x) f -> f (x) y, y (x) f -> f (x) x."""
    return make_initial_data(2, 1, [{0: mpq(1)}, {0: mpq(1)}],
                             [{1: mpq(1)}, {0: mpq(1)}])
