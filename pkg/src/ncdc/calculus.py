"""Differential calculi on a tensor algebra and its graded quotients.

The free side of the theory: a presentation fixes generators V, coefficient
module W and homogeneous relations; a pair of structure maps

* ``d0 : V -> W`` (degree -1 differential on generators),
* ``b0 : V (x) W -> W (x) V`` (commutation rule moving generators past
  coefficients)

extends uniquely, degree by degree, to the whole tensor algebra.  This
module builds those towers, the graded relation ideal, and normal-form
data for the quotient algebra.  Consistency of the pair with the relations
lives in :mod:`ncdc.checks`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ncdc.linalg import (
    LinMap,
    Shape,
    Subspace,
    add_maps,
    compose,
    embed_shifted,
    kron,
    rref_basis,
    vec_iadd,
)
from ncdc.scalars import ONE, Scalar


class NonQuadraticError(ValueError):
    """An operation restricted to quadratic presentations got a higher-degree one."""


_DEFAULT_V = ("x", "y", "z", "u", "v", "w")
_DEFAULT_W = ("xi", "eta", "zeta", "theta", "iota", "kappa")


def _default_names(dim, pool, prefix):
    if dim <= len(pool):
        return tuple(pool[:dim])
    return tuple(f"{prefix}{i}" for i in range(dim))


@dataclass(frozen=True)
class Relation:
    """A homogeneous relation tensor: a vector in V^(x)degree."""

    degree: int
    vector: dict


@dataclass(frozen=True)
class Presentation:
    """Generators, coefficients, homogeneous relations and a degree bound."""

    dim_v: int
    dim_w: int
    relations: tuple = ()
    twist: LinMap | None = None
    max_degree: int = 2
    v_names: tuple = ()
    w_names: tuple = ()

    def __post_init__(self):
        if self.dim_v < 0 or self.dim_w < 0:
            raise ValueError("dimensions must be nonnegative")
        if not self.v_names:
            object.__setattr__(self, "v_names",
                               _default_names(self.dim_v, _DEFAULT_V, "x"))
        if not self.w_names:
            object.__setattr__(self, "w_names",
                               _default_names(self.dim_w, _DEFAULT_W, "xi"))
        if len(self.v_names) != self.dim_v or len(self.w_names) != self.dim_w:
            raise ValueError("name lists must match the dimensions")
        if self.max_degree < 2:
            raise ValueError("max_degree must be at least 2")
        for rel in self.relations:
            if rel.degree < 2:
                raise ValueError("relation words must have length at least 2")
            if rel.degree > self.max_degree:
                raise ValueError(
                    f"relation of degree {rel.degree} exceeds max_degree {self.max_degree}")
            bound = self.dim_v ** rel.degree
            if any(not 0 <= k < bound for k in rel.vector):
                raise ValueError("relation coordinates out of range")
        if self.twist is not None:
            vv = self.component("VV")
            if self.twist.dom != vv or self.twist.cod != vv:
                raise ValueError(
                    f"twist must be an endomorphism of {vv}, got "
                    f"{self.twist.cod} <- {self.twist.dom}")
            image = rref_basis(vv, self.twist.cols)
            if image != self.quadratic_space():
                raise ValueError(
                    "twist image differs from the span of the quadratic relations")

    # -- shapes ------------------------------------------------------------

    def component(self, pattern: str) -> Shape:
        """Tensor component shape from a pattern such as ``"WVV"``."""
        return Shape.of(pattern, self.dim_v, self.dim_w)

    def v_power(self, n: int) -> Shape:
        return Shape(("V",) * n, (self.dim_v,) * n)

    # -- relations ---------------------------------------------------------

    def is_quadratic(self) -> bool:
        return all(rel.degree == 2 for rel in self.relations)

    def require_quadratic(self):
        if not self.is_quadratic():
            degrees = sorted({rel.degree for rel in self.relations if rel.degree != 2})
            raise NonQuadraticError(
                f"operation requires a quadratic presentation; "
                f"found relation degrees {degrees}")

    def quadratic_space(self) -> Subspace:
        """Echelon span of the degree-2 relations inside V(x)V."""
        return rref_basis(self.component("VV"),
                          [rel.vector for rel in self.relations if rel.degree == 2])

    def effective_twist(self) -> LinMap:
        """The given twist, or the canonical projection onto the relation span.

        The synthesized map projects V(x)V onto the quadratic relation space
        along the normal-form complement, so its image is exactly that space.
        """
        if self.twist is not None:
            return self.twist
        space = self.quadratic_space()
        vv = self.component("VV")
        cols = []
        for m in range(vv.total_dim):
            e = {m: ONE}
            residual = space.reduce(e)
            col = dict(e)
            for k, s in residual.items():
                cur = col.get(k)
                if cur is not None:
                    cur = cur - s
                    if cur:
                        col[k] = cur
                    else:
                        del col[k]
                else:
                    col[k] = -s
            cols.append(col)
        return LinMap(vv, vv, cols)


@dataclass(frozen=True)
class InitialData:
    """The structure maps on generators that determine the whole calculus."""

    d0: LinMap
    b0: LinMap

    def __post_init__(self):
        dv, dw = self.dim_v, self.dim_w
        if self.d0.dom != Shape(("V",), (dv,)) or self.d0.cod != Shape(("W",), (dw,)):
            raise ValueError(f"d0 must map V -> W, got {self.d0!r}")
        want_dom = Shape(("V", "W"), (dv, dw))
        want_cod = Shape(("W", "V"), (dw, dv))
        if self.b0.dom != want_dom or self.b0.cod != want_cod:
            raise ValueError(
                f"b0 must map {want_dom} -> {want_cod}, got {self.b0!r}")

    @property
    def dim_v(self) -> int:
        return self.d0.dom.dims[0] if self.d0.dom.dims else 0

    @property
    def dim_w(self) -> int:
        return self.d0.cod.dims[0] if self.d0.cod.dims else 0

    @classmethod
    def from_rows(cls, dim_v: int, dim_w: int, d0_rows, b0_rows) -> "InitialData":
        d0 = LinMap.from_rows(Shape(("V",), (dim_v,)), Shape(("W",), (dim_w,)), d0_rows)
        b0 = LinMap.from_rows(Shape(("V", "W"), (dim_v, dim_w)),
                              Shape(("W", "V"), (dim_w, dim_v)), b0_rows)
        return cls(d0, b0)


# ---------------------------------------------------------------------------
# towers on the tensor algebra
# ---------------------------------------------------------------------------

def extend_b(data: InitialData, n_max: int) -> dict:
    """Commutation maps ``b_n : V^n (x) W -> W (x) V^n`` for n = 0..n_max.

    ``b_0`` is the identity on W (coefficients commute with scalars) and
    ``b_n = (b0 (x) id) o (id_V (x) b_{n-1})``: the leftmost generator is
    moved past the coefficient after the rest of the word.
    """
    dv = data.dim_v
    id_v = LinMap.identity(Shape(("V",), (dv,)))
    maps = {0: LinMap.identity(Shape(("W",), (data.dim_w,)))}
    if n_max >= 1:
        maps[1] = data.b0
    for n in range(2, n_max + 1):
        id_rest = LinMap.identity(Shape(("V",) * (n - 1), (dv,) * (n - 1)))
        maps[n] = compose(kron(data.b0, id_rest), kron(id_v, maps[n - 1]))
    return maps


def extend_d(data: InitialData, n_max: int) -> dict:
    """Differentials ``d_n : V^n -> W (x) V^(n-1)`` for n = 1..n_max.

    ``d_1 = d0`` and
    ``d_n = d0 (x) id + (b0 (x) id) o (id_V (x) d_{n-1})``, the two-term
    product rule with the leftmost letter split off.
    """
    dv = data.dim_v
    id_v = LinMap.identity(Shape(("V",), (dv,)))
    maps = {}
    if n_max >= 1:
        maps[1] = data.d0
    for n in range(2, n_max + 1):
        id_rest = LinMap.identity(Shape(("V",) * (n - 1), (dv,) * (n - 1)))
        id_rest2 = LinMap.identity(Shape(("V",) * (n - 2), (dv,) * (n - 2)))
        left = kron(data.d0, id_rest)
        right = compose(kron(data.b0, id_rest2), kron(id_v, maps[n - 1]))
        maps[n] = add_maps(left, right)
    return maps


@dataclass(frozen=True)
class CalculusTower:
    """Per-degree maps of the unique calculus the initial data generate."""

    data: InitialData
    n_max: int
    b: dict = field(repr=False)
    d: dict = field(repr=False)

    def b_map(self, n: int) -> LinMap:
        return self.b[n]

    def d_map(self, n: int) -> LinMap:
        if n < 1:
            raise ValueError("the differential vanishes on scalars; no map at degree 0")
        return self.d[n]

    def apply_d(self, n: int, vec: dict) -> dict:
        if n == 0:
            return {}
        return self.d[n].apply(vec)


def build_towers(data: InitialData, n_max: int) -> CalculusTower:
    return CalculusTower(data, n_max, extend_b(data, n_max), extend_d(data, n_max))


def concat_right(w_vec: dict, y_index: int, y_degree: int, dim_v: int) -> dict:
    """Right action of the monomial ``y`` on ``W (x) V^k``: concatenation."""
    shift = dim_v ** y_degree
    return {k * shift + y_index: s for k, s in w_vec.items()}


def act_left(tower: CalculusTower, x_index: int, x_degree: int,
             w_vec: dict, rest_degree: int) -> dict:
    """Left action of the monomial ``x`` on a vector in ``W (x) V^rest``.

    Moves x past the coefficient with ``b_{x_degree}`` and concatenates:
    ``x . (w (x) y) = b(x (x) w) . y``.
    """
    if x_degree == 0:
        return dict(w_vec)
    dv, dw = tower.data.dim_v, tower.data.dim_w
    shift = dv ** rest_degree
    b_cols = tower.b[x_degree].cols
    out: dict = {}
    for idx, s in w_vec.items():
        j, y = divmod(idx, shift)
        col = b_cols[x_index * dw + j]
        for widx, t in col.items():
            key = widx * shift + y
            cur = out.get(key)
            if cur is None:
                out[key] = s * t
            else:
                cur = cur + s * t
                if cur:
                    out[key] = cur
                else:
                    del out[key]
    return out


def b_coherence_defect(tower: CalculusTower, p: int, r: int):
    """First column where ``b_{p+r}`` differs from the (p, r)-split composite.

    Returns ``None`` when ``b_{p+r} = (b_p (x) id) o (id (x) b_r)`` holds
    exactly, else ``(word index, coefficient index, difference vector)``.
    """
    dv, dw = tower.data.dim_v, tower.data.dim_w
    n = p + r
    shift = dv ** r
    b_n = tower.b[n]
    b_r = tower.b[r]
    for u in range(dv ** n):
        x, y = divmod(u, shift)
        for j in range(dw):
            inner = b_r.cols[y * dw + j]
            expect = act_left(tower, x, p, inner, r)
            got = b_n.cols[u * dw + j]
            if expect != got:
                diff = dict(expect)
                vec_iadd(diff, got, -1)
                return u, j, diff
    return None


def split_leibniz_defect(tower: CalculusTower, p: int, r: int):
    """First word where the (p, r)-split product rule fails.

    Checks ``d(uv) = d(u).v + u.d(v)`` on all basis words u of degree p and
    v of degree r; returns ``None`` or ``(u index, v index, defect)``.
    """
    dv = tower.data.dim_v
    n = p + r
    d_n = tower.d[n]
    shift = dv ** r
    for u in range(dv ** p):
        du = tower.d[p].cols[u] if p else {}
        for v in range(shift):
            acc = concat_right(du, v, r, dv)
            if r:
                vec_iadd(acc, act_left(tower, u, p, tower.d[r].cols[v], r - 1), 1)
            got = d_n.cols[u * shift + v]
            if acc != got:
                diff = dict(acc)
                vec_iadd(diff, got, -1)
                return u, v, diff
    return None


# ---------------------------------------------------------------------------
# graded relation ideals and quotient normal forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GradedIdeal:
    """Per-degree components of the two-sided ideal spanned by the relations."""

    n_max: int
    components: tuple

    def component(self, n: int) -> Subspace:
        if n > self.n_max:
            raise ValueError(f"ideal built to degree {self.n_max}, asked for {n}")
        return self.components[n]


def build_ideal(pres: Presentation, n_max: int | None = None) -> GradedIdeal:
    """Homogeneous ideal components K_n for n <= n_max.

    Each degree is the span of both one-step shifts of the previous degree,
    plus the degree-n relation generators: the recurrence
    ``K_{n+1} = V (x) K_n + K_n (x) V`` extended to generators of any degree.
    """
    n = pres.max_degree if n_max is None else n_max
    top_rel = max((r.degree for r in pres.relations), default=2)
    if n < top_rel:
        raise ValueError(f"degree bound {n} is below the top relation degree {top_rel}")
    comps = [Subspace.zero(pres.v_power(0)), Subspace.zero(pres.v_power(1))]
    for k in range(2, n + 1):
        vectors = []
        prev = comps[k - 1]
        if prev.dim:
            vectors.extend(embed_shifted(prev, "left").rows)
            vectors.extend(embed_shifted(prev, "right").rows)
        vectors.extend(r.vector for r in pres.relations if r.degree == k)
        comps.append(rref_basis(pres.v_power(k), vectors))
    return GradedIdeal(n, tuple(comps))


@dataclass(frozen=True)
class QuotientAlgebra:
    """Normal-form data for the graded quotient of the tensor algebra.

    Per degree: the monomials complementary to the ideal's pivot set form
    the normal-form basis; reduction maps any word onto it along the ideal.
    """

    pres: Presentation
    ideal: GradedIdeal
    n_max: int
    normal: tuple          # per degree: ascending tuple of monomial indices
    positions: tuple       # per degree: {monomial index: position}

    def dim_a(self, n: int) -> int:
        return len(self.normal[n])

    def reduce_vec(self, n: int, vec: dict) -> dict:
        """Normal form of a degree-n coordinate vector (section composed
        with reduction); keys are monomial indices of V^n."""
        return self.ideal.component(n).reduce(vec)

    def coords(self, n: int, vec: dict) -> dict:
        """Positional A_n coordinates of a (possibly unreduced) vector."""
        residual = self.reduce_vec(n, vec)
        pos = self.positions[n]
        return {pos[k]: s for k, s in residual.items()}

    def section(self, n: int, coords: dict) -> dict:
        """Normal-form representative in V^n of positional A_n coordinates."""
        normal = self.normal[n]
        return {normal[p]: s for p, s in coords.items()}

    def word_of(self, n: int, index: int):
        return self.pres.v_power(n).multi_of(index) if n else ()


def build_quotient(pres: Presentation, ideal: GradedIdeal) -> QuotientAlgebra:
    normal = []
    positions = []
    for n in range(ideal.n_max + 1):
        comp = ideal.component(n)
        monos = comp.complement_indices()
        normal.append(monos)
        positions.append({m: i for i, m in enumerate(monos)})
        assert len(monos) + comp.dim == pres.v_power(n).total_dim
    return QuotientAlgebra(pres, ideal, ideal.n_max, tuple(normal), tuple(positions))
