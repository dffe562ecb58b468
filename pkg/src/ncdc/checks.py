"""Consistency checks and solvers for calculi on graded quotients.

Every decision procedure returns a :class:`Report` carrying a verdict and,
on failure, a serialized witness: the offending input vector together with
the nonzero residual that certifies the failure.  Where the theory offers
two routes to the same verdict (twist route vs relation-basis route,
subspace route vs endomorphism route), both are computed and their
agreement is asserted on every call.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ncdc.calculus import (
    CalculusTower,
    GradedIdeal,
    InitialData,
    Presentation,
    QuotientAlgebra,
    Relation,
    act_left,
    build_ideal,
    build_quotient,
    build_towers,
    concat_right,
)
from ncdc.linalg import (
    LinMap,
    Shape,
    ShapeMismatchError,
    Subspace,
    add_maps,
    append_factor,
    compose,
    kernel_image,
    kron,
    nullspace_of_columns,
    prepend_factor,
    rref_basis,
    vec_iadd,
    vec_to_dense,
)
from ncdc.scalars import ONE, scalar_str


@dataclass(frozen=True)
class WitnessVector:
    """A coordinate vector tagged with the component it lives in."""

    shape: Shape
    coords: dict

    def to_json(self):
        dense = vec_to_dense(self.coords, self.shape.total_dim)
        return {
            "factors": list(self.shape.factors),
            "dims": list(self.shape.dims),
            "entries": [scalar_str(e) for e in dense],
        }


@dataclass
class Report:
    """Outcome of one check: verdict, failing degree, and witness data."""

    condition: str
    title: str
    passed: bool
    degree: int | None = None
    witness: WitnessVector | None = None
    residual: WitnessVector | None = None
    detail: str = ""
    extra: dict = field(default_factory=dict)

    def to_json(self):
        out = {
            "condition": self.condition,
            "title": self.title,
            "passed": self.passed,
        }
        if self.degree is not None:
            out["degree"] = self.degree
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        if self.residual is not None:
            out["residual"] = self.residual.to_json()
        if self.detail:
            out["detail"] = self.detail
        if self.extra:
            out["extra"] = self.extra
        return out


def _leibniz_degree2(d0: LinMap, b0: LinMap) -> LinMap:
    """The degree-2 product-rule map ``d0 (x) id + b0 o (id (x) d0)``."""
    dv = d0.dom.dims[0] if d0.dom.dims else 0
    id_v = LinMap.identity(Shape(("V",), (dv,)))
    return add_maps(kron(d0, id_v), compose(b0, kron(id_v, d0)))


def _b2(data: InitialData) -> LinMap:
    dv = data.dim_v
    id_v = LinMap.identity(Shape(("V",), (dv,)))
    return compose(kron(data.b0, id_v), kron(id_v, data.b0))


def _vec_diff(a: dict, b: dict) -> dict:
    out = dict(a)
    vec_iadd(out, b, -1)
    return out


# ---------------------------------------------------------------------------
# the two quadratic-era consistency conditions, in three forms
# ---------------------------------------------------------------------------

def check_linear(data: InitialData, pres: Presentation) -> Report:
    """The differential must annihilate every quadratic relation.

    Evaluated on an echelon basis of the relation span and, independently,
    as the exact matrix identity ``(d0 (x) id + b0 o (id (x) d0)) o c = 0``
    for the (given or synthesized) twist c; the verdicts must agree.
    """
    pres.require_quadratic()
    lmap = _leibniz_degree2(data.d0, data.b0)
    space = pres.quadratic_space()
    witness = residual = None
    for row in space.rows:
        img = lmap.apply(row)
        if img:
            witness, residual = row, img
            break
    twist_route = compose(lmap, pres.effective_twist()).is_zero()
    assert twist_route == (witness is None), \
        "twist route disagrees with relation-basis route"
    if witness is None:
        return Report("linear", "differential annihilates the quadratic relations",
                      True, degree=2)
    return Report(
        "linear", "differential annihilates the quadratic relations", False,
        degree=2,
        witness=WitnessVector(pres.component("VV"), witness),
        residual=WitnessVector(pres.component("WV"), residual),
        detail="a relation with nonzero differential")


def check_quadratic(data: InitialData, pres: Presentation) -> Report:
    """Commuting a relation past any coefficient must stay in the relation span.

    Computes the image of K (x) W under the two-step commutation map as a
    subspace and decides containment in W (x) K; the per-generator scan and
    the subspace-level containment must agree.
    """
    pres.require_quadratic()
    space = pres.quadratic_space()
    dw = data.dim_w
    b2 = _b2(data)
    kw = append_factor(space, "W", dw)
    wk = prepend_factor(space, "W", dw)
    fail = None
    images = []
    for row in kw.rows:
        img = b2.apply(row)
        images.append(img)
        if fail is None:
            res = wk.reduce(img)
            if res:
                fail = (row, res)
    image_space = rref_basis(b2.cod, images)
    contained, _ = wk.contains_subspace(image_space)
    assert contained == (fail is None), \
        "subspace containment disagrees with the generator scan"
    if fail is None:
        return Report("quadratic",
                      "commutation rule preserves the relation span", True, degree=2)
    row, res = fail
    return Report(
        "quadratic", "commutation rule preserves the relation span", False,
        degree=2,
        witness=WitnessVector(kw.ambient, row),
        residual=WitnessVector(wk.ambient, res),
        detail="image of a relation-coefficient pair leaves the extended span")


def check_operator_form(data: InitialData, pres: Presentation) -> Report:
    """Endomorphism-valued form of the quadratic condition.

    Reshapes the two-step commutation map into a family of maps
    ``W -> W (x) V (x) V`` (finite-dimensional W makes this lossless) and
    requires every coefficient-pair slice of a relation's image to lie in
    the relation span.  Must agree with :func:`check_quadratic`, and is
    asserted to on every call.
    """
    pres.require_quadratic()
    space = pres.quadratic_space()
    dv, dw = data.dim_v, data.dim_w
    dv2 = dv * dv
    b2 = _b2(data)
    fail = None
    for row in space.rows:
        for j_in in range(dw):
            img = b2.apply({m * dw + j_in: s for m, s in row.items()})
            slices: dict = {}
            for idx, s in img.items():
                j_out, m = divmod(idx, dv2)
                slices.setdefault(j_out, {})[m] = s
            for j_out in sorted(slices):
                res = space.reduce(slices[j_out])
                if res:
                    fail = (slices[j_out], res, j_out, j_in)
                    break
            if fail:
                break
        if fail:
            break
    verdict = fail is None
    assert check_quadratic(data, pres).passed == verdict, \
        "endomorphism route disagrees with the subspace route"
    if verdict:
        return Report("operator",
                      "endomorphism form of the commutation condition", True, degree=2)
    slc, res, j_out, j_in = fail
    return Report(
        "operator", "endomorphism form of the commutation condition", False,
        degree=2,
        witness=WitnessVector(pres.component("VV"), slc),
        residual=WitnessVector(pres.component("VV"), res),
        detail=f"coefficient slice (out={j_out}, in={j_in}) leaves the relation span")


def check_braid(b0: LinMap, twist: LinMap) -> Report:
    """Exact two-sided exchange identity between the twist and the
    commutation rule on V (x) V (x) W.

    A pass also exhibits the induced intertwiner (the two-step commutation
    map) that transports the twist across the coefficient factor.
    """
    dv, dw = b0.dom.dims
    vv = Shape(("V", "V"), (dv, dv))
    if twist.dom != vv or twist.cod != vv:
        raise ShapeMismatchError(f"twist must be an endomorphism of {vv}, "
                                 f"got {twist.cod} <- {twist.dom}")
    id_v = LinMap.identity(Shape(("V",), (dv,)))
    id_w = LinMap.identity(Shape(("W",), (dw,)))
    b2 = compose(kron(b0, id_v), kron(id_v, b0))
    lhs = compose(b2, kron(twist, id_w))
    rhs = compose(kron(id_w, twist), b2)
    diff = add_maps(lhs, -rhs)
    for c, col in enumerate(diff.cols):
        if col:
            return Report(
                "braid", "twist exchange identity", False, degree=2,
                witness=WitnessVector(lhs.dom, {c: ONE}),
                residual=WitnessVector(lhs.cod, col),
                detail="the two transport orders differ on a basis tensor")
    return Report("braid", "twist exchange identity", True, degree=2,
                  extra={"intertwiner": b2.to_string_rows()})


# ---------------------------------------------------------------------------
# degree-by-degree scan of a full homogeneous ideal
# ---------------------------------------------------------------------------

def check_truncated(data: InitialData, ideal: GradedIdeal, n_max: int) -> Report:
    """Scan ``d I_n <= W (x) I_{n-1}`` and ``b (I_n (x) W) <= W (x) I_n``
    for every degree n up to the bound; first failure wins.

    For ideals generated in degree 2 this is equivalent to the pair of
    quadratic-era checks; the scan decides the general homogeneous case.
    """
    if n_max > ideal.n_max:
        raise ValueError(
            f"scan degree {n_max} exceeds the built ideal range {ideal.n_max}")
    towers = build_towers(data, n_max)
    dw = data.dim_w
    title = "calculus descends to the quotient (degree scan)"
    for n in range(2, n_max + 1):
        comp = ideal.component(n)
        if comp.dim == 0:
            continue
        w_prev = prepend_factor(ideal.component(n - 1), "W", dw)
        d_n = towers.d_map(n)
        for row in comp.rows:
            res = w_prev.reduce(d_n.apply(row))
            if res:
                return Report(
                    "truncated", title, False, degree=n,
                    witness=WitnessVector(d_n.dom, row),
                    residual=WitnessVector(d_n.cod, res),
                    detail=f"differential image leaves the ideal at degree {n}")
        w_here = prepend_factor(comp, "W", dw)
        b_n = towers.b_map(n)
        for row in comp.rows:
            for j in range(dw):
                vec = {k * dw + j: s for k, s in row.items()}
                res = w_here.reduce(b_n.apply(vec))
                if res:
                    return Report(
                        "truncated", title, False, degree=n,
                        witness=WitnessVector(b_n.dom, vec),
                        residual=WitnessVector(b_n.cod, res),
                        detail=f"commutation image leaves the ideal at degree {n}")
    return Report("truncated", title, True, degree=n_max)


# ---------------------------------------------------------------------------
# universal-derivation factorization
# ---------------------------------------------------------------------------

def universal_delta_check(data: InitialData, n_max: int) -> Report:
    """Factorization of the calculus through the universal difference map.

    For every basis word u the element ``u (x) 1 - 1 (x) u`` of the
    multiplication kernel must map to ``d u`` under both evaluation rules
    (differentiate-left-concatenate-right, and its negated mirror through
    the left action), and every same-product pair ``x (x) y - xy (x) 1``
    must map to zero.  Holds for arbitrary initial data.
    """
    towers = build_towers(data, n_max)
    dv = data.dim_v
    title = "calculus factors through the universal difference map"
    for n in range(n_max + 1):
        for u in range(dv ** n):
            du = towers.d[n].cols[u] if n else {}
            # u (x) 1 - 1 (x) u, right rule: d(u).1 - d(1).u = d(u)
            right = concat_right(du, 0, 0, dv)
            # same element, left rule: -u.d(1) + 1.d(u) = d(u)
            left = act_left(towers, 0, 0, du, n - 1) if n else {}
            if right != du or left != du:
                return Report(
                    "delta", title, False, degree=n,
                    witness=WitnessVector(towers.data.d0.dom if n == 1
                                          else Shape(("V",) * n, (dv,) * n), {u: ONE}),
                    detail="unit terms fail to cancel")
            # x (x) y - xy (x) 1 lies in the multiplication kernel; both
            # evaluation rules must send it to zero
            for p in range(1, n):
                r = n - p
                x, y = divmod(u, dv ** r)
                acc = concat_right(towers.d[p].cols[x], y, r, dv)
                vec_iadd(acc, act_left(towers, x, p, towers.d[r].cols[y], r - 1), 1)
                vec_iadd(acc, du, -1)
                if acc:
                    return Report(
                        "delta", title, False, degree=n,
                        witness=WitnessVector(Shape(("V",) * n, (dv,) * n), {u: ONE}),
                        residual=WitnessVector(towers.d[n].cod, acc),
                        detail=f"evaluation rules disagree on the ({p}, {r}) split")
    return Report("delta", title, True, degree=n_max)


# ---------------------------------------------------------------------------
# the largest consistent quadratic relation space
# ---------------------------------------------------------------------------

def optimal_quadratic_relations(data: InitialData):
    """Greatest quadratic relation space consistent with the initial data.

    Starts from the kernel of the degree-2 product-rule map and repeatedly
    removes the part not stable under commutation with coefficients; the
    finite-dimensional greatest fixpoint contains every consistent
    quadratic relation space.  For switch-type commutation rules the
    refinement is vacuous; for general rules it is a proper extension of
    the switch-map picture and is labeled as such.

    Returns ``(subspace, report)``.
    """
    dv, dw = data.dim_v, data.dim_w
    vv = Shape(("V", "V"), (dv, dv))
    lmap = _leibniz_degree2(data.d0, data.b0)
    space = kernel_image(lmap)[0]
    dim_kernel = space.dim
    b2 = _b2(data)
    steps = 0
    while space.dim:
        wk = prepend_factor(space, "W", dw)
        cod_total = b2.cod.total_dim
        stacked = []
        stable = True
        for row in space.rows:
            col: dict = {}
            for j in range(dw):
                res = wk.reduce(b2.apply({m * dw + j: s for m, s in row.items()}))
                if res:
                    stable = False
                    base = j * cod_total
                    for k, s in res.items():
                        col[base + k] = s
            stacked.append(col)
        if stable:
            break
        steps += 1
        vectors = []
        for t in nullspace_of_columns(stacked, space.dim):
            v: dict = {}
            for i, coeff in t.items():
                vec_iadd(v, space.rows[i], coeff)
            vectors.append(v)
        space = rref_basis(vv, vectors)
    synthetic = Presentation(
        dv, dw, relations=tuple(Relation(2, dict(r)) for r in space.rows),
        max_degree=2)
    assert check_linear(data, synthetic).passed
    assert check_quadratic(data, synthetic).passed
    report = Report(
        "optimal", "largest consistent quadratic relation space", True, degree=2,
        detail=("greatest commutation-stable subspace of the product-rule kernel; "
                "refinement beyond the switch-rule case"
                if steps else
                "product-rule kernel, already commutation-stable"),
        extra={
            "dim_kernel": dim_kernel,
            "dim_optimal": space.dim,
            "refinement_steps": steps,
            "basis": [[scalar_str(e) for e in vec_to_dense(r, vv.total_dim)]
                      for r in space.rows],
        })
    return space, report


def first_term_kernel(data: InitialData) -> Subspace:
    """Kernel of ``d0 (x) id`` alone: the first-term-only reading of the
    switch-rule condition.  Kept separate so callers can flag when it
    disagrees with the full product-rule kernel."""
    dv = data.dim_v
    id_v = LinMap.identity(Shape(("V",), (dv,)))
    return kernel_image(kron(data.d0, id_v))[0]


# ---------------------------------------------------------------------------
# solving for differentials compatible with a given twist
# ---------------------------------------------------------------------------

def solve_d0(b0: LinMap, twist: LinMap):
    """Echelon basis of all ``d0 : V -> W`` whose degree-2 product-rule map
    kills the image of the twist.

    The condition is linear in d0; the solver computes the kernel of
    ``d0 |-> (d0 (x) id + b0 o (id (x) d0)) o c`` over the coordinate
    space of candidate maps.  Every returned map is asserted to pass
    :func:`check_linear` against the presentation cut out by the twist.
    """
    dv, dw = b0.dom.dims
    vv = Shape(("V", "V"), (dv, dv))
    if twist.dom != vv or twist.cod != vv:
        raise ShapeMismatchError(f"twist must be an endomorphism of {vv}, "
                                 f"got {twist.cod} <- {twist.dom}")
    v_shape = Shape(("V",), (dv,))
    w_shape = Shape(("W",), (dw,))
    coord_shape = Shape(("W", "V"), (dw, dv))
    dv2 = dv * dv
    stacked = []
    for gamma in range(dw):
        for i in range(dv):
            cols = [dict() for _ in range(dv)]
            cols[i][gamma] = ONE
            elem = LinMap(v_shape, w_shape, cols)
            m = compose(_leibniz_degree2(elem, b0), twist)
            flat: dict = {}
            for cc, col in enumerate(m.cols):
                for rr, s in col.items():
                    flat[rr * dv2 + cc] = s
            stacked.append(flat)
    basis = rref_basis(coord_shape, nullspace_of_columns(stacked, dw * dv))
    image = rref_basis(vv, twist.cols)
    pres = Presentation(
        dv, dw, relations=tuple(Relation(2, dict(r)) for r in image.rows),
        twist=twist, max_degree=2)
    solutions = []
    for row in basis.rows:
        cols = [dict() for _ in range(dv)]
        for key, s in row.items():
            gamma, i = divmod(key, dv)
            cols[i][gamma] = s
        d0 = LinMap(v_shape, w_shape, cols)
        assert check_linear(InitialData(d0, b0), pres).passed
        solutions.append(d0)
    return solutions


# ---------------------------------------------------------------------------
# the reduced calculus on the quotient
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FactorCalculus:
    """Reduced differential and commutation maps on normal-form coordinates.

    ``d_cols[n]`` has one column per normal monomial of degree n, entries
    keyed ``(coefficient index, position in degree n-1)``; ``b_cols[n]``
    has one column per (normal monomial, coefficient) pair, entries keyed
    ``(coefficient index, position in degree n)``.
    """

    qa: QuotientAlgebra
    towers: CalculusTower
    d_cols: dict
    b_cols: dict

    def partials(self, element: dict) -> list:
        """Partial-derivative decomposition of ``d(element)`` along the
        coefficient basis; element and results are ``{degree: vector}``
        dicts in normal-form monomial coordinates."""
        qa = self.qa
        dv = qa.pres.dim_v
        out = [dict() for _ in range(qa.pres.dim_w)]
        for n, part in sorted(element.items()):
            if n == 0 or not part:
                continue
            reduced = qa.reduce_vec(n, part)
            img = self.towers.d_map(n).apply(reduced)
            shift = dv ** (n - 1)
            slices: dict = {}
            for idx, s in img.items():
                gamma, m = divmod(idx, shift)
                slices.setdefault(gamma, {})[m] = s
            for gamma, vec in slices.items():
                res = qa.reduce_vec(n - 1, vec)
                if res:
                    out[gamma][n - 1] = res
        return out


@dataclass(frozen=True)
class FactorResult:
    factor: FactorCalculus | None
    report: Report

    @property
    def ok(self) -> bool:
        return self.factor is not None


def _w_slices_reduced(qa: QuotientAlgebra, k: int, vec: dict, dim_v: int) -> dict:
    """Split a W (x) V^k vector along W and reduce each slice; keys are
    (coefficient index, position)."""
    shift = dim_v ** k
    slices: dict = {}
    for idx, s in vec.items():
        gamma, m = divmod(idx, shift)
        slices.setdefault(gamma, {})[m] = s
    out: dict = {}
    for gamma, sl in slices.items():
        for m, s in qa.reduce_vec(k, sl).items():
            out[(gamma, qa.positions[k][m])] = s
    return out


def factor_calculus(data: InitialData, pres: Presentation) -> FactorResult:
    """Reduce the calculus to the quotient algebra, or refuse with the
    failing report.

    Gate: the quadratic-era checks for quadratic presentations, the full
    degree scan otherwise.  After building the reduced maps the commuting
    squares (reduction after the cover map equals the reduced map after
    reduction) are verified on every basis word up to the degree bound.
    """
    ideal = build_ideal(pres)
    qa = build_quotient(pres, ideal)
    if pres.is_quadratic():
        report = check_linear(data, pres)
        if report.passed:
            report = check_quadratic(data, pres)
        if report.passed:
            report = check_truncated(data, ideal, pres.max_degree)
    else:
        report = check_truncated(data, ideal, pres.max_degree)
    if not report.passed:
        return FactorResult(None, report)
    n_max = pres.max_degree
    towers = build_towers(data, n_max)
    dv, dw = data.dim_v, data.dim_w
    d_cols = {}
    b_cols = {}
    for n in range(1, n_max + 1):
        d_n = towers.d_map(n)
        b_n = towers.b_map(n)
        d_cols[n] = tuple(_w_slices_reduced(qa, n - 1, d_n.cols[m], dv)
                          for m in qa.normal[n])
        b_cols[n] = tuple(_w_slices_reduced(qa, n, b_n.cols[m * dw + j], dv)
                          for m in qa.normal[n] for j in range(dw))
        # commuting squares on every basis word, not only on generators
        for m in range(dv ** n):
            cover = _w_slices_reduced(qa, n - 1, d_n.cols[m], dv)
            lifted: dict = {}
            for mono, s in qa.reduce_vec(n, {m: ONE}).items():
                vec_iadd(lifted, d_cols[n][qa.positions[n][mono]], s)
            assert cover == lifted, f"differential square broken at degree {n}"
            for j in range(dw):
                cover_b = _w_slices_reduced(qa, n, b_n.cols[m * dw + j], dv)
                lifted_b: dict = {}
                for mono, s in qa.reduce_vec(n, {m: ONE}).items():
                    vec_iadd(lifted_b,
                             b_cols[n][qa.positions[n][mono] * dw + j], s)
                assert cover_b == lifted_b, f"commutation square broken at degree {n}"
    factor = FactorCalculus(qa, towers, d_cols, b_cols)
    passed = Report(
        "factor", "calculus descends to the quotient", True, degree=n_max,
        detail="reduced maps built; commuting squares verified on all basis words",
        extra={"dims": [qa.dim_a(n) for n in range(n_max + 1)]})
    return FactorResult(factor, passed)


def partial_derivatives(qa: QuotientAlgebra, factor: FactorCalculus,
                        element: dict) -> list:
    """Partial derivatives of an algebra element along the coefficient basis.

    The element is reduced first; the returned list has one
    ``{degree: vector}`` entry per coefficient generator, and reassembling
    ``sum_gamma xi^gamma (x) D_gamma`` recovers the reduced differential.
    """
    assert factor.qa is qa
    return factor.partials(element)
