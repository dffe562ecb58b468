"""Exact linear algebra on tensor components built from V and W.

Vectors are sparse ``{coordinate: Scalar}`` dicts that never store zeros.
Maps act on coordinate columns; matrices are kept column-sparse behind a
dense row-major serialization.  The basis of a tensor component is
enumerated lexicographically with the leftmost factor most significant;
this single convention is shared by every serialized matrix.
"""

from __future__ import annotations

from gmpy2 import mpq

from ncdc.scalars import ONE, ZERO, Scalar, as_scalar, scalar_str


class ShapeMismatchError(ValueError):
    """Operands live on incompatible tensor components."""


def _mismatch(what, a, b):
    return ShapeMismatchError(f"{what}: {a} vs {b}")


class Shape:
    """An ordered tensor product of V and W factors with fixed dimensions."""

    __slots__ = ("factors", "dims", "total_dim", "_strides")

    def __init__(self, factors, dims):
        factors = tuple(factors)
        dims = tuple(int(d) for d in dims)
        if len(factors) != len(dims):
            raise ValueError("factors and dims must have equal length")
        if any(f not in ("V", "W") for f in factors):
            raise ValueError(f"unknown factor in {factors}")
        if any(d < 0 for d in dims):
            raise ValueError("dimensions must be nonnegative")
        self.factors = factors
        self.dims = dims
        total = 1
        strides = []
        for d in reversed(dims):
            strides.append(total)
            total *= d
        self._strides = tuple(reversed(strides))
        self.total_dim = total

    @classmethod
    def of(cls, pattern: str, dim_v: int, dim_w: int) -> "Shape":
        """Shape from a factor pattern like ``"VVW"``."""
        return cls(tuple(pattern), tuple(dim_v if f == "V" else dim_w for f in pattern))

    def index_of(self, multi) -> int:
        if len(multi) != len(self.dims):
            raise ValueError(f"multi-index length {len(multi)} != {len(self.dims)}")
        idx = 0
        for m, d, s in zip(multi, self.dims, self._strides):
            if not 0 <= m < d:
                raise ValueError(f"index {m} out of range for dimension {d}")
            idx += m * s
        return idx

    def multi_of(self, index: int):
        if not 0 <= index < max(self.total_dim, 1):
            raise ValueError(f"index {index} out of range for {self}")
        out = []
        for s in self._strides:
            out.append(index // s)
            index %= s
        return tuple(out)

    def concat(self, other: "Shape") -> "Shape":
        return Shape(self.factors + other.factors, self.dims + other.dims)

    def is_v_power(self) -> bool:
        return all(f == "V" for f in self.factors)

    def __eq__(self, other):
        if not isinstance(other, Shape):
            return NotImplemented
        return self.factors == other.factors and self.dims == other.dims

    def __hash__(self):
        return hash((self.factors, self.dims))

    def __repr__(self):
        if not self.factors:
            return "Shape(k)"
        body = "*".join(f"{f}{d}" for f, d in zip(self.factors, self.dims))
        return f"Shape({body})"


SCALAR_SHAPE = Shape((), ())


# ---------------------------------------------------------------------------
# sparse vectors
# ---------------------------------------------------------------------------

def vec_iadd(acc: dict, v: dict, coeff) -> dict:
    """In-place ``acc += coeff * v``; drops cancelled entries."""
    if not coeff:
        return acc
    for k, s in v.items():
        cur = acc.get(k)
        if cur is None:
            acc[k] = coeff * s
        else:
            cur = cur + coeff * s
            if cur:
                acc[k] = cur
            else:
                del acc[k]
    return acc


def vec_scale(v: dict, coeff) -> dict:
    if not coeff:
        return {}
    return {k: coeff * s for k, s in v.items()}


def vec_from_dense(entries) -> dict:
    out = {}
    for i, e in enumerate(entries):
        s = as_scalar(e)
        if s:
            out[i] = s
    return out


def vec_to_dense(v: dict, dim: int):
    out = [mpq(0)] * dim
    for k, s in v.items():
        out[k] = s
    return out


# ---------------------------------------------------------------------------
# linear maps
# ---------------------------------------------------------------------------

class LinMap:
    """An exact linear map between tensor components, stored column-sparse.

    ``cols[c]`` is the image of the c-th domain basis vector as a sparse
    dict over codomain coordinates.  Columns never store zero entries, so
    structural equality is semantic equality.
    """

    __slots__ = ("dom", "cod", "cols")

    def __init__(self, dom: Shape, cod: Shape, cols):
        self.dom = dom
        self.cod = cod
        self.cols = tuple(cols)
        if len(self.cols) != dom.total_dim:
            raise ValueError(
                f"expected {dom.total_dim} columns for {dom}, got {len(self.cols)}")

    @classmethod
    def from_rows(cls, dom: Shape, cod: Shape, rows) -> "LinMap":
        """Build from a dense row-major matrix of scalar-like entries."""
        rows = [list(r) for r in rows]
        if len(rows) != cod.total_dim or any(len(r) != dom.total_dim for r in rows):
            raise ValueError(
                f"expected {cod.total_dim} x {dom.total_dim} matrix for {cod} <- {dom}")
        cols = [dict() for _ in range(dom.total_dim)]
        for r, row in enumerate(rows):
            for c, e in enumerate(row):
                s = as_scalar(e)
                if s:
                    cols[c][r] = s
        return cls(dom, cod, cols)

    @classmethod
    def identity(cls, shape: Shape) -> "LinMap":
        return cls(shape, shape, [{i: ONE} for i in range(shape.total_dim)])

    @classmethod
    def zero(cls, dom: Shape, cod: Shape) -> "LinMap":
        return cls(dom, cod, [{} for _ in range(dom.total_dim)])

    def entry(self, r: int, c: int) -> Scalar:
        return self.cols[c].get(r, ZERO)

    def apply(self, vec: dict) -> dict:
        out: dict = {}
        cols = self.cols
        for c, s in vec.items():
            vec_iadd(out, cols[c], s)
        return out

    def column(self, c: int) -> dict:
        return self.cols[c]

    def is_zero(self) -> bool:
        return all(not col for col in self.cols)

    def to_rows(self):
        rows = [[mpq(0)] * self.dom.total_dim for _ in range(self.cod.total_dim)]
        for c, col in enumerate(self.cols):
            for r, s in col.items():
                rows[r][c] = s
        return rows

    def to_string_rows(self):
        return [[scalar_str(e) for e in row] for row in self.to_rows()]

    def __matmul__(self, other):
        if not isinstance(other, LinMap):
            return NotImplemented
        return compose(self, other)

    def __add__(self, other):
        if not isinstance(other, LinMap):
            return NotImplemented
        return add_maps(self, other)

    def __sub__(self, other):
        if not isinstance(other, LinMap):
            return NotImplemented
        return add_maps(self, -other)

    def __neg__(self):
        return LinMap(self.dom, self.cod,
                      [{r: -s for r, s in col.items()} for col in self.cols])

    def __rmul__(self, coeff):
        s = as_scalar(coeff)
        if not s:
            return LinMap.zero(self.dom, self.cod)
        return LinMap(self.dom, self.cod,
                      [{r: s * t for r, t in col.items()} for col in self.cols])

    def __eq__(self, other):
        if not isinstance(other, LinMap):
            return NotImplemented
        return (self.dom == other.dom and self.cod == other.cod
                and self.cols == other.cols)

    def __hash__(self):
        return hash((self.dom, self.cod,
                     tuple(tuple(sorted(c.items())) for c in self.cols)))

    def __repr__(self):
        return f"LinMap({self.cod} <- {self.dom})"


def compose(a: LinMap, b: LinMap) -> LinMap:
    """The composite ``a after b``; requires ``b.cod == a.dom``."""
    if b.cod != a.dom:
        raise _mismatch("cannot compose", a.dom, b.cod)
    return LinMap(b.dom, a.cod, [a.apply(col) for col in b.cols])


def add_maps(a: LinMap, b: LinMap) -> LinMap:
    if a.dom != b.dom or a.cod != b.cod:
        raise _mismatch("cannot add maps", (a.dom, a.cod), (b.dom, b.cod))
    cols = []
    for ca, cb in zip(a.cols, b.cols):
        col = dict(ca)
        vec_iadd(col, cb, 1)
        cols.append(col)
    return LinMap(a.dom, a.cod, cols)


def kron(a: LinMap, b: LinMap) -> LinMap:
    """Tensor product of maps: ``kron(a, b)(x (x) y) = a(x) (x) b(y)``.

    Row/column indices follow the global lexicographic convention, the
    left factor most significant.
    """
    bc = b.cod.total_dim
    cols = []
    for acol in a.cols:
        for bcol in b.cols:
            col = {}
            for ra, sa in acol.items():
                base = ra * bc
                for rb, sb in bcol.items():
                    col[base + rb] = sa * sb
            cols.append(col)
    return LinMap(a.dom.concat(b.dom), a.cod.concat(b.cod), cols)


# ---------------------------------------------------------------------------
# subspaces in reduced row-echelon form
# ---------------------------------------------------------------------------

class Subspace:
    """A subspace given by a reduced row-echelon basis.

    Rows are monic at their pivot, pivots strictly increase, and every
    pivot column is zero in the other rows; the representation is the
    unique RREF of the span, so ``==`` decides equality of subspaces.
    """

    __slots__ = ("ambient", "rows", "pivots")

    def __init__(self, ambient: Shape, rows, pivots):
        self.ambient = ambient
        self.rows = tuple(rows)
        self.pivots = tuple(pivots)

    @classmethod
    def from_vectors(cls, ambient: Shape, vectors) -> "Subspace":
        """Deterministic RREF span of sparse vectors (empty input: zero space)."""
        rows: list = []
        pivots: list = []
        for v in vectors:
            _rref_insert(rows, pivots, v)
        order = sorted(range(len(rows)), key=lambda i: pivots[i])
        return cls(ambient, [rows[i] for i in order], [pivots[i] for i in order])

    @classmethod
    def zero(cls, ambient: Shape) -> "Subspace":
        return cls(ambient, (), ())

    @classmethod
    def full(cls, ambient: Shape) -> "Subspace":
        n = ambient.total_dim
        return cls(ambient, [{i: ONE} for i in range(n)], range(n))

    @property
    def dim(self) -> int:
        return len(self.rows)

    def reduce(self, vec: dict) -> dict:
        """Residual of ``vec`` after elimination of all pivot coordinates."""
        r = dict(vec)
        for p, row in zip(self.pivots, self.rows):
            c = r.get(p)
            if c is not None:
                vec_iadd(r, row, -c)
        return r

    def contains_vector(self, vec: dict) -> bool:
        return not self.reduce(vec)

    def contains_subspace(self, other: "Subspace"):
        """(verdict, witness): witness is the first basis vector outside self."""
        if other.ambient != self.ambient:
            raise _mismatch("ambient mismatch", self.ambient, other.ambient)
        for row in other.rows:
            if self.reduce(row):
                return False, dict(row)
        return True, None

    def basis_vectors(self):
        return [dict(r) for r in self.rows]

    def complement_indices(self):
        """Non-pivot coordinates, ascending: the canonical complement basis."""
        pset = set(self.pivots)
        return tuple(i for i in range(self.ambient.total_dim) if i not in pset)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return (self.ambient == other.ambient and self.pivots == other.pivots
                and self.rows == other.rows)

    def __hash__(self):
        return hash((self.ambient, self.pivots,
                     tuple(tuple(sorted(r.items())) for r in self.rows)))

    def __repr__(self):
        return f"Subspace(dim {self.dim} of {self.ambient})"


def _rref_insert(rows: list, pivots: list, vec: dict) -> bool:
    """Insert one vector, maintaining full RREF; True if rank grew."""
    r = dict(vec)
    for p, row in zip(pivots, rows):
        c = r.get(p)
        if c is not None:
            vec_iadd(r, row, -c)
    if not r:
        return False
    p = min(r)
    inv = 1 / r[p]
    if inv != 1:
        r = {k: inv * s for k, s in r.items()}
    for row in rows:
        c = row.get(p)
        if c is not None:
            vec_iadd(row, r, -c)
    rows.append(r)
    pivots.append(p)
    return True


def rref_basis(ambient: Shape, vectors) -> Subspace:
    return Subspace.from_vectors(ambient, vectors)


def subspace_contains(space: Subspace, other):
    """Membership check for a Subspace or a single sparse vector."""
    if isinstance(other, Subspace):
        return space.contains_subspace(other)
    residual = space.reduce(other)
    if residual:
        return False, dict(other)
    return True, None


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    if a.ambient != b.ambient:
        raise _mismatch("ambient mismatch", a.ambient, b.ambient)
    return Subspace.from_vectors(a.ambient, list(a.rows) + list(b.rows))


def nullspace_of_columns(cols, ncols: int):
    """Kernel basis (sparse vectors over column indices) of a raw column list.

    Free-variable construction over the RREF of the row space; vectors come
    out ordered by free coordinate, one per non-pivot column.
    """
    row_vecs: dict = {}
    for c, col in enumerate(cols):
        for r, s in col.items():
            row_vecs.setdefault(r, {})[c] = s
    rows: list = []
    pivots: list = []
    for r in sorted(row_vecs):
        _rref_insert(rows, pivots, row_vecs[r])
    order = sorted(range(len(rows)), key=lambda i: pivots[i])
    rows = [rows[i] for i in order]
    pivots = [pivots[i] for i in order]
    pset = set(pivots)
    out = []
    for free in range(ncols):
        if free in pset:
            continue
        v = {free: ONE}
        for p, row in zip(pivots, rows):
            c = row.get(free)
            if c is not None:
                v[p] = -c
        out.append(v)
    return out


def kernel_image(a: LinMap):
    """(kernel in dom, image in cod); asserts rank-nullity exactly."""
    image = Subspace.from_vectors(a.cod, a.cols)
    kernel = Subspace.from_vectors(a.dom,
                                   nullspace_of_columns(a.cols, a.dom.total_dim))
    assert kernel.dim + image.dim == a.dom.total_dim, "rank-nullity violated"
    return kernel, image


# ---------------------------------------------------------------------------
# shifted embeddings of subspaces
# ---------------------------------------------------------------------------

def prepend_factor(space: Subspace, factor: str, dim: int) -> Subspace:
    """The subspace ``F (x) S`` inside ``F (x) ambient`` for a new factor F."""
    amb = Shape((factor,), (dim,)).concat(space.ambient)
    total = space.ambient.total_dim
    rows, pivots = [], []
    for j in range(dim):
        base = j * total
        for p, row in zip(space.pivots, space.rows):
            rows.append({base + k: s for k, s in row.items()})
            pivots.append(base + p)
    return Subspace(amb, rows, pivots)


def append_factor(space: Subspace, factor: str, dim: int) -> Subspace:
    """The subspace ``S (x) F`` inside ``ambient (x) F`` for a new factor F."""
    amb = space.ambient.concat(Shape((factor,), (dim,)))
    rows, pivots = [], []
    for p, row in zip(space.pivots, space.rows):
        for j in range(dim):
            rows.append({k * dim + j: s for k, s in row.items()})
            pivots.append(p * dim + j)
    order = sorted(range(len(rows)), key=lambda i: pivots[i])
    return Subspace(amb, [rows[i] for i in order], [pivots[i] for i in order])


def embed_shifted(space: Subspace, side: str) -> Subspace:
    """One-step degree shift of a subspace of a pure V power.

    ``left`` gives the span of all ``e_i (x) s``, ``right`` of all
    ``s (x) e_i``.
    """
    if not space.ambient.is_v_power() or not space.ambient.factors:
        raise ValueError(f"ambient {space.ambient} is not a positive V power")
    dim_v = space.ambient.dims[0]
    if side == "left":
        return prepend_factor(space, "V", dim_v)
    if side == "right":
        return append_factor(space, "V", dim_v)
    raise ValueError(f"side must be 'left' or 'right', not {side!r}")
