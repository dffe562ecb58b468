import random

import pytest
from gmpy2 import mpq

from ncdc.linalg import (
    LinMap,
    Shape,
    ShapeMismatchError,
    Subspace,
    add_maps,
    append_factor,
    compose,
    embed_shifted,
    kernel_image,
    kron,
    prepend_factor,
    rref_basis,
    subspace_contains,
    subspace_sum,
)
from ncdc.scalars import Q, parse_scalar

V2 = Shape.of("V", 2, 2)
VV = Shape.of("VV", 2, 2)
K_LINE = Shape((), ())


def vec(*entries):
    return {i: parse_scalar(s) if isinstance(s, str) else mpq(s)
            for i, s in enumerate(entries) if (parse_scalar(s) if isinstance(s, str) else mpq(s))}


def flip_map(dim):
    """The switch v (x) w -> w (x) v on a square two-factor component."""
    sh = Shape(("V", "V"), (dim, dim))
    cols = []
    for i in range(dim):
        for j in range(dim):
            cols.append({j * dim + i: mpq(1)})
    return LinMap(sh, sh, cols)


def random_map(rng, dom, cod, span=2):
    cols = []
    for _ in range(dom.total_dim):
        col = {}
        for r in range(cod.total_dim):
            x = mpq(rng.randint(-span, span))
            if x:
                col[r] = x
        cols.append(col)
    return LinMap(dom, cod, cols)


class TestShape:
    def test_index_round_trip(self):
        for pattern in ["V", "VV", "VW", "WVV", "VVW"]:
            sh = Shape.of(pattern, 3, 2)
            for i in range(sh.total_dim):
                assert sh.index_of(sh.multi_of(i)) == i

    def test_leftmost_most_significant(self):
        sh = Shape.of("VW", 3, 2)
        assert sh.index_of((2, 1)) == 2 * 2 + 1
        assert sh.multi_of(5) == (2, 1)

    def test_concat(self):
        sh = Shape.of("V", 2, 2).concat(Shape.of("W", 2, 3))
        assert sh.factors == ("V", "W")
        assert sh.total_dim == 6

    def test_total_dim(self):
        assert Shape.of("VVV", 3, 2).total_dim == 27
        assert Shape((), ()).total_dim == 1


class TestKron:
    def test_row_vectors(self):
        # kron([a b], [c d]) = [ac ad bc bd] on 2 -> 1 maps
        one = Shape(("V",), (1,))
        two = Shape(("V",), (2,))
        a, b, c, d = mpq(2), mpq(3), mpq(5), mpq(7)
        A = LinMap.from_rows(two, one, [[a, b]])
        B = LinMap.from_rows(two, one, [[c, d]])
        K = kron(A, B)
        assert K.to_rows() == [[a * c, a * d, b * c, b * d]]

    def test_identity(self):
        sh_v = Shape.of("V", 2, 2)
        sh_w = Shape.of("W", 2, 3)
        assert kron(LinMap.identity(sh_v), LinMap.identity(sh_w)) == \
            LinMap.identity(sh_v.concat(sh_w))

    def test_mixed_product_law(self):
        rng = random.Random(5)
        for _ in range(100):
            dims = [rng.randint(1, 2) for _ in range(6)]
            s = [Shape(("V",), (d,)) for d in dims]
            a = random_map(rng, s[1], s[0])
            b = random_map(rng, s[3], s[2])
            c = random_map(rng, s[4], s[1])
            d = random_map(rng, s[5], s[3])
            assert compose(kron(a, b), kron(c, d)) == kron(compose(a, c), compose(b, d))

    def test_acts_on_simple_tensors(self):
        rng = random.Random(11)
        a = random_map(rng, V2, V2)
        b = random_map(rng, V2, V2)
        K = kron(a, b)
        for i in range(2):
            for j in range(2):
                x, y = {i: mpq(1)}, {j: mpq(1)}
                ax, by = a.apply(x), b.apply(y)
                expect = {}
                for r, s in ax.items():
                    for r2, t in by.items():
                        expect[r * 2 + r2] = s * t
                assert K.apply({i * 2 + j: mpq(1)}) == expect


class TestComposeAdd:
    def test_flip_involution(self):
        f = flip_map(2)
        assert compose(f, f) == LinMap.identity(f.dom)

    def test_add_inverse(self):
        rng = random.Random(1)
        a = random_map(rng, VV, V2)
        assert add_maps(a, -a).is_zero()

    def test_compose_identity(self):
        rng = random.Random(2)
        a = random_map(rng, VV, V2)
        assert compose(a, LinMap.identity(VV)) == a
        assert compose(LinMap.identity(V2), a) == a

    def test_shape_mismatch_message(self):
        rng = random.Random(3)
        a = random_map(rng, VV, V2)
        with pytest.raises(ShapeMismatchError) as err:
            compose(a, a)
        assert "V2*V2" in str(err.value) and "V2" in str(err.value)
        with pytest.raises(ShapeMismatchError):
            add_maps(a, LinMap.identity(V2))


class TestRref:
    def test_proportional_rows(self):
        s = rref_basis(V2, [vec(1, "-q"), vec("q", "-q^2")])
        assert s.dim == 1
        assert s.rows[0] == vec(1, "-q")

    def test_empty(self):
        s = rref_basis(V2, [])
        assert s.dim == 0
        assert s.pivots == ()

    def test_full_rank(self):
        s = rref_basis(V2, [vec(1, 0), vec(1, 1)])
        assert s.dim == 2
        assert s.rows == (vec(1, 0), vec(0, 1))

    def test_generators_contained(self):
        rng = random.Random(9)
        amb = Shape.of("VVV", 2, 2)
        gens = []
        for _ in range(6):
            gens.append({i: mpq(rng.randint(-2, 2))
                         for i in range(8) if rng.random() < 0.5})
        gens = [{k: s for k, s in g.items() if s} for g in gens]
        s = rref_basis(amb, gens)
        for g in gens:
            ok, _ = subspace_contains(s, g)
            assert ok

    def test_deterministic_under_shuffle(self):
        rng = random.Random(10)
        amb = Shape.of("VV", 3, 2)
        gens = [vec(1, 2, 0, 3, 0, 0, 0, 0, 0), vec(0, 1, 1, 0, 0, 2, 0, 0, 0),
                vec(2, 5, 1, 6, 0, 2, 0, 0, 0), vec(0, 0, 0, 0, 7, 0, 1, 0, 0)]
        reference = rref_basis(amb, gens)
        for _ in range(5):
            shuffled = gens[:]
            rng.shuffle(shuffled)
            assert rref_basis(amb, shuffled) == reference


class TestContainsSum:
    def test_scaled_member(self):
        s = rref_basis(V2, [vec(1, "-q")])
        ok, _ = subspace_contains(s, vec("q", "-q^2"))
        assert ok

    def test_witness(self):
        amb = Shape.of("VVV", 1, 1)  # any 1-dim factors; use dims for a 3-vector
        amb = Shape(("V",), (3,))
        s = rref_basis(amb, [vec(1, 0, 0)])
        ok, witness = subspace_contains(s, vec(0, 1, 0))
        assert not ok and witness == vec(0, 1, 0)

    def test_zero_vector_always_member(self):
        s = rref_basis(V2, [vec(1, "-q")])
        ok, _ = subspace_contains(s, {})
        assert ok

    def test_sum_dims(self):
        amb = Shape(("V",), (3,))
        a = rref_basis(amb, [vec(1, 0, 0)])
        b = rref_basis(amb, [vec(0, 1, 0)])
        assert subspace_sum(a, b).dim == 2

    def test_sum_idempotent(self):
        amb = Shape(("V",), (3,))
        a = rref_basis(amb, [vec(1, 2, 0), vec(0, 0, 5)])
        assert subspace_sum(a, a) == a
        assert subspace_sum(a, Subspace.zero(amb)) == a

    def test_subspace_containment_witness(self):
        amb = Shape(("V",), (3,))
        a = rref_basis(amb, [vec(1, 0, 0)])
        b = rref_basis(amb, [vec(1, 0, 0), vec(0, 0, 1)])
        ok, witness = a.contains_subspace(b)
        assert not ok and witness == vec(0, 0, 1)
        ok, _ = b.contains_subspace(a)
        assert ok


class TestKernelImage:
    def test_one_by_two(self):
        dom = Shape(("V",), (2,))
        cod = Shape(("V",), (1,))
        a = LinMap.from_rows(dom, cod, [[1, -Q]])
        ker, img = kernel_image(a)
        assert ker.dim == 1 and img.dim == 1
        # kernel spanned by (q, 1)
        assert ker.contains_vector(vec("q", 1))

    def test_zero_map(self):
        a = LinMap.zero(VV, V2)
        ker, img = kernel_image(a)
        assert ker.dim == 4 and img.dim == 0

    def test_antisymmetrizer_image(self):
        # id - flip on V(x)V with dim V = 2, reduced by hand:
        # columns are 0, e01-e10, e10-e01, 0 so the image is the line
        # through e01 - e10 and the kernel is the 3-dim symmetric space.
        a = add_maps(LinMap.identity(VV), -flip_map(2))
        ker, img = kernel_image(a)
        assert img.dim == 1
        assert img.rows[0] == vec(0, 1, -1, 0)
        assert ker.dim == 3
        for v in [vec(1, 0, 0, 0), vec(0, 1, 1, 0), vec(0, 0, 0, 1)]:
            assert ker.contains_vector(v)

    def test_rank_nullity_random(self):
        rng = random.Random(21)
        for _ in range(50):
            dom = Shape(("V",), (rng.randint(1, 4),))
            cod = Shape(("V",), (rng.randint(1, 4),))
            a = random_map(rng, dom, cod)
            ker, img = kernel_image(a)
            assert ker.dim + img.dim == dom.total_dim
            for kv in ker.basis_vectors():
                assert a.apply(kv) == {}


class TestEmbedShifted:
    def test_left_embedding_by_expansion(self):
        # oracle: e_i (x) s written out on the basis of V^3
        s = rref_basis(VV, [vec(0, 1, "-q", 0)])  # e01 - q e10
        left = embed_shifted(s, "left")
        amb3 = Shape.of("VVV", 2, 2)
        expected = []
        for i in range(2):
            row = {}
            for k, c in s.rows[0].items():
                row[i * 4 + k] = c
            expected.append(row)
        assert left == rref_basis(amb3, expected)
        assert left.dim == 2
        assert left.contains_vector({amb3.index_of((0, 0, 1)): mpq(1),
                                     amb3.index_of((0, 1, 0)): -Q})
        assert left.contains_vector({amb3.index_of((1, 0, 1)): mpq(1),
                                     amb3.index_of((1, 1, 0)): -Q})

    def test_zero_space(self):
        z = Subspace.zero(VV)
        assert embed_shifted(z, "left").dim == 0
        assert embed_shifted(z, "right").dim == 0

    def test_full_space_spreads(self):
        full = Subspace.full(VV)
        amb3 = Shape.of("VVV", 2, 2)
        both = subspace_sum(embed_shifted(full, "left"), embed_shifted(full, "right"))
        assert both == Subspace.full(amb3)

    def test_rejects_mixed_ambient(self):
        s = Subspace.zero(Shape.of("VW", 2, 2))
        with pytest.raises(ValueError):
            embed_shifted(s, "left")

    def test_matches_generic_factor_helpers(self):
        s = rref_basis(VV, [vec(0, 1, "-q", 0), vec(1, 0, 0, "q^2")])
        assert embed_shifted(s, "left") == prepend_factor(s, "V", 2)
        assert embed_shifted(s, "right") == append_factor(s, "V", 2)

    def test_factor_helpers_are_rref(self):
        rng = random.Random(31)
        for _ in range(20):
            amb = Shape(("V",), (3,))
            gens = [{i: mpq(rng.randint(-2, 2)) for i in range(3)} for _ in range(2)]
            gens = [{k: s for k, s in g.items() if s} for g in gens]
            s = rref_basis(amb, gens)
            for emb in (prepend_factor(s, "W", 2), append_factor(s, "W", 2)):
                rebuilt = Subspace.from_vectors(emb.ambient, emb.basis_vectors())
                assert rebuilt == emb
