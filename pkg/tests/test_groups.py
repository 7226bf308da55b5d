import json
import random

import pytest

from cayleydist import (
    BadMatrix,
    BadParam,
    CapExceeded,
    CodeSpace,
    IncompatibleSpecs,
    Overflow,
    from_string,
    generators,
    identity,
    inv,
    make_spec,
    matrix_order,
    mul,
    project,
    spec_from_dict,
    spec_to_dict,
    to_string,
)

A_DEFAULT = ((2, 1), (1, 1))


def random_element(spec, rng):
    """Uniform payload for finite specs, short random word for infinite ones."""
    f = spec.family
    if f == "lamplighter-fin":
        return (tuple(rng.randrange(spec.m) for _ in range(spec.n)),
                rng.randrange(spec.n))
    if f == "bs-fin":
        return (rng.randrange(spec.q), rng.randrange(spec.n))
    if f == "sol-fin":
        return ((rng.randrange(spec.n), rng.randrange(spec.n)),
                rng.randrange(spec.oA))
    gens = generators(spec)
    x = identity(spec)
    for _ in range(rng.randrange(1, 12)):
        x = mul(spec, x, rng.choice(gens))
    return x


ALL_SPECS = [
    make_spec("lamplighter-fin", m=2, n=4),
    make_spec("lamplighter-fin", m=3, n=3),
    make_spec("bs-fin", m=2, n=4),
    make_spec("bs-fin", m=3, n=3),
    make_spec("sol-fin", n=5),
    make_spec("lamplighter-inf", m=2),
    make_spec("lamplighter-inf", m=3),
    make_spec("bs-inf", m=2),
    make_spec("sol-inf"),
]


class TestMakeSpec:
    def test_lamplighter_order(self):
        spec = make_spec("lamplighter-fin", m=2, n=4)
        assert spec.order == 64

    def test_bs_modulus_and_order(self):
        spec = make_spec("bs-fin", m=2, n=4)
        assert spec.q == 15
        assert spec.order == 60

    def test_sol_twist_order(self):
        spec = make_spec("sol-fin", n=5)
        assert spec.A == A_DEFAULT
        assert spec.oA == 10
        assert spec.order == 250

    def test_param_range(self):
        with pytest.raises(BadParam):
            make_spec("lamplighter-fin", m=1, n=4)
        with pytest.raises(BadParam):
            make_spec("bs-fin", m=2, n=1)
        with pytest.raises(BadParam):
            make_spec("nonsense", m=2, n=2)

    def test_param_shape(self):
        with pytest.raises(BadParam):
            make_spec("sol-fin", m=2, n=5)
        with pytest.raises(BadParam):
            make_spec("lamplighter-inf", m=2, n=3)
        with pytest.raises(BadParam):
            make_spec("bs-fin", m=2, n=3, A=[[2, 1], [1, 1]])

    def test_matrix_guard(self):
        with pytest.raises(BadMatrix):
            make_spec("sol-fin", n=5, A=[[1, 1], [0, 2]])  # det 2
        with pytest.raises(BadMatrix):
            make_spec("sol-fin", n=5, A=[[1, 1], [0, 1]])  # det 1, trace 2
        with pytest.raises(BadMatrix):
            make_spec("sol-fin", n=5, A=[[0, 1], [1, 0]])  # det -1, trace 0
        make_spec("sol-fin", n=5, A=[[1, 1], [1, 0]])  # det -1, trace 1: fine

    def test_order_cap(self):
        with pytest.raises(CapExceeded):
            make_spec("lamplighter-fin", m=2, n=22)
        make_spec("lamplighter-fin", m=2, n=22, cap=1 << 30)


class TestMatrixOrder:
    @pytest.mark.parametrize("n,expected", [(2, 3), (3, 4), (5, 10), (7, 8), (11, 5), (13, 14)])
    def test_default_matrix(self, n, expected):
        assert matrix_order(A_DEFAULT, n) == expected

    def test_identity_matrix(self):
        assert matrix_order(((1, 0), (0, 1)), 7) == 1

    def test_order_is_exact(self):
        # A^o = I and A^d != I for every proper divisor d
        for n in (2, 3, 5, 7, 11, 13):
            o = matrix_order(A_DEFAULT, n)
            M = ((1, 0), (0, 1))
            powers = {}
            for k in range(1, o + 1):
                M = tuple(
                    tuple((M[i][0] * A_DEFAULT[0][j] + M[i][1] * A_DEFAULT[1][j]) % n
                          for j in range(2))
                    for i in range(2)
                )
                powers[k] = M
            ident = ((1 % n, 0), (0, 1 % n))
            assert powers[o] == ident
            for d in range(1, o):
                if o % d == 0:
                    assert powers[d] != ident

    def test_cap(self):
        with pytest.raises(CapExceeded):
            matrix_order(A_DEFAULT, 10**6 + 3, cap=10)

    def test_singular_matrix(self):
        with pytest.raises(BadMatrix):
            matrix_order(((2, 0), (0, 2)), 5)


class TestArithmetic:
    def test_wreath_law_example(self):
        spec = make_spec("lamplighter-fin", m=2, n=4)
        x = ((1, 0, 0, 0), 1)
        assert mul(spec, x, x) == ((1, 1, 0, 0), 2)

    def test_move_inverse(self):
        spec = make_spec("lamplighter-fin", m=2, n=4)
        assert inv(spec, ((0, 0, 0, 0), 1)) == ((0, 0, 0, 0), 3)

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_identity_neutral(self, spec):
        rng = random.Random(11)
        e = identity(spec)
        for _ in range(50):
            x = random_element(spec, rng)
            assert mul(spec, x, e) == x
            assert mul(spec, e, x) == x

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_group_axioms(self, spec):
        rng = random.Random(7)
        e = identity(spec)
        for _ in range(1000):
            x = random_element(spec, rng)
            y = random_element(spec, rng)
            z = random_element(spec, rng)
            assert mul(spec, mul(spec, x, y), z) == mul(spec, x, mul(spec, y, z))
            assert mul(spec, x, inv(spec, x)) == e
            assert mul(spec, inv(spec, x), x) == e

    def test_bs_inf_stays_reduced(self):
        spec = make_spec("bs-inf", m=2)
        rng = random.Random(3)
        for _ in range(500):
            x = random_element(spec, rng)
            (u, e), _t = x
            assert e >= 0
            assert e == 0 or u % 2 != 0

    def test_bs_inf_overflow(self):
        spec = make_spec("bs-inf", m=2)
        with pytest.raises(Overflow):
            mul(spec, ((1, 0), -200), ((1, 0), 0))


class TestGenerators:
    def test_lamplighter_m2_collapses(self):
        spec = make_spec("lamplighter-fin", m=2, n=4)
        gens = generators(spec)
        assert len(gens) == 3

    def test_bs33_all_distinct(self):
        gens = generators(make_spec("bs-fin", m=3, n=3))
        assert len(gens) == 4

    def test_l22_two_involutions(self):
        spec = make_spec("lamplighter-fin", m=2, n=2)
        gens = generators(spec)
        assert len(gens) == 2
        for g in gens:
            assert mul(spec, g, g) == identity(spec)

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_symmetric_no_identity(self, spec):
        gens = generators(spec)
        assert identity(spec) not in gens
        assert len(set(gens)) == len(gens) <= 4
        assert {inv(spec, g) for g in gens} == set(gens)

    def test_sol_e2_flag(self):
        gens = generators(make_spec("sol-fin", n=5), include_e2=True)
        assert len(gens) == 6
        assert ((0, 1), 0) in gens


class TestProject:
    def test_identity_maps_to_identity(self):
        parent = make_spec("lamplighter-inf", m=2)
        quotient = make_spec("lamplighter-fin", m=2, n=3)
        assert project(parent, quotient, identity(parent)) == identity(quotient)

    def test_lamp_position_wraps(self):
        parent = make_spec("lamplighter-inf", m=2)
        quotient = make_spec("lamplighter-fin", m=2, n=3)
        assert project(parent, quotient, (((4, 1),), 0)) == ((0, 1, 0), 0)

    def test_bs_dyadic_inverse(self):
        parent = make_spec("bs-inf", m=2)
        quotient = make_spec("bs-fin", m=2, n=4)
        # 1/2 maps to the inverse of 2 mod 15, which is 8
        assert project(parent, quotient, ((1, 1), 0)) == (8, 0)

    def test_same_spec_is_identity_map(self):
        spec = make_spec("sol-fin", n=5)
        x = ((2, 3), 4)
        assert project(spec, spec, x) == x

    def test_incompatible(self):
        with pytest.raises(IncompatibleSpecs):
            project(make_spec("lamplighter-inf", m=2),
                    make_spec("lamplighter-fin", m=3, n=3), ((), 0))
        with pytest.raises(IncompatibleSpecs):
            project(make_spec("bs-inf", m=2),
                    make_spec("lamplighter-fin", m=2, n=3), ((0, 0), 0))

    @pytest.mark.parametrize("pair", [
        ("lamplighter-inf", dict(m=2), "lamplighter-fin", dict(m=2, n=4)),
        ("lamplighter-inf", dict(m=3), "lamplighter-fin", dict(m=3, n=3)),
        ("bs-inf", dict(m=2), "bs-fin", dict(m=2, n=5)),
        ("sol-inf", dict(), "sol-fin", dict(n=5)),
    ])
    def test_homomorphism(self, pair):
        pf, pkw, qf, qkw = pair
        parent, quotient = make_spec(pf, **pkw), make_spec(qf, **qkw)
        rng = random.Random(13)
        for _ in range(1000):
            x = random_element(parent, rng)
            y = random_element(parent, rng)
            lhs = project(parent, quotient, mul(parent, x, y))
            rhs = mul(quotient, project(parent, quotient, x),
                      project(parent, quotient, y))
            assert lhs == rhs

    @pytest.mark.parametrize("pair", [
        ("lamplighter-inf", dict(m=2), "lamplighter-fin", dict(m=2, n=4)),
        ("bs-inf", dict(m=2), "bs-fin", dict(m=2, n=5)),
        ("sol-inf", dict(), "sol-fin", dict(n=5)),
    ])
    def test_generators_map_to_generators(self, pair):
        pf, pkw, qf, qkw = pair
        parent, quotient = make_spec(pf, **pkw), make_spec(qf, **qkw)
        image = {project(parent, quotient, g) for g in generators(parent)}
        assert image == set(generators(quotient))


class TestSerialization:
    def test_canonical_forms(self):
        cases = [
            (make_spec("lamplighter-fin", m=2, n=4), ((0, 1, 1, 0), 2), "lamps:0110|pos:2"),
            (make_spec("bs-fin", m=2, n=4), (8, 1), "a:8|t:1"),
            (make_spec("bs-inf", m=2), ((5, 3), -2), "a:5/2^3|t:-2"),
            (make_spec("bs-inf", m=2), ((-3, 0), 1), "a:-3|t:1"),
            (make_spec("sol-fin", n=11), ((3, 4), 3), "v:(3,4)|t:3"),
            (make_spec("lamplighter-inf", m=5), (((-2, 3), (4, 1)), 5), "lamps:-2=3,4=1|pos:5"),
            (make_spec("lamplighter-inf", m=2), ((), -1), "lamps:|pos:-1"),
        ]
        for spec, x, text in cases:
            assert to_string(spec, x) == text
            assert from_string(spec, text) == x

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_round_trip(self, spec):
        rng = random.Random(5)
        for _ in range(200):
            x = random_element(spec, rng)
            assert from_string(spec, to_string(spec, x)) == x

    def test_malformed(self):
        spec = make_spec("bs-fin", m=2, n=4)
        for text in ["", "a:1", "x:1|t:0", "a:99|t:0", "a:1|t:9", "a:1|t:0|z:1"]:
            with pytest.raises(BadParam):
                from_string(spec, text)

    def test_wide_alphabet_lamps(self):
        spec = make_spec("lamplighter-fin", m=12, n=3)
        x = ((11, 0, 7), 2)
        text = to_string(spec, x)
        assert from_string(spec, text) == x


class TestSpecJson:
    def test_examples(self):
        d = spec_to_dict(make_spec("lamplighter-fin", m=2, n=8))
        assert d == {"family": "lamplighter-fin", "m": 2, "n": 8}
        d = spec_to_dict(make_spec("sol-fin", n=5))
        assert d == {"family": "sol-fin", "n": 5, "A": [[2, 1], [1, 1]]}

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_round_trip(self, spec):
        blob = json.dumps(spec_to_dict(spec))
        assert spec_from_dict(json.loads(blob)) == spec

    def test_unknown_keys_rejected(self):
        with pytest.raises(BadParam):
            spec_from_dict({"family": "bs-fin", "m": 2, "n": 3, "mood": "good"})
        with pytest.raises(BadParam):
            spec_from_dict({"m": 2, "n": 3})


class TestCodeSpace:
    @pytest.mark.parametrize("spec", [
        make_spec("lamplighter-fin", m=2, n=4),
        make_spec("lamplighter-fin", m=3, n=3),
        make_spec("bs-fin", m=2, n=4),
        make_spec("sol-fin", n=3),
    ], ids=str)
    def test_bijection(self, spec):
        cs = CodeSpace(spec)
        seen = set()
        for code in range(spec.order):
            x = cs.decode(code)
            assert cs.encode(x) == code
            seen.add(x)
        assert len(seen) == spec.order

    @pytest.mark.parametrize("spec", [
        make_spec("lamplighter-fin", m=2, n=4),
        make_spec("lamplighter-fin", m=3, n=3),
        make_spec("bs-fin", m=3, n=3),
        make_spec("sol-fin", n=5),
    ], ids=str)
    def test_act_left_matches_mul(self, spec):
        import numpy as np

        cs = CodeSpace(spec)
        rng = random.Random(17)
        xs = [random_element(spec, rng) for _ in range(64)]
        codes = cs.encode_many(xs)
        payload = cs.payload(codes)
        for _ in range(25):
            g = random_element(spec, rng)
            out = cs.act_left(g, codes, payload)
            expected = np.array([cs.encode(mul(spec, g, x)) for x in xs])
            assert np.array_equal(out, expected)

    def test_rejects_infinite(self):
        from cayleydist import FamilyMismatch

        with pytest.raises(FamilyMismatch):
            CodeSpace(make_spec("bs-inf", m=2))
