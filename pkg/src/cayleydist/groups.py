"""Exact arithmetic for three families of finite solvable groups and their parents.

Families
--------
``lamplighter-fin``   C_m wr C_n, order m^n * n.
``lamplighter-inf``   C_m wr Z.
``bs-fin``            C_q x| C_n with q = m^n - 1, the cyclic factor acting by
                      multiplication by m (a unit of exact order n mod q).
``bs-inf``            Z[1/m] x| Z, t acting by multiplication by m^t.
``sol-fin``           (C_n)^2 x| C_{o(A,n)}, twisted by a fixed integer matrix A
                      with det +-1 and eigenvalues off the unit circle.
``sol-inf``           Z^2 x| Z twisted by A.

Elements are plain (payload, time) tuples so they hash cheaply in BFS tables:

* lamplighter-fin: ((l_0, ..., l_{n-1}), pos), residues mod m, pos mod n.
* lamplighter-inf: (((i, v), ...), pos), support sorted by position, v in [1, m).
* bs-fin: (a, t) with a mod q, t mod n.
* bs-inf: ((u, e), t) encoding u / m^e, reduced so e = 0 or m does not divide u.
* sol-fin / sol-inf: ((v1, v2), t).

The group law everywhere is (x, s)(y, t) = (x + phi_s(y), s + t) where phi_s is
the relevant twist; residue payloads stay reduced into [0, modulus).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    BadMatrix,
    BadParam,
    CapExceeded,
    DegenerateGenerators,
    FamilyMismatch,
    IncompatibleSpecs,
    Overflow,
)

FINITE_FAMILIES = ("lamplighter-fin", "bs-fin", "sol-fin")
INFINITE_FAMILIES = ("lamplighter-inf", "bs-inf", "sol-inf")
FAMILIES = FINITE_FAMILIES + INFINITE_FAMILIES

DEFAULT_MATRIX = ((2, 1), (1, 1))
ORDER_CAP = 1 << 22
MATRIX_ORDER_CAP = 10**7

# bs-inf numerators live in a checked 128-bit range; exponent jumps are capped
# so a single multiplication cannot allocate an absurd power of m.
BS_NUMERATOR_CAP = 1 << 127
BS_EXPONENT_CAP = 512

# sol-inf twist powers grow exponentially in |t|; walks never need more.
SOL_TIME_CAP = 2048

Matrix = tuple[tuple[int, int], tuple[int, int]]
Element = tuple


@dataclass(frozen=True)
class GroupSpec:
    """Validated group description with derived constants precomputed."""

    family: str
    m: int | None = None
    n: int | None = None
    A: Matrix | None = None
    q: int | None = None
    oA: int | None = None
    order: int | None = None

    @property
    def finite(self) -> bool:
        return self.family in FINITE_FAMILIES

    def __str__(self) -> str:
        parts = [self.family]
        if self.m is not None:
            parts.append(f"m={self.m}")
        if self.n is not None:
            parts.append(f"n={self.n}")
        if self.A is not None and self.A != DEFAULT_MATRIX:
            parts.append(f"A={self.A}")
        return "(" + ", ".join(parts) + ")"


def _as_matrix(A) -> Matrix:
    try:
        rows = tuple(tuple(int(v) for v in row) for row in A)
    except (TypeError, ValueError) as exc:
        raise BadMatrix(f"matrix must be a 2x2 integer array, got {A!r}") from exc
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise BadMatrix(f"matrix must be 2x2, got {A!r}")
    return rows


def _check_hyperbolic(A: Matrix) -> None:
    det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    tr = A[0][0] + A[1][1]
    if det not in (1, -1):
        raise BadMatrix(f"det(A) = {det}, must be +1 or -1")
    # eigenvalues on the unit circle would collapse the exponential geometry
    if det == 1 and abs(tr) <= 2:
        raise BadMatrix(f"det 1 with |trace| = {abs(tr)} <= 2: eigenvalues on unit circle")
    if det == -1 and tr == 0:
        raise BadMatrix("det -1 with trace 0: eigenvalues on unit circle")


def _mat_mul(X: Matrix, Y: Matrix, mod: int | None = None) -> Matrix:
    out = []
    for i in range(2):
        row = []
        for j in range(2):
            v = X[i][0] * Y[0][j] + X[i][1] * Y[1][j]
            row.append(v % mod if mod is not None else v)
        out.append(tuple(row))
    return (out[0], out[1])


def _mat_inv_int(A: Matrix) -> Matrix:
    det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    # det = +-1, so 1/det = det and the adjugate gives an integer inverse
    return (
        (det * A[1][1], -det * A[0][1]),
        (-det * A[1][0], det * A[0][0]),
    )


def matrix_order(A, n: int, cap: int = MATRIX_ORDER_CAP) -> int:
    """Least k >= 1 with A^k congruent to the identity mod n."""
    A = _as_matrix(A)
    if n < 1:
        raise BadParam(f"modulus n = {n} must be >= 1")
    det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    if det not in (1, -1):
        raise BadMatrix(f"det(A) = {det}, must be +1 or -1 to be invertible mod n")
    ident = ((1 % n, 0), (0, 1 % n))
    M = tuple(tuple(v % n for v in row) for row in A)
    k = 1
    while M != ident:
        M = _mat_mul(M, A, n)
        k += 1
        if k > cap:
            raise CapExceeded(f"matrix order mod {n} exceeds cap {cap}")
    return k


def make_spec(family: str, m: int | None = None, n: int | None = None,
              A=None, cap: int = ORDER_CAP) -> GroupSpec:
    """Validate parameters and derive q, o(A, n), and the group order."""
    if family not in FAMILIES:
        raise BadParam(f"unknown family {family!r}; expected one of {FAMILIES}")

    needs_m = family in ("lamplighter-fin", "lamplighter-inf", "bs-fin", "bs-inf")
    if needs_m:
        if m is None or int(m) < 2:
            raise BadParam(f"family {family} needs m >= 2, got {m}")
        m = int(m)
    elif m is not None:
        raise BadParam(f"family {family} takes no parameter m")

    if family in FINITE_FAMILIES:
        if n is None or int(n) < 2:
            raise BadParam(f"family {family} needs n >= 2, got {n}")
        n = int(n)
    elif n is not None:
        raise BadParam(f"family {family} takes no parameter n")

    if family in ("sol-fin", "sol-inf"):
        A = DEFAULT_MATRIX if A is None else _as_matrix(A)
        _check_hyperbolic(A)
    elif A is not None:
        raise BadParam(f"family {family} takes no twist matrix")

    q = oA = order = None
    if family == "lamplighter-fin":
        order = m**n * n
    elif family == "bs-fin":
        q = m**n - 1
        order = q * n
    elif family == "sol-fin":
        oA = matrix_order(A, n)
        order = n * n * oA
    if order is not None and order > cap:
        raise CapExceeded(f"group order {order} exceeds cap {cap}")

    return GroupSpec(family=family, m=m, n=n, A=A, q=q, oA=oA, order=order)


# ---------------------------------------------------------------------------
# cached twist tables

@lru_cache(maxsize=None)
def _bs_pows(spec: GroupSpec) -> tuple[int, ...]:
    return tuple(pow(spec.m, s, spec.q) for s in range(spec.n))


@lru_cache(maxsize=None)
def _sol_pows(spec: GroupSpec) -> tuple[Matrix, ...]:
    out = []
    M: Matrix = ((1, 0), (0, 1))
    for _ in range(spec.oA):
        out.append(tuple(tuple(v % spec.n for v in row) for row in M))
        M = _mat_mul(M, spec.A, spec.n)
    return tuple(out)


@lru_cache(maxsize=None)
def _sol_pow_z(A: Matrix, s: int) -> Matrix:
    if abs(s) > SOL_TIME_CAP:
        raise Overflow(f"twist power |t| = {abs(s)} exceeds cap {SOL_TIME_CAP}")
    if s == 0:
        return ((1, 0), (0, 1))
    step = A if s > 0 else _mat_inv_int(A)
    return _mat_mul(_sol_pow_z(A, s - (1 if s > 0 else -1)), step)


def _bs_reduce(m: int, num: int, exp: int) -> tuple[int, int]:
    """Canonical (u, e) for the value num / m^exp; exp may be negative."""
    if num == 0:
        return (0, 0)
    if exp < 0:
        if -exp > BS_EXPONENT_CAP:
            raise Overflow(f"denominator exponent {-exp} exceeds cap {BS_EXPONENT_CAP}")
        num *= m ** (-exp)
        exp = 0
    while exp > 0 and num % m == 0:
        num //= m
        exp -= 1
    if abs(num) > BS_NUMERATOR_CAP:
        raise Overflow(f"numerator needs more than 128 bits (|u| ~ 2^{abs(num).bit_length()})")
    return (num, exp)


# ---------------------------------------------------------------------------
# element arithmetic

def identity(spec: GroupSpec) -> Element:
    f = spec.family
    if f == "lamplighter-fin":
        return ((0,) * spec.n, 0)
    if f == "lamplighter-inf":
        return ((), 0)
    if f == "bs-fin":
        return (0, 0)
    if f == "bs-inf":
        return ((0, 0), 0)
    return ((0, 0), 0)


def mul(spec: GroupSpec, x: Element, y: Element) -> Element:
    """Product xy under the twisted law (x, s)(y, t) = (x + phi_s(y), s + t)."""
    f = spec.family
    if f == "lamplighter-fin":
        (fx, s), (fy, t) = x, y
        n, m = spec.n, spec.m
        lamps = tuple((fx[i] + fy[(i - s) % n]) % m for i in range(n))
        return (lamps, (s + t) % n)
    if f == "lamplighter-inf":
        (fx, s), (fy, t) = x, y
        m = spec.m
        acc = dict(fx)
        for i, v in fy:
            j = i + s
            w = (acc.get(j, 0) + v) % m
            if w:
                acc[j] = w
            else:
                acc.pop(j, None)
        return (tuple(sorted(acc.items())), s + t)
    if f == "bs-fin":
        (a, s), (b, t) = x, y
        q, n = spec.q, spec.n
        return ((a + _bs_pows(spec)[s] * b) % q, (s + t) % n)
    if f == "bs-inf":
        ((ux, ex), s), ((uy, ey), t) = x, y
        # x + m^s * y = ux / m^ex + uy / m^(ey - s)
        e2 = ey - s
        E = max(ex, e2, 0)
        if E - ex > BS_EXPONENT_CAP or E - e2 > BS_EXPONENT_CAP:
            raise Overflow(f"exponent spread exceeds cap {BS_EXPONENT_CAP}")
        m = spec.m
        num = ux * m ** (E - ex) + uy * m ** (E - e2)
        return (_bs_reduce(m, num, E), s + t)
    if f == "sol-fin":
        ((v1, v2), s), ((w1, w2), t) = x, y
        n = spec.n
        M = _sol_pows(spec)[s]
        return (
            ((v1 + M[0][0] * w1 + M[0][1] * w2) % n,
             (v2 + M[1][0] * w1 + M[1][1] * w2) % n),
            (s + t) % spec.oA,
        )
    if f == "sol-inf":
        ((v1, v2), s), ((w1, w2), t) = x, y
        M = _sol_pow_z(spec.A, s)
        return (
            (v1 + M[0][0] * w1 + M[0][1] * w2,
             v2 + M[1][0] * w1 + M[1][1] * w2),
            s + t,
        )
    raise FamilyMismatch(f"unknown family {f!r}")


def inv(spec: GroupSpec, x: Element) -> Element:
    """Inverse (x, s)^{-1} = (-phi_{-s}(x), -s)."""
    f = spec.family
    if f == "lamplighter-fin":
        fx, s = x
        n, m = spec.n, spec.m
        lamps = tuple((-fx[(i + s) % n]) % m for i in range(n))
        return (lamps, (-s) % n)
    if f == "lamplighter-inf":
        fx, s = x
        m = spec.m
        lamps = tuple(sorted((i - s, (-v) % m) for i, v in fx))
        return (lamps, -s)
    if f == "bs-fin":
        a, s = x
        q, n = spec.q, spec.n
        si = (n - s) % n
        return ((-_bs_pows(spec)[si] * a) % q, si)
    if f == "bs-inf":
        (u, e), s = x
        return (_bs_reduce(spec.m, -u, e + s), -s)
    if f == "sol-fin":
        (v1, v2), s = x
        n, oA = spec.n, spec.oA
        si = (oA - s) % oA
        M = _sol_pows(spec)[si]
        return (
            ((-(M[0][0] * v1 + M[0][1] * v2)) % n,
             (-(M[1][0] * v1 + M[1][1] * v2)) % n),
            si,
        )
    if f == "sol-inf":
        (v1, v2), s = x
        M = _sol_pow_z(spec.A, -s)
        return (
            (-(M[0][0] * v1 + M[0][1] * v2),
             -(M[1][0] * v1 + M[1][1] * v2)),
            -s,
        )
    raise FamilyMismatch(f"unknown family {f!r}")


def generators(spec: GroupSpec, include_e2: bool = False) -> tuple[Element, ...]:
    """Symmetric generating set, duplicates collapsed keeping first occurrence.

    Order: normal-part generator and its inverse, then (for sol with
    ``include_e2``) the second coordinate pair, then the time step and its
    inverse.  Size is at most 4 (6 with ``include_e2``).
    """
    f = spec.family
    if f == "lamplighter-fin":
        n, m = spec.n, spec.m
        zero = (0,) * n
        lamp = ((1,) + (0,) * (n - 1), 0)
        raw = [lamp, inv(spec, lamp), (zero, 1), (zero, (n - 1) % n)]
    elif f == "lamplighter-inf":
        m = spec.m
        raw = [(((0, 1),), 0), (((0, m - 1),), 0), ((), 1), ((), -1)]
    elif f == "bs-fin":
        raw = [(1, 0), (spec.q - 1, 0), (0, 1), (0, (spec.n - 1) % spec.n)]
    elif f == "bs-inf":
        raw = [((1, 0), 0), ((-1, 0), 0), ((0, 0), 1), ((0, 0), -1)]
    elif f == "sol-fin":
        n, oA = spec.n, spec.oA
        raw = [((1, 0), 0), ((n - 1, 0), 0)]
        if include_e2:
            raw += [((0, 1), 0), ((0, n - 1), 0)]
        raw += [((0, 0), 1), ((0, 0), (oA - 1) % oA)]
    elif f == "sol-inf":
        raw = [((1, 0), 0), ((-1, 0), 0)]
        if include_e2:
            raw += [((0, 1), 0), ((0, -1), 0)]
        raw += [((0, 0), 1), ((0, 0), -1)]
    else:
        raise FamilyMismatch(f"unknown family {f!r}")

    e = identity(spec)
    out: list[Element] = []
    for g in raw:
        if g != e and g not in out:
            out.append(g)
    if not out:
        raise DegenerateGenerators(f"no non-identity generators for {spec}")
    return tuple(out)


def project(parent: GroupSpec, quotient: GroupSpec, x: Element) -> Element:
    """Canonical quotient map from an infinite parent onto its finite quotient.

    Also accepts identical specs (identity map).  Lamp values are summed over
    position classes mod n; the bs dyadic u / m^e reduces via the inverse of m
    mod q; sol coordinates reduce mod n and time mod o(A, n).
    """
    if parent == quotient:
        return x
    pf, qf = parent.family, quotient.family
    if pf == "lamplighter-inf" and qf == "lamplighter-fin" and parent.m == quotient.m:
        lamps, pos = x
        n, m = quotient.n, quotient.m
        acc = [0] * n
        for i, v in lamps:
            acc[i % n] = (acc[i % n] + v) % m
        return (tuple(acc), pos % n)
    if pf == "bs-inf" and qf == "bs-fin" and parent.m == quotient.m:
        (u, e), t = x
        q, n, m = quotient.q, quotient.n, quotient.m
        minv = pow(m, n - 1, q)  # m * m^(n-1) = m^n = 1 mod q
        return ((u * pow(minv, e, q)) % q, t % n)
    if pf == "sol-inf" and qf == "sol-fin" and parent.A == quotient.A:
        (v1, v2), t = x
        n = quotient.n
        return ((v1 % n, v2 % n), t % quotient.oA)
    raise IncompatibleSpecs(f"no canonical projection {parent} -> {quotient}")


# ---------------------------------------------------------------------------
# canonical element strings

def to_string(spec: GroupSpec, x: Element) -> str:
    """Canonical string form, stable across runs; inverse of from_string."""
    f = spec.family
    if f == "lamplighter-fin":
        lamps, pos = x
        body = "".join(map(str, lamps)) if spec.m <= 10 else ",".join(map(str, lamps))
        return f"lamps:{body}|pos:{pos}"
    if f == "lamplighter-inf":
        lamps, pos = x
        body = ",".join(f"{i}={v}" for i, v in lamps)
        return f"lamps:{body}|pos:{pos}"
    if f == "bs-fin":
        a, t = x
        return f"a:{a}|t:{t}"
    if f == "bs-inf":
        (u, e), t = x
        body = str(u) if e == 0 else f"{u}/{spec.m}^{e}"
        return f"a:{body}|t:{t}"
    if f in ("sol-fin", "sol-inf"):
        (v1, v2), t = x
        return f"v:({v1},{v2})|t:{t}"
    raise FamilyMismatch(f"unknown family {f!r}")


def from_string(spec: GroupSpec, text: str) -> Element:
    """Parse the canonical string form; BadParam on malformed input."""
    f = spec.family
    try:
        left, right = text.split("|")
        lkey, lval = left.split(":", 1)
        rkey, rval = right.split(":", 1)
    except ValueError as exc:
        raise BadParam(f"malformed element string {text!r}") from exc

    if f == "lamplighter-fin":
        if lkey != "lamps" or rkey != "pos":
            raise BadParam(f"expected lamps:...|pos:... for {f}, got {text!r}")
        if spec.m <= 10:
            digits = tuple(int(c) for c in lval)
        else:
            digits = tuple(int(c) for c in lval.split(",")) if lval else ()
        if len(digits) != spec.n or any(not 0 <= d < spec.m for d in digits):
            raise BadParam(f"bad lamp digits in {text!r}")
        pos = int(rval)
        if not 0 <= pos < spec.n:
            raise BadParam(f"pos {pos} out of range in {text!r}")
        return (digits, pos)
    if f == "lamplighter-inf":
        if lkey != "lamps" or rkey != "pos":
            raise BadParam(f"expected lamps:...|pos:... for {f}, got {text!r}")
        pairs = []
        if lval:
            for item in lval.split(","):
                i, v = item.split("=")
                pairs.append((int(i), int(v)))
        if any(not 1 <= v < spec.m for _, v in pairs):
            raise BadParam(f"lamp value out of range in {text!r}")
        if sorted(pairs) != pairs or len({i for i, _ in pairs}) != len(pairs):
            raise BadParam(f"lamp support not sorted-unique in {text!r}")
        return (tuple(pairs), int(rval))
    if f == "bs-fin":
        if lkey != "a" or rkey != "t":
            raise BadParam(f"expected a:...|t:... for {f}, got {text!r}")
        a, t = int(lval), int(rval)
        if not (0 <= a < spec.q and 0 <= t < spec.n):
            raise BadParam(f"payload out of range in {text!r}")
        return (a, t)
    if f == "bs-inf":
        if lkey != "a" or rkey != "t":
            raise BadParam(f"expected a:...|t:... for {f}, got {text!r}")
        if "/" in lval:
            num, den = lval.split("/")
            base, exp = den.split("^")
            if int(base) != spec.m:
                raise BadParam(f"denominator base {base} is not m={spec.m} in {text!r}")
            u, e = int(num), int(exp)
            if e <= 0 or u % spec.m == 0:
                raise BadParam(f"unreduced dyadic payload in {text!r}")
        else:
            u, e = int(lval), 0
        return ((u, e), int(rval))
    if f in ("sol-fin", "sol-inf"):
        if lkey != "v" or rkey != "t":
            raise BadParam(f"expected v:(..,..)|t:... for {f}, got {text!r}")
        if not (lval.startswith("(") and lval.endswith(")")):
            raise BadParam(f"bad vector syntax in {text!r}")
        v1, v2 = (int(c) for c in lval[1:-1].split(","))
        t = int(rval)
        if f == "sol-fin":
            n = spec.n
            if not (0 <= v1 < n and 0 <= v2 < n and 0 <= t < spec.oA):
                raise BadParam(f"payload out of range in {text!r}")
        return ((v1, v2), t)
    raise FamilyMismatch(f"unknown family {f!r}")


# ---------------------------------------------------------------------------
# spec serialization

def spec_to_dict(spec: GroupSpec) -> dict:
    """JSON-ready dict holding only the defining parameters."""
    out: dict = {"family": spec.family}
    if spec.m is not None:
        out["m"] = spec.m
    if spec.n is not None:
        out["n"] = spec.n
    if spec.A is not None:
        out["A"] = [list(row) for row in spec.A]
    return out


def spec_from_dict(data: dict) -> GroupSpec:
    """Inverse of spec_to_dict; unknown keys are rejected."""
    if not isinstance(data, dict):
        raise BadParam(f"spec JSON must be an object, got {type(data).__name__}")
    extra = set(data) - {"family", "m", "n", "A"}
    if extra:
        raise BadParam(f"unknown spec keys {sorted(extra)}")
    if "family" not in data:
        raise BadParam("spec JSON needs a 'family' key")
    return make_spec(data["family"], m=data.get("m"), n=data.get("n"), A=data.get("A"))


# ---------------------------------------------------------------------------
# integer codes for finite families (vectorized scans)

class CodeSpace:
    """Perfect integer coding of a finite family's elements.

    Codes run over range(order).  ``act_left`` maps an array of codes x to the
    codes of g * x in one vectorized pass; ``payload`` exposes the decoded
    arrays so repeated actions on a fixed support skip the decode.
    """

    def __init__(self, spec: GroupSpec):
        if not spec.finite:
            raise FamilyMismatch(f"codes need a finite family, got {spec.family}")
        self.spec = spec
        self.order = spec.order
        f = spec.family
        if f == "lamplighter-fin":
            self._mpows = np.array([spec.m**i for i in range(spec.n)], dtype=np.int64)
        elif f == "bs-fin":
            self._bpows = np.array(_bs_pows(spec), dtype=np.int64)
        else:
            self._apows = _sol_pows(spec)

    def encode(self, x: Element) -> int:
        f = self.spec.family
        if f == "lamplighter-fin":
            lamps, pos = x
            acc = 0
            for i in reversed(range(self.spec.n)):
                acc = acc * self.spec.m + lamps[i]
            return acc * self.spec.n + pos
        if f == "bs-fin":
            a, t = x
            return t + self.spec.n * a
        (v1, v2), t = x
        return t + self.spec.oA * (v2 + self.spec.n * v1)

    def decode(self, code: int) -> Element:
        f = self.spec.family
        if f == "lamplighter-fin":
            n, m = self.spec.n, self.spec.m
            pos = code % n
            rest = code // n
            lamps = []
            for _ in range(n):
                lamps.append(rest % m)
                rest //= m
            return (tuple(lamps), pos)
        if f == "bs-fin":
            return (code // self.spec.n, code % self.spec.n)
        oA, n = self.spec.oA, self.spec.n
        t = code % oA
        rest = code // oA
        return ((rest // n, rest % n), t)

    def encode_many(self, elements) -> np.ndarray:
        return np.fromiter((self.encode(x) for x in elements), dtype=np.int64,
                           count=len(elements))

    def payload(self, codes: np.ndarray):
        """Decoded arrays: lamplighter (digits, pos), bs (a, t), sol (v1, v2, t)."""
        f = self.spec.family
        codes = np.asarray(codes, dtype=np.int64)
        if f == "lamplighter-fin":
            n, m = self.spec.n, self.spec.m
            pos = codes % n
            rest = codes // n
            digits = (rest[:, None] // self._mpows[None, :]) % m
            return (digits, pos)
        if f == "bs-fin":
            n = self.spec.n
            return (codes // n, codes % n)
        oA, n = self.spec.oA, self.spec.n
        t = codes % oA
        rest = codes // oA
        return (rest // n, rest % n, t)

    def act_left(self, g: Element, codes: np.ndarray, payload=None) -> np.ndarray:
        """Codes of g * x for every code x in ``codes``."""
        if payload is None:
            payload = self.payload(codes)
        f = self.spec.family
        if f == "lamplighter-fin":
            n, m = self.spec.n, self.spec.m
            digits, pos = payload
            flamps, s = g
            idx = np.array([(i - s) % n for i in range(n)], dtype=np.int64)
            shifted = digits[:, idx]
            newdig = (np.array(flamps, dtype=np.int64)[None, :] + shifted) % m
            return (newdig @ self._mpows) * n + (pos + s) % n
        if f == "bs-fin":
            q, n = self.spec.q, self.spec.n
            a, t = payload
            b, s = g
            return (t + s) % n + n * ((b + int(self._bpows[s]) * a) % q)
        oA, n = self.spec.oA, self.spec.n
        v1, v2, t = payload
        (w1, w2), s = g
        M = self._apows[s]
        u1 = (w1 + M[0][0] * v1 + M[0][1] * v2) % n
        u2 = (w2 + M[1][0] * v1 + M[1][1] * v2) % n
        return (t + s) % oA + oA * (u2 + n * u1)
