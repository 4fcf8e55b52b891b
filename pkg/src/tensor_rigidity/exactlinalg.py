"""Exact linear algebra over the rationals and over prime fields.

All arithmetic in this module is exact: rationals are `fractions.Fraction`,
prime-field elements are reduced residues held in uint64 arrays, and integer
computations (Bareiss elimination, Smith normal form) use Python's unbounded
integers.  There is no floating point anywhere in a result path; a float is
used only as a scratch quantity inside the modular multiply, where its error
is provably corrected.

Supported prime fields are GF(q) for any prime q < 2**52 plus the fixed
Mersenne prime ``LARGE_PRIME = 2**61 - 1`` used for randomized rank
evaluation.  Both ranges admit exact vectorized multiplication in uint64.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

#: Fixed public prime used for randomized (Schwartz-Zippel style) rank
#: evaluation.  2**61 - 1 is the largest prime admitting exact, branch-free
#: vectorized modular multiplication in 64-bit words.
LARGE_PRIME = (1 << 61) - 1

#: Companion prime for the certified modular rank scheme (two moduli must
#: agree before a modular rank is accepted).  Fixed so results are
#: reproducible run to run.
SECOND_PRIME = (1 << 52) - 47

_U63 = np.uint64(1) << np.uint64(63)
_MASK31 = np.uint64((1 << 31) - 1)
_MASK30 = np.uint64((1 << 30) - 1)
_UM61 = np.uint64(LARGE_PRIME)


# ---------------------------------------------------------------------------
# primality and factoring
# ---------------------------------------------------------------------------

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all n < 3.3 * 10**24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int, rng: random.Random) -> int:
    """One nontrivial factor of composite odd n."""
    while True:
        c = rng.randrange(1, n)
        x = y = rng.randrange(2, n)
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d


def prime_factors(n: int) -> tuple[int, ...]:
    """Sorted distinct prime factors of |n|.  prime_factors(0/1) == ()."""
    n = abs(int(n))
    if n <= 1:
        return ()
    found: set[int] = set()
    for p in (2, 3, 5):
        while n % p == 0:
            found.add(p)
            n //= p
    f = 7
    while f * f <= n and f < 100_000:
        if n % f == 0:
            found.add(f)
            while n % f == 0:
                n //= f
        f += 2
    rng = random.Random(0xF_AC_70)
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            found.add(m)
            continue
        d = _pollard_rho(m, rng)
        stack.append(d)
        stack.append(m // d)
    return tuple(sorted(found))


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------


class RationalField:
    """Tag object for exact rational arithmetic; use the singleton ``QQ``."""

    name = "Q"

    def __repr__(self) -> str:
        return "Q"

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalField)

    def __hash__(self) -> int:
        return hash("RationalField")


QQ = RationalField()


@dataclass(frozen=True)
class PrimeField:
    """The finite field GF(q) for a prime q.

    q must be < 2**52 or exactly ``LARGE_PRIME``; those are the moduli for
    which the vectorized multiply is exact.
    """

    q: int

    def __post_init__(self):
        q = self.q
        if not is_prime(q):
            raise ValueError(f"modulus {q} is not prime")
        if q >= (1 << 52) and q != LARGE_PRIME:
            raise ValueError(f"modulus {q} unsupported (must be < 2**52 or {LARGE_PRIME})")

    @property
    def name(self) -> str:
        return f"GF({self.q})"

    def __repr__(self) -> str:
        return self.name


def GF(q: int) -> PrimeField:
    return PrimeField(int(q))


GF_LARGE = GF(LARGE_PRIME)


# ---------------------------------------------------------------------------
# vectorized modular arithmetic (exact)
# ---------------------------------------------------------------------------


def _mulmod_m61(a, b):
    # Split into 31/30-bit halves; every partial product fits in uint64 and
    # powers of two fold through 2**61 == 1 (mod 2**61 - 1).
    a1 = a >> np.uint64(31)
    a0 = a & _MASK31
    b1 = b >> np.uint64(31)
    b0 = b & _MASK31
    t1 = a1 * b1
    m = a1 * b0 + a0 * b1
    t3 = a0 * b0
    mh = m >> np.uint64(61)
    ml = m & _UM61
    contrib2 = (mh << np.uint64(31)) + (ml >> np.uint64(30)) + ((ml & _MASK30) << np.uint64(31))
    total = t1 + t1 + contrib2 + (t3 >> np.uint64(61)) + (t3 & _UM61)
    s = (total >> np.uint64(61)) + (total & _UM61)
    s = np.where(s >= _UM61, s - _UM61, s)
    return np.where(s >= _UM61, s - _UM61, s)


def _mulmod(a, b, q: int):
    """Exact (a * b) % q on uint64 arrays with entries already in [0, q)."""
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    uq = np.uint64(q)
    with np.errstate(over="ignore"):
        if q < (1 << 31):
            return (a * b) % uq
        if q == LARGE_PRIME:
            return _mulmod_m61(a, b)
        # float-assisted Barrett step: the approximate quotient is off by at
        # most a few units for q < 2**52; the correction rounds repair that
        # exactly (uint64 wraparound in the intermediate is intentional).
        quo = (a.astype(np.float64) * b.astype(np.float64) / float(q)).astype(np.uint64)
        r = a * b - quo * uq
        for _ in range(4):
            r = np.where(r >= _U63, r + uq, r)
        for _ in range(4):
            r = np.where((r < _U63) & (r >= uq), r - uq, r)
        return r


def _submod(a, b, q: int):
    uq = np.uint64(q)
    with np.errstate(over="ignore"):
        r = a - b
        return np.where(a < b, r + uq, r)


def _addmod(a, b, q: int):
    uq = np.uint64(q)
    with np.errstate(over="ignore"):
        r = a + b
        return np.where(r >= uq, r - uq, r)


def _coerce_int(x) -> int:
    if isinstance(x, Fraction):
        if x.denominator != 1:
            raise ValueError("matrix entry is not an integer")
        return x.numerator
    return int(x)


def _reduce_int_array(rows, q: int) -> np.ndarray:
    """Residues mod q of an integer matrix given as array or nested lists."""
    if not isinstance(rows, np.ndarray):
        rows = list(rows)
        if not rows:
            return np.zeros((0, 0), dtype=np.uint64)
    try:
        arr = np.asarray(rows, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError("matrix input must be two-dimensional")
    except (OverflowError, TypeError):
        return np.array(
            [[_coerce_int(x) % q for x in row] for row in rows], dtype=np.uint64
        )
    return (arr % q).astype(np.uint64)


# ---------------------------------------------------------------------------
# elimination over GF(q)
# ---------------------------------------------------------------------------


def _eliminate_mod(a: np.ndarray, q: int, reduced: bool = False):
    """Row echelon form over GF(q); returns (matrix, pivot column list).

    With reduced=True the result is the unique RREF (pivots are 1 and are the
    only nonzero entries in their columns).
    """
    a = a.astype(np.uint64, copy=True)
    nrows, ncols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        inv = np.uint64(pow(int(a[r, c]), -1, q))
        a[r] = _mulmod(a[r], inv, q)
        if reduced:
            targets = np.nonzero(a[:, c])[0]
            targets = targets[targets != r]
        else:
            targets = r + 1 + np.nonzero(a[r + 1 :, c])[0]
        if targets.size:
            f = a[targets, c]
            a[targets] = _submod(a[targets], _mulmod(f[:, None], a[r][None, :], q), q)
        pivots.append(c)
        r += 1
    return a, pivots


def _rank_mod(a: np.ndarray, q: int) -> int:
    return len(_eliminate_mod(a, q, reduced=False)[1])


def _kernel_mod(a: np.ndarray, q: int) -> np.ndarray:
    """Basis (rows) of the right kernel over GF(q); shape (dim, ncols)."""
    rref, pivots = _eliminate_mod(a, q, reduced=True)
    ncols = a.shape[1]
    pivot_set = set(pivots)
    free = [c for c in range(ncols) if c not in pivot_set]
    basis = np.zeros((len(free), ncols), dtype=np.uint64)
    uq = np.uint64(q)
    for i, fc in enumerate(free):
        basis[i, fc] = 1
        for rr, pc in enumerate(pivots):
            v = rref[rr, fc]
            if v:
                basis[i, pc] = uq - v
    return basis


# ---------------------------------------------------------------------------
# elimination over Q
# ---------------------------------------------------------------------------


def _rref_frac(rows: list[list[Fraction]]):
    """In-place RREF over Q on a list of Fraction rows; returns pivot cols."""
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pv = rows[r][c]
        if pv != 1:
            rows[r] = [x / pv for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return pivots


def _kernel_frac(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    work = [list(row) for row in rows]
    ncols = len(work[0]) if work else 0
    pivots = _rref_frac(work)
    pivot_set = set(pivots)
    free = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for rr, pc in enumerate(pivots):
            vec[pc] = -work[rr][fc]
        basis.append(vec)
    return basis


def _bareiss_rank(rows: list[list[int]]) -> int:
    """Rank of an integer matrix by fraction-free (Bareiss) elimination.

    Raises AssertionError if an exact division ever fails, which would mean
    the fraction-free property was violated (a bug, not a data condition).
    """
    a = [list(map(int, row)) for row in rows]
    nrows = len(a)
    ncols = len(a[0]) if nrows else 0
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if a[i][c]), None)
        if p is None:
            continue
        if p != r:
            a[r], a[p] = a[p], a[r]
        pv = a[r][c]
        for i in range(r + 1, nrows):
            ric = a[i][c]
            row_i, row_r = a[i], a[r]
            for j in range(c, ncols):
                num = pv * row_i[j] - ric * row_r[j]
                quot, rem = divmod(num, prev)
                assert rem == 0, "Bareiss elimination produced a non-integer pivot"
                row_i[j] = quot
        prev = pv
        r += 1
    return r


def _integerize_rows(rows) -> list[list[int]]:
    """Scale each row by the lcm of its denominators (rank-preserving)."""
    out = []
    for row in rows:
        denom = 1
        for x in row:
            if isinstance(x, Fraction):
                denom = denom * x.denominator // math.gcd(denom, x.denominator)
        out.append([int(x * denom) for x in row])
    return out


def _rank_q_int(rows: list[list[int]], nrows: int, ncols: int) -> int:
    if nrows <= 200 and ncols <= 200:
        return _bareiss_rank(rows)
    r1 = _rank_mod(_reduce_int_array(rows, LARGE_PRIME), LARGE_PRIME)
    r2 = _rank_mod(_reduce_int_array(rows, SECOND_PRIME), SECOND_PRIME)
    if r1 == r2:
        return r1
    return _bareiss_rank(rows)


# ---------------------------------------------------------------------------
# FieldMatrix
# ---------------------------------------------------------------------------


def _as_fraction_array(rows) -> np.ndarray:
    if isinstance(rows, np.ndarray) and rows.dtype == object:
        data = rows.tolist()
    else:
        data = [list(r) for r in rows]
    arr = np.empty((len(data), len(data[0]) if data else 0), dtype=object)
    for i, row in enumerate(data):
        for j, x in enumerate(row):
            arr[i, j] = x if isinstance(x, Fraction) else Fraction(x)
    return arr


class FieldMatrix:
    """Dense matrix over Q or GF(q) with exact rank/kernel computations.

    Instances are immutable by convention: no method mutates `self`, and the
    field tag is fixed at construction.  Entries are kept canonical
    (Fractions in lowest terms, residues in [0, q)).
    """

    __slots__ = ("field", "_a")

    def __init__(self, field, rows, *, _trusted: np.ndarray | None = None):
        self.field = field
        if _trusted is not None:
            self._a = _trusted
            return
        if isinstance(field, RationalField):
            self._a = _as_fraction_array(rows)
        else:
            self._a = _reduce_int_array(rows, field.q)

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_rows(cls, rows, field=QQ) -> "FieldMatrix":
        return cls(field, rows)

    @classmethod
    def zeros(cls, nrows: int, ncols: int, field=QQ) -> "FieldMatrix":
        if isinstance(field, RationalField):
            a = np.empty((nrows, ncols), dtype=object)
            a[:] = Fraction(0)
            return cls(field, None, _trusted=a)
        return cls(field, None, _trusted=np.zeros((nrows, ncols), dtype=np.uint64))

    @classmethod
    def identity(cls, n: int, field=QQ) -> "FieldMatrix":
        m = cls.zeros(n, n, field)
        one = Fraction(1) if isinstance(field, RationalField) else np.uint64(1)
        for i in range(n):
            m._a[i, i] = one
        return m

    @classmethod
    def stack(cls, mats: "list[FieldMatrix]") -> "FieldMatrix":
        """Vertical stack; all matrices must share field and column count."""
        if not mats:
            raise ValueError("cannot stack an empty list of matrices")
        field = mats[0].field
        ncols = mats[0].ncols
        for m in mats[1:]:
            if m.field != field:
                raise ValueError("stacked matrices must share one field")
            if m.ncols != ncols:
                raise ValueError("stacked matrices must share the column count")
        return cls(field, None, _trusted=np.vstack([m._a for m in mats]))

    # -- basic structure ----------------------------------------------------

    @property
    def nrows(self) -> int:
        return self._a.shape[0]

    @property
    def ncols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    def entries(self) -> np.ndarray:
        """A defensive copy of the raw entry array."""
        return self._a.copy()

    def __getitem__(self, key):
        return self._a[key]

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return self.field == other.field and self.shape == other.shape and bool(
            (self._a == other._a).all()
        )

    def __hash__(self):
        raise TypeError("FieldMatrix is not hashable")

    def __repr__(self) -> str:
        return f"FieldMatrix({self.field!r}, shape={self.shape})"

    def transpose(self) -> "FieldMatrix":
        return FieldMatrix(self.field, None, _trusted=self._a.T.copy())

    def is_integral(self) -> bool:
        if not isinstance(self.field, RationalField):
            return False
        return all(x.denominator == 1 for x in self._a.flat)

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        if self.field != other.field or self.ncols != other.nrows:
            raise ValueError("incompatible matmul operands")
        if isinstance(self.field, RationalField):
            out = np.empty((self.nrows, other.ncols), dtype=object)
            for i in range(self.nrows):
                for j in range(other.ncols):
                    out[i, j] = sum(
                        (self._a[i, t] * other._a[t, j] for t in range(self.ncols)),
                        Fraction(0),
                    )
            return FieldMatrix(self.field, None, _trusted=out)
        q = self.field.q
        out = np.zeros((self.nrows, other.ncols), dtype=np.uint64)
        for t in range(self.ncols):
            out = _addmod(out, _mulmod(self._a[:, t : t + 1], other._a[t : t + 1, :], q), q)
        return FieldMatrix(self.field, None, _trusted=out)

    def is_zero(self) -> bool:
        if isinstance(self.field, RationalField):
            return all(x == 0 for x in self._a.flat)
        return not self._a.any()

    # -- rank / kernel -------------------------------------------------------

    def rank(self) -> int:
        """Exact rank over the matrix's field."""
        if self.nrows == 0 or self.ncols == 0:
            return 0
        if isinstance(self.field, RationalField):
            rows = _integerize_rows(self._a.tolist())
            return _rank_q_int(rows, self.nrows, self.ncols)
        return _rank_mod(self._a, self.field.q)

    def kernel_basis(self, side: str = "right") -> "FieldMatrix":
        """Basis of the requested kernel, one vector per row.

        The result has `ncols - rank` rows for side="right" and
        `nrows - rank` rows for side="left"; each row v satisfies M v = 0
        (resp. v M = 0) exactly.
        """
        if side == "left":
            return self.transpose().kernel_basis("right")
        if side != "right":
            raise ValueError("side must be 'left' or 'right'")
        if isinstance(self.field, RationalField):
            if self.nrows == 0:
                basis = np.empty((self.ncols, self.ncols), dtype=object)
                basis[:] = Fraction(0)
                for i in range(self.ncols):
                    basis[i, i] = Fraction(1)
                return FieldMatrix(self.field, None, _trusted=basis)
            rows = [[x for x in row] for row in self._a.tolist()]
            vecs = _kernel_frac(rows)
            out = np.empty((len(vecs), self.ncols), dtype=object)
            for i, v in enumerate(vecs):
                out[i, :] = v
            return FieldMatrix(self.field, None, _trusted=out)
        if self.nrows == 0:
            basis = np.eye(self.ncols, dtype=np.uint64)
            return FieldMatrix(self.field, None, _trusted=basis)
        return FieldMatrix(self.field, None, _trusted=_kernel_mod(self._a, self.field.q))

    # -- debug dump -----------------------------------------------------------

    def to_debug_dump(self) -> str:
        """Tab-separated dense dump with a `field=` header (test fixtures)."""
        lines = [f"field={self.field.name}", f"shape={self.nrows} {self.ncols}"]
        for row in self._a:
            lines.append("\t".join(str(x) for x in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_debug_dump(cls, text: str) -> "FieldMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("field="):
            raise ValueError("debug dump must start with a field= header")
        tag = lines[0][len("field=") :]
        if tag == "Q":
            field = QQ
        elif tag.startswith("GF(") and tag.endswith(")"):
            field = GF(int(tag[3:-1]))
        else:
            raise ValueError(f"unknown field tag {tag!r}")
        if not lines[1].startswith("shape="):
            raise ValueError("debug dump must carry a shape= line")
        nrows, ncols = map(int, lines[1][len("shape=") :].split())
        rows = []
        for ln in lines[2:]:
            rows.append([Fraction(tok) for tok in ln.split("\t")])
        if len(rows) != nrows or any(len(r) != ncols for r in rows):
            raise ValueError("debug dump shape mismatch")
        if not rows:
            return cls.zeros(nrows, ncols, field)
        return cls(field, rows)


# ---------------------------------------------------------------------------
# module-level operation surface
# ---------------------------------------------------------------------------


def rank(m: FieldMatrix) -> int:
    return m.rank()


def kernel_basis(m: FieldMatrix, side: str = "right") -> FieldMatrix:
    return m.kernel_basis(side)


def stack_rank(mats: list[FieldMatrix]) -> int:
    """Rank of the vertical stack (so dim of the summed row spaces)."""
    return FieldMatrix.stack(mats).rank()


@dataclass(frozen=True)
class SnfResult:
    """Smith normal form summary: divisor chain and its prime support."""

    elementary_divisors: tuple[int, ...]
    bad_primes: frozenset[int]

    @property
    def rank(self) -> int:
        return len(self.elementary_divisors)

    def rank_mod(self, q: int) -> int:
        """Rank over GF(q) implied by the divisors: #{i : q does not divide d_i}."""
        return sum(1 for d in self.elementary_divisors if d % q != 0)


def _to_int_lists(mat) -> list[list[int]]:
    if isinstance(mat, FieldMatrix):
        if not isinstance(mat.field, RationalField):
            raise ValueError("smith_normal_form needs an integer matrix")
        if not mat.is_integral():
            raise ValueError("smith_normal_form needs integer entries")
        return [[int(x) for x in row] for row in mat._a.tolist()]
    arr = np.asarray(mat, dtype=object)
    if arr.ndim != 2:
        raise ValueError("smith_normal_form needs a 2-d matrix")
    out = []
    for row in arr.tolist():
        irow = []
        for x in row:
            if isinstance(x, Fraction):
                if x.denominator != 1:
                    raise ValueError("smith_normal_form needs integer entries")
                x = x.numerator
            irow.append(int(x))
        out.append(irow)
    return out


def smith_normal_form(mat) -> SnfResult:
    """Elementary divisors d_1 | d_2 | ... | d_r of an integer matrix.

    For every prime q, the rank over GF(q) equals the number of divisors not
    divisible by q, so ``bad_primes`` (the primes dividing d_r) are exactly
    the primes where the modular rank drops below the rational rank.
    """
    a = _to_int_lists(mat)
    nrows = len(a)
    ncols = len(a[0]) if nrows else 0
    divisors: list[int] = []
    t = 0
    while t < min(nrows, ncols):
        # locate a nonzero pivot of smallest magnitude in the trailing block
        pr = pc = -1
        best = 0
        for i in range(t, nrows):
            for j in range(t, ncols):
                v = abs(a[i][j])
                if v and (best == 0 or v < best):
                    best, pr, pc = v, i, j
        if pr < 0:
            break
        a[t], a[pr] = a[pr], a[t]
        for row in a:
            row[t], row[pc] = row[pc], row[t]
        while True:
            # shrink the pivot with row reductions, then column reductions
            changed = False
            for i in range(t + 1, nrows):
                if a[i][t]:
                    qv = a[i][t] // a[t][t]
                    if qv:
                        a[i] = [x - qv * y for x, y in zip(a[i], a[t])]
                    if a[i][t]:
                        a[t], a[i] = a[i], a[t]
                        changed = True
            for j in range(t + 1, ncols):
                if a[t][j]:
                    qv = a[t][j] // a[t][t]
                    if qv:
                        for row in a:
                            row[j] -= qv * row[t]
                    if a[t][j]:
                        for row in a:
                            row[t], row[j] = row[j], row[t]
                        changed = True
            if not changed:
                break
        pv = a[t][t]
        # divisibility fix-up: fold in any row whose entries the pivot misses
        fixed = True
        for i in range(t + 1, nrows):
            if any(x % pv for x in a[i][t + 1 :]):
                a[t] = [x + y for x, y in zip(a[t], a[i])]
                fixed = False
                break
        if not fixed:
            continue
        divisors.append(abs(pv))
        t += 1
    for prev, nxt in zip(divisors, divisors[1:]):
        assert nxt % prev == 0, "Smith normal form divisor chain broken"
    bad = prime_factors(divisors[-1]) if divisors else ()
    return SnfResult(tuple(divisors), frozenset(bad))
