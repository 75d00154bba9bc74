"""Exact dense linear algebra over the rationals.

Vectors and matrices store an integer numerator array (numpy ``object`` dtype,
so entries are unbounded Python ints) together with a single positive common
denominator. Everything here is exact; no operation accepts a tolerance.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from ubbcert import _modular

__all__ = [
    "LinearDependenceError",
    "RationalVector",
    "RationalMatrix",
    "tensor_product",
    "rank",
    "kernel_basis",
    "orthogonalize",
    "char_poly",
    "is_psd",
    "min_eig_bound",
    "format_rmat",
    "parse_rmat",
]


class LinearDependenceError(ValueError):
    """Raised when vectors expected to be independent are not."""


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def _int_array(values, ndim: int) -> np.ndarray:
    arr = np.empty(np.shape(values), dtype=object)
    flat = arr.reshape(-1)
    for k, v in enumerate(np.asarray(values, dtype=object).reshape(-1)):
        flat[k] = int(v)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    return arr


def _content(arr: np.ndarray) -> int:
    return reduce(math.gcd, (abs(x) for x in arr.reshape(-1)), 0)


def _common_form(values) -> tuple[np.ndarray, int]:
    """Split an array of rationals into (integer numerators, common denominator)."""
    fr = np.asarray(values, dtype=object)
    flat = [_as_fraction(x) for x in fr.reshape(-1)]
    den = reduce(math.lcm, (f.denominator for f in flat), 1)
    num = np.empty(fr.shape, dtype=object)
    nflat = num.reshape(-1)
    for k, f in enumerate(flat):
        nflat[k] = f.numerator * (den // f.denominator)
    return num, den


def _normalize(num: np.ndarray, den: int) -> tuple[np.ndarray, int]:
    if den == 0:
        raise ZeroDivisionError("zero denominator")
    if den < 0:
        num, den = -num, -den
    g = math.gcd(_content(num), den)
    if g > 1:
        num = num // g
        den //= g
    num.setflags(write=False)
    return num, den


class _Rational:
    """Shared numerator/denominator plumbing for vectors and matrices."""

    __slots__ = ("num", "den")
    _ndim = 0

    def __init__(self, num, den: int = 1):
        arr = num if isinstance(num, np.ndarray) and num.dtype == object else _int_array(num, self._ndim)
        if arr.ndim != self._ndim:
            raise ValueError(f"expected {self._ndim}-d numerators, got shape {arr.shape}")
        num, den = _normalize(arr.copy(), int(den))
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.den == other.den and self.num.shape == other.num.shape and bool(np.all(self.num == other.num))

    def __hash__(self):
        return hash((self.num.shape, tuple(self.num.reshape(-1)), self.den))

    def __neg__(self):
        return type(self)(-self.num, self.den)

    def _combine(self, other, sign: int):
        if type(other) is not type(self):
            return NotImplemented
        if self.num.shape != other.num.shape:
            raise ValueError(f"shape mismatch {self.num.shape} vs {other.num.shape}")
        den = math.lcm(self.den, other.den)
        return type(self)(self.num * (den // self.den) + sign * other.num * (den // other.den), den)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __mul__(self, scalar):
        if isinstance(scalar, _Rational):
            return NotImplemented
        s = _as_fraction(scalar)
        return type(self)(self.num * s.numerator, self.den * s.denominator)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        s = _as_fraction(scalar)
        if s == 0:
            raise ZeroDivisionError("division of a rational array by zero")
        return self * (1 / s)

    def is_zero(self) -> bool:
        return not np.any(self.num != 0)

    def to_fractions(self):
        return np.vectorize(lambda x: Fraction(x, self.den), otypes=[object])(self.num)

    def to_float(self) -> np.ndarray:
        # exact int -> float conversion of each ratio
        return np.vectorize(lambda x: x / self.den, otypes=[float])(self.num)


class RationalVector(_Rational):
    """Exact rational vector."""

    __slots__ = ()
    _ndim = 1

    @classmethod
    def of(cls, entries: Iterable) -> RationalVector:
        num, den = _common_form(list(entries))
        return cls(num, den)

    @classmethod
    def basis(cls, dim: int, index: int) -> RationalVector:
        num = np.zeros(dim, dtype=object)
        num[index] = 1
        return cls(num)

    @classmethod
    def zeros(cls, dim: int) -> RationalVector:
        num = np.empty(dim, dtype=object)
        num[:] = 0
        return cls(num)

    @property
    def dim(self) -> int:
        return self.num.shape[0]

    def __len__(self):
        return self.dim

    def __getitem__(self, i) -> Fraction:
        return Fraction(self.num[i], self.den)

    def __iter__(self):
        return (Fraction(x, self.den) for x in self.num)

    def __repr__(self):
        return f"RationalVector({[str(x) for x in self]})"

    def dot(self, other: RationalVector) -> Fraction:
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        return Fraction(int(np.dot(self.num, other.num)), self.den * other.den)

    def norm2(self) -> Fraction:
        return self.dot(self)

    def primitive(self) -> RationalVector:
        """Positive rescaling to coprime integers."""
        g = _content(self.num)
        if g == 0:
            return self
        return RationalVector(self.num // g)

    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.nonzero(self.num != 0)[0])


class RationalMatrix(_Rational):
    """Exact dense rational matrix.

    Passing ``symmetric=True`` asserts symmetry; it is checked entrywise.
    """

    __slots__ = ()
    _ndim = 2

    def __init__(self, num, den: int = 1, *, symmetric: bool = False):
        super().__init__(num, den)
        if symmetric and not self.is_symmetric():
            raise ValueError("matrix flagged symmetric is not symmetric")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], **kw) -> RationalMatrix:
        rows = [list(r) for r in rows]
        if not rows or len({len(r) for r in rows}) != 1 or not rows[0]:
            raise ValueError("rows must be non-empty and of equal length")
        num, den = _common_form(rows)
        return cls(num, den, **kw)

    @classmethod
    def identity(cls, n: int) -> RationalMatrix:
        num = np.zeros((n, n), dtype=object)
        num[:] = 0
        for i in range(n):
            num[i, i] = 1
        return cls(num)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> RationalMatrix:
        num = np.empty((rows, cols), dtype=object)
        num[:] = 0
        return cls(num)

    @classmethod
    def stack(cls, vectors: Sequence[RationalVector]) -> RationalMatrix:
        """Matrix whose rows are the given vectors."""
        if not vectors:
            raise ValueError("cannot stack an empty list")
        den = reduce(math.lcm, (v.den for v in vectors), 1)
        num = np.stack([v.num * (den // v.den) for v in vectors])
        return cls(num, den)

    @classmethod
    def outer(cls, u: RationalVector, v: RationalVector) -> RationalMatrix:
        return cls(np.outer(u.num, v.num), u.den * v.den)

    @property
    def shape(self) -> tuple[int, int]:
        return self.num.shape

    @property
    def rows(self) -> int:
        return self.num.shape[0]

    @property
    def cols(self) -> int:
        return self.num.shape[1]

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return Fraction(self.num[i, j], self.den)

    def __repr__(self):
        return f"RationalMatrix({self.rows}x{self.cols}, den={self.den})"

    def __matmul__(self, other):
        if isinstance(other, RationalMatrix):
            if self.cols != other.rows:
                raise ValueError("shape mismatch for matmul")
            return RationalMatrix(self.num.dot(other.num), self.den * other.den)
        if isinstance(other, RationalVector):
            if self.cols != other.dim:
                raise ValueError("shape mismatch for matvec")
            return RationalVector(self.num.dot(other.num), self.den * other.den)
        return NotImplemented

    @property
    def T(self) -> RationalMatrix:
        return RationalMatrix(self.num.T.copy(), self.den)

    def trace(self) -> Fraction:
        if self.rows != self.cols:
            raise ValueError("trace of a non-square matrix")
        return Fraction(int(sum(self.num.diagonal())), self.den)

    def is_symmetric(self) -> bool:
        return self.rows == self.cols and bool(np.all(self.num == self.num.T))

    def row(self, i: int) -> RationalVector:
        return RationalVector(self.num[i].copy(), self.den)


def tensor_product(u: RationalVector, v: RationalVector) -> RationalVector:
    """Kronecker product; entry ``i*dim(v)+j`` is ``u[i]*v[j]``."""
    return RationalVector(np.outer(u.num, v.num).reshape(-1), u.den * v.den)


# --- elimination ------------------------------------------------------------


def _bareiss_rank(a: np.ndarray) -> int:
    a = a.copy()
    nrows, ncols = a.shape
    r, prev = 0, 1
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(a[r:, c] != 0)[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        piv = a[r, c]
        if r + 1 < nrows and c + 1 < ncols:
            below = a[r + 1 :, c]
            a[r + 1 :, c + 1 :] = (piv * a[r + 1 :, c + 1 :] - np.outer(below, a[r, c + 1 :])) // prev
        a[r + 1 :, c] = 0
        prev = piv
        r += 1
    return r


def rank(m: RationalMatrix) -> int:
    """Exact rank by fraction-free (Bareiss) elimination."""
    if m.rows == 0 or m.cols == 0:
        return 0
    return _bareiss_rank(m.num)


def _primitive_rows(a: np.ndarray, rows) -> None:
    for i in rows:
        g = _content(a[i])
        if g > 1:
            a[i] = a[i] // g


def _gauss_jordan(num: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Integer Gauss-Jordan with row-content reduction; returns (matrix, pivot columns)."""
    a = num.copy()
    nrows, ncols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(a[r:, c] != 0)[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        piv = a[r, c]
        others = [i for i in np.nonzero(a[:, c] != 0)[0] if i != r]
        if others:
            idx = np.array(others)
            a[idx] = piv * a[idx] - np.outer(a[idx, c], a[r])
            _primitive_rows(a, others)
        pivots.append(c)
        r += 1
    return a[:r], pivots


def kernel_basis(m: RationalMatrix) -> list[RationalVector]:
    """Integer basis of the right null space of ``m``."""
    red, pivots = _gauss_jordan(m.num)
    pivset = set(pivots)
    out = []
    for f in range(m.cols):
        if f in pivset:
            continue
        entries = [(i, c) for i, c in enumerate(pivots) if red[i, f] != 0]
        scale = reduce(math.lcm, (abs(red[i, c]) for i, c in entries), 1)
        x = np.zeros(m.cols, dtype=object)
        x[:] = 0
        x[f] = scale
        for i, c in entries:
            x[c] = -red[i, f] * (scale // red[i, c])
        out.append(RationalVector(x).primitive())
    return out


def orthogonalize(vs: Sequence[RationalVector]) -> list[RationalVector]:
    """Gram-Schmidt with denominators cleared.

    The output spans the same space, is pairwise orthogonal, and each vector is
    a positive multiple of a primitive integer vector; the first input is kept
    up to positive scaling.
    """
    out: list[RationalVector] = []
    norms: list[int] = []
    for v in vs:
        w = v.primitive()
        acc = w
        for u, nu in zip(out, norms):
            c = w.dot(u)
            if c:
                acc = acc - u * (c / nu)
        if acc.is_zero():
            raise LinearDependenceError("input vectors are linearly dependent")
        acc = acc.primitive()
        out.append(acc)
        norms.append(int(acc.norm2()))
    return out


# --- characteristic polynomial and PSD -------------------------------------


def _int_char_poly(num: np.ndarray) -> list[int]:
    """Integer characteristic polynomial of an integer matrix, highest degree first."""
    n = num.shape[0]
    if n == 0:
        return [1]
    row_bound = max(sum(abs(x) for x in row) for row in num)
    # |coefficient of lambda^(n-k)| <= C(n,k) * rho^k <= (1 + rho)^n, rho <= max row sum
    bound = (1 + row_bound) ** n
    return _modular.char_poly_crt(num, bound)


def _require_square(m: RationalMatrix) -> None:
    if m.rows != m.cols:
        raise ValueError(f"square matrix required, got {m.rows}x{m.cols}")


def char_poly(m: RationalMatrix) -> list[Fraction]:
    """Coefficients of det(lambda*I - M), highest degree first."""
    _require_square(m)
    coeffs = _int_char_poly(m.num)
    # charpoly of num/den: coefficient k scales by den^-k
    return [Fraction(c, m.den**k) for k, c in enumerate(coeffs)]


def _components(num: np.ndarray) -> list[np.ndarray]:
    """Index sets of the connected components of a symmetric sparsity pattern."""
    n = num.shape[0]
    adj = num != 0
    seen = np.zeros(n, dtype=bool)
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        stack, comp = [s], []
        seen[s] = True
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in np.nonzero(adj[i] & ~seen)[0]:
                seen[j] = True
                stack.append(int(j))
        comps.append(np.array(sorted(comp)))
    return comps


def _require_symmetric(m: RationalMatrix) -> None:
    if not m.is_symmetric():
        raise ValueError("symmetric matrix required")


def _sign_alternates(coeffs: Sequence[int]) -> bool:
    return all((-1) ** k * c >= 0 for k, c in enumerate(coeffs))


def is_psd(m: RationalMatrix) -> bool:
    """Exact PSD test via sign alternation of the characteristic polynomial.

    The matrix is split into the blocks of its sparsity graph first; the
    characteristic polynomial factors over them, so the verdict is unchanged.
    """
    _require_symmetric(m)
    for comp in _components(m.num):
        block = m.num[np.ix_(comp, comp)]
        if not _sign_alternates(_int_char_poly(block)):
            return False
    return True


def _count_roots_below(coeffs: Sequence[int], x: Fraction) -> tuple[int, bool]:
    """Roots (with multiplicity) strictly below ``x`` of a real-rooted integer poly.

    Returns the count and whether ``x`` is itself a root. Uses Descartes' rule,
    which is exact when every root is real.
    """
    n = len(coeffs) - 1
    a, b = x.numerator, x.denominator
    # q(y) = b^n p(y/b) has integer coefficients; p(x - t) ~ q(a - s) with s = b t
    q = [c * b**k for k, c in enumerate(coeffs)]
    # Taylor shift: coefficients of q(a - s) in s, lowest degree first
    shifted = list(reversed(q))
    for i in range(n):
        for j in range(n - 1, i - 1, -1):
            shifted[j] += a * shifted[j + 1]
    # shifted holds q(a + s); flip sign of odd powers for q(a - s)
    poly = [c if k % 2 == 0 else -c for k, c in enumerate(shifted)]
    is_root = poly[0] == 0
    nz = [c for c in poly if c != 0]
    changes = sum(1 for u, v in zip(nz, nz[1:]) if (u > 0) != (v > 0))
    return changes, is_root


def _round_down(q: Fraction) -> float:
    f = float(q)
    return f if Fraction(f) <= q else math.nextafter(f, -math.inf)


def _round_up(q: Fraction) -> float:
    f = float(q)
    return f if Fraction(f) >= q else math.nextafter(f, math.inf)


def _block_min_eig(block: np.ndarray, width: Fraction) -> tuple[Fraction, Fraction]:
    coeffs = _int_char_poly(block)
    rho = max(sum(abs(x) for x in row) for row in block)
    lo = Fraction(-rho - 1)
    hi = Fraction(min(block[i, i] for i in range(block.shape[0])) + 1)
    while hi - lo > width:
        mid = (lo + hi) / 2
        below, root = _count_roots_below(coeffs, mid)
        if below:
            hi = mid
        elif root:
            return mid, mid
        else:
            lo = mid
    return lo, hi


def min_eig_bound(m: RationalMatrix, width: float = 1e-9) -> tuple[float, float]:
    """Rigorous float interval enclosing the smallest eigenvalue of symmetric ``m``."""
    _require_symmetric(m)
    w = Fraction(width) * m.den
    # min over blocks lies in [min of lower ends, min of upper ends]
    bounds = [_block_min_eig(m.num[np.ix_(c, c)], w) for c in _components(m.num)]
    lo = min(b[0] for b in bounds)
    hi = min(b[1] for b in bounds)
    return _round_down(lo / m.den), _round_up(hi / m.den)


# --- text format --------------------------------------------------------------


def format_rmat(m: RationalMatrix) -> str:
    """``rmat <rows> <cols>`` header, then one row per line of ``num/den`` entries."""
    lines = [f"rmat {m.rows} {m.cols}"]
    for i in range(m.rows):
        cells = []
        for x in m.num[i]:
            f = Fraction(x, m.den)
            cells.append(f"{f.numerator}/{f.denominator}")
        lines.append(" ".join(cells))
    return "\n".join(lines) + "\n"


def parse_rmat(text: str) -> RationalMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty rmat document")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "rmat":
        raise ValueError(f"bad rmat header: {lines[0]!r}")
    rows, cols = int(head[1]), int(head[2])
    body = [ln.split(" ") for ln in lines[1:]]
    if len(body) != rows or any(len(r) != cols for r in body):
        raise ValueError(f"rmat body does not match declared shape {rows}x{cols}")
    return RationalMatrix.from_rows([[Fraction(c) for c in r] for r in body])
