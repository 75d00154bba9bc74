"""Multi-modular characteristic polynomial of integer matrices.

Each prime gives a Hessenberg reduction in int64 numpy arithmetic; the
residues are lifted by CRT against an a-priori coefficient bound.
"""

from __future__ import annotations

import numpy as np

# products of two residues stay below 2**52; int64 dot products of up to
# 2**11 such terms cannot overflow
_PRIME_CEILING = 1 << 26
_MAX_DIM = 1 << 11


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


_PRIMES: list[int] = []


def primes(count: int) -> list[int]:
    """The ``count`` largest primes below 2**26, descending."""
    cache = _PRIMES
    n = cache[-1] - 1 if cache else _PRIME_CEILING - 1
    while len(cache) < count:
        if _is_prime(n):
            cache.append(n)
        n -= 1
    return cache[:count]


def _hessenberg_mod(h: np.ndarray, p: int) -> np.ndarray:
    """Upper Hessenberg form similar to ``h`` over GF(p); modifies ``h``."""
    n = h.shape[0]
    for k in range(n - 2):
        col = h[k + 1 :, k]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        r = k + 1 + int(nz[0])
        if r != k + 1:
            h[[k + 1, r]] = h[[r, k + 1]]
            h[:, [k + 1, r]] = h[:, [r, k + 1]]
        inv = pow(int(h[k + 1, k]), p - 2, p)
        m = h[k + 2 :, k] * inv % p
        if not m.any():
            continue
        h[k + 2 :] = (h[k + 2 :] - np.outer(m, h[k + 1]) % p) % p
        h[:, k + 1] = (h[:, k + 1] + h[:, k + 2 :].dot(m) % p) % p
    return h


def _hessenberg_char_poly(h: np.ndarray, p: int) -> np.ndarray:
    """Char poly (lowest degree first) of an upper Hessenberg matrix mod p."""
    n = h.shape[0]
    polys = np.zeros((n + 1, n + 1), dtype=np.int64)
    polys[0, 0] = 1
    hl = [[int(x) for x in row] for row in h]
    for m in range(1, n + 1):
        # p_m = (x - h_mm) p_{m-1} - sum_i h_im * prod_{j>i} h_{j,j-1} * p_{i-1}
        prev = polys[m - 1]
        cur = np.zeros(n + 1, dtype=np.int64)
        cur[1:] = prev[:-1]
        cur = (cur - hl[m - 1][m - 1] * prev % p) % p
        weights = np.zeros(m - 1, dtype=np.int64)
        prod = 1
        for i in range(m - 1, 0, -1):
            prod = prod * hl[i][i - 1] % p
            if prod == 0:
                break
            weights[i - 1] = hl[i - 1][m - 1] * prod % p
        if weights.any():
            cur = (cur - weights.dot(polys[: m - 1]) % p) % p
        polys[m] = cur
    return polys[n]


def char_poly_mod(num: np.ndarray, p: int) -> np.ndarray:
    h = np.array([[x % p for x in row] for row in num], dtype=np.int64)
    return _hessenberg_char_poly(_hessenberg_mod(h, p), p)


def char_poly_crt(num: np.ndarray, bound: int) -> list[int]:
    """Exact integer char poly (highest degree first) given |coeff| <= bound."""
    n = num.shape[0]
    if n > _MAX_DIM:
        raise ValueError(f"matrix dimension {n} exceeds the modular kernel limit {_MAX_DIM}")
    need = 2 * bound + 1
    residues = None
    modulus = 1
    for p in primes(max(1, need.bit_length() // 25 + 2)):
        r = [int(x) for x in char_poly_mod(num, p)]
        if residues is None:
            residues = r
        else:
            inv = pow(modulus % p, -1, p)
            residues = [x + modulus * ((ri - x) * inv % p) for x, ri in zip(residues, r)]
        modulus *= p
        if modulus >= need:
            break
    else:  # pragma: no cover - prime count is chosen from the bound
        raise RuntimeError("insufficient primes for CRT reconstruction")
    half = modulus // 2
    lifted = [x - modulus if x > half else x for x in residues]
    return list(reversed(lifted))
