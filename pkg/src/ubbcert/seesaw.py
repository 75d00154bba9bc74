"""Alternating (seesaw) maximization of projector overlap over product states.

A state is a tensor product of factors; each sweep fixes all factors but one
and replaces it by the top eigenvector of the resulting effective Hermitian
matrix, so the overlap never decreases within a run.
"""

from __future__ import annotations

import string
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ubbcert.exact_linalg import RationalMatrix

__all__ = ["SeesawConfig", "SeesawResult", "seesaw_search", "seesaw_trajectory", "exact_overlap", "rationalize"]


@dataclass(frozen=True)
class SeesawConfig:
    restarts: int = 200
    max_iters: int = 500
    convergence_tol: float = 1e-12
    overlap_threshold: float = 1 - 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("restarts and max_iters must be positive")
        if not 0 < self.convergence_tol < self.overlap_threshold < 1:
            raise ValueError("need 0 < convergence_tol < overlap_threshold < 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class SeesawResult:
    max_overlap: float
    best_state: np.ndarray = field(repr=False)
    best_factors: tuple[np.ndarray, ...] = field(repr=False)
    best_restart: int
    restarts: int
    seed: int
    iterations: int
    per_restart: tuple[float, ...] = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "max_overlap": self.max_overlap,
            "best_restart": self.best_restart,
            "restarts": self.restarts,
            "seed": self.seed,
            "iterations": self.iterations,
        }


def _contract_spec(nf: int, free: int) -> str:
    letters = string.ascii_lowercase
    bra, ket = letters[:nf], letters[nf : 2 * nf]
    ops = [bra + ket]
    ops += [bra[k] for k in range(nf) if k != free]
    ops += [ket[k] for k in range(nf) if k != free]
    return ",".join(ops) + "->" + bra[free] + ket[free]


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _single_run(tensor: np.ndarray, dims: tuple[int, ...], cfg: SeesawConfig, index: int):
    """One restart; returns (value, factors, iterations, per-update values)."""
    rng = np.random.default_rng([cfg.seed, index])
    nf = len(dims)
    factors = [_unit(rng.standard_normal(n) + 1j * rng.standard_normal(n)) for n in dims]
    specs = [_contract_spec(nf, f) for f in range(nf)]
    value = -np.inf
    slack = max(cfg.convergence_tol, 1e-12)
    it = 0
    history = []
    for it in range(1, cfg.max_iters + 1):
        start = value
        for f in range(nf):
            others = [factors[k] for k in range(nf) if k != f]
            eff = np.einsum(specs[f], tensor, *[o.conj() for o in others], *others)
            eff = (eff + eff.conj().T) / 2
            w, v = np.linalg.eigh(eff)
            new = float(w[-1])
            if new < value - slack:
                raise RuntimeError(f"seesaw overlap decreased from {value} to {new} (restart {index})")
            value = max(value, new)
            history.append(new)
            factors[f] = v[:, -1]
        if value - start < cfg.convergence_tol:
            break
    return value, factors, it, history


def _run_chunk(args):
    tensor, dims, cfg, indices = args
    return [_single_run(tensor, dims, cfg, i) for i in indices]


def _prepare(p, d: int, groups) -> tuple[np.ndarray, tuple[int, ...], list[int]]:
    pf = _as_float(p)
    order = [k for g in groups for k in g]
    t = pf.reshape((d,) * 6).transpose(order + [3 + k for k in order])
    dims = tuple(d ** len(g) for g in groups)
    return np.ascontiguousarray(t).reshape(dims + dims), dims, order


def seesaw_trajectory(p, d: int, groups, cfg: SeesawConfig, index: int = 0) -> list[float]:
    """Overlap after every single-factor update of one restart."""
    tensor, dims, _ = _prepare(p, d, groups)
    return _single_run(tensor, dims, cfg, index)[3]


def _as_float(p) -> np.ndarray:
    m = p.matrix if hasattr(p, "matrix") else p
    if isinstance(m, RationalMatrix):
        return m.to_float()
    return np.asarray(m, dtype=float)


def seesaw_search(p, d: int, groups: tuple[tuple[int, ...], ...], cfg: SeesawConfig, jobs: int = 1) -> SeesawResult:
    """Maximize <x|P|x>/<x|x> over x factorizing along ``groups`` of parties.

    ``groups=((0,), (1,), (2,))`` searches fully product states;
    ``((k,), rest)`` searches states biseparable across ``k | rest``.
    The returned state is in A, B, C party order.
    """
    tensor, dims, order = _prepare(p, d, groups)
    indices = list(range(cfg.restarts))
    if jobs > 1:
        chunks = [indices[k::jobs] for k in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_chunk, [(tensor, dims, cfg, c) for c in chunks]))
        runs = [None] * cfg.restarts
        for c, res in zip(chunks, parts):
            for i, r in zip(c, res):
                runs[i] = r
    else:
        runs = _run_chunk((tensor, dims, cfg, indices))

    values = [r[0] for r in runs]
    best = int(np.argmax(values))
    factors = runs[best][1]
    state = factors[0]
    for f in factors[1:]:
        state = np.kron(state, f)
    # back to A, B, C order
    state = state.reshape((d,) * 3).transpose(np.argsort(order)).reshape(-1)
    return SeesawResult(
        max_overlap=float(values[best]),
        best_state=state,
        best_factors=tuple(factors),
        best_restart=best,
        restarts=cfg.restarts,
        seed=cfg.seed,
        iterations=sum(r[2] for r in runs),
        per_restart=tuple(values),
    )


def rationalize(x: np.ndarray, max_den: int = 10**6) -> tuple[list[Fraction], list[Fraction]]:
    """Continued-fraction rounding of real and imaginary parts."""
    re = [Fraction(float(v)).limit_denominator(max_den) for v in np.real(x)]
    im = [Fraction(float(v)).limit_denominator(max_den) for v in np.imag(x)]
    return re, im


def exact_overlap(p, state: np.ndarray, max_den: int = 10**6) -> Fraction:
    """Exact <x|P|x>/<x|x> for the rationalized ``state`` and real symmetric ``P``."""
    m = p.matrix if hasattr(p, "matrix") else p
    re, im = rationalize(state, max_den)
    num = Fraction(0)
    norm = Fraction(0)
    for part in (re, im):
        v = np.array(part, dtype=object)
        num += v.dot(m.num.dot(v))
        norm += v.dot(v)
    # imaginary cross terms cancel for real symmetric P
    return num / (norm * m.den)
