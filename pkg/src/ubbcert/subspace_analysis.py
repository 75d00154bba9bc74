"""Complement projectors, partial traces/transposes, rank profiles, PPT verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from ubbcert.basis_builder import BasisSet, Bipartition
from ubbcert.exact_linalg import RationalMatrix, is_psd, min_eig_bound, rank

__all__ = [
    "NonOrthogonalError",
    "SubspaceProjector",
    "RankProfile",
    "CutPT",
    "PTReport",
    "CUTS",
    "complement_projector",
    "projector_onto",
    "density",
    "partial_trace",
    "partial_transpose",
    "rank_profile",
    "lemma1_criterion",
    "pt_report",
    "gram_is_diagonal",
]

CUTS = (Bipartition.A_BC, Bipartition.AC_B, Bipartition.AB_C)
_PARTY = {"A": 0, "B": 1, "C": 2}


class NonOrthogonalError(ValueError):
    pass


@dataclass(frozen=True)
class SubspaceProjector:
    d: int
    matrix: RationalMatrix = field(repr=False)
    rank: int
    source: BasisSet | None = field(default=None, repr=False)


def gram_is_diagonal(vectors) -> bool:
    """Exact pairwise orthogonality of rational vectors."""
    v = RationalMatrix.stack(list(vectors))
    g = v.num.dot(v.num.T)
    return not np.any(g[~np.eye(g.shape[0], dtype=bool)] != 0)


def _projector_sum(dim: int, vectors) -> RationalMatrix:
    """Exact ``sum_v |v><v| / <v|v>`` over a pairwise-orthogonal family."""
    norms = [int(v.norm2() * v.den * v.den) for v in vectors]  # integer numerator norms
    big = reduce(math.lcm, norms, 1)
    acc = np.zeros((dim, dim), dtype=object)
    for v, n in zip(vectors, norms):
        idx = np.array(v.support())
        w = big // n
        x = v.num[idx]
        acc[np.ix_(idx, idx)] += w * np.outer(x, x)
    return RationalMatrix(acc, big)


def complement_projector(b: BasisSet) -> SubspaceProjector:
    """``I - sum |psi~><psi~|`` over the set; raises if the set is not orthogonal."""
    if not gram_is_diagonal(s.coeffs for s in b.states):
        raise NonOrthogonalError(f"{b.kind} set (d={b.d}) is not pairwise orthogonal")
    n = b.d**3
    m = RationalMatrix.identity(n) - _projector_sum(n, [s.coeffs for s in b.states])
    return SubspaceProjector(b.d, m, n - len(b.states), b)


def projector_onto(d: int, vectors) -> SubspaceProjector:
    """Projector onto the span of pairwise-orthogonal rational vectors."""
    vectors = list(vectors)
    if len(vectors) > 1 and not gram_is_diagonal(vectors):
        raise NonOrthogonalError("vectors are not pairwise orthogonal")
    return SubspaceProjector(d, _projector_sum(d**3, vectors), len(vectors))


def density(p: SubspaceProjector) -> RationalMatrix:
    """Normalized state ``P / rank(P)``."""
    return p.matrix / p.rank


def _matrix(m) -> RationalMatrix:
    return m.matrix if isinstance(m, SubspaceProjector) else m


def partial_trace(m, traced: str, d: int | None = None, parties: int = 3) -> RationalMatrix:
    """Trace out one party of a ``d**parties`` square matrix.

    ``traced`` is ``"A"``, ``"B"`` or (tripartite only) ``"C"``; remaining
    parties keep their order.
    """
    if isinstance(m, SubspaceProjector):
        d = m.d
    m = _matrix(m)
    if d is None:
        raise ValueError("local dimension d is required")
    n = d**parties
    if m.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix for d={d}, {parties} parties; got {m.shape}")
    k = _PARTY.get(traced)
    if k is None or k >= parties:
        raise ValueError(f"cannot trace party {traced!r} of a {parties}-party matrix")
    t = m.num.reshape((d,) * (2 * parties))
    out = np.trace(t, axis1=k, axis2=parties + k)
    rest = d ** (parties - 1)
    return RationalMatrix(np.ascontiguousarray(out).reshape(rest, rest), m.den)


def partial_transpose(m, cut: Bipartition | str, d: int | None = None) -> RationalMatrix:
    """Transpose the one-party side of ``cut`` of a tripartite matrix."""
    if isinstance(m, SubspaceProjector):
        d = m.d
    m = _matrix(m)
    if isinstance(cut, str):
        cut = Bipartition.parse(cut)
    n = d**3
    if m.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix for d={d}; got {m.shape}")
    k = cut.single
    axes = list(range(6))
    axes[k], axes[3 + k] = axes[3 + k], axes[k]
    t = m.num.reshape((d,) * 6).transpose(axes)
    return RationalMatrix(np.ascontiguousarray(t).reshape(n, n), m.den)


@dataclass(frozen=True)
class RankProfile:
    """Subspace rank and marginal ranks per cut.

    ``bimarginal[cut]`` is the rank of the two-party side (one party traced
    out); ``single[cut]`` is the rank of the one-party side.
    """

    n: int
    bimarginal: dict[Bipartition, int]
    single: dict[Bipartition, int]

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "bimarginal": {str(c): r for c, r in self.bimarginal.items()},
            "single": {str(c): r for c, r in self.single.items()},
        }


def _single_marginal(m: RationalMatrix, d: int, keep: int) -> RationalMatrix:
    t = m.num.reshape((d,) * 6)
    others = [k for k in range(3) if k != keep]
    # trace the two other parties, highest axis first so indices stay valid
    a, b = others
    t = np.trace(t, axis1=b, axis2=3 + b)
    t = np.trace(t, axis1=a, axis2=2 + a)
    return RationalMatrix(np.ascontiguousarray(t), m.den)


def rank_profile(p: SubspaceProjector) -> RankProfile:
    bi, single = {}, {}
    for cut in CUTS:
        bi[cut] = rank(partial_trace(p, cut.single_name))
        single[cut] = rank(_single_marginal(p.matrix, p.d, cut.single))
    return RankProfile(rank(p.matrix), bi, single)


def lemma1_criterion(p: SubspaceProjector, cut: Bipartition | str, profile: RankProfile | None = None) -> bool:
    """Rank criterion: subspace rank below the larger marginal rank across ``cut``."""
    if isinstance(cut, str):
        cut = Bipartition.parse(cut)
    profile = profile or rank_profile(p)
    return profile.n < max(profile.bimarginal[cut], profile.single[cut])


@dataclass(frozen=True)
class CutPT:
    psd: bool
    pt_invariant: bool
    min_eig: tuple[float, float] | None = None

    def as_dict(self) -> dict:
        return {"psd": self.psd, "pt_invariant": self.pt_invariant,
                "min_eig": list(self.min_eig) if self.min_eig else None}


@dataclass(frozen=True)
class PTReport:
    cuts: dict[Bipartition, CutPT]

    def as_dict(self) -> dict:
        return {str(c): r.as_dict() for c, r in self.cuts.items()}


def pt_report(p: SubspaceProjector, width: float = 1e-9, cuts=CUTS) -> PTReport:
    """Exact PSD verdict per cut on the normalized projector's partial transpose."""
    rho = density(p) if p.rank else p.matrix
    out = {}
    for cut in cuts:
        pt = partial_transpose(rho, cut, p.d)
        psd = is_psd(pt)
        out[cut] = CutPT(psd, pt == rho, None if psd else min_eig_bound(pt, width))
    return PTReport(out)


def trace_preserved(m: RationalMatrix, d: int) -> bool:
    tr = m.trace()
    return all(partial_trace(m, x, d).trace() == tr for x in "ABC")


def as_fraction_grid(m: RationalMatrix) -> list[list[Fraction]]:
    return [[m[i, j] for j in range(m.cols)] for i in range(m.rows)]
