"""Certificates for unextendibility, genuine entanglement, and the missing-state facts.

Structural checks run in exact rational arithmetic. Seesaw searches are the
numerical corroboration; their results carry the seed and restart count.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ubbcert.basis_builder import (
    BasisSet,
    Bipartition,
    build_asymmetric_ubb,
    build_symmetric_ubb,
    build_upb,
    missing_states,
    stopper,
    upb_cardinality,
)
from ubbcert.block_cube import TripartiteState
from ubbcert.exact_linalg import RationalMatrix, RationalVector, kernel_basis, orthogonalize, rank
from ubbcert.seesaw import SeesawConfig, SeesawResult, exact_overlap, seesaw_search
from ubbcert.subspace_analysis import (
    CUTS,
    complement_projector,
    gram_is_diagonal,
    partial_trace,
    projector_onto,
    rank_profile,
)

__all__ = [
    "Certificate",
    "SeesawConfig",
    "METHODS",
    "schmidt_rank",
    "genuine_entanglement_check",
    "product_overlap_search",
    "biseparable_overlap_search",
    "ges_basis",
    "verify_fact_I",
    "verify_fact_II",
    "verify_fact_III",
    "verify_fact_IV",
    "verify_theorem1_sampled",
    "certify_prop1",
    "certify_prop2",
    "certify_prop3",
    "certify_ppt_deficit",
    "rank_certificates",
    "random_rational",
]

METHODS = ("structural-exact", "exhaustive-exact", "sampled-exact", "randomized-numerical")
_SAMPLE_RANGE = [k for k in range(-97, 98) if k != 0]
_SAMPLED_SCOPE = "sampled instances checked exactly; no claim over the continuum"


@dataclass(frozen=True)
class Certificate:
    claim: str
    method: str
    verdict: bool
    witness: dict = field(default_factory=dict)
    seed: int | None = None
    restarts: int | None = None
    scope: str = ""

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown certificate method {self.method!r}")
        if self.method == "randomized-numerical" and (self.seed is None or self.restarts is None):
            raise ValueError("randomized-numerical certificates need a seed and a restart count")

    def as_dict(self) -> dict:
        out = {"claim": self.claim, "method": self.method, "verdict": "pass" if self.verdict else "fail",
               "witness": self.witness}
        if self.seed is not None:
            out["seed"] = self.seed
        if self.restarts is not None:
            out["restarts"] = self.restarts
        if self.scope:
            out["scope"] = self.scope
        return out


# --- pure-state entanglement ------------------------------------------------------


def _coeffs(v) -> RationalVector:
    return v.coeffs if isinstance(v, TripartiteState) else v


def _dim(v: RationalVector) -> int:
    d = round(v.dim ** (1 / 3))
    if d**3 != v.dim:
        raise ValueError(f"vector of length {v.dim} is not tripartite with equal local dimensions")
    return d


def _cut_reshape(v: RationalVector, cut: Bipartition) -> RationalMatrix:
    d = _dim(v)
    t = np.moveaxis(v.num.reshape(d, d, d), cut.single, 0)
    return RationalMatrix(np.ascontiguousarray(t).reshape(d, d * d), v.den)


def schmidt_rank(v, cut: Bipartition | str) -> int:
    """Rank of the d x d**2 coefficient reshape across ``cut``."""
    v = _coeffs(v)
    if isinstance(cut, str):
        cut = Bipartition.parse(cut)
    if v.is_zero():
        raise ValueError("Schmidt rank of the zero vector is undefined")
    return rank(_cut_reshape(v, cut))


def genuine_entanglement_check(v) -> bool:
    return all(schmidt_rank(v, c) >= 2 for c in CUTS)


# --- seesaw wrappers --------------------------------------------------------------


def product_overlap_search(p, cfg: SeesawConfig, jobs: int = 1) -> SeesawResult:
    """Best ``<a b c|P|a b c>`` over normalized product states."""
    return seesaw_search(p, p.d, ((0,), (1,), (2,)), cfg, jobs)


def biseparable_overlap_search(p, cut: Bipartition | str, cfg: SeesawConfig, jobs: int = 1) -> SeesawResult:
    if isinstance(cut, str):
        cut = Bipartition.parse(cut)
    k = cut.single
    rest = tuple(i for i in range(3) if i != k)
    return seesaw_search(p, p.d, ((k,), rest), cfg, jobs)


def _numerical_certificate(claim: str, p, cut, cfg: SeesawConfig, jobs: int, expect_below: bool) -> Certificate:
    res = product_overlap_search(p, cfg, jobs) if cut is None else biseparable_overlap_search(p, cut, cfg, jobs)
    exact = exact_overlap(p, res.best_state)
    sound = abs(float(exact) - res.max_overlap) <= 1e-6
    if expect_below:
        verdict = res.max_overlap < cfg.overlap_threshold
    else:
        verdict = res.max_overlap >= 1 - 1e-9
    witness = {**res.as_dict(), "exact_overlap": float(exact), "sound": sound,
               "search": "product" if cut is None else f"biseparable {cut}",
               "threshold": cfg.overlap_threshold if expect_below else 1 - 1e-9}
    return Certificate(claim, "randomized-numerical", verdict and sound, witness, cfg.seed, cfg.restarts,
                       "numerical corroboration; not a proof")


# --- shared exact helpers ---------------------------------------------------------


def ges_basis(b: BasisSet) -> list[RationalVector]:
    """Kernel basis of the span of a basis set: its complementary subspace."""
    return kernel_basis(RationalMatrix.stack([s.coeffs for s in b.states]))


def _stack(vectors) -> RationalMatrix:
    return RationalMatrix.stack([_coeffs(v) for v in vectors])


def _marginal_rank(vectors, traced: str, d: int) -> int:
    """rank Tr_traced(sum |v><v|) for real vectors, via the stacked slice matrix."""
    blocks = []
    for v in vectors:
        v = _coeffs(v)
        t = np.moveaxis(v.num.reshape(d, d, d), "ABC".index(traced), 0)
        blocks.append(np.ascontiguousarray(t).reshape(d, d * d))
    return rank(RationalMatrix(np.vstack(blocks)))


def random_rational(rng: np.random.Generator) -> Fraction:
    """Numerator and denominator uniform in [-97, 97] without zero."""
    a, b = rng.choice(_SAMPLE_RANGE, size=2)
    return Fraction(int(a), int(b))


def _sym_ubb_parts(d: int, completion: str):
    ubb = build_symmetric_ubb(d, completion)
    m = missing_states(d, "ubb_symmetric", completion)
    return ubb, m.states, ges_basis(ubb)


# --- Theorem 1 facts --------------------------------------------------------------


def verify_fact_I(d: int, completion: str = "standard") -> Certificate:
    """span(missing states) contains the complement of the symmetric UBB."""
    _, ms, ges = _sym_ubb_parts(d, completion)
    r_m = rank(_stack(ms))
    r_all = rank(_stack(list(ms) + ges))
    ok = r_m == len(ms) and r_all == len(ms)
    return Certificate("fact-I", "structural-exact", ok,
                       {"d": d, "missing": len(ms), "span_missing": r_m, "ges_dim": len(ges), "joint_rank": r_all})


def verify_fact_II(d: int, completion: str = "standard") -> Certificate:
    """Any n missing states meet the complement in dimension at most n-1."""
    _, ms, ges = _sym_ubb_parts(d, completion)
    g = len(ges)
    failing = None
    checked = 0
    for n in range(1, len(ms) + 1):
        for subset in itertools.combinations(range(len(ms)), n):
            checked += 1
            inter = n + g - rank(_stack([ms[i] for i in subset] + ges))
            if inter > n - 1:
                failing = {"subset": [ms[i].label for i in subset], "intersection_dim": inter}
                break
        if failing:
            break
    return Certificate("fact-II", "exhaustive-exact", failing is None,
                       {"d": d, "subsets": checked, "ges_dim": g, "failing_subset": failing})


def verify_fact_III(d: int, completion: str = "standard") -> Certificate:
    """Each missing state adds a bimarginal rank: rank Tr_a(sum over subset) >= subset size."""
    _, ms, _ = _sym_ubb_parts(d, completion)
    failing = None
    checked = 0
    for n in range(1, len(ms) + 1):
        for subset in itertools.combinations(ms, n):
            for traced in "ABC":
                checked += 1
                r = _marginal_rank(subset, traced, d)
                if r < n:
                    failing = {"subset": [m.label for m in subset], "traced": traced, "rank": r}
                    break
            if failing:
                break
        if failing:
            break
    full = {t: _marginal_rank(ms, t, d) for t in "ABC"}
    return Certificate("fact-III", "exhaustive-exact", failing is None,
                       {"d": d, "subsets": 2 ** len(ms) - 1, "checks": checked, "full_set_ranks": full,
                        "failing_subset": failing})


def _pair_checks(combo: RationalVector, third, d: int) -> tuple[bool, dict]:
    ranks = {t: _marginal_rank([combo], t, d) for t in "ABC"}
    if min(ranks.values()) < 2:
        return False, {"ranks": ranks}
    for m in third:
        for t in "ABC":
            if _marginal_rank([combo, m], t, d) < ranks[t] + 1:
                return False, {"ranks": ranks, "third": m.label, "traced": t}
    return True, {"ranks": ranks}


def verify_fact_IV(d: int, samples: int = 50, seed: int = 0, completion: str = "standard") -> Certificate:
    """Pairs of missing states combined inside the complement carry rank >= 2, additively.

    For each pair the complement-resident combination is solved exactly; each
    sample rescales it by a random rational. The two off-complement
    combinations ``m' + m''/97`` and ``m'/97 + m''`` are checked as well.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    ubb, ms, _ = _sym_ubb_parts(d, completion)
    ubb_rows = _stack(ubb.states)
    skipped, failing = [], None
    checked = 0
    eps = Fraction(1, 97)
    for idx, (i, j) in enumerate(itertools.combinations(range(len(ms)), 2)):
        a, b = ms[i].coeffs, ms[j].coeffs
        # coefficients (x, y) with x*a + y*b orthogonal to every UBB state
        g = RationalMatrix.stack([ubb_rows @ a, ubb_rows @ b]).T
        ker = [k for k in kernel_basis(g) if all(c != 0 for c in k)]
        if not ker:
            skipped.append((ms[i].label, ms[j].label))
            continue
        rng = np.random.default_rng([seed, idx])
        third = [m for k, m in enumerate(ms) if k not in (i, j)]
        combos = []
        for _ in range(samples):
            coef = [random_rational(rng) for _ in ker]
            x, y = (sum((c * k[t] for c, k in zip(coef, ker)), Fraction(0)) for t in range(2))
            if x == 0 or y == 0:
                continue
            combos.append(("sample", a * x + b * y))
        combos += [("boundary", a + b * eps), ("boundary", a * eps + b)]
        for kind, combo in combos:
            checked += 1
            if kind == "sample" and not (ubb_rows @ combo).is_zero():
                failing = {"pair": (ms[i].label, ms[j].label), "reason": "combination left the complement"}
                break
            ok, info = _pair_checks(combo, third, d)
            if not ok:
                failing = {"pair": (ms[i].label, ms[j].label), "kind": kind, **info}
                break
        if failing:
            break
    pairs = len(ms) * (len(ms) - 1) // 2
    return Certificate("fact-IV", "sampled-exact", failing is None,
                       {"d": d, "pairs": pairs, "samples_per_pair": samples, "combinations_checked": checked,
                        "skipped_pairs": skipped, "failing": failing},
                       seed=seed, restarts=samples, scope=_SAMPLED_SCOPE)


def _random_subspace(ges: list[RationalVector], n: int, rng) -> list[RationalVector]:
    while True:
        vecs = []
        for _ in range(n):
            v = RationalVector.zeros(ges[0].dim)
            for g in ges:
                v = v + g * random_rational(rng)
            vecs.append(v)
        if rank(RationalMatrix.stack(vecs)) == n:
            return orthogonalize(vecs)


def verify_theorem1_sampled(d: int, n: int, samples: int = 200, seed: int = 0,
                            completion: str = "standard") -> Certificate:
    """Random rank-n projectors inside the complement have every bimarginal rank >= n+1."""
    _, _, ges = _sym_ubb_parts(d, completion)
    g = len(ges)
    if not 1 <= n <= g:
        raise ValueError(f"n must lie in 1..{g}, got {n}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng([seed, n])
    worst = None
    failing = None
    runs = 1 if n == g else samples
    for k in range(runs):
        vecs = orthogonalize(ges) if n == g else _random_subspace(ges, n, rng)
        p = projector_onto(d, vecs)
        ranks = {t: rank(partial_trace(p, t)) for t in "ABC"}
        low = min(ranks.values())
        worst = low if worst is None else min(worst, low)
        if low < n + 1:
            failing = {"sample": k, "bimarginal_ranks": ranks}
            break
    witness = {"d": d, "n": n, "ges_dim": g, "samples": runs, "min_bimarginal_rank": worst, "failing": failing}
    if n == g:
        witness["note"] = "unique projector onto the full complement"
        return Certificate("theorem1-full", "structural-exact", failing is None, witness)
    return Certificate("theorem1-sampled", "sampled-exact", failing is None, witness, seed=seed, restarts=runs,
                       scope=_SAMPLED_SCOPE)


# --- proposition certificates -----------------------------------------------------


def _missing_overlap_stopper(d: int, kind: str, completion: str) -> tuple[bool, list[str]]:
    s = stopper(d)
    ms = missing_states(d, kind, completion).states
    orth = [m.label for m in ms if s.dot(m) == 0]
    return not orth, orth


def _all_product(b: BasisSet) -> bool:
    return all(schmidt_rank(s, c) == 1 for s, decl in zip(b.states, b.declared) if decl is None for c in CUTS)


def _appended_biseparable(b: BasisSet) -> tuple[bool, list[dict]]:
    """Each appended state factorizes across its declared cut and is entangled in another."""
    rows, ok = [], True
    for s, cut in b.appended:
        ranks = {str(c): schmidt_rank(s, c) for c in CUTS}
        good = ranks[str(cut)] == 1 and any(r >= 2 for c, r in ranks.items() if c != str(cut))
        ok &= good
        rows.append({"label": s.label, "declared": str(cut), "schmidt_ranks": ranks})
    return ok, rows


def certify_prop1(d: int, cfg: SeesawConfig | None = None, jobs: int = 1,
                  completion: str = "standard") -> list[Certificate]:
    """The UPB: orthogonal product states, unextendible."""
    upb = build_upb(d, completion)
    orth = gram_is_diagonal(s.coeffs for s in upb.states)
    product = _all_product(upb)
    stopper_ok, orth_missing = _missing_overlap_stopper(d, "upb", completion)
    card = len(upb) == upb_cardinality(d)
    certs = [Certificate("prop1", "structural-exact", orth and product and stopper_ok and card,
                         {"d": d, "states": len(upb), "closed_form": upb_cardinality(d),
                          "complement_dim": upb.complement_dim, "orthogonal": orth, "all_product": product,
                          "missing_orthogonal_to_stopper": orth_missing})]
    if cfg is not None:
        p = complement_projector(upb)
        certs.append(_numerical_certificate("prop1", p, None, cfg, jobs, True))
    return certs


def certify_prop2(d: int, cfg: SeesawConfig | None = None, jobs: int = 1,
                  completion: str = "standard") -> list[Certificate]:
    """The symmetric UBB: orthogonal biseparable states whose complement is genuinely entangled."""
    ubb = build_symmetric_ubb(d, completion)
    orth = gram_is_diagonal(s.coeffs for s in ubb.states)
    bisep, rows = _appended_biseparable(ubb)
    stopper_ok, orth_missing = _missing_overlap_stopper(d, "ubb_symmetric", completion)
    fact1 = verify_fact_I(d, completion).verdict
    certs = [Certificate("prop2", "structural-exact", orth and bisep and stopper_ok and fact1 and _all_product(ubb),
                         {"d": d, "states": len(ubb), "complement_dim": ubb.complement_dim, "orthogonal": orth,
                          "appended": rows, "missing_orthogonal_to_stopper": orth_missing,
                          "complement_in_missing_span": fact1})]
    if cfg is not None:
        p = complement_projector(ubb)
        for cut in CUTS:
            certs.append(_numerical_certificate("prop2", p, cut, cfg, jobs, True))
    return certs


def _cross_variant(d: int, completion: str) -> dict:
    """Every appended state of one cut variant overlaps some appended state of each other variant."""
    variants = {c: build_asymmetric_ubb(d, c, completion) for c in CUTS}
    out = {}
    for c1, c2 in itertools.permutations(CUTS, 2):
        lone = [s.label for s, _ in variants[c1].appended
                if all(s.dot(t) == 0 for t, _ in variants[c2].appended)]
        out[f"{c1} vs {c2}"] = lone
    return out


def certify_prop3(d: int, cut: Bipartition | str, cfg: SeesawConfig | None = None, jobs: int = 1,
                  completion: str = "standard") -> list[Certificate]:
    """An asymmetric UBB: all appended states factorize across ``cut``."""
    if isinstance(cut, str):
        cut = Bipartition.parse(cut)
    ubb = build_asymmetric_ubb(d, cut, completion)
    orth = gram_is_diagonal(s.coeffs for s in ubb.states)
    bisep, rows = _appended_biseparable(ubb)
    same_cut = all(r["declared"] == str(cut) for r in rows)
    cross = _cross_variant(d, completion)
    cross_ok = not any(cross.values())
    ges = ges_basis(ubb)
    certs = [Certificate("prop3", "structural-exact", orth and bisep and same_cut and cross_ok and _all_product(ubb),
                         {"d": d, "cut": str(cut), "states": len(ubb), "complement_dim": len(ges),
                          "orthogonal": orth, "appended": rows, "cross_variant_orthogonal": cross})]
    if cfg is not None:
        p = complement_projector(ubb)
        for c in CUTS:
            certs.append(_numerical_certificate("prop3", p, c, cfg, jobs, True))
    return certs


def certify_ppt_deficit(d: int, cfg: SeesawConfig | None = None, jobs: int = 1,
                        completion: str = "standard") -> list[Certificate]:
    """The UPB complement holds biseparable states in every cut.

    Per cut, the asymmetric extension adds independent orthogonal states
    factorizing across that cut, all inside the UPB complement.
    """
    upb = build_upb(d, completion)
    upb_rows = _stack(upb.states)
    per_cut = {}
    ok = True
    for cut in CUTS:
        extra = [s for s, _ in build_asymmetric_ubb(d, cut, completion).appended]
        inside = all((upb_rows @ s.coeffs).is_zero() for s in extra)
        indep = rank(_stack(extra)) == len(extra)
        factor = all(schmidt_rank(s, cut) == 1 for s in extra)
        per_cut[str(cut)] = {"biseparable_states": len(extra), "inside_complement": inside,
                             "independent": indep, "factorize": factor}
        ok &= inside and indep and factor
    certs = [Certificate("ppt-deficit", "structural-exact", ok, {"d": d, "cuts": per_cut})]
    if cfg is not None:
        p = complement_projector(upb)
        for cut in CUTS:
            certs.append(_numerical_certificate("ppt-deficit", p, cut, cfg, jobs, False))
    return certs


def rank_certificates(p, expect_lemma: dict[Bipartition, bool]) -> tuple[list[Certificate], dict]:
    """Rank profile of ``p`` and the rank-criterion verdict per cut against expectations."""
    prof = rank_profile(p)
    certs = []
    for cut, expected in expect_lemma.items():
        got = prof.n < max(prof.bimarginal[cut], prof.single[cut])
        certs.append(Certificate("rank-criterion", "structural-exact", got == expected,
                                 {"cut": str(cut), "n": prof.n, "bimarginal": prof.bimarginal[cut], "single": prof.single[cut],
                                  "distillable_by_rank": got, "expected": expected}))
    return certs, prof.as_dict()
