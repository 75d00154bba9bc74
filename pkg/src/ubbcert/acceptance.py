"""Executable acceptance criteria, each returning a pass/fail line with timing."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ubbcert.basis_builder import build_asymmetric_ubb, build_set, build_symmetric_ubb, build_upb
from ubbcert.block_cube import COMPLETIONS
from ubbcert.entanglement_certify import (
    SeesawConfig,
    biseparable_overlap_search,
    ges_basis,
    product_overlap_search,
    verify_fact_I,
    verify_fact_II,
    verify_fact_III,
    verify_fact_IV,
    verify_theorem1_sampled,
)
from ubbcert.exact_linalg import RationalMatrix, RationalVector, format_rmat, is_psd, orthogonalize, parse_rmat, rank
from ubbcert.reports import load_fixture, marginal_in_order
from ubbcert.subspace_analysis import (
    CUTS,
    complement_projector,
    density,
    gram_is_diagonal,
    partial_trace,
    partial_transpose,
    projector_onto,
)

__all__ = ["CriterionResult", "CRITERIA", "run_criterion"]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float
    budget: float
    detail: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.passed and self.seconds <= self.budget

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        slow = "" if self.seconds <= self.budget else " (over time budget)"
        return f"[{tag}] criterion {self.number:>2}: {self.title} ({self.seconds:.2f}s / {self.budget:g}s){slow}"

    def as_dict(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": self.ok, "seconds": round(self.seconds, 3),
                "budget": self.budget, "detail": self.detail}


# --- 1, 2: counts ------------------------------------------------------------------

UPB_SIZES = {3: (19, 8), 4: (56, 8), 5: (109, 16)}


def _counts(completion: str = "standard") -> dict:
    out = {}
    for d, _ in UPB_SIZES.items():
        t0 = time.perf_counter()
        b = build_upb(d, completion)
        out[f"upb{d}"] = (len(b), len(ges_basis(b)), time.perf_counter() - t0)
    return out


def criterion_1(completion: str = "standard") -> tuple[bool, dict]:
    got = _counts(completion)
    ok = all(got[f"upb{d}"][:2] == want and got[f"upb{d}"][2] < 1.0 for d, want in UPB_SIZES.items())
    return ok, {k: {"states": v[0], "complement_dim": v[1], "seconds": round(v[2], 3)} for k, v in got.items()}


def _ubb_counts(completion: str = "standard") -> dict:
    sym3 = build_symmetric_ubb(3, completion)
    sym5 = build_symmetric_ubb(5, completion)
    out = {"sym3": (len(sym3), len(ges_basis(sym3))), "sym5": (len(sym5), len(ges_basis(sym5)))}
    for cut in CUTS:
        b = build_asymmetric_ubb(3, cut, completion)
        out[f"asym3 {cut}"] = (len(b), len(ges_basis(b)))
    return out


def criterion_2(completion: str = "standard") -> tuple[bool, dict]:
    got = _ubb_counts(completion)
    ok = got["sym3"] == (22, 5) and got["sym5"][1] == 10
    ok &= all(got[f"asym3 {cut}"] == (23, 4) for cut in CUTS)
    return ok, {k: {"states": v[0], "complement_dim": v[1]} for k, v in got.items()}


# --- 3, 4: reference matrices -------------------------------------------------------


def _appendix_a(completion: str = "standard") -> dict:
    rho = density(complement_projector(build_symmetric_ubb(3, completion)))
    ref = load_fixture("appendix_a_rho_beta")
    out = {}
    for t in "ABC":
        m = marginal_in_order(rho, t, 3)
        out[t] = {"equal": m == ref, "rank": rank(m)}
    return out


def criterion_3(completion: str = "standard") -> tuple[bool, dict]:
    got = _appendix_a(completion)
    return all(v["equal"] and v["rank"] == 6 for v in got.values()), got


def _appendix_b(completion: str = "standard") -> dict:
    rho = density(complement_projector(build_asymmetric_ubb(3, "AB|C", completion)))
    bc, ac = partial_trace(rho, "A", 3), partial_trace(rho, "B", 3)
    out = {
        "rho_BC": {"equal": bc == load_fixture("appendix_b_rho_bc"), "rank": rank(bc)},
        "rho_AC": {"equal": ac == load_fixture("appendix_b_rho_ac"), "rank": rank(ac)},
    }
    for cut in CUTS:
        pt = partial_transpose(rho, cut, 3)
        out[f"pt {cut}"] = {"invariant": pt == rho, "psd": is_psd(pt)}
    return out


def criterion_4(completion: str = "standard") -> tuple[bool, dict]:
    got = _appendix_b(completion)
    ok = all(got[k]["equal"] and got[k]["rank"] == 7 for k in ("rho_BC", "rho_AC"))
    ok &= got["pt AB|C"]["invariant"]
    ok &= not got["pt A|BC"]["psd"] and not got["pt AC|B"]["psd"]
    return ok, got


# --- 5: PPT complement ---------------------------------------------------------------


def _ce_ppt(completion: str = "standard") -> dict:
    out = {}
    for d in (3, 4, 5):
        rho = density(complement_projector(build_upb(d, completion)))
        out[d] = {str(c): is_psd(partial_transpose(rho, c, d)) for c in CUTS}
    return out


def criterion_5(completion: str = "standard") -> tuple[bool, dict]:
    got = _ce_ppt(completion)
    return all(all(v.values()) for v in got.values()), got


# --- 6, 7: rank facts --------------------------------------------------------------


def criterion_6(seed: int = 0, samples: int = 200) -> tuple[bool, dict]:
    certs = [verify_theorem1_sampled(3, n, samples, seed) for n in range(1, 6)]
    full = certs[-1].witness
    ok = all(c.verdict for c in certs) and full["min_bimarginal_rank"] == 6
    return ok, {c.witness["n"]: {"verdict": c.verdict, "samples": c.witness["samples"],
                                 "min_bimarginal_rank": c.witness["min_bimarginal_rank"]} for c in certs}


def criterion_7(seed: int = 0, samples: int = 50) -> tuple[bool, dict]:
    certs = [verify_fact_I(3), verify_fact_II(3), verify_fact_III(3), verify_fact_IV(3, samples, seed)]
    iv = certs[3].witness
    ok = all(c.verdict for c in certs)
    ok &= certs[2].witness["checks"] == 63 * 3 and iv["pairs"] == 15 and not iv["skipped_pairs"]
    return ok, {c.claim: c.verdict for c in certs} | {"fact-IV combinations": iv["combinations_checked"]}


# --- 8: seesaw searches ------------------------------------------------------------


def criterion_8(seed: int = 0, restarts: int = 200, jobs: int = 1) -> tuple[bool, dict]:
    cfg = SeesawConfig(restarts=restarts, seed=seed)
    ce = complement_projector(build_upb(3))
    found = {"CE(8) product": product_overlap_search(ce, cfg, jobs).max_overlap}
    ge5 = complement_projector(build_symmetric_ubb(3))
    for cut in CUTS:
        found[f"GE(5) {cut}"] = biseparable_overlap_search(ge5, cut, cfg, jobs).max_overlap
    for variant in CUTS:
        ge4 = complement_projector(build_asymmetric_ubb(3, variant))
        for cut in CUTS:
            found[f"GE(4)[{variant}] {cut}"] = biseparable_overlap_search(ge4, cut, cfg, jobs).max_overlap
    control = biseparable_overlap_search(ce, "AB|C", cfg, jobs).max_overlap
    ok = all(v < cfg.overlap_threshold for v in found.values()) and control >= 1 - 1e-9
    return ok, {**found, "control CE(8) AB|C": control}


# --- 9: completion independence ----------------------------------------------------


def _summary(completion: str) -> dict:
    return {
        "counts": {**{k: v[:2] for k, v in _counts(completion).items()}, **_ubb_counts(completion)},
        "appendix_a_ranks": {t: v["rank"] for t, v in _appendix_a(completion).items()},
        "appendix_b": {k: v.get("rank", (v.get("invariant"), v.get("psd"))) for k, v in _appendix_b(completion).items()},
        "ce_ppt": _ce_ppt(completion),
    }


def criterion_9() -> tuple[bool, dict]:
    base = _summary("standard")
    detail = {}
    for comp in COMPLETIONS[1:]:
        detail[comp] = _summary(comp) == base
    return all(detail.values()), detail


# --- 10: property suites -----------------------------------------------------------


def _random_matrix(rng, n: int, symmetric: bool = True) -> RationalMatrix:
    nums = rng.integers(-9, 10, size=(n, n))
    dens = rng.integers(1, 12, size=(n, n))
    rows = [[Fraction(int(nums[i, j]), int(dens[i, j])) for j in range(n)] for i in range(n)]
    m = RationalMatrix.from_rows(rows)
    return (m + m.T) / 2 if symmetric else m


def _random_vectors(rng, d: int, k: int) -> list[RationalVector]:
    while True:
        vs = [RationalVector.of([int(x) for x in rng.integers(-3, 4, size=d**3)]) for _ in range(k)]
        if rank(RationalMatrix.stack(vs)) == k:
            return orthogonalize(vs)


def criterion_10(seed: int = 0, instances: int = 100) -> tuple[bool, dict]:
    rng = np.random.default_rng(seed)
    fails = {"idempotence": 0, "pt_involution": 0, "trace": 0, "gram": 0, "round_trip": 0}
    kinds = ("topb", "upb", "ubb_symmetric", "ubb_asymmetric")
    for _ in range(instances):
        d = int(rng.integers(3, 5))
        p = projector_onto(d, _random_vectors(rng, d, int(rng.integers(1, 5))))
        fails["idempotence"] += (p.matrix @ p.matrix) != p.matrix

        d = int(rng.integers(3, 5))
        m = _random_matrix(rng, d**3, symmetric=bool(rng.integers(0, 2)))
        cut = CUTS[int(rng.integers(0, 3))]
        pt = partial_transpose(m, cut, d)
        fails["pt_involution"] += partial_transpose(pt, cut, d) != m
        fails["trace"] += not (pt.trace() == m.trace() and all(partial_trace(m, x, d).trace() == m.trace()
                                                               for x in "ABC"))

        kind = kinds[int(rng.integers(0, 4))]
        b = build_set(int(rng.integers(3, 6)), kind, CUTS[int(rng.integers(0, 3))],
                      COMPLETIONS[int(rng.integers(0, 3))])
        fails["gram"] += not gram_is_diagonal(s.coeffs for s in b.states)

        text = format_rmat(m)
        back = parse_rmat(text)
        fails["round_trip"] += not (back == m and format_rmat(back) == text)
    fails = {k: int(v) for k, v in fails.items()}
    return not any(fails.values()), {"instances": instances, "failures": fails}


CRITERIA = {
    1: ("UPB cardinalities and complement dimensions, d=3,4,5", criterion_1, 3.0),
    2: ("UBB counts and complement dimensions", criterion_2, 1.0),
    3: ("reference bimarginals of the symmetric complement, rank 6", criterion_3, 1.0),
    4: ("reference bimarginals of the AB|C complement, rank 7, PT verdicts", criterion_4, 5.0),
    5: ("UPB complement is PPT in every cut, d=3,4,5", criterion_5, 60.0),
    6: ("sampled rank-n projectors have bimarginal ranks >= n+1", criterion_6, 120.0),
    7: ("missing-state facts I-III exhaustive, IV sampled", criterion_7, 120.0),
    8: ("seesaw unextendibility searches and positive control", criterion_8, 300.0),
    9: ("results independent of the family completion", criterion_9, 300.0),
    10: ("property suites over random instances", criterion_10, 60.0),
}


def run_criterion(number: int, **kw) -> CriterionResult:
    title, fn, budget = CRITERIA[number]
    t0 = time.perf_counter()
    passed, detail = fn(**kw)
    return CriterionResult(number, title, bool(passed), time.perf_counter() - t0, budget, detail)
