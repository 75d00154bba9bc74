"""Run configuration, claim suites, structured reports, and matrix export."""

from __future__ import annotations

import json
import os
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ubbcert import __version__
from ubbcert.basis_builder import BasisSet, Bipartition, build_set, upb_cardinality
from ubbcert.block_cube import COMPLETIONS, format_states, layer_count
from ubbcert.entanglement_certify import (
    Certificate,
    SeesawConfig,
    certify_ppt_deficit,
    certify_prop1,
    certify_prop2,
    certify_prop3,
    ges_basis,
    rank_certificates,
    verify_fact_I,
    verify_fact_II,
    verify_fact_III,
    verify_fact_IV,
    verify_theorem1_sampled,
)
from ubbcert.exact_linalg import RationalMatrix, format_rmat, parse_rmat, rank
from ubbcert.subspace_analysis import (
    CUTS,
    complement_projector,
    density,
    gram_is_diagonal,
    partial_trace,
    partial_transpose,
    pt_report,
)

__all__ = [
    "CLAIMS",
    "OUT_ENV",
    "RunConfig",
    "Report",
    "load_fixture",
    "run_construct",
    "run_verify",
    "run_certify",
    "run_export",
    "marginal_in_order",
]

OUT_ENV = "UBBCERT_OUT"

# claim id -> anchor: one registry entry per certificate claim id
CLAIMS = {
    "cardinality": "orthogonal set size and complement dimension match the closed forms",
    "prop1": "UPB: orthogonal product states whose complement holds no product vector",
    "prop2": "symmetric UBB: orthogonal biseparable states whose complement holds no biseparable vector",
    "prop3": "asymmetric UBB: appended states all factorize across one cut; complement holds no biseparable vector",
    "ppt-deficit": "the UPB complement holds biseparable vectors in every cut",
    "pt-psd": "partial transpose of the normalized complement projector, positivity per cut",
    "pt-invariant": "normalized complement projector equals its partial transpose in the cut",
    "rank-criterion": "one-copy distillability by the marginal-rank criterion, per cut",
    "golden-marginal": "two-party reduced states equal the reference matrices entry for entry",
    "fact-I": "the complement lies in the span of the missing states",
    "fact-II": "n missing states meet the complement in dimension at most n-1",
    "fact-III": "every missing state adds one to each bimarginal rank",
    "fact-IV": "a complement-resident pair combination carries bimarginal rank two, additively",
    "theorem1-full": "the full complement projector has bimarginal ranks above its rank",
    "theorem1-sampled": "random rank-n projectors in the complement have bimarginal ranks at least n+1",
}

SET_ALIASES = {
    "topb": "topb",
    "upb": "upb",
    "ubb-sym": "ubb_symmetric",
    "ubb_sym": "ubb_symmetric",
    "ubb_symmetric": "ubb_symmetric",
    "ubb-asym": "ubb_asymmetric",
    "ubb_asym": "ubb_asymmetric",
    "ubb_asymmetric": "ubb_asymmetric",
}
VERIFY_CLAIMS = ("all", "cardinality", "ppt", "theorem1", "rank", "golden")
CERTIFY_CLAIMS = ("prop1", "prop2", "prop3", "facts", "theorem1", "ppt-deficit")
_CERTIFY_SET = {"prop1": "upb", "prop2": "ubb_symmetric", "prop3": "ubb_asymmetric", "facts": "ubb_symmetric",
                "theorem1": "ubb_symmetric", "ppt-deficit": "upb"}


@dataclass
class RunConfig:
    """Validated settings for one CLI run.

    Defaults: ``d=3``, seed 0, 200 restarts of at most 500 sweeps, one job,
    text output, standard completion, output directory from ``UBBCERT_OUT``
    or ``./ubbcert-out``.
    """

    command: str = "verify"
    d: int = 3
    set_kind: str | None = None
    cut: Bipartition | None = None
    claim: str = "all"
    seed: int = 0
    restarts: int = 200
    max_iters: int = 500
    samples: int | None = None
    jobs: int = 1
    out_dir: Path = field(default_factory=lambda: Path(os.environ.get(OUT_ENV, "ubbcert-out")))
    fmt: str = "text"
    completion: str = "standard"

    def validate(self) -> RunConfig:
        if not isinstance(self.d, int) or self.d < 3:
            raise ValueError(f"--d must be an integer >= 3, got {self.d!r}")
        if self.set_kind is not None:
            if self.set_kind not in SET_ALIASES:
                raise ValueError(f"unknown --set {self.set_kind!r}; expected topb, upb, ubb-sym or ubb-asym")
            self.set_kind = SET_ALIASES[self.set_kind]
        if isinstance(self.cut, str):
            self.cut = Bipartition.parse(self.cut)
        if self.set_kind == "ubb_asymmetric" and self.cut is None:
            raise ValueError("--set ubb-asym requires --cut (A|BC, AC|B or AB|C)")
        if self.fmt not in ("text", "json"):
            raise ValueError(f"--format must be text or json, got {self.fmt!r}")
        if self.completion not in COMPLETIONS:
            raise ValueError(f"--completion must be one of {', '.join(COMPLETIONS)}")
        if self.jobs < 1:
            raise ValueError("--jobs must be >= 1")
        if self.samples is not None and self.samples < 1:
            raise ValueError("--samples must be >= 1")
        if self.command == "certify":
            if self.claim not in CERTIFY_CLAIMS:
                raise ValueError(f"--claim for certify must be one of {', '.join(CERTIFY_CLAIMS)}")
            want = _CERTIFY_SET[self.claim]
            if self.set_kind is None:
                self.set_kind = want
            elif self.set_kind != want:
                raise ValueError(f"claim {self.claim} applies to set {want}, not {self.set_kind}")
            if self.claim == "prop3" and self.cut is None:
                raise ValueError("--claim prop3 requires --cut")
        elif self.command == "verify":
            if self.claim not in VERIFY_CLAIMS:
                raise ValueError(f"--claim for verify must be one of {', '.join(VERIFY_CLAIMS)}")
            if self.set_kind is None:
                raise ValueError("verify needs --set")
        elif self.command in ("construct", "export") and self.set_kind is None:
            raise ValueError(f"{self.command} needs a set kind")
        self.seesaw()  # raises on bad seesaw settings
        return self

    def seesaw(self) -> SeesawConfig:
        return SeesawConfig(restarts=self.restarts, max_iters=self.max_iters, seed=self.seed)

    def echo(self) -> dict:
        out = asdict(self)
        out["cut"] = str(self.cut) if self.cut else None
        out["out_dir"] = str(self.out_dir)
        return out

    @property
    def stem(self) -> str:
        tag = {"ubb_symmetric": "ubb-sym", "ubb_asymmetric": "ubb-asym"}.get(self.set_kind, self.set_kind)
        cut = f"_{str(self.cut).replace('|', '-')}" if self.set_kind == "ubb_asymmetric" else ""
        comp = "" if self.completion == "standard" else f"_{self.completion}"
        return f"{tag}_d{self.d}{cut}{comp}"


@dataclass
class Report:
    config: dict
    certificates: list[Certificate] = field(default_factory=list)
    rank_profiles: dict = field(default_factory=dict)
    pt_reports: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    version: str = __version__

    @property
    def passed(self) -> bool:
        return all(c.verdict for c in self.certificates)

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = round(time.perf_counter() - t0, 4)

    def add(self, certs) -> None:
        for c in certs if isinstance(certs, list) else [certs]:
            if c.claim not in CLAIMS:
                raise KeyError(f"claim {c.claim!r} missing from the claims registry")
            self.certificates.append(c)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "config": self.config,
            "passed": self.passed,
            "certificates": [{**c.as_dict(), "anchor": CLAIMS[c.claim]} for c in self.certificates],
            "rank_profiles": self.rank_profiles,
            "pt_reports": self.pt_reports,
            "timings": self.timings,
        }

    def render(self, fmt: str = "text") -> str:
        if fmt == "json":
            return json.dumps(self.to_dict(), indent=2, default=str) + "\n"
        lines = [f"ubbcert {self.version}"]
        cfg = self.config
        lines.append(" ".join(f"{k}={cfg[k]}" for k in ("command", "d", "set_kind", "cut", "claim", "seed")
                              if k in cfg))
        for c in self.certificates:
            tag = "PASS" if c.verdict else "FAIL"
            extra = ""
            if c.seed is not None:
                count = "restarts" if c.method == "randomized-numerical" else "samples"
                extra = f" seed={c.seed} {count}={c.restarts}"
            lines.append(f"[{tag}] {c.claim:<16} {c.method:<21}{extra}  {_brief(c)}")
        for name, prof in self.rank_profiles.items():
            lines.append(f"ranks {name}: n={prof['n']} bimarginal={prof['bimarginal']} single={prof['single']}")
        for name, rep in self.pt_reports.items():
            cells = ", ".join(f"{cut}: {'PPT' if r['psd'] else 'NPT'}{' invariant' if r['pt_invariant'] else ''}"
                              for cut, r in rep.items())
            lines.append(f"pt {name}: {cells}")
        lines.append("timings: " + ", ".join(f"{k}={v}s" for k, v in self.timings.items()))
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines) + "\n"


def _brief(c: Certificate) -> str:
    w = c.witness
    keys = ("cut", "search", "max_overlap", "states", "complement_dim", "n", "bimarginal", "min_bimarginal_rank",
            "subsets", "combinations_checked", "rank", "fixture", "psd", "invariant")
    return " ".join(f"{k}={w[k]}" for k in keys if k in w)


# --- fixtures ---------------------------------------------------------------------


FIXTURES = ("appendix_a_rho_beta", "appendix_b_rho_bc", "appendix_b_rho_ac")


def load_fixture(name: str) -> RationalMatrix:
    text = resources.files("ubbcert").joinpath("data", f"{name}.rmat").read_text()
    return parse_rmat(text)


def marginal_in_order(rho: RationalMatrix, traced: str, d: int) -> RationalMatrix:
    """Two-party marginal with the remaining parties in cyclic order (BC, CA, AB)."""
    m = partial_trace(rho, traced, d)
    if traced != "B":
        return m
    t = m.num.reshape(d, d, d, d).transpose(1, 0, 3, 2)
    return RationalMatrix(np.ascontiguousarray(t).reshape(d * d, d * d), m.den)


def _golden_certs(b: BasisSet, rho: RationalMatrix) -> list[Certificate]:
    if b.d != 3:
        return []
    if b.kind == "ubb_symmetric":
        checks = [(t, "appendix_a_rho_beta", 6) for t in "ABC"]
    elif b.kind == "ubb_asymmetric" and b.cut is Bipartition.AB_C:
        checks = [("A", "appendix_b_rho_bc", 7), ("B", "appendix_b_rho_ac", 7)]
    else:
        return []
    out = []
    for traced, name, want_rank in checks:
        m = marginal_in_order(rho, traced, 3) if name.startswith("appendix_a") else partial_trace(rho, traced, 3)
        equal = m == load_fixture(name)
        r = rank(m)
        out.append(Certificate("golden-marginal", "structural-exact", equal and r == want_rank,
                               {"traced": traced, "fixture": name, "equal": equal, "rank": r,
                                "expected_rank": want_rank}))
    return out


# --- commands ---------------------------------------------------------------------


def _build(cfg: RunConfig) -> BasisSet:
    return build_set(cfg.d, cfg.set_kind, cfg.cut, cfg.completion)


def expected_size(d: int, kind: str) -> int:
    base = upb_cardinality(d)
    return {"topb": d**3, "upb": base, "ubb_symmetric": base + 3 * layer_count(d),
            "ubb_asymmetric": base + 4 * layer_count(d)}[kind]


def cardinality_certificate(b: BasisSet) -> Certificate:
    orth = gram_is_diagonal(s.coeffs for s in b.states)
    kernel = len(ges_basis(b)) if b.kind != "topb" else b.d**3 - rank(RationalMatrix.stack([s.coeffs for s in b.states]))
    want = expected_size(b.d, b.kind)
    ok = orth and len(b) == want and kernel == b.complement_dim
    return Certificate("cardinality", "structural-exact", ok,
                       {"d": b.d, "set": b.kind, "states": len(b), "expected": want,
                        "complement_dim": kernel, "orthogonal": orth})


def run_construct(cfg: RunConfig) -> tuple[Path, BasisSet]:
    b = _build(cfg)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.out_dir / f"{cfg.stem}.states"
    path.write_text(format_states(b.states))
    return path, b


def _expected_pt(b: BasisSet) -> dict[Bipartition, bool]:
    """PSD expectation per cut; complements with a distillable cut must be NPT there."""
    if b.kind == "upb":
        return {c: True for c in CUTS}
    if b.kind == "ubb_symmetric":
        return {c: False for c in CUTS}
    return {c: c is b.cut for c in CUTS}


def _expected_rank_criterion(b: BasisSet) -> dict[Bipartition, bool]:
    return {c: not psd for c, psd in _expected_pt(b).items()}


def run_verify(cfg: RunConfig) -> Report:
    rep = Report(cfg.echo())
    claims = VERIFY_CLAIMS[1:] if cfg.claim == "all" else (cfg.claim,)
    with rep.stage("build"):
        b = _build(cfg)
    with rep.stage("cardinality"):
        rep.add(cardinality_certificate(b))
    if b.kind == "topb":
        return rep
    with rep.stage("projector"):
        p = complement_projector(b)
        rho = density(p)
    if "ppt" in claims:
        with rep.stage("pt"):
            pt = pt_report(p)
            rep.pt_reports[cfg.stem] = pt.as_dict()
            for cut, want in _expected_pt(b).items():
                r = pt.cuts[cut]
                rep.add(Certificate("pt-psd", "structural-exact", r.psd == want,
                                    {"cut": str(cut), "psd": r.psd, "expected_psd": want,
                                     "min_eig": list(r.min_eig) if r.min_eig else None}))
                if b.kind == "ubb_asymmetric" and cut is b.cut:
                    rep.add(Certificate("pt-invariant", "structural-exact", r.pt_invariant,
                                        {"cut": str(cut), "invariant": r.pt_invariant}))
        if b.kind == "upb":
            with rep.stage("ppt-deficit"):
                rep.add(certify_ppt_deficit(cfg.d, completion=cfg.completion))
    if "theorem1" in claims and b.kind == "ubb_symmetric":
        with rep.stage("theorem1"):
            g = len(ges_basis(b))
            rep.add(verify_theorem1_sampled(cfg.d, g, 1, cfg.seed, cfg.completion))
    if "rank" in claims or "theorem1" in claims:
        with rep.stage("rank"):
            certs, prof = rank_certificates(p, _expected_rank_criterion(b))
            rep.add(certs)
            rep.rank_profiles[cfg.stem] = prof
    if "golden" in claims:
        with rep.stage("golden"):
            rep.add(_golden_certs(b, rho))
    return rep


def run_certify(cfg: RunConfig) -> Report:
    rep = Report(cfg.echo())
    ss = cfg.seesaw()
    d, comp = cfg.d, cfg.completion
    with rep.stage(cfg.claim):
        if cfg.claim == "prop1":
            rep.add(certify_prop1(d, ss, cfg.jobs, comp))
        elif cfg.claim == "prop2":
            rep.add(certify_prop2(d, ss, cfg.jobs, comp))
        elif cfg.claim == "prop3":
            rep.add(certify_prop3(d, cfg.cut, ss, cfg.jobs, comp))
        elif cfg.claim == "ppt-deficit":
            rep.add(certify_ppt_deficit(d, ss, cfg.jobs, comp))
        elif cfg.claim == "facts":
            rep.add([verify_fact_I(d, comp), verify_fact_II(d, comp), verify_fact_III(d, comp),
                     verify_fact_IV(d, cfg.samples or 50, cfg.seed, comp)])
        elif cfg.claim == "theorem1":
            g = len(ges_basis(_build(cfg)))
            for n in range(1, g + 1):
                rep.add(verify_theorem1_sampled(d, n, cfg.samples or 200, cfg.seed, comp))
    return rep


def run_export(cfg: RunConfig) -> list[Path]:
    """Write projector, normalized state, marginals and partial transposes as ``.rmat`` files.

    The projector of a complete basis is the zero matrix; its normalized
    state, marginals and partial transposes are skipped.
    """
    b = _build(cfg)
    p = complement_projector(b)
    out = cfg.out_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {out}: {e.strerror}") from e
    files = {f"{cfg.stem}.projector.rmat": p.matrix}
    if p.rank:
        rho = density(p)
        files[f"{cfg.stem}.rho.rmat"] = rho
        for traced, keep in zip("ABC", ("BC", "AC", "AB")):
            files[f"{cfg.stem}.marginal_{keep}.rmat"] = partial_trace(rho, traced, cfg.d)
        for cut in CUTS:
            files[f"{cfg.stem}.pt_{cut.single_name}.rmat"] = partial_transpose(rho, cut, cfg.d)
    written = []
    for name, m in files.items():
        path = out / name
        try:
            path.write_text(format_rmat(m))
        except OSError as e:
            raise OSError(f"cannot write {path}: {e.strerror}") from e
        written.append(path)
    return written
