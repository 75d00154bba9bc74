"""Stopper state, UPB, symmetric and asymmetric UBBs, and missing-state sets."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from ubbcert.block_cube import TOPB, FaceBlock, TripartiteState, build_topb, family_size, layer_count
from ubbcert.exact_linalg import RationalVector

__all__ = [
    "Bipartition",
    "BasisSet",
    "MissingStateSet",
    "stopper",
    "build_upb",
    "build_symmetric_ubb",
    "build_asymmetric_ubb",
    "build_set",
    "missing_states",
    "upb_cardinality",
    "SET_KINDS",
]


class Bipartition(enum.Enum):
    A_BC = "A|BC"
    AC_B = "AC|B"
    AB_C = "AB|C"

    @property
    def single(self) -> int:
        """Index (0=A, 1=B, 2=C) of the one-party side."""
        return {"A|BC": 0, "AC|B": 1, "AB|C": 2}[self.value]

    @property
    def single_name(self) -> str:
        return "ABC"[self.single]

    @classmethod
    def parse(cls, text: str) -> Bipartition:
        norm = text.strip().upper().replace(" ", "")
        aliases = {"A|BC": "A|BC", "BC|A": "A|BC", "AC|B": "AC|B", "CA|B": "AC|B", "B|AC": "AC|B",
                   "AB|C": "AB|C", "C|AB": "AB|C", "BA|C": "AB|C"}
        if norm not in aliases:
            raise ValueError(f"unknown bipartition {text!r}; expected A|BC, AC|B or AB|C")
        return cls(aliases[norm])

    def __str__(self):
        return self.value


SET_KINDS = ("topb", "upb", "ubb_symmetric", "ubb_asymmetric")


@dataclass(frozen=True)
class BasisSet:
    """Ordered orthogonal state collection.

    ``declared`` runs parallel to ``states``: the cut in which an appended
    biseparable state factorizes, ``None`` for fully product states.
    """

    d: int
    kind: str
    states: tuple[TripartiteState, ...]
    declared: tuple[Bipartition | None, ...]
    cut: Bipartition | None = None
    completion: str = "standard"

    def __len__(self):
        return len(self.states)

    @property
    def appended(self) -> list[tuple[TripartiteState, Bipartition]]:
        return [(s, c) for s, c in zip(self.states, self.declared) if c is not None]

    @property
    def complement_dim(self) -> int:
        return self.d**3 - len(self.states)


@dataclass(frozen=True)
class MissingStateSet:
    d: int
    kind: str
    states: tuple[TripartiteState, ...]

    def __len__(self):
        return len(self.states)


def stopper(d: int) -> TripartiteState:
    """All-ones state ``(|0> + ... + |d-1>)^(x)3``."""
    if d < 3:
        raise ValueError(f"d must be >= 3, got {d}")
    ones = RationalVector.of([1] * d)
    return TripartiteState.product(ones, ones, ones, label="S")


def upb_cardinality(d: int) -> int:
    """Closed form ``6 * sum_l (w_l**2 - 1) + inner(d) + 1``."""
    inner = 7 if d % 2 == 0 else 0
    return 6 * sum(family_size(d, l) ** 2 - 1 for l in range(1, layer_count(d) + 1)) + inner + 1


def _anchor_state(fb: FaceBlock) -> TripartiteState:
    return fb.state(0, 0)


def _upb_states(topb: TOPB) -> list[TripartiteState]:
    out = []
    for fb in topb.face_blocks():
        out.extend(s for s in fb.states if s is not _anchor_state(fb))
    out.extend(topb.inner_cube_states[1:])  # drop psi(0,0,0)
    out.append(stopper(topb.d))
    return out


def build_upb(d: int, completion: str = "standard") -> BasisSet:
    topb = build_topb(d, completion)
    states = _upb_states(topb)
    return BasisSet(d, "upb", tuple(states), (None,) * len(states), completion=completion)


def _shared_party(a: FaceBlock, b: FaceBlock) -> Bipartition:
    """Cut across which ``psi(0,0)_a -/+ psi(0,0)_b`` factorizes."""
    shared = [k for k in range(3) if a.slots[k] == b.slots[k]]
    if len(shared) != 1:
        raise ValueError(f"faces {a.face} and {b.face} do not share exactly one party slot")
    return (Bipartition.A_BC, Bipartition.AC_B, Bipartition.AB_C)[shared[0]]


def _pair_state(a: FaceBlock, b: FaceBlock, sign: int) -> TripartiteState:
    tag = "-" if sign < 0 else "+"
    label = f"psi{tag}_{a.face}{b.face}.L{a.layer}"
    return TripartiteState.combine(label, [(1, _anchor_state(a)), (sign, _anchor_state(b))])


def _diag_anchor_coefficient(topb: TOPB, k: int, fb: FaceBlock) -> Fraction:
    s = stopper(topb.d)
    return s.dot(_anchor_state(fb)) / s.dot(topb.diagonal(k))


def _pair_minus(topb: TOPB, face_a: int, face_b: int, layer: int) -> tuple[TripartiteState, Bipartition]:
    a, b = topb.faces[(face_a, layer)], topb.faces[(face_b, layer)]
    return _pair_state(a, b, -1), _shared_party(a, b)


def build_symmetric_ubb(d: int, completion: str = "standard") -> BasisSet:
    """UPB plus ``psi(0,0)_i - psi(0,0)_j`` for face pairs (1,2), (3,4), (5,6) on every layer."""
    topb = build_topb(d, completion)
    states = _upb_states(topb)
    declared: list[Bipartition | None] = [None] * len(states)
    for layer in range(1, layer_count(d) + 1):
        for fa, fb in ((1, 2), (3, 4), (5, 6)):
            st, cut = _pair_minus(topb, fa, fb, layer)
            states.append(st)
            declared.append(cut)
    return BasisSet(d, "ubb_symmetric", tuple(states), tuple(declared), completion=completion)


# per cut: two face-role pairs sharing the cut's single party, and (level, role) anchors
_ASYM_ROLES = {
    Bipartition.AB_C: (((1, 2), (3, 5)), (("lo", 4), ("hi", 6))),
    Bipartition.A_BC: (((2, 4), (5, 6)), (("lo", 1), ("hi", 3))),
    Bipartition.AC_B: (((1, 6), (3, 4)), (("lo", 5), ("hi", 2))),
}


def _fixed_level(fb: FaceBlock, party: int) -> int:
    kind, level = fb.slots[party]
    if kind != "fixed":
        raise ValueError(f"face {fb.face} has no fixed level on party {party}")
    return level


def build_asymmetric_ubb(d: int, cut: Bipartition | str, completion: str = "standard") -> BasisSet:
    """UPB plus biseparable states all factorizing across ``cut``.

    Per layer: two face-pair differences and two diagonal-anchored states
    ``c*|kkk> - psi(0,0)_l`` with ``c`` fixed exactly by orthogonality to the stopper.
    """
    if isinstance(cut, str):
        cut = Bipartition.parse(cut)
    if not isinstance(cut, Bipartition):
        raise ValueError(f"invalid cut {cut!r}")
    topb = build_topb(d, completion)
    states = _upb_states(topb)
    declared: list[Bipartition | None] = [None] * len(states)
    pairs, anchors = _ASYM_ROLES[cut]
    used_levels: set[int] = set()
    for layer in range(1, layer_count(d) + 1):
        for ra, rb in pairs:
            a, b = sorted((topb.block_by_role(ra, layer), topb.block_by_role(rb, layer)), key=lambda fb: fb.face)
            states.append(_pair_state(a, b, -1))
            declared.append(_shared_party(a, b))
        for _, role in anchors:
            fb = topb.block_by_role(role, layer)
            k = _fixed_level(fb, cut.single)
            if k in used_levels:
                raise AssertionError(f"diagonal anchor {k} reused across layers")
            used_levels.add(k)
            c = _diag_anchor_coefficient(topb, k, fb)
            label = f"psi-_({k}){fb.face}.L{layer}"
            states.append(TripartiteState.combine(label, [(c, topb.diagonal(k)), (-1, _anchor_state(fb))]))
            declared.append(cut)
    if any(c is not None and c != cut for c in declared):
        raise AssertionError("appended state factorizes across the wrong cut")
    return BasisSet(d, "ubb_asymmetric", tuple(states), tuple(declared), cut=cut, completion=completion)


def build_set(d: int, kind: str, cut: Bipartition | str | None = None, completion: str = "standard") -> BasisSet:
    """Dispatch on ``kind`` (``topb``, ``upb``, ``ubb_symmetric``, ``ubb_asymmetric``)."""
    kind = kind.replace("-", "_")
    kind = {"ubb_sym": "ubb_symmetric", "ubb_asym": "ubb_asymmetric"}.get(kind, kind)
    if kind == "topb":
        states = build_topb(d, completion).states()
        return BasisSet(d, "topb", tuple(states), (None,) * len(states), completion=completion)
    if kind == "upb":
        return build_upb(d, completion)
    if kind == "ubb_symmetric":
        return build_symmetric_ubb(d, completion)
    if kind == "ubb_asymmetric":
        if cut is None:
            raise ValueError("asymmetric UBB needs a cut")
        return build_asymmetric_ubb(d, cut, completion)
    raise ValueError(f"unknown set kind {kind!r}; expected one of {SET_KINDS}")


def missing_states(d: int, kind: str = "ubb_symmetric", completion: str = "standard") -> MissingStateSet:
    """States of the t-OPB absent from the set, combined so each overlaps the stopper."""
    kind = {"ubb-sym": "ubb_symmetric", "ubb_sym": "ubb_symmetric"}.get(kind, kind)
    if kind not in ("upb", "ubb_symmetric"):
        raise ValueError(f"missing states are defined for upb and ubb_symmetric, got {kind!r}")
    topb = build_topb(d, completion)
    out = list(topb.diagonal_states)
    if topb.inner_cube_states:
        out.append(topb.inner_cube_states[0])
    for layer in range(1, layer_count(d) + 1):
        if kind == "upb":
            out.extend(_anchor_state(topb.faces[(f, layer)]) for f in range(1, 7))
        else:
            for fa, fb in ((1, 2), (3, 4), (5, 6)):
                out.append(_pair_state(topb.faces[(fa, layer)], topb.faces[(fb, layer)], +1))
    return MissingStateSet(d, kind, tuple(out))
