"""Block-cube geometry and twisted orthogonal product bases.

Coefficient of ``|p>|q>|r>`` lives at flat index ``p*d**2 + q*d + r``
(party order A, B, C). Every module relies on this convention.

Faces are described by a *role* (the layer template shared by odd d and
even d >= 6) and a printed *face* number. The two coincide except at d=4,
whose construction numbers the same six face blocks differently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ubbcert.exact_linalg import RationalVector, orthogonalize, tensor_product

__all__ = [
    "BasicBlock",
    "TripartiteState",
    "LocalFamily",
    "FaceBlock",
    "TOPB",
    "COMPLETIONS",
    "layer_count",
    "family_size",
    "eta_family",
    "xi_family",
    "phi_family",
    "build_topb",
    "face_role",
    "format_states",
    "parse_states",
    "occupancy_diagram",
]

COMPLETIONS = ("standard", "reversed", "rotated")

# role -> slot per party; "lo"/"hi" are the layer's fixed local levels
_ROLE_SLOTS = {
    1: ("lo", "eta", "xi"),
    2: ("eta", "hi", "xi"),
    3: ("hi", "xi", "eta"),
    4: ("eta", "xi", "lo"),
    5: ("xi", "lo", "eta"),
    6: ("xi", "eta", "hi"),
}
# printed face number -> role, for the d=4 construction
_D4_FACE_ROLE = {1: 1, 2: 2, 3: 5, 4: 6, 5: 3, 6: 4}


@dataclass(frozen=True, order=True)
class BasicBlock:
    p: int
    q: int
    r: int

    def flat(self, d: int) -> int:
        return self.p * d * d + self.q * d + self.r


@dataclass(frozen=True, eq=False)
class TripartiteState:
    """Unnormalized vector in C^d (x) C^d (x) C^d with a provenance label."""

    d: int
    coeffs: RationalVector
    label: str

    def __post_init__(self):
        if self.coeffs.dim != self.d**3:
            raise ValueError(f"state {self.label!r}: expected {self.d**3} coefficients, got {self.coeffs.dim}")

    @classmethod
    def product(cls, a: RationalVector, b: RationalVector, c: RationalVector, label: str) -> TripartiteState:
        return cls(a.dim, tensor_product(tensor_product(a, b), c), label)

    @classmethod
    def combine(cls, label: str, terms: Iterable[tuple[object, TripartiteState]]) -> TripartiteState:
        terms = list(terms)
        d = terms[0][1].d
        acc = RationalVector.zeros(d**3)
        for coef, st in terms:
            acc = acc + st.coeffs * coef
        return cls(d, acc, label)

    @property
    def support(self) -> frozenset[BasicBlock]:
        d = self.d
        return frozenset(BasicBlock(i // (d * d), (i // d) % d, i % d) for i in self.coeffs.support())

    def dot(self, other: TripartiteState) -> Fraction:
        return self.coeffs.dot(other.coeffs)

    def norm2(self) -> Fraction:
        return self.coeffs.norm2()

    def tensor(self) -> np.ndarray:
        """Integer numerators as a (d, d, d) object array (common denominator dropped)."""
        return self.coeffs.num.reshape(self.d, self.d, self.d)

    def __repr__(self):
        return f"TripartiteState({self.label!r}, d={self.d})"


@dataclass(frozen=True)
class LocalFamily:
    kind: str
    layer: int
    window: tuple[int, ...]
    vectors: tuple[RationalVector, ...]


def layer_count(d: int) -> int:
    """Number of facial layers: (d-1)/2 for odd d, d/2-1 for even d."""
    if d < 3:
        raise ValueError(f"local dimension must be >= 3, got {d}")
    return (d - 1) // 2 if d % 2 else d // 2 - 1


def family_size(d: int, layer: int) -> int:
    return 2 * layer if d % 2 else 2 * layer + 1


def _check_layer(d: int, layer: int) -> None:
    if not 1 <= layer <= layer_count(d):
        raise ValueError(f"layer {layer} out of range 1..{layer_count(d)} for d={d}")


def _levels(d: int, layer: int) -> tuple[int, int]:
    """Fixed local levels (lo, hi) of a layer's faces."""
    if d % 2:
        c = (d - 1) // 2
        return c - layer, c + layer
    return d // 2 - 1 - layer, d // 2 + layer


def _completion_order(w: int, completion: str) -> list[int]:
    if completion == "standard":
        order = list(range(w))
    elif completion == "reversed":
        order = list(range(w - 1, -1, -1))
    elif completion == "rotated":
        order = [(k + w // 2) % w for k in range(w)]
    else:
        raise ValueError(f"unknown completion {completion!r}; expected one of {COMPLETIONS}")
    return order[: w - 1]


def _family(d: int, layer: int, kind: str, start: int, completion: str) -> LocalFamily:
    w = family_size(d, layer)
    window = tuple(range(start, start + w))
    ones = RationalVector.of([1 if i in window else 0 for i in range(d)])
    seeds = [RationalVector.basis(d, window[k]) for k in _completion_order(w, completion)]
    return LocalFamily(kind, layer, window, tuple(orthogonalize([ones, *seeds])))


def eta_family(d: int, layer: int, completion: str = "standard") -> LocalFamily:
    """Orthogonal family on the layer's lower window; first vector is all-ones there."""
    _check_layer(d, layer)
    return _family(d, layer, "eta", _levels(d, layer)[0], completion)


def xi_family(d: int, layer: int, completion: str = "standard") -> LocalFamily:
    """As :func:`eta_family`, window shifted up by one level."""
    _check_layer(d, layer)
    return _family(d, layer, "xi", _levels(d, layer)[0] + 1, completion)


def phi_family(d: int) -> LocalFamily:
    """Inner-cube pair ``|d/2-1> +/- |d/2>`` (even d only)."""
    if d < 4 or d % 2:
        raise ValueError(f"inner cube exists only for even d >= 4, got {d}")
    lo = d // 2 - 1
    plus = [0] * d
    minus = [0] * d
    plus[lo] = plus[lo + 1] = 1
    minus[lo], minus[lo + 1] = 1, -1
    return LocalFamily("phi", 0, (lo, lo + 1), (RationalVector.of(plus), RationalVector.of(minus)))


def face_role(d: int, face: int) -> int:
    return _D4_FACE_ROLE[face] if d == 4 else face


@dataclass(frozen=True)
class FaceBlock:
    face: int
    role: int
    layer: int
    slots: tuple[tuple[str, int | None], ...]  # per party: ("fixed", level) | ("eta", None) | ("xi", None)
    states: tuple[TripartiteState, ...]

    def state(self, i: int, j: int) -> TripartiteState:
        w = int(round(len(self.states) ** 0.5))
        return self.states[i * w + j]


@dataclass(frozen=True)
class TOPB:
    d: int
    diagonal_states: tuple[TripartiteState, ...]
    inner_cube_states: tuple[TripartiteState, ...]
    faces: dict[tuple[int, int], FaceBlock] = field(repr=False)
    completion: str = "standard"

    def face_states(self, face: int, layer: int) -> tuple[TripartiteState, ...]:
        return self.faces[(face, layer)].states

    def face_blocks(self) -> list[FaceBlock]:
        """Face blocks in face-major, layer-major order."""
        return [self.faces[k] for k in sorted(self.faces)]

    def block_by_role(self, role: int, layer: int) -> FaceBlock:
        for fb in self.faces.values():
            if fb.role == role and fb.layer == layer:
                return fb
        raise KeyError((role, layer))

    def states(self) -> list[TripartiteState]:
        out = list(self.diagonal_states) + list(self.inner_cube_states)
        for fb in self.face_blocks():
            out.extend(fb.states)
        return out

    def diagonal(self, k: int) -> TripartiteState:
        for st in self.diagonal_states:
            if st.label == f"diag[{k}]":
                return st
        raise KeyError(k)


def _diag_levels(d: int) -> list[int]:
    if d % 2:
        return list(range(d))
    skip = {d // 2 - 1, d // 2}
    return [k for k in range(d) if k not in skip]


def build_topb(d: int, completion: str = "standard") -> TOPB:
    """Twisted orthogonal product basis of the d x d x d block-cube (d**3 states)."""
    if d < 3:
        raise ValueError(f"twisted bases need d >= 3, got {d}")
    diag = tuple(
        TripartiteState.product(*(RationalVector.basis(d, k),) * 3, label=f"diag[{k}]") for k in _diag_levels(d)
    )
    inner: tuple[TripartiteState, ...] = ()
    if d % 2 == 0:
        phi = phi_family(d).vectors
        inner = tuple(
            TripartiteState.product(phi[a], phi[b], phi[c], label=f"inner({a},{b},{c})")
            for a in range(2)
            for b in range(2)
            for c in range(2)
        )
    faces = {}
    for layer in range(1, layer_count(d) + 1):
        lo, hi = _levels(d, layer)
        eta = eta_family(d, layer, completion).vectors
        xi = xi_family(d, layer, completion).vectors
        w = len(eta)
        for face in range(1, 7):
            role = face_role(d, face)
            slots = []
            for s in _ROLE_SLOTS[role]:
                slots.append(("fixed", lo if s == "lo" else hi) if s in ("lo", "hi") else (s, None))
            states = []
            for i in range(w):
                for j in range(w):
                    factors = []
                    for kind, level in slots:
                        if kind == "fixed":
                            factors.append(RationalVector.basis(d, level))
                        else:
                            factors.append(eta[i] if kind == "eta" else xi[j])
                    states.append(TripartiteState.product(*factors, label=f"face{face}.L{layer}({i},{j})"))
            faces[(face, layer)] = FaceBlock(face, role, layer, tuple(slots), tuple(states))
    return TOPB(d, diag, inner, faces, completion)


# --- state-set text format --------------------------------------------------------


def format_states(states: Sequence[TripartiteState]) -> str:
    """One state per line: ``label : flatindex=num/den,...`` (nonzero entries only)."""
    lines = []
    for st in states:
        cells = []
        for idx in st.coeffs.support():
            f = st.coeffs[idx]
            cells.append(f"{idx}={f.numerator}/{f.denominator}")
        lines.append(f"{st.label} : {','.join(cells)}")
    return "\n".join(lines) + "\n"


def parse_states(text: str, d: int) -> list[TripartiteState]:
    out = []
    for ln in text.splitlines():
        if not ln.strip():
            continue
        label, sep, body = ln.partition(" : ")
        if not sep:
            raise ValueError(f"malformed state line: {ln!r}")
        entries = [Fraction(0)] * d**3
        for cell in filter(None, body.strip().split(",")):
            idx, _, val = cell.partition("=")
            entries[int(idx)] = Fraction(val)
        out.append(TripartiteState(d, RationalVector.of(entries), label))
    return out


def occupancy_diagram(topb: TOPB) -> str:
    """Text grid per A-slice showing which block owns each basic block.

    ``D`` diagonal, ``I`` inner cube, otherwise ``<face><layer letter>``.
    """
    d = topb.d
    owner: dict[BasicBlock, str] = {}
    for st in topb.diagonal_states:
        for b in st.support:
            owner[b] = "D"
    for st in topb.inner_cube_states:
        for b in st.support:
            owner[b] = "I"
    for fb in topb.face_blocks():
        tag = f"{fb.face}{chr(ord('a') + fb.layer - 1)}"
        for st in fb.states:
            for b in st.support:
                owner[b] = tag
    out = []
    for p in range(d):
        out.append(f"A={p}  (rows B, columns C)")
        for q in range(d):
            out.append(" ".join(f"{owner.get(BasicBlock(p, q, r), '.'):>3}" for r in range(d)))
        out.append("")
    return "\n".join(out)
