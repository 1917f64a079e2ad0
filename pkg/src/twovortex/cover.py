"""Deck transformations and path bookkeeping for the doubly punctured plane.

The universal-cover sheets are labelled by reduced words in the free group on
two generators, one positively oriented loop around each flux carrier.  A
one-dimensional representation assigns each generator a unit-modulus phase set
by the flux fractions; scattering paths are labelled by an alternating word of
carriers visited plus an integer winding at each visit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .geometry import (
    DegenerateCrossingError,
    Flux,
    PlanePoint,
    VortexConfig,
    as_point,
    crossing_factors,
    vortex_position,
)

__all__ = [
    "GroupWord",
    "IDENTITY",
    "ExtremePoint",
    "LiftedPoint",
    "reduce_and_multiply",
    "rep_value",
    "chi_visible",
    "enumerate_alternating_words",
    "WindingPath",
    "enumerate_winding_paths",
    "path_deck_element",
    "segment_deck_element",
]


@dataclass(frozen=True)
class GroupWord:
    """Reduced word in the free group on generators 'a' and 'b'.

    Stored as alternating (letter, exponent) syllables with nonzero exponents,
    e.g. ``(('a', 2), ('b', -1))``.
    """

    syllables: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        prev = None
        for letter, exp in self.syllables:
            if letter not in ("a", "b"):
                raise ValueError(f"unknown generator {letter!r}")
            if exp == 0:
                raise ValueError("zero exponent in reduced word")
            if letter == prev:
                raise ValueError("word is not reduced (repeated letter)")
            prev = letter

    @classmethod
    def from_syllables(cls, syllables) -> "GroupWord":
        """Build a word from arbitrary (letter, exponent) pairs, reducing as needed."""
        out: list[list] = []
        for letter, exp in syllables:
            if exp == 0:
                continue
            if out and out[-1][0] == letter:
                out[-1][1] += exp
                if out[-1][1] == 0:
                    out.pop()
            else:
                out.append([letter, int(exp)])
        return cls(tuple((l, e) for l, e in out))

    def inverse(self) -> "GroupWord":
        return GroupWord(tuple((l, -e) for l, e in reversed(self.syllables)))

    def exponent_sum(self, letter: str) -> int:
        return sum(e for l, e in self.syllables if l == letter)

    def __bool__(self) -> bool:
        return bool(self.syllables)


IDENTITY = GroupWord()


def reduce_and_multiply(u: GroupWord, v: GroupWord) -> GroupWord:
    """Product u * v in the free group, fully reduced."""
    return GroupWord.from_syllables(u.syllables + v.syllables)


def rep_value(word: GroupWord, flux: Flux) -> complex:
    """Phase assigned to a deck word by the flux representation.

    The generator around each carrier maps to exp(2*pi*i*flux); the value
    depends only on the exponent sums (the representation is abelian).
    """
    total = word.exponent_sum("a") * flux.alpha + word.exponent_sum("b") * flux.beta
    return complex(np.exp(2j * np.pi * total))


@dataclass(frozen=True)
class ExtremePoint:
    """Boundary point of the cover lying over one carrier.

    ``sheet`` is any representative of the coset sheet * <g_vortex> of sheets
    adjacent to the point.
    """

    vortex: str
    sheet: GroupWord = IDENTITY


@dataclass(frozen=True)
class LiftedPoint:
    """An ordinary plane point lifted to a definite sheet."""

    point: PlanePoint
    sheet: GroupWord = IDENTITY


def _gen(letter: str, exp: int = 1) -> GroupWord:
    return GroupWord.from_syllables(((letter, exp),))


def _in_cyclic(word: GroupWord, letter: str) -> bool:
    """True when ``word`` is a power of the generator ``letter`` (or trivial)."""
    s = word.syllables
    return not s or (len(s) == 1 and s[0][0] == letter)


def _same_extreme(p: ExtremePoint, q: ExtremePoint) -> bool:
    return p.vortex == q.vortex and _in_cyclic(
        reduce_and_multiply(p.sheet.inverse(), q.sheet), p.vortex
    )


def chi_visible(p, q, cfg: VortexConfig) -> int:
    """Mutual visibility indicator on the cover: 1 when the straight segment
    between the two lifted points exists and stays on compatible sheets,
    else 0.

    Arguments may be ExtremePoint (a boundary point over a carrier) or
    LiftedPoint (a plane point on a definite sheet).  Degenerate segments
    raise the geometry errors of the base plane.
    """
    if isinstance(p, ExtremePoint) and isinstance(q, ExtremePoint):
        if p.vortex == q.vortex:
            return 1 if _same_extreme(p, q) else 0
        rel = reduce_and_multiply(p.sheet.inverse(), q.sheet).syllables
        # need rel in <g_p> * <g_q>: at most one syllable of each letter,
        # p's letter first
        if len(rel) == 0:
            return 1
        if len(rel) == 1 and rel[0][0] in (p.vortex, q.vortex):
            return 1
        if len(rel) == 2 and rel[0][0] == p.vortex and rel[1][0] == q.vortex:
            return 1
        return 0
    if isinstance(p, ExtremePoint) or isinstance(q, ExtremePoint):
        ext, pt = (p, q) if isinstance(p, ExtremePoint) else (q, p)
        base = pt.point
        if base.y == 0.0:
            cpos = vortex_position(ext.vortex, cfg)
            if base.x == cpos.x:
                raise DegenerateCrossingError("lifted point coincides with carrier")
            lo, hi = min(base.x, cpos.x), max(base.x, cpos.x)
            if hi <= 0.0 or lo >= cfg.separation:
                raise DegenerateCrossingError("segment to carrier runs along a cut")
        # a straight segment ending on a carrier crosses no cut, so the
        # sheet is unchanged along it
        rel = reduce_and_multiply(ext.sheet.inverse(), pt.sheet)
        return 1 if _in_cyclic(rel, ext.vortex) else 0
    # two lifted plane points: compare sheets across the connecting segment
    g = segment_deck_element(p.point, q.point, cfg)
    return 1 if reduce_and_multiply(p.sheet, g) == q.sheet else 0


def segment_deck_element(x0, x, cfg: VortexConfig, flux: Flux | None = None) -> GroupWord:
    """Deck word picked up by lifting the straight segment x0 -> x.

    Derived from the branch offsets of the adapted frames, so endpoints lying
    exactly on a cut follow the same +pi tie-break as the rest of the package.
    """
    f = flux if flux is not None else Flux(0.0, 0.0)
    cf = crossing_factors(x0, x, f, cfg)
    out = []
    for letter, eta in (("a", cf.eta_a), ("b", cf.eta_b)):
        if eta != 0.0:
            out.append((letter, -int(round(eta / (2.0 * np.pi)))))
    return GroupWord.from_syllables(out)


def enumerate_alternating_words(n_max: int) -> list[tuple[str, ...]]:
    """All alternating carrier words of length 0..n_max, shortest first and
    'a'-leading before 'b'-leading at each length.  1 + 2*n_max words total."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    words: list[tuple[str, ...]] = [()]
    for n in range(1, n_max + 1):
        for first in ("a", "b"):
            other = "b" if first == "a" else "a"
            words.append(tuple((first, other)[j % 2] for j in range(n)))
    return words


@dataclass(frozen=True)
class WindingPath:
    """Scattering path: carriers visited in order plus winding at each visit."""

    word: tuple[str, ...]
    windings: tuple[int, ...]

    def __post_init__(self):
        if len(self.word) != len(self.windings):
            raise ValueError("word and windings lengths differ")
        for u, v in zip(self.word, self.word[1:]):
            if u == v:
                raise ValueError("consecutive visits to the same carrier")


def enumerate_winding_paths(word: tuple[str, ...], k_max: int) -> list[WindingPath]:
    """All winding assignments with |k_j| <= k_max for a fixed word, in
    lexicographic order of the winding tuple.  (2*k_max+1)**len(word) paths."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    rng = range(-k_max, k_max + 1)
    return [
        WindingPath(word, ks) for ks in itertools.product(rng, repeat=len(word))
    ]


def path_deck_element(path: WindingPath) -> GroupWord:
    """Composite deck word of a scattering path: the ordered product of
    per-visit generator powers."""
    return GroupWord.from_syllables(
        (letter, k) for letter, k in zip(path.word, path.windings)
    )
