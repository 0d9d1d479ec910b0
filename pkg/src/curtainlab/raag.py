"""Right-angled Artin groups: shortlex normal forms, balls in the Salvetti cover, the left action.

Letters are pairs ``(generator index, ±1)``. Two letters commute when their
generators are joined in the commutation graph.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import BudgetExceeded, HorizonExceeded, ParseError, UnknownGenerator
from .median import MedianWindow

Letter = tuple[int, int]
Word = tuple[Letter, ...]

DEFAULT_CAP = 2_000_000

_SUP = str.maketrans("0123456789-", "⁰¹²³⁴⁵⁶⁷⁸⁹⁻")
_UNSUP = str.maketrans("⁰¹²³⁴⁵⁶⁷⁸⁹⁻", "0123456789-")


def vertex_cap(cap: int | None = None) -> int:
    """Explicit cap, else ``CURTAINLAB_BUDGET`` from the environment, else 2e6."""
    if cap is not None:
        return int(cap)
    env = os.environ.get("CURTAINLAB_BUDGET")
    return int(float(env)) if env else DEFAULT_CAP


@dataclass(frozen=True)
class RaagPresentation:
    generators: tuple[str, ...]
    commuting_pairs: frozenset[frozenset[str]] = frozenset()

    def __post_init__(self):
        if len(set(self.generators)) != len(self.generators):
            raise ParseError("duplicate generator names")
        for pair in self.commuting_pairs:
            if len(pair) != 2:
                raise ParseError(f"commuting pair {sorted(pair)} is not two distinct generators")
            for s in pair:
                if s not in self.generators:
                    raise UnknownGenerator(f"unknown generator {s!r} in commuting pair")
        k = len(self.generators)
        table = [[False] * k for _ in range(k)]
        for pair in self.commuting_pairs:
            a, b = (self.generators.index(s) for s in pair)
            table[a][b] = table[b][a] = True
        object.__setattr__(self, "_commute", tuple(tuple(r) for r in table))
        object.__setattr__(self, "_gen_index", {s: i for i, s in enumerate(self.generators)})
        # longest names first so "ab" style concatenations tokenize greedily
        names = sorted(self.generators, key=len, reverse=True)
        pat = "|".join(re.escape(s) for s in names)
        object.__setattr__(self, "_token", re.compile(
            rf"\s*({pat})(?:\^\{{?(-?\d+)\}}?|([⁻⁰¹²³⁴⁵⁶⁷⁸⁹]+))?\s*"))

    @classmethod
    def make(cls, generators: Sequence[str], commuting_pairs: Iterable[Sequence[str]] = ()) -> "RaagPresentation":
        return cls(tuple(generators), frozenset(frozenset(p) for p in commuting_pairs))

    @property
    def rank(self) -> int:
        return len(self.generators)

    def commute(self, i: int, j: int) -> bool:
        return self._commute[i][j]

    def link(self, i: int) -> list[int]:
        return [j for j in range(self.rank) if self._commute[i][j]]

    def gen(self, name: str) -> int:
        try:
            return self._gen_index[name]
        except KeyError:
            raise UnknownGenerator(f"unknown generator {name!r}") from None

    # parsing and rendering

    def parse_word(self, text: str) -> Word:
        """Parse ``"x y⁻¹ z"``, ``"x^3 z x^-1"``, ``"z x²"`` or ``"ab"``; ``"e"``/``""`` is the identity."""
        text = text.strip()
        if text in ("", "e", "1", "id") and "e" not in self._gen_index:
            return ()
        pos, out = 0, []
        while pos < len(text):
            m = self._token.match(text, pos)
            if not m or m.end() == pos:
                bad = text[pos:].split()[0] if text[pos:].split() else text[pos:]
                raise UnknownGenerator(f"cannot parse {bad!r} at offset {pos} in {text!r}")
            name, exp, sup = m.groups()
            if exp is not None:
                k = int(exp)
            elif sup is not None:
                s = sup.translate(_UNSUP)
                k = -1 if s == "-" else int(s)
            else:
                k = 1
            i = self._gen_index[name]
            out.extend([(i, 1 if k > 0 else -1)] * abs(k))
            pos = m.end()
        return tuple(out)

    def render(self, word: Word) -> str:
        if not word:
            return "e"
        parts = []
        i = 0
        while i < len(word):
            j = i
            while j < len(word) and word[j] == word[i]:
                j += 1
            g, e = word[i]
            k = (j - i) * e
            parts.append(self.generators[g] + ("" if k == 1 else str(k).translate(_SUP)))
            i = j
        return " ".join(parts)

    def element(self, word: str | Word | "GroupElement") -> "GroupElement":
        if isinstance(word, GroupElement):
            return word
        if isinstance(word, str):
            word = self.parse_word(word)
        return normal_form(self, word)

    def identity(self) -> "GroupElement":
        return GroupElement(self, ())

    def letters(self) -> list[Letter]:
        """All letters in the fixed order: generator order, positive before inverse."""
        return [(i, e) for i in range(self.rank) for e in (1, -1)]

    def to_dict(self) -> dict:
        return {"generators": list(self.generators),
                "commuting_pairs": sorted(sorted(p, key=self.generators.index) for p in self.commuting_pairs)}

    @classmethod
    def from_dict(cls, doc: dict) -> "RaagPresentation":
        if not isinstance(doc, dict) or "generators" not in doc:
            raise ParseError("presentation needs a 'generators' list")
        gens = doc["generators"]
        pairs = doc.get("commuting_pairs", [])
        if not isinstance(gens, list) or not all(isinstance(s, str) and s for s in gens):
            raise ParseError("'generators' must be a list of non-empty strings")
        if not isinstance(pairs, list) or not all(isinstance(p, list) and len(p) == 2 for p in pairs):
            raise ParseError("'commuting_pairs' must be a list of 2-element lists")
        return cls.make(gens, pairs)


def letter_key(letter: Letter) -> tuple[int, int]:
    return (letter[0], 0 if letter[1] > 0 else 1)


def free_reduce(p: RaagPresentation, word: Iterable[Letter]) -> list[Letter]:
    """Geodesic representative: each new letter slides left past commuting letters
    and cancels against an inverse when it reaches one."""
    out: list[Letter] = []
    for g, e in word:
        i = len(out) - 1
        cancelled = False
        while i >= 0:
            h, f = out[i]
            if h == g:
                if f == -e:
                    del out[i]
                    cancelled = True
                break
            if not p.commute(g, h):
                break
            i -= 1
        if not cancelled:
            out.append((g, e))
    return out


def shortlex(p: RaagPresentation, reduced: Sequence[Letter]) -> Word:
    """Lexicographically least rearrangement of a reduced word.

    A letter may move to the front when every earlier letter commutes with it;
    greedily taking the least such letter yields the least linear extension.
    """
    rest = list(reduced)
    out = []
    while rest:
        best = None
        for idx, (g, e) in enumerate(rest):
            if all(p.commute(g, h) and h != g for h, _ in rest[:idx]):
                if best is None or letter_key((g, e)) < letter_key(rest[best]):
                    best = idx
        out.append(rest.pop(best))
    return tuple(out)


def right_multiply(p: RaagPresentation, nf: Word, letter: Letter) -> Word:
    """Normal form of nf·letter, given that nf is already a normal form.

    The new letter either cancels the inverse it can slide back to, or joins
    the word at the spot where the greedy least extension would emit it.
    """
    g, e = letter
    commute = p._commute[g]
    i = len(nf) - 1
    while i >= 0:
        h = nf[i][0]
        if h == g or not commute[h]:
            break
        i -= 1
    if i >= 0 and nf[i] == (g, -e):
        return nf[:i] + nf[i + 1:]
    key = letter_key(letter)
    j = i + 1
    while j < len(nf) and letter_key(nf[j]) < key:
        j += 1
    return nf[:j] + (letter,) + nf[j:]


def normal_form(p: RaagPresentation, word: Iterable[Letter] | str) -> "GroupElement":
    if isinstance(word, str):
        word = p.parse_word(word)
    nf: Word = ()
    for g, e in word:
        if not (0 <= g < p.rank) or e not in (1, -1):
            raise UnknownGenerator(f"letter {(g, e)} is not in the presentation")
        nf = right_multiply(p, nf, (g, e))
    return GroupElement(p, nf)


@dataclass(frozen=True, eq=False)
class GroupElement:
    presentation: RaagPresentation
    normal_form: Word

    @property
    def length(self) -> int:
        return len(self.normal_form)

    @property
    def word(self) -> Word:
        return self.normal_form

    def __eq__(self, other):
        return isinstance(other, GroupElement) and self.normal_form == other.normal_form \
            and self.presentation == other.presentation

    def __hash__(self):
        return hash(self.normal_form)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self.presentation, self, other)

    def inverse(self) -> "GroupElement":
        return normal_form(self.presentation, [(g, -e) for g, e in reversed(self.normal_form)])

    def __pow__(self, k: int) -> "GroupElement":
        base = self if k >= 0 else self.inverse()
        out = self.presentation.identity()
        for _ in range(abs(k)):
            out = out * base
        return out

    def is_identity(self) -> bool:
        return not self.normal_form

    def sort_key(self):
        return (self.length, tuple(letter_key(l) for l in self.normal_form))

    def render(self) -> str:
        return self.presentation.render(self.normal_form)

    __str__ = render

    def __repr__(self):
        return f"GroupElement({self.render()!r})"


def multiply(p: RaagPresentation, g: GroupElement, h: GroupElement) -> GroupElement:
    nf = g.normal_form
    for letter in h.normal_form:
        nf = right_multiply(p, nf, letter)
    return GroupElement(p, nf)


@dataclass
class BallComplex:
    """Ball of radius ``horizon`` about the identity in the Salvetti cover's 1-skeleton."""

    presentation: RaagPresentation
    window: MedianWindow
    elements: list[Word]
    index: dict[Word, int] = field(repr=False)

    @property
    def horizon(self) -> int:
        return self.window.horizon

    @property
    def guard(self) -> int:
        return self.window.guard

    def element_of(self, v: int) -> GroupElement:
        return GroupElement(self.presentation, self.elements[v])

    def vertex_of(self, g: GroupElement | str | Word) -> int:
        if isinstance(g, str):
            g = self.presentation.element(g)
        nf = g.normal_form if isinstance(g, GroupElement) else normal_form(self.presentation, g).normal_form
        try:
            return self.index[nf]
        except KeyError:
            raise HorizonExceeded(f"{self.presentation.render(nf)} lies outside the horizon",
                                  vertex=self.presentation.render(nf)) from None

    @property
    def vertex_labels(self) -> dict[int, str]:
        return dict(enumerate(self.window.labels))

    def translate(self, g: GroupElement, v: int) -> int | None:
        """Vertex labelled g·label(v), or None when it falls outside the window."""
        nf = normal_form(self.presentation, g.normal_form + self.elements[v]).normal_form
        return self.index.get(nf)

    def to_dict(self) -> dict:
        return {"presentation": self.presentation.to_dict(), "horizon": self.horizon,
                "window": self.window.to_dict()}


def build_window(p: RaagPresentation, horizon: int, cap: int | None = None,
                 guard: int | None = None) -> BallComplex:
    """All normal forms of length ≤ horizon with edges g to g·s for generators s."""
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    cap = vertex_cap(cap)
    letters = p.letters()
    elements: list[Word] = [()]
    index: dict[Word, int] = {(): 0}
    edges: list[tuple[int, int]] = []
    level = [()]
    for radius in range(1, horizon + 1):
        new: set[Word] = set()
        for w in level:
            for l in letters:
                nf = right_multiply(p, w, l)
                if len(nf) == radius:
                    new.add(nf)
        ordered = sorted(new, key=lambda w: tuple(letter_key(l) for l in w))
        if len(elements) + len(ordered) > cap:
            raise BudgetExceeded(
                f"ball of radius {horizon} exceeds the vertex cap {cap} at radius {radius}")
        for w in ordered:
            index[w] = len(elements)
            elements.append(w)
        level = ordered
    for v, w in enumerate(elements):
        for i in range(p.rank):
            u = index.get(right_multiply(p, w, (i, 1)))
            if u is not None:
                edges.append((v, u))
    labels = [p.render(w) for w in elements]
    window = MedianWindow(labels, edges, basepoint=0, horizon=horizon,
                          guard=horizon // 3 if guard is None else guard, is_window=True)
    return BallComplex(p, window, elements, index)


def act_vertex(b: BallComplex, g: GroupElement, v: int | str) -> int:
    """Vertex labelled g·label(v); both ends must lie within the guard."""
    v = b.window.vid(v)
    b.window.check_guard(v)
    image = normal_form(b.presentation, g.normal_form + b.elements[v])
    if image.length > b.guard:
        raise HorizonExceeded(f"{image.render()} lies outside the guard radius {b.guard}",
                              vertex=image.render())
    return b.index[image.normal_form]


def enumerate_elements(p: RaagPresentation, T: Sequence[GroupElement | str], m: int,
                       cap: int | None = None) -> list[GroupElement]:
    """Distinct products of at most m factors from T ∪ T⁻¹, sorted by (T-length, shortlex)."""
    if m < 1:
        raise ValueError("m must be at least 1")
    cap = vertex_cap(cap)
    gens = [p.element(t) for t in T]
    steps = []
    for t in gens:
        for s in (t, t.inverse()):
            if s not in steps:
                steps.append(s)
    seen: dict[Word, int] = {(): 0}
    frontier = [p.identity()]
    for depth in range(1, m + 1):
        nxt = []
        for g in frontier:
            for s in steps:
                h = g * s
                if h.normal_form not in seen:
                    seen[h.normal_form] = depth
                    nxt.append(h)
                    if len(seen) > cap:
                        raise BudgetExceeded(f"more than {cap} elements within T-length {depth}")
        frontier = nxt
    out = [GroupElement(p, w) for w in seen]
    out.sort(key=lambda g: (seen[g.normal_form], g.sort_key()))
    return out


def load_presentation(path: str) -> RaagPresentation:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", line=exc.lineno, column=exc.colno) from None
    return RaagPresentation.from_dict(doc)


# bundled presentations

def free_group(names: Sequence[str] = ("a", "b")) -> RaagPresentation:
    return RaagPresentation.make(names)


def free_abelian(names: Sequence[str] = ("x", "y")) -> RaagPresentation:
    return RaagPresentation.make(names, [(a, b) for i, a in enumerate(names) for b in names[i + 1:]])


def tree_of_flats() -> RaagPresentation:
    """⟨x, y, z | [x, y]⟩: a torus wedge a circle."""
    return RaagPresentation.make(("x", "y", "z"), [("x", "y")])


def f2_times_z() -> RaagPresentation:
    return RaagPresentation.make(("a", "b", "t"), [("a", "t"), ("b", "t")])
