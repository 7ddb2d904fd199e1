"""Probabilistic survival/birth rulesets and their B/S text notation.

A ruleset holds two tables indexed by the exact number of living Moore
neighbours (0..8): ``survive[n]`` is the probability that a living cell stays
alive, ``birth[n]`` the probability that a dead cell comes alive.

Text notation extends the usual Life rulestring with an optional
``:probability`` suffix per count::

    B3/S23                  classic Life
    B3:0.8/S2:0.9,3:0.9     the standard probabilistic ruleset
    B0:0.8/S                strobing: empty cells repopulate

Unlisted counts have probability 0; a count without a suffix has
probability 1.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

NUM_COUNTS = 9

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


class RulesetError(ValueError):
    """Raised when a ruleset string or table is invalid."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


def _check_table(name: str, table: Sequence[float]) -> tuple[float, ...]:
    values = tuple(float(p) for p in table)
    if len(values) != NUM_COUNTS:
        raise RulesetError(f"{name} table needs {NUM_COUNTS} entries, got {len(values)}")
    for n, p in enumerate(values):
        if not (0.0 <= p <= 1.0):
            raise RulesetError(f"{name}[{n}] = {p!r} is not a probability")
    return values


@dataclass(frozen=True)
class Ruleset:
    """Survival and birth probability tables, indexed by living-neighbour count."""

    survive: tuple[float, ...]
    birth: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "survive", _check_table("survive", self.survive))
        object.__setattr__(self, "birth", _check_table("birth", self.birth))

    @classmethod
    def from_dicts(cls, birth: dict[int, float] | None = None,
                   survive: dict[int, float] | None = None) -> "Ruleset":
        b = [0.0] * NUM_COUNTS
        s = [0.0] * NUM_COUNTS
        for n, p in (birth or {}).items():
            b[n] = p
        for n, p in (survive or {}).items():
            s[n] = p
        return cls(survive=tuple(s), birth=tuple(b))

    def __str__(self) -> str:
        return format_ruleset(self)


def classic_life() -> Ruleset:
    """Conway's rules: born on 3, survives on 2 or 3, all with certainty."""
    return Ruleset.from_dicts(birth={3: 1.0}, survive={2: 1.0, 3: 1.0})


def standard_ruleset() -> Ruleset:
    """Classic Life with 90% survival and 80% birth probabilities."""
    return Ruleset.from_dicts(birth={3: 0.8}, survive={2: 0.9, 3: 0.9})


def is_strobing(r: Ruleset) -> bool:
    """True when dead cells with no living neighbours can be born."""
    return r.birth[0] > 0


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self) -> str:
        ch = self.peek()
        self.pos += 1
        return ch


def _parse_part(sc: _Scanner) -> tuple[str, dict[int, float]]:
    start = sc.pos
    kind = sc.take()
    if kind not in ("B", "S"):
        raise RulesetError("expected 'B' or 'S'", start if kind else len(sc.text))
    table: dict[int, float] = {}

    def add(n: int, p: float, at: int):
        if n in table:
            raise RulesetError(f"duplicate neighbour count {n} in {kind} part", at)
        table[n] = p

    if sc.peek() in ("", "/"):
        return kind, table
    while True:
        at = sc.pos
        ch = sc.take()
        if not ch.isdigit():
            raise RulesetError(f"expected a neighbour count, got {ch!r}" if ch
                               else "expected a neighbour count", at)
        if ch == "9":
            raise RulesetError("neighbour count 9 is out of range 0..8", at)
        if sc.peek() == ":":
            sc.take()
            sc.skip_ws()
            num_at = sc.pos
            m = _NUMBER.match(sc.text, sc.pos)
            if m is None:
                raise RulesetError("malformed probability", num_at)
            sc.pos = m.end()
            p = float(m.group())
            if not (0.0 <= p <= 1.0):
                raise RulesetError(f"probability {m.group()} outside [0, 1]", num_at)
            add(int(ch), p, at)
        else:
            add(int(ch), 1.0, at)
            # classic run of bare digits, e.g. "S23"
            while sc.peek().isdigit():
                at = sc.pos
                d = sc.take()
                if d == "9":
                    raise RulesetError("neighbour count 9 is out of range 0..8", at)
                if sc.peek() == ":":
                    raise RulesetError("probability suffix inside a digit run", sc.pos)
                add(int(d), 1.0, at)
        nxt = sc.peek()
        if nxt == ",":
            sc.take()
            continue
        if nxt in ("", "/"):
            return kind, table
        raise RulesetError(f"unexpected {nxt!r}", sc.pos)


def parse_ruleset(text: str) -> Ruleset:
    """Parse extended B/S notation into a :class:`Ruleset`.

    Either part order is accepted (``S23/B3`` == ``B3/S23``). Errors carry
    the offending character position.
    """
    if "\n" in text.strip():
        raise RulesetError("ruleset must be a single line", text.index("\n"))
    sc = _Scanner(text)
    parts: dict[str, dict[int, float]] = {}
    for i in range(2):
        at = sc.pos
        kind, table = _parse_part(sc)
        if kind in parts:
            raise RulesetError(f"second {kind} part", at)
        parts[kind] = table
        if i == 0:
            if sc.peek() != "/":
                raise RulesetError("missing '/' and second part", sc.pos)
            sc.take()
    if sc.peek():
        raise RulesetError("trailing characters", sc.pos)
    return Ruleset.from_dicts(birth=parts["B"], survive=parts["S"])


def _format_part(kind: str, table: Sequence[float]) -> str:
    entries = []
    for n, p in enumerate(table):
        if p == 0.0:
            continue
        entries.append(str(n) if p == 1.0 else f"{n}:{p!r}")
    return kind + ",".join(entries)


def format_ruleset(r: Ruleset) -> str:
    """Canonical notation: B part first, counts ascending, shortest round-trip decimals."""
    return f"{_format_part('B', r.birth)}/{_format_part('S', r.survive)}"


def random_ruleset(rng, density: float = 0.5) -> Ruleset:
    """Draw a ruleset whose entries are 0 with probability ``1 - density`` and
    otherwise uniform in [0, 1]. ``rng`` is a :class:`numpy.random.Generator`."""
    def table():
        vals = rng.random(NUM_COUNTS)
        mask = rng.random(NUM_COUNTS) < density
        return tuple(float(v) if m else 0.0 for v, m in zip(vals, mask))
    return Ruleset(survive=table(), birth=table())


__all__ = [
    "NUM_COUNTS", "Ruleset", "RulesetError", "classic_life", "standard_ruleset",
    "is_strobing", "parse_ruleset", "format_ruleset", "random_ruleset",
]
