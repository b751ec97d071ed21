"""Participants, preference lists, matchings and the text formats for them.

Women and men are dense integer ids, ``0 .. n_women-1`` and ``0 .. n_men-1``.
A preference list is a tuple of ids of the opposite side, most preferred
first.  Anyone missing from the list is blacklisted: being unmatched beats
being matched to them.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NewType, Optional, Sequence, Tuple

from .errors import MalformedInputError

WomanId = NewType("WomanId", int)
ManId = NewType("ManId", int)

PreferenceList = Tuple[int, ...]
Profile = Tuple[PreferenceList, ...]

#: rank assigned to blacklisted partners in rank tables
ABSENT = 1 << 62

WOMEN = "women"
MEN = "men"


def _check_list(ranking: Sequence[int], n_other: int, who: str) -> PreferenceList:
    ranking = tuple(int(x) for x in ranking)
    seen = set()
    for x in ranking:
        if not 0 <= x < n_other:
            raise MalformedInputError(f"{who}: id {x} out of range [0, {n_other})")
        if x in seen:
            raise MalformedInputError(f"{who}: duplicate id {x}")
        seen.add(x)
    return ranking


def as_profile(lists: Iterable[Sequence[int]], n_other: int, side: str = "W") -> Profile:
    """Validate and freeze a profile of preference lists."""
    return tuple(_check_list(lst, n_other, f"{side} {i}") for i, lst in enumerate(lists))


def blacklist(ranking: Sequence[int], n_other: int) -> frozenset:
    """The complement of ``ranking`` in the opposite side."""
    listed = set(ranking)
    return frozenset(x for x in range(n_other) if x not in listed)


def prefers(ranking: Sequence[int], a: Optional[int], b: Optional[int]) -> bool:
    """True iff ``a`` is listed and ranked strictly above ``b``.

    ``b`` may be ``None`` or absent from the list, standing for "unmatched";
    any listed partner beats that.  A blacklisted ``a`` is never preferred.
    """
    if a is None or a not in ranking:
        return False
    if b is None or b not in ranking:
        return True
    return ranking.index(a) < ranking.index(b)


def rank_table(profile: Profile, n_other: int) -> Tuple[Tuple[int, ...], ...]:
    table = []
    for ranking in profile:
        row = [ABSENT] * n_other
        for pos, x in enumerate(ranking):
            row[x] = pos
        table.append(tuple(row))
    return tuple(table)


@dataclass(frozen=True)
class Instance:
    n_women: int
    n_men: int
    prefs_w: Profile
    prefs_m: Profile

    def __post_init__(self):
        if self.n_women < 0 or self.n_men < 0:
            raise MalformedInputError("side sizes must be nonnegative")
        if len(self.prefs_w) != self.n_women:
            raise MalformedInputError(
                f"expected {self.n_women} women's lists, got {len(self.prefs_w)}")
        if len(self.prefs_m) != self.n_men:
            raise MalformedInputError(
                f"expected {self.n_men} men's lists, got {len(self.prefs_m)}")
        object.__setattr__(self, "prefs_w", as_profile(self.prefs_w, self.n_men, "W"))
        object.__setattr__(self, "prefs_m", as_profile(self.prefs_m, self.n_women, "M"))

    @cached_property
    def rank_w(self):
        """``rank_w[w][m]``: position of m in w's list, ``ABSENT`` if blacklisted."""
        return rank_table(self.prefs_w, self.n_men)

    @cached_property
    def rank_m(self):
        return rank_table(self.prefs_m, self.n_women)

    def with_women(self, prefs_w: Iterable[Sequence[int]]) -> "Instance":
        return Instance(self.n_women, self.n_men, tuple(prefs_w), self.prefs_m)

    def transposed(self) -> "Instance":
        """Swap the roles of the two sides."""
        return Instance(self.n_men, self.n_women, self.prefs_m, self.prefs_w)

    def blacklist_w(self, w: int) -> frozenset:
        return blacklist(self.prefs_w[w], self.n_men)

    def blacklist_m(self, m: int) -> frozenset:
        return blacklist(self.prefs_m[m], self.n_women)


@dataclass(frozen=True)
class Matching:
    """A partial one-to-one pairing; ``w2m`` and ``m2w`` are mutual inverses."""

    w2m: Tuple[Optional[int], ...]
    m2w: Tuple[Optional[int], ...]

    def __post_init__(self):
        for w, m in enumerate(self.w2m):
            if m is not None and (not 0 <= m < len(self.m2w) or self.m2w[m] != w):
                raise MalformedInputError(f"matching maps are not inverse at woman {w}")
        for m, w in enumerate(self.m2w):
            if w is not None and (not 0 <= w < len(self.w2m) or self.w2m[w] != m):
                raise MalformedInputError(f"matching maps are not inverse at man {m}")

    @classmethod
    def from_pairs(cls, n_women: int, n_men: int, pairs: Iterable[Tuple[int, int]]) -> "Matching":
        w2m = [None] * n_women
        m2w = [None] * n_men
        for w, m in pairs:
            if not 0 <= w < n_women:
                raise MalformedInputError(f"woman id {w} out of range [0, {n_women})")
            if not 0 <= m < n_men:
                raise MalformedInputError(f"man id {m} out of range [0, {n_men})")
            if w2m[w] is not None:
                raise MalformedInputError(f"woman {w} matched twice")
            if m2w[m] is not None:
                raise MalformedInputError(f"man {m} matched twice")
            w2m[w] = m
            m2w[m] = w
        return cls(tuple(w2m), tuple(m2w))

    @classmethod
    def from_woman_map(cls, w2m: Sequence[Optional[int]], n_men: int) -> "Matching":
        return cls.from_pairs(len(w2m), n_men, ((w, m) for w, m in enumerate(w2m) if m is not None))

    @classmethod
    def empty(cls, n_women: int, n_men: int) -> "Matching":
        return cls((None,) * n_women, (None,) * n_men)

    @property
    def n_women(self) -> int:
        return len(self.w2m)

    @property
    def n_men(self) -> int:
        return len(self.m2w)

    def pairs(self):
        return [(w, m) for w, m in enumerate(self.w2m) if m is not None]

    @property
    def matched_women(self) -> frozenset:
        return frozenset(w for w, m in enumerate(self.w2m) if m is not None)

    @property
    def matched_men(self) -> frozenset:
        return frozenset(m for m, w in enumerate(self.m2w) if w is not None)

    @property
    def size(self) -> int:
        return sum(m is not None for m in self.w2m)

    def is_perfect(self) -> bool:
        return all(m is not None for m in self.w2m) and all(w is not None for w in self.m2w)

    def transposed(self) -> "Matching":
        return Matching(self.m2w, self.w2m)


def is_rational(instance: Instance, matching: Matching, side: str) -> bool:
    """True iff no matched participant of ``side`` is paired with someone they blacklist."""
    _check_matching(instance, matching)
    if side in (WOMEN, "W", "w"):
        rank = instance.rank_w
        return all(rank[w][m] != ABSENT for w, m in matching.pairs())
    if side in (MEN, "M", "m"):
        rank = instance.rank_m
        return all(rank[m][w] != ABSENT for w, m in matching.pairs())
    raise ValueError(f"unknown side {side!r}")


def _check_matching(instance: Instance, matching: Matching) -> None:
    if matching.n_women != instance.n_women or matching.n_men != instance.n_men:
        raise MalformedInputError(
            f"matching is over {matching.n_women}x{matching.n_men}, "
            f"instance over {instance.n_women}x{instance.n_men}")


# ---------------------------------------------------------------------------
# text formats


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise MalformedInputError(f"expected an integer, got {token!r}", lineno) from None


def parse_instance(text: str) -> Instance:
    lines = list(_content_lines(text))
    if not lines:
        raise MalformedInputError("empty instance")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 2:
        raise MalformedInputError("header must be '<n_women> <n_men>'", lineno)
    n_women, n_men = (_parse_int(p, lineno) for p in parts)
    if n_women < 0 or n_men < 0:
        raise MalformedInputError("side sizes must be nonnegative", lineno)
    body = lines[1:]
    if len(body) != n_women + n_men:
        raise MalformedInputError(
            f"expected {n_women + n_men} preference lines, got {len(body)}",
            body[-1][0] if body else lineno)
    prefs = {"W": [None] * n_women, "M": [None] * n_men}
    for idx, (lineno, line) in enumerate(body):
        expected_side = "W" if idx < n_women else "M"
        expected_id = idx if idx < n_women else idx - n_women
        head, sep, tail = line.partition(":")
        if not sep:
            raise MalformedInputError("missing ':'", lineno)
        head_parts = head.split()
        if len(head_parts) != 2 or head_parts[0] != expected_side:
            raise MalformedInputError(f"expected '{expected_side} {expected_id}:'", lineno)
        pid = _parse_int(head_parts[1], lineno)
        if pid != expected_id:
            raise MalformedInputError(f"expected '{expected_side} {expected_id}:', got id {pid}", lineno)
        n_other = n_men if expected_side == "W" else n_women
        ids = [_parse_int(t, lineno) for t in tail.split()]
        try:
            prefs[expected_side][pid] = _check_list(ids, n_other, f"{expected_side} {pid}")
        except MalformedInputError as exc:
            raise MalformedInputError(str(exc), lineno) from None
    return Instance(n_women, n_men, tuple(prefs["W"]), tuple(prefs["M"]))


def format_profile(profile: Profile, side: str = "W") -> str:
    out = []
    for i, ranking in enumerate(profile):
        tail = " ".join(str(x) for x in ranking)
        out.append(f"{side} {i}: {tail}".rstrip())
    return "\n".join(out) + ("\n" if out else "")


def format_instance(instance: Instance) -> str:
    return (f"{instance.n_women} {instance.n_men}\n"
            + format_profile(instance.prefs_w, "W")
            + format_profile(instance.prefs_m, "M"))


def parse_matching(text: str, n_women: int, n_men: int) -> Matching:
    pairs = []
    seen_w, seen_m = set(), set()
    for lineno, line in _content_lines(text):
        parts = line.split()
        if len(parts) != 2:
            raise MalformedInputError("expected '<w-id> <m-id>'", lineno)
        w, m = _parse_int(parts[0], lineno), _parse_int(parts[1], lineno)
        if not 0 <= w < n_women:
            raise MalformedInputError(f"woman id {w} out of range [0, {n_women})", lineno)
        if not 0 <= m < n_men:
            raise MalformedInputError(f"man id {m} out of range [0, {n_men})", lineno)
        if w in seen_w or m in seen_m:
            raise MalformedInputError(f"duplicate participant in pair {w} {m}", lineno)
        seen_w.add(w)
        seen_m.add(m)
        pairs.append((w, m))
    return Matching.from_pairs(n_women, n_men, pairs)


def format_matching(matching: Matching) -> str:
    return "".join(f"{w} {m}\n" for w, m in matching.pairs())
