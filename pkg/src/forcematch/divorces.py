"""Deferred acceptance with divorces between seasons.

Season 1 is a plain men-proposing run.  At the end of each season, every
woman whose strategy asks for a divorce from her current partner is a
candidate; the arbiter picks one, and the next season continues from the
final state with that woman turning her partner away on the first night.
The process ends after a season in which nobody asks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from . import engine
from .errors import ContractViolation, DivorceLoopError, DomainError
from .manipulation import _base_lists, _promote_second, _require_balanced_perfect
from .model import Instance, Matching, Profile


@dataclass(frozen=True)
class Never:
    def describe(self, w: int) -> Optional[str]:
        return None


@dataclass(frozen=True)
class DivorceIfIn:
    """Ask for a divorce whenever the current partner is in ``men``."""

    men: frozenset

    def describe(self, w: int) -> Optional[str]:
        return f"w {w} divorce-if-in: " + " ".join(str(m) for m in sorted(self.men))


@dataclass(frozen=True)
class Scripted:
    """Requests ``(season, man)``: from the end of ``season`` on, divorce ``man`` if he is the partner.

    Entries are taken in season order; an entry is used up once granted.
    """

    requests: Tuple[Tuple[int, int], ...]

    def describe(self, w: int) -> Optional[str]:
        return f"w {w} script: " + " ".join(f"{s}:{m}" for s, m in self.requests)


Strategy = Union[Never, DivorceIfIn, Scripted]
NEVER = Never()


@dataclass
class Season:
    divorcing_woman: Optional[int]
    divorced_man: Optional[int]
    trace: engine.RunTrace
    matching: Matching


@dataclass
class SeasonLog:
    seasons: List[Season] = field(default_factory=list)

    @property
    def n_divorces(self) -> int:
        return len(self.seasons) - 1

    def divorces(self) -> List[Tuple[int, int]]:
        return [(s.divorcing_woman, s.divorced_man) for s in self.seasons[1:]]

    def format(self) -> str:
        out = []
        for i, s in enumerate(self.seasons, start=1):
            head = f"season {i}"
            if s.divorcing_woman is not None:
                head += f": w{s.divorcing_woman} divorces m{s.divorced_man}"
            out.append(head)
            if s.trace.nights is not None:
                out.append(s.trace.format().rstrip("\n"))
            out.append("matching: " + " ".join(f"w{w}-m{m}" for w, m in s.matching.pairs()))
        return "\n".join(line for line in out if line) + "\n"


def lowest_requester(requesters: Sequence[int]) -> int:
    return min(requesters)


def _strategy(strategies, w) -> Strategy:
    if strategies is None:
        return NEVER
    if isinstance(strategies, Mapping):
        return strategies.get(w, NEVER)
    return strategies[w]


def simulate_with_divorces(instance: Instance, strategies=None,
                           arbiter: Callable[[Sequence[int]], int] = lowest_requester,
                           trace: bool = False) -> Tuple[Matching, SeasonLog]:
    """Run seasons until nobody asks for a divorce.

    ``strategies`` maps women to ``Never``/``DivorceIfIn``/``Scripted``
    (missing women never divorce).  Raises ``DivorceLoopError`` after more
    than ``n_men * n_women + 1`` divorces.
    """
    current, rt = engine.run(instance, trace=trace)
    log = SeasonLog([Season(None, None, rt, current)])
    used = {}
    guard = instance.n_men * instance.n_women + 1
    while True:
        season = len(log.seasons)
        requesters = []
        for w in range(instance.n_women):
            partner = current.w2m[w]
            if partner is None:
                continue
            st = _strategy(strategies, w)
            if isinstance(st, DivorceIfIn):
                if partner in st.men:
                    requesters.append(w)
            elif isinstance(st, Scripted):
                k = used.get(w, 0)
                if k < len(st.requests):
                    s, m = st.requests[k]
                    if s <= season and m == partner:
                        requesters.append(w)
        if not requesters:
            return current, log
        if log.n_divorces >= guard:
            raise DivorceLoopError(f"more than {guard} divorces; strategies do not settle")
        w = arbiter(requesters)
        if w not in requesters:
            raise ValueError(f"arbiter chose woman {w}, who did not ask")
        if isinstance(_strategy(strategies, w), Scripted):
            used[w] = used.get(w, 0) + 1
        m = current.w2m[w]
        current, rt = engine.run_from_state(instance, current, trace=trace, forced=[(w, m)])
        log.seasons.append(Season(w, m, rt, current))


def one_divorce_strategy(instance: Instance, mu: Matching) -> Tuple[Profile, Dict[int, Strategy]]:
    """Women's lists without blacklists, plus one scripted divorce per needed woman.

    Each step picks the pending woman whose divorce would set off the longest
    rejection chain (lowest id on ties); the chain is rerouted, when needed,
    by promoting one man on a single other woman's list.
    """
    _require_balanced_perfect(instance, mu)
    n = instance.n_women
    prefs_w = _base_lists(instance, mu)
    current, _ = engine.run(instance.with_women(prefs_w))
    for w in range(n):
        if current.w2m[w] != mu.w2m[w]:
            _promote_second(prefs_w[w], current.w2m[w])
    script: Dict[int, Strategy] = {}
    season = 1
    while current != mu:
        inst = instance.with_women(prefs_w)
        pending = [w for w in range(n) if current.w2m[w] != mu.w2m[w]]
        best, best_len, best_rt = None, -1, None
        for w in pending:
            _, rt = engine.run_from_state(inst, current, trace=True, forced=[(w, current.w2m[w])])
            if rt.n_rejections > best_len:
                best, best_len, best_rt = w, rt.n_rejections, rt
        w_tilde = best
        target = mu.w2m[w_tilde]
        w_hat = current.m2w[target]
        hat_rejections = [rej for night in best_rt.nights for rej in night.rejections
                          if rej.receiver == w_hat]
        if not any(rej.proposer == target for rej in hat_rejections):
            held = current.w2m[w_hat]
            losers = [rej.proposer for rej in hat_rejections if rej.favoured == held]
            if not losers:
                raise ContractViolation(f"woman {w_hat} rejects nobody in favour of her partner")
            _promote_second(prefs_w[w_hat], losers[0])
            inst = instance.with_women(prefs_w)
        script[w_tilde] = Scripted(((season, current.w2m[w_tilde]),))
        nxt, _ = engine.run_from_state(inst, current, forced=[(w_tilde, current.w2m[w_tilde])])
        if nxt.w2m[w_tilde] != target:
            raise ContractViolation(f"season opened by woman {w_tilde} does not end with her target")
        current = nxt
        season += 1
    return tuple(tuple(lst) for lst in prefs_w), script


def blacklist_to_divorce(profile_w: Sequence[Sequence[int]], n_men: int) -> Tuple[Profile, Dict[int, Strategy]]:
    """Move every blacklist to the list tail and divorce its members instead."""
    out, strategies = [], {}
    for w, lst in enumerate(profile_w):
        listed = set(lst)
        bl = [m for m in range(n_men) if m not in listed]
        out.append(tuple(lst) + tuple(bl))
        strategies[w] = DivorceIfIn(frozenset(bl)) if bl else NEVER
    return tuple(out), strategies


def divorce_to_blacklist(instance: Instance, profile_w: Sequence[Sequence[int]], strategies,
                         arbiter: Callable[[Sequence[int]], int] = lowest_requester) -> Profile:
    """Replace each divorcing woman's strategy by a blacklist with the same outcome.

    Women are converted one at a time in the order of their first divorce,
    re-simulating after each.  A woman's blacklist is the set of men she
    divorces, closed under "rejected by her in favour of a member".  Her
    divorce seasons disappear, so later scripted requests move up.
    """
    prefs = [tuple(lst) for lst in profile_w]
    strat = {w: _strategy(strategies, w) for w in range(instance.n_women)}
    while True:
        _, log = simulate_with_divorces(instance.with_women(prefs), strat, arbiter, trace=True)
        if not log.divorces():
            break
        w = log.divorces()[0][0]
        if len(prefs[w]) != instance.n_men:
            raise DomainError(f"woman {w} divorces and also has a nonempty blacklist")
        blocked = {m for who, m in log.divorces() if who == w}
        mine = [rej for s in log.seasons for night in s.trace.nights for rej in night.rejections
                if rej.receiver == w and rej.favoured is not None]
        grew = True
        while grew:
            grew = False
            for rej in mine:
                if rej.favoured in blocked and rej.proposer not in blocked:
                    blocked.add(rej.proposer)
                    grew = True
        prefs[w] = tuple(m for m in prefs[w] if m not in blocked)
        strat[w] = NEVER
        gone = [k for k, s in enumerate(log.seasons[1:], start=1) if s.divorcing_woman == w]
        for v, st in strat.items():
            if isinstance(st, Scripted):
                strat[v] = Scripted(tuple((max(1, s - sum(1 for k in gone if k < s)), m)
                                          for s, m in st.requests))
    return tuple(prefs)


# ---------------------------------------------------------------------------
# strategy files


def parse_strategies(text: str, n_women: int, n_men: int) -> Dict[int, Strategy]:
    """Parse ``w <i> divorce-if-in: <m-ids>`` / ``w <i> script: <season>:<m-id> ...`` lines."""
    from .model import MalformedInputError, _content_lines, _parse_int

    out: Dict[int, Strategy] = {}
    for lineno, line in _content_lines(text):
        head, sep, tail = line.partition(":")
        parts = head.split()
        if not sep or len(parts) != 3 or parts[0] != "w":
            raise MalformedInputError("expected 'w <i> divorce-if-in:' or 'w <i> script:'", lineno)
        w = _parse_int(parts[1], lineno)
        if not 0 <= w < n_women:
            raise MalformedInputError(f"woman id {w} out of range [0, {n_women})", lineno)
        if w in out:
            raise MalformedInputError(f"second strategy for woman {w}", lineno)
        kind = parts[2]
        if kind == "divorce-if-in":
            men = [_parse_int(t, lineno) for t in tail.split()]
            for m in men:
                if not 0 <= m < n_men:
                    raise MalformedInputError(f"man id {m} out of range [0, {n_men})", lineno)
            out[w] = DivorceIfIn(frozenset(men)) if men else NEVER
        elif kind == "script":
            reqs = []
            for tok in tail.split():
                s, colon, m = tok.partition(":")
                if not colon:
                    raise MalformedInputError(f"expected '<season>:<m-id>', got {tok!r}", lineno)
                s, m = _parse_int(s, lineno), _parse_int(m, lineno)
                if s < 1:
                    raise MalformedInputError(f"season must be at least 1, got {s}", lineno)
                if not 0 <= m < n_men:
                    raise MalformedInputError(f"man id {m} out of range [0, {n_men})", lineno)
                reqs.append((s, m))
            out[w] = Scripted(tuple(sorted(reqs))) if reqs else NEVER
        else:
            raise MalformedInputError(f"unknown strategy {kind!r}", lineno)
    return out


def format_strategies(strategies: Mapping[int, Strategy]) -> str:
    lines = [st.describe(w) for w, st in sorted(strategies.items())]
    return "".join(line + "\n" for line in lines if line)
