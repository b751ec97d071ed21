"""Deferred acceptance with synchronous nights, plus stability checks.

On each night every proposer who is not provisionally held serenades the
next receiver on his list; proposers already held keep serenading where they
are.  A receiver rejects everyone but her favourite serenader, and rejects
everybody if all of them are on her blacklist.  The run stops on the first
night without a rejection.

Runs are described in proposer/receiver terms.  With the default
``proposing_side="men"`` proposers are men and receivers women.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

from .errors import MalformedStateError
from .model import ABSENT, MEN, WOMEN, Instance, Matching, _check_matching


class Rejection(NamedTuple):
    receiver: int
    proposer: int
    #: the serenader kept instead; None for blacklist- or divorce-induced rejections
    favoured: Optional[int]


@dataclass
class NightRecord:
    #: (proposer, receiver) for every proposer serenading a new window tonight
    serenades: List[Tuple[int, int]] = field(default_factory=list)
    rejections: List[Rejection] = field(default_factory=list)


@dataclass
class RunTrace:
    """Night-by-night log of a run.

    ``nights`` is None when the caller did not ask for trace retention; the
    counters are always filled in.
    """

    nights: Optional[List[NightRecord]]
    final: Optional[Matching] = None
    n_nights: int = 0
    proposals: int = 0
    n_rejections: int = 0

    def last_new_serenade(self, n_receivers: int) -> List[int]:
        """Per receiver, the last night anyone newly serenaded her (0 if never)."""
        last = [0] * n_receivers
        for t, night in enumerate(self._nights(), start=1):
            for _, r in night.serenades:
                last[r] = t
        return last

    def rejectors(self) -> set:
        return {rej.receiver for night in self._nights() for rej in night.rejections}

    def rejections_by(self, receiver: int) -> List[Tuple[int, Rejection]]:
        return [(t, rej) for t, night in enumerate(self._nights(), start=1)
                for rej in night.rejections if rej.receiver == receiver]

    def format(self, proposer_tag: str = "m", receiver_tag: str = "w") -> str:
        lines = []
        for t, night in enumerate(self._nights(), start=1):
            parts = [f"{proposer_tag}{p} -> {receiver_tag}{r}" for p, r in night.serenades]
            parts += [f"reject {receiver_tag}{rej.receiver} x {proposer_tag}{rej.proposer}"
                      for rej in night.rejections]
            lines.append(f"night {t}: " + "; ".join(parts))
        return "\n".join(lines) + ("\n" if lines else "")

    def _nights(self) -> List[NightRecord]:
        if self.nights is None:
            raise ValueError("trace was not retained for this run")
        return self.nights


@dataclass
class ProposalState:
    """Mutable state of a run: each proposer's position and each receiver's holder.

    ``pointer[p]`` indexes the receiver p currently serenades (or would
    serenade next); it only moves forward.  ``pointer[p] == len(list)`` means
    p has been rejected by everyone he accepts.
    """

    pointer: List[int]
    holder: List[Optional[int]]

    def copy(self) -> "ProposalState":
        return ProposalState(list(self.pointer), list(self.holder))


def _sides(instance: Instance, proposing_side: str):
    if proposing_side in (MEN, "M", "m"):
        return instance.prefs_m, instance.rank_w, instance.n_women
    if proposing_side in (WOMEN, "W", "w"):
        return instance.prefs_w, instance.rank_m, instance.n_men
    raise ValueError(f"unknown proposing side {proposing_side!r}")


def _to_matching(instance: Instance, holder: Sequence[Optional[int]], proposing_side: str) -> Matching:
    if proposing_side in (MEN, "M", "m"):
        return Matching.from_woman_map(holder, instance.n_men)
    return Matching.from_woman_map(holder, instance.n_women).transposed()


def deferred_acceptance(prefs, rank, state: ProposalState, movers, *, recheck=(), forced=(),
                        trace: bool = False) -> RunTrace:
    """Run nights on ``state`` in place until convergence.

    ``movers`` serenade at their pointer on the first night; receivers in
    ``recheck`` re-evaluate their current holder on the first night; each
    ``(receiver, proposer)`` in ``forced`` is a rejection of the current
    holder that takes place on the first night regardless of preferences.
    """
    pointer, holder = state.pointer, state.holder
    out = RunTrace(nights=[] if trace else None)
    movers = sorted(p for p in movers if pointer[p] < len(prefs[p]))
    recheck = set(recheck)
    first = True
    while True:
        out.n_nights += 1
        night = NightRecord() if trace else None
        arrivals = {}
        for p in movers:
            r = prefs[p][pointer[p]]
            arrivals.setdefault(r, []).append(p)
            if trace:
                night.serenades.append((p, r))
        out.proposals += len(movers)
        rejected = []
        if first:
            for r, p in forced:
                if holder[r] != p:
                    raise MalformedStateError(f"receiver {r} does not hold {p}")
                holder[r] = None
                rejected.append(p)
                if trace:
                    night.rejections.append(Rejection(r, p, None))
            to_eval = sorted(set(arrivals) | recheck)
        else:
            to_eval = sorted(arrivals)
        for r in to_eval:
            cands = arrivals.get(r, [])
            if holder[r] is not None:
                cands = cands + [holder[r]]
            row = rank[r]
            best = None
            for c in cands:
                if row[c] != ABSENT and (best is None or row[c] < row[best]):
                    best = c
            holder[r] = best
            for c in cands:
                if c != best:
                    rejected.append(c)
                    if trace:
                        night.rejections.append(Rejection(r, c, best))
        if trace:
            out.nights.append(night)
        out.n_rejections += len(rejected)
        first = False
        if not rejected:
            return out
        movers = []
        for p in sorted(rejected):
            pointer[p] += 1
            if pointer[p] < len(prefs[p]):
                movers.append(p)


def run(instance: Instance, proposing_side: str = MEN, trace: bool = False):
    """Deferred acceptance from scratch; returns ``(matching, trace)``.

    The result is the proposing side's optimal stable matching.
    """
    prefs, rank, n_recv = _sides(instance, proposing_side)
    state = ProposalState([0] * len(prefs), [None] * n_recv)
    rt = deferred_acceptance(prefs, rank, state, range(len(prefs)), trace=trace)
    rt.final = _to_matching(instance, state.holder, proposing_side)
    return rt.final, rt


def state_from_matching(instance: Instance, initial: Matching) -> ProposalState:
    """Men-proposing state with each matched man standing at his partner.

    Unmatched men start from the top of their lists.
    """
    _check_matching(instance, initial)
    pointer = []
    for m, w in enumerate(initial.m2w):
        if w is None:
            pointer.append(0)
            continue
        try:
            pointer.append(instance.prefs_m[m].index(w))
        except ValueError:
            raise MalformedStateError(f"man {m} is placed with woman {w}, who is not on his list") from None
    return ProposalState(pointer, list(initial.w2m))


def run_from_state(instance: Instance, initial: Matching, trace: bool = False, forced=()):
    """Continue men-proposing deferred acceptance from a provisional matching.

    On the first night every man serenades: matched men at their partner's
    window, unmatched men at their top choice.  A woman holding a man she
    blacklists rejects him then.  ``forced`` lists ``(woman, man)`` pairs of
    ``initial`` that are dissolved on the first night.
    """
    state = state_from_matching(instance, initial)
    unmatched = [m for m, w in enumerate(initial.m2w) if w is None]
    rt = deferred_acceptance(instance.prefs_m, instance.rank_w, state, unmatched,
                             recheck=initial.matched_women, forced=forced, trace=trace)
    rt.final = Matching.from_woman_map(state.holder, instance.n_men)
    return rt.final, rt


# ---------------------------------------------------------------------------
# one proposal at a time


OrderPolicy = Callable[[List[int]], int]


def lowest_first(free: List[int]) -> int:
    return free[0]


def highest_first(free: List[int]) -> int:
    return free[-1]


def random_policy(seed) -> OrderPolicy:
    rng = random.Random(seed)
    return lambda free: rng.choice(free)


def run_sequential(instance: Instance, proposing_side: str = MEN,
                   order_policy: Optional[OrderPolicy] = None) -> Matching:
    """Deferred acceptance with one proposal at a time.

    ``order_policy`` receives the sorted list of free proposers with
    receivers left to try and returns the one who proposes next.
    """
    order_policy = order_policy or lowest_first
    prefs, rank, n_recv = _sides(instance, proposing_side)
    pointer = [0] * len(prefs)
    holder: List[Optional[int]] = [None] * n_recv
    free = {p for p in range(len(prefs)) if prefs[p]}

    def reject(p):
        pointer[p] += 1
        if pointer[p] < len(prefs[p]):
            free.add(p)

    while free:
        p = order_policy(sorted(free))
        if p not in free:
            raise ValueError(f"order policy picked {p}, who is not free")
        free.discard(p)
        r = prefs[p][pointer[p]]
        row = rank[r]
        h = holder[r]
        if row[p] == ABSENT:
            reject(p)
        elif h is None:
            holder[r] = p
        elif row[p] < row[h]:
            holder[r] = p
            reject(h)
        else:
            reject(p)
    return _to_matching(instance, holder, proposing_side)


# ---------------------------------------------------------------------------
# stability


def rationality_violations(instance: Instance, matching: Matching) -> List[Tuple[int, int]]:
    """Matched pairs in which at least one side blacklists the other."""
    _check_matching(instance, matching)
    rw, rm = instance.rank_w, instance.rank_m
    return [(w, m) for w, m in matching.pairs() if rw[w][m] == ABSENT or rm[m][w] == ABSENT]


def find_blocking_pairs(instance: Instance, matching: Matching) -> List[Tuple[int, int]]:
    """All (w, m), mutually acceptable, each unmatched or preferring the other."""
    _check_matching(instance, matching)
    rw, rm = instance.rank_w, instance.rank_m
    out = []
    for w in range(instance.n_women):
        pw = matching.w2m[w]
        w_cur = rw[w][pw] if pw is not None else ABSENT + 1
        for m in instance.prefs_w[w]:
            if m == pw or rw[w][m] >= w_cur or rm[m][w] == ABSENT:
                continue
            pm = matching.m2w[m]
            m_cur = rm[m][pm] if pm is not None else ABSENT + 1
            if rm[m][w] < m_cur:
                out.append((w, m))
    return sorted(out)


def is_stable(instance: Instance, matching: Matching) -> bool:
    return not rationality_violations(instance, matching) and not find_blocking_pairs(instance, matching)
