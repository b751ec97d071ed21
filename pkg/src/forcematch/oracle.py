"""Brute-force ground truth for small instances.

Nothing here relies on deferred acceptance for its answers, except
``exhaust_w_profiles``, which needs the men-optimal matching of each profile
and computes it with its own one-proposal-at-a-time loop.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from functools import partial
from itertools import permutations, product
from math import perm
from typing import Callable, List, Optional, Sequence, Set

from . import engine
from .errors import OracleLimitError
from .model import ABSENT, Instance, Matching, Profile, _check_matching

DEFAULT_MATCHING_LIMIT = 10 ** 7
DEFAULT_PROFILE_LIMIT = 10 ** 8


def _stable_subtree(instance: Instance, first_choice, limit: int):
    """Stable matchings whose woman 0 takes ``first_choice`` (or all, if it is ...)."""
    nw, nm = instance.n_women, instance.n_men
    rw, rm = instance.rank_w, instance.rank_m
    prefs_w = instance.prefs_w
    w2m: List[Optional[int]] = [None] * nw
    m2w: List[Optional[int]] = [None] * nm
    found = []
    nodes = 0
    unmatched_rank = ABSENT + 1

    def ok_with_earlier(w, x):
        # pairs whose both members are already decided
        w_cur = rw[w][x] if x is not None else unmatched_rank
        for w2 in range(w):
            m2 = w2m[w2]
            if m2 is not None and rw[w][m2] < w_cur and rw[w][m2] != ABSENT and rm[m2][w] < rm[m2][w2]:
                return False
            if x is not None and rm[x][w2] < rm[x][w] and rm[x][w2] != ABSENT:
                cur2 = rw[w2][m2] if m2 is not None else unmatched_rank
                if rw[w2][x] < cur2 and rw[w2][x] != ABSENT:
                    return False
        return True

    def ok_with_unmatched_men():
        for w in range(nw):
            cur = rw[w][w2m[w]] if w2m[w] is not None else unmatched_rank
            for m in prefs_w[w]:
                if m2w[m] is None and rw[w][m] < cur and rm[m][w] != ABSENT:
                    return False
        return True

    def rec(w):
        nonlocal nodes
        nodes += 1
        if nodes > limit:
            raise OracleLimitError("stable-matching enumeration", f">{limit}", limit)
        if w == nw:
            if ok_with_unmatched_men():
                found.append(Matching.from_woman_map(w2m, nm))
            return
        if w == 0 and first_choice is not ...:
            options = [first_choice]
        else:
            options = [None] + [m for m in prefs_w[w] if m2w[m] is None and rm[m][w] != ABSENT]
        for x in options:
            if not ok_with_earlier(w, x):
                continue
            w2m[w] = x
            if x is not None:
                m2w[x] = w
            rec(w + 1)
            if x is not None:
                m2w[x] = None
            w2m[w] = None

    rec(0)
    return found, nodes


def _subtree_job(args):
    instance, choice, limit = args
    return _stable_subtree(instance, choice, limit)


def enumerate_stable(instance: Instance, limit: int = DEFAULT_MATCHING_LIMIT, jobs: int = 1) -> Set[Matching]:
    """Every stable matching, by exhaustive search over rational partial matchings.

    Candidates are built woman by woman; a branch is cut as soon as two
    already-decided participants form a blocking pair.  Raises
    ``OracleLimitError`` once more than ``limit`` search nodes are visited.
    """
    if instance.n_women == 0:
        return {Matching.empty(0, instance.n_men)}
    if jobs <= 1:
        found, _ = _stable_subtree(instance, ..., limit)
        return set(found)
    choices = [None] + [m for m in instance.prefs_w[0] if instance.rank_m[m][0] != ABSENT]
    out: Set[Matching] = set()
    total = 0
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for found, nodes in pool.map(_subtree_job, [(instance, c, limit) for c in choices]):
            out.update(found)
            total += nodes
    if total > limit:
        raise OracleLimitError("stable-matching enumeration", total, limit)
    return out


def is_unique_stable(instance: Instance, target: Matching, limit: int = DEFAULT_MATCHING_LIMIT,
                     jobs: int = 1) -> bool:
    """True iff ``target`` is the one and only stable matching.

    When both sides' proposing runs return ``target`` the answer is known
    without enumeration.
    """
    _check_matching(instance, target)
    men_opt, _ = engine.run(instance, engine.MEN)
    if men_opt == target and engine.run(instance, engine.WOMEN)[0] == target:
        return True
    return enumerate_stable(instance, limit, jobs) == {target}


# ---------------------------------------------------------------------------
# exhaustive search over women's profiles


def ordered_sublists(n: int) -> List[tuple]:
    """All preference lists over ``range(n)``: by length, then lexicographic."""
    return [p for k in range(n + 1) for p in permutations(range(n), k)]


def profile_space_size(n_women: int, n_men: int) -> int:
    return sum(perm(n_men, k) for k in range(n_men + 1)) ** n_women


def _some_blacklist_at_least(k, n_men, profile) -> bool:
    return any(n_men - len(lst) >= k for lst in profile)


def max_blacklist_at_least(k: int, n_men: int) -> Callable[[Profile], bool]:
    """Predicate: some woman blacklists at least ``k`` men (picklable, so usable with ``jobs``)."""
    return partial(_some_blacklist_at_least, k, n_men)


def _men_optimal(prefs_m, rank_rows, n_women) -> tuple:
    pointer = [0] * len(prefs_m)
    holder = [None] * n_women
    free = [m for m in range(len(prefs_m)) if prefs_m[m]]
    while free:
        m = free.pop()
        while True:
            w = prefs_m[m][pointer[m]]
            row = rank_rows[w]
            h = holder[w]
            if row[m] != ABSENT and (h is None or row[m] < row[h]):
                holder[w] = m
                m = h
                if m is None:
                    break
            pointer[m] += 1
            if pointer[m] == len(prefs_m[m]):
                break
    return tuple(holder)


def _rank_row(lst, n_men):
    row = [ABSENT] * n_men
    for i, m in enumerate(lst):
        row[m] = i
    return tuple(row)


def _exhaust_job(args):
    prefs_m, target_w2m, options, predicate = args
    n_women = len(target_w2m)
    n_men = len(prefs_m)
    rows = [[_rank_row(lst, n_men) for lst in opts] for opts in options]
    idx_opts = [range(len(opts)) for opts in options]
    for combo in product(*idx_opts):
        rank_rows = [rows[w][i] for w, i in enumerate(combo)]
        if _men_optimal(prefs_m, rank_rows, n_women) == target_w2m:
            profile = tuple(options[w][i] for w, i in enumerate(combo))
            if not predicate(profile):
                return profile
    return None


def exhaust_w_profiles(prefs_m: Sequence[Sequence[int]], target: Matching,
                       predicate: Callable[[Profile], bool],
                       limit: int = DEFAULT_PROFILE_LIMIT, jobs: int = 1) -> Optional[Profile]:
    """First women's profile (canonical order) whose men-optimal matching is
    ``target`` but which fails ``predicate``; None if there is none.

    Profiles are ordered with woman 0 varying slowest and each woman's lists
    ordered by ``ordered_sublists``.  A matched woman who does not list her
    target partner can never get him, so such lists are skipped.
    """
    n_women, n_men = target.n_women, target.n_men
    prefs_m = tuple(tuple(lst) for lst in prefs_m)
    if len(prefs_m) != n_men:
        raise ValueError("men's profile does not match the target's size")
    size = profile_space_size(n_women, n_men)
    if size > limit:
        raise OracleLimitError("women's profile space", size, limit)
    all_lists = ordered_sublists(n_men)
    options = []
    for w in range(n_women):
        m = target.w2m[w]
        options.append([lst for lst in all_lists if m is None or m in lst])
    if n_women == 0:
        return None
    if jobs <= 1:
        return _exhaust_job((prefs_m, target.w2m, options, predicate))
    # split on woman 0's list; results are scanned in canonical order
    jobs_args = [(prefs_m, target.w2m, [[lst]] + options[1:], predicate) for lst in options[0]]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for res in pool.map(_exhaust_job, jobs_args):
            if res is not None:
                return res
    return None
