"""Synthesize women's preference lists that force a target matching.

Given the men's lists and a target matching ``mu``, the routines here build a
profile for the women under which ``mu`` is the unique stable matching while
keeping blacklists small and pairwise disjoint.

The construction walks from the men-optimal matching of a harmless starting
profile towards ``mu``, fixing at least one cycle of the permutation
``mu . mu'^-1`` per step.  A step either lets one woman blacklist the men who
would reach her before ``mu(w)`` (``compute_build_cor``), or, when that woman
already rejects men in the current run, promotes one of them instead and
adjusts the lists of women the newly fixed men pass on their way down.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from . import engine
from .errors import ContractViolation, DomainError, WrongEntryPointError
from .model import ABSENT, Instance, Matching, Profile, _check_matching, is_rational


@dataclass(frozen=True)
class Cycle:
    """``w_0 -m_0-> w_1 -m_1-> ... -> w_0`` with ``m_i = mu'(w_i)`` and ``w_{i+1} = mu(m_i)``."""

    women: Tuple[int, ...]
    men: Tuple[int, ...]

    def __len__(self):
        return len(self.women)

    @property
    def is_trivial(self) -> bool:
        return len(self.women) == 1

    def __str__(self):
        if self.is_trivial:
            return f"(w{self.women[0]})"
        parts = [f"w{self.women[0]}"]
        for i, m in enumerate(self.men):
            parts.append(f"-m{m}-> w{self.women[(i + 1) % len(self.women)]}")
        return "(" + " ".join(parts) + ")"


@dataclass
class ManipulationResult:
    prefs_w: Profile
    n_b: int
    combined_size: int
    disjoint: bool
    mode: str
    #: counts of induction steps, keyed "cheap" and "expensive"
    iterations: Dict[str, int] = field(default_factory=lambda: {"cheap": 0, "expensive": 0})
    #: men's moves simulated while building the profile (see ``manipulate_flat``)
    proposals: int = 0
    #: women whose blacklists the statistics cover
    relevant_women: Tuple[int, ...] = ()
    n_h: int = 0
    #: per step, the last-new-serenade night of the chosen woman (general case only)
    chosen_nights: List[int] = field(default_factory=list)

    def blacklists(self, n_men: int) -> List[frozenset]:
        return [frozenset(set(range(n_men)) - set(self.prefs_w[w])) for w in self.relevant_women]

    def footer(self) -> str:
        return (f"# n_b={self.n_b} combined={self.combined_size} "
                f"disjoint={'true' if self.disjoint else 'false'} mode={self.mode}")


def blacklist_stats(prefs_w: Sequence[Sequence[int]], n_men: int, women: Iterable[int]):
    """``(n_b, combined_size, disjoint)`` over the given women."""
    n_b = combined = 0
    seen: Set[int] = set()
    disjoint = True
    for w in women:
        listed = set(prefs_w[w])
        bl = [m for m in range(n_men) if m not in listed]
        if bl:
            n_b += 1
            combined += len(bl)
            if seen.intersection(bl):
                disjoint = False
            seen.update(bl)
    return n_b, combined, disjoint


def partial_bounds(n_matched: int, n_h: int = 0) -> Tuple[int, int]:
    """Largest allowed ``n_b`` and the combined-size budget ``n_matched - n_h``.

    The combined size of a valid result must not exceed ``budget - n_b``.
    """
    free = n_matched - n_h
    return free // 2, free


def _result(prefs_w, n_men, women, mode, **extra) -> ManipulationResult:
    prefs_w = tuple(tuple(lst) for lst in prefs_w)
    women = tuple(women)
    n_b, combined, disjoint = blacklist_stats(prefs_w, n_men, women)
    return ManipulationResult(prefs_w, n_b, combined, disjoint, mode, relevant_women=women, **extra)


# ---------------------------------------------------------------------------
# cycles


def cycle_of(mu_prime: Matching, mu: Matching, w: int) -> Cycle:
    """The cycle through ``w`` obtained by alternating mu'-partners and mu-partners."""
    if mu_prime.n_women != mu.n_women or mu_prime.n_men != mu.n_men:
        raise DomainError("matchings are over different participant sets")
    women, men = [], []
    cur = w
    while True:
        m = mu_prime.w2m[cur]
        if m is None or mu.w2m[cur] is None:
            raise DomainError(f"woman {cur} is unmatched in one of the matchings")
        nxt = mu.m2w[m]
        if nxt is None:
            raise DomainError(f"man {m} is unmatched in the target matching")
        women.append(cur)
        men.append(m)
        cur = nxt
        if cur == w:
            return Cycle(tuple(women), tuple(men))
        if len(women) > mu.n_women:
            raise DomainError("partner chain does not close; the matchings do not cover the same women")


def cycle_partition(mu_prime: Matching, mu: Matching) -> List[Cycle]:
    """Disjoint cycles covering every woman, each started at its lowest woman."""
    done: Set[int] = set()
    out = []
    for w in range(mu.n_women):
        if w in done:
            continue
        c = cycle_of(mu_prime, mu, w)
        done.update(c.women)
        out.append(c)
    return out


# ---------------------------------------------------------------------------
# the in-place build step


def _promote_second(lst: List[int], m: int) -> None:
    if m in lst:
        lst.remove(m)
    lst.insert(1, m)


def _position(lst: Sequence[int], x: int, who: str) -> int:
    try:
        return lst.index(x)
    except ValueError:
        raise ContractViolation(f"{who} does not list {x}") from None


def compute_build_cor(mu_prime: Matching, mu: Matching, prefs_m: Sequence[Sequence[int]],
                      w_tilde: int, prefs_w: List[List[int]], todo: Optional[Set[int]] = None,
                      stats: Optional[dict] = None) -> Matching:
    """Make ``w_tilde`` trigger the rejection cycle that fixes her, in place.

    Simulates the run that starts from ``mu_prime`` with ``w_tilde`` turning
    her current partner away.  ``prefs_w`` must be a list of mutable lists;
    ``w_tilde`` ends up listing ``mu(w_tilde)`` first and blacklisting
    exactly the men who reach her before him, and every other woman of
    ``todo`` that gets in the way has the arriving man promoted to second.
    Women whose cycle is fixed along the way are removed from ``todo``.

    Returns the matching the simulated run converges to.
    """
    mp, target_w2m, target_m2w = mu_prime.w2m, mu.w2m, mu.m2w
    if target_w2m[w_tilde] is None or mp[w_tilde] is None:
        raise DomainError(f"woman {w_tilde} must be matched in both matchings")
    if target_w2m[w_tilde] == mp[w_tilde]:
        raise DomainError(f"woman {w_tilde} already has her target partner")
    if todo is None:
        todo = {w for w in range(mu.n_women) if mp[w] != target_w2m[w]}
    n_women = mu.n_women

    def mark_done_cycle(start):
        w, steps = start, 0
        while True:
            todo.discard(w)
            m = mp[w]
            if m is None or target_m2w[m] is None:
                raise ContractViolation(f"cycle through woman {start} leaves the matched set")
            w = target_m2w[m]
            steps += 1
            if w == start:
                return
            if steps > n_women:
                raise ContractViolation("partner chain does not close")

    provisional = list(mp)
    m = mp[w_tilde]
    should_blacklist = {m}
    provisional[w_tilde] = None
    mark_done_cycle(w_tilde)
    pointer = {m: _position(prefs_m[m], w_tilde, f"man {m}") + 1}
    target = target_w2m[w_tilde]
    iterations = 0
    while True:
        lst = prefs_m[m]
        p = pointer.get(m)
        if p is None or p >= len(lst):
            raise ContractViolation(f"man {m} ran out of women; men's lists are not compatible")
        w = lst[p]
        if m == target and w == w_tilde:
            break
        iterations += 1
        pointer[m] = p + 1
        if w == w_tilde:
            should_blacklist.add(m)
            accept = False
        elif m == target_w2m[w]:
            accept = True
            del pointer[m]
        elif w in todo:
            _promote_second(prefs_w[w], m)
            mark_done_cycle(w)
            accept = True
        else:
            accept = False
        if accept:
            m, provisional[w] = provisional[w], m
            if m is None:
                raise ContractViolation(f"woman {w} held nobody; starting matching is not perfect")
            if m not in pointer:
                pointer[m] = _position(prefs_m[m], w, f"man {m}") + 1
    provisional[w_tilde] = m
    old = prefs_w[w_tilde]
    prefs_w[w_tilde] = [target] + [x for x in old if x != target and x not in should_blacklist]
    if stats is not None:
        stats["proposals"] = stats.get("proposals", 0) + iterations
    return Matching.from_woman_map(provisional, mu.n_men)


# ---------------------------------------------------------------------------
# entry points


def _require_rational(instance: Instance, mu: Matching) -> None:
    _check_matching(instance, mu)
    if not is_rational(instance, mu, "M"):
        bad = [(w, m) for w, m in mu.pairs() if instance.rank_m[m][w] == ABSENT]
        raise DomainError(f"target matching is not rational for the men: pairs {bad}")


def _require_balanced_perfect(instance: Instance, mu: Matching) -> None:
    _require_rational(instance, mu)
    if instance.n_women != instance.n_men:
        raise DomainError(f"sides differ in size ({instance.n_women} women, {instance.n_men} men)")
    if not mu.is_perfect():
        raise DomainError("target matching is not perfect")


def tops_distinct(instance: Instance) -> bool:
    tops = [lst[0] for lst in instance.prefs_m if lst]
    return len(tops) == instance.n_men and len(set(tops)) == len(tops)


def manipulate_flat(instance: Instance, mu: Matching) -> ManipulationResult:
    """Online construction for men whose first choices are pairwise distinct.

    ``proposals`` counts the first night plus every man's move simulated by
    the build steps; it stays below ``n**2`` for ``n >= 2``.
    """
    _require_balanced_perfect(instance, mu)
    if not tops_distinct(instance):
        raise WrongEntryPointError("men's first choices are not pairwise distinct; use manipulate_general")
    n = instance.n_women
    mu_prime = Matching.from_pairs(n, n, [(lst[0], m) for m, lst in enumerate(instance.prefs_m)])
    prefs_w = []
    for w in range(n):
        head = [mu.w2m[w]]
        if mu_prime.w2m[w] != mu.w2m[w]:
            head.append(mu_prime.w2m[w])
        prefs_w.append(head + [m for m in range(n) if m not in head])
    todo = {w for w in range(n) if mu_prime.w2m[w] != mu.w2m[w]}
    stats = {"proposals": n}
    cheap = 0
    while todo:
        w_tilde = min(todo)
        mu_prime = compute_build_cor(mu_prime, mu, instance.prefs_m, w_tilde, prefs_w, todo, stats)
        cheap += 1
    if mu_prime != mu:
        raise ContractViolation("build steps did not converge to the target matching")
    return _result(prefs_w, n, range(n), "flat", iterations={"cheap": cheap, "expensive": 0},
                   proposals=stats["proposals"])


def _base_lists(instance: Instance, mu: Matching) -> List[List[int]]:
    """``mu(w)`` first, then the other matched men, then unmatched men; ascending within groups.

    Women without a target partner list nobody.
    """
    matched_men = mu.matched_men
    inside = [m for m in range(instance.n_men) if m in matched_men]
    outside = [m for m in range(instance.n_men) if m not in matched_men]
    prefs_w = []
    for w in range(instance.n_women):
        top = mu.w2m[w]
        if top is None:
            prefs_w.append([])
        else:
            prefs_w.append([top] + [m for m in inside if m != top] + outside)
    return prefs_w


class _Synthesizer:
    """Working state of the general construction (one call, one object)."""

    def __init__(self, instance: Instance, mu: Matching, quiet_first: bool, check: bool):
        self.instance = instance
        self.mu = mu
        self.quiet_first = quiet_first
        self.check = check
        self.women = sorted(mu.matched_women)
        self.outsiders = [m for m in range(instance.n_men) if mu.m2w[m] is None]
        self.prefs_w = _base_lists(instance, mu)
        self.stats = {"proposals": 0}
        self.iterations = {"cheap": 0, "expensive": 0}
        self.chosen_nights: List[int] = []
        base, rt = engine.run(instance.with_women(self.prefs_w))
        self.stats["proposals"] += rt.proposals
        for w in self.women:
            if base.w2m[w] != mu.w2m[w]:
                if base.w2m[w] is None:
                    raise ContractViolation(f"woman {w} is unmatched after the first season")
                _promote_second(self.prefs_w[w], base.w2m[w])
        for m in self.outsiders:
            if base.m2w[m] is not None:
                raise ContractViolation(f"man {m} outside the target got matched in the base run")
        self.current = base

    # -- helpers -----------------------------------------------------------

    def pending(self) -> Set[int]:
        return {w for w in self.women if self.current.w2m[w] != self.mu.w2m[w]}

    def traced_run(self):
        got, rt = engine.run(self.instance.with_women(self.prefs_w), trace=True)
        self.stats["proposals"] += rt.proposals
        if got != self.current:
            raise ContractViolation("run of the working profile does not give the expected matching")
        return rt

    def cheap_step(self, w_tilde: int, todo: Set[int]) -> None:
        self.current = compute_build_cor(self.current, self.mu, self.instance.prefs_m, w_tilde,
                                         self.prefs_w, set(todo), self.stats)
        self.iterations["cheap"] += 1

    def expensive_step(self, w_tilde: int, m_tilde: int, todo: Set[int]) -> None:
        inst, mu, cur = self.instance, self.mu, self.current
        new_prefs = [list(lst) for lst in self.prefs_w]
        nxt = compute_build_cor(cur, mu, inst.prefs_m, w_tilde, new_prefs, set(todo), self.stats)
        # w_tilde keeps her old list, with m_tilde moved up to second
        lst = list(self.prefs_w[w_tilde])
        _promote_second(lst, m_tilde)
        new_prefs[w_tilde] = lst
        # provisional partners when m_tilde's rejection by w_tilde is held back
        cut = list(inst.prefs_m)
        cut[m_tilde] = cut[m_tilde][:_position(cut[m_tilde], w_tilde, f"man {m_tilde}") + 1]
        held = Instance(inst.n_women, inst.n_men, tuple(self.prefs_w), tuple(cut))
        half, rt = engine.run(held)
        self.stats["proposals"] += rt.proposals
        holder = half.w2m
        if holder[w_tilde] != cur.w2m[w_tilde]:
            raise ContractViolation(f"woman {w_tilde} does not keep her current partner")
        empty = [w for w in self.women if holder[w] is None]
        if len(empty) > 1:
            raise ContractViolation(f"several matched women left without a suitor: {empty}")
        for m in range(inst.n_men):
            if mu.m2w[m] is None or nxt.m2w[m] != mu.m2w[m] or cur.m2w[m] == mu.m2w[m]:
                continue
            row = inst.prefs_m[m]
            lo = _position(row, cur.m2w[m], f"man {m}")
            hi = _position(row, mu.m2w[m], f"man {m}")
            for w in row[lo + 1:hi]:
                if w in todo:
                    continue
                wl = new_prefs[w]
                if m not in wl:
                    continue
                if holder[w] is None:
                    wl.remove(m)
                elif wl.index(m) < _position(wl, holder[w], f"woman {w}"):
                    wl.remove(m)
                    wl.append(m)
        self.prefs_w = new_prefs
        self.current = nxt
        self.iterations["expensive"] += 1

    def check_invariants(self, before: Optional[Matching]) -> None:
        inst, mu, cur, prefs = self.instance, self.mu, self.current, self.prefs_w
        if before is not None:
            fixed_before = {w for w in self.women if before.w2m[w] == mu.w2m[w]}
            fixed_now = {w for w in self.women if cur.w2m[w] == mu.w2m[w]}
            if not fixed_before < fixed_now:
                raise ContractViolation("the set of fixed women did not grow")
        for m in range(inst.n_men):
            target = mu.m2w[m]
            if target is None:
                continue
            now = cur.m2w[m]
            rm = inst.rank_m[m]
            if now is None or rm[now] == ABSENT or rm[target] == ABSENT or rm[now] > rm[target]:
                raise ContractViolation(f"man {m} is not between his current and target partner")
        owner: Dict[int, int] = {}
        for w in self.women:
            lst = prefs[w]
            if not lst or lst[0] != mu.w2m[w]:
                raise ContractViolation(f"woman {w} does not list her target first")
            if cur.w2m[w] != mu.w2m[w] and (len(lst) < 2 or lst[1] != cur.w2m[w]):
                raise ContractViolation(f"woman {w} does not list her current partner second")
            listed = set(lst)
            for m in range(inst.n_men):
                if m in listed:
                    continue
                if m in owner:
                    raise ContractViolation(f"man {m} is blacklisted by women {owner[m]} and {w}")
                owner[m] = w
                if cur.m2w[m] != mu.m2w[m]:
                    raise ContractViolation(f"blacklisted man {m} is not yet fixed")
        for w in set(owner.values()):
            top = mu.w2m[w]
            if top in owner or cur.m2w[top] != w:
                raise ContractViolation(f"target partner of blacklisting woman {w} is not safe")

    # -- phases ------------------------------------------------------------

    def outsider_phase(self) -> None:
        """Fix women some unmatched man is willing to take, without new blacklists."""
        rank_m = self.instance.rank_m
        while True:
            todo = self.pending()
            if not todo:
                return
            self.traced_run()
            cands = [(w, m) for w in sorted(todo) for m in self.outsiders if rank_m[m][w] != ABSENT]
            if not cands:
                return
            w_tilde, m_tilde = cands[0]
            before = self.current
            self.expensive_step(w_tilde, m_tilde, todo)
            if self.check:
                self.check_invariants(before)

    def main_phase(self) -> None:
        while True:
            todo = self.pending()
            if not todo:
                return
            rt = self.traced_run()
            last = rt.last_new_serenade(self.instance.n_women)
            rejectors = rt.rejectors()
            before = self.current
            quiet = sorted(w for w in todo if w not in rejectors)
            if self.quiet_first and quiet:
                w_tilde = quiet[0]
                self.chosen_nights.append(last[w_tilde])
                self.cheap_step(w_tilde, todo)
            else:
                w_tilde = min(todo, key=lambda w: (-last[w], w))
                t = last[w_tilde]
                self.chosen_nights.append(t)
                if w_tilde not in rejectors:
                    self.cheap_step(w_tilde, todo)
                else:
                    rejected = [rej.proposer for rej in rt.nights[t - 1].rejections
                                if rej.receiver == w_tilde]
                    if not rejected:
                        raise ContractViolation(f"woman {w_tilde} rejects nobody on night {t}")
                    mine = self.prefs_w[w_tilde]
                    m_tilde = max(rejected, key=lambda m: mine.index(m) if m in mine else len(mine))
                    self.expensive_step(w_tilde, m_tilde, todo)
            if self.check:
                self.check_invariants(before)

    def finish(self) -> None:
        final = self.instance.with_women(self.prefs_w)
        men_opt, rt = engine.run(final)
        if men_opt != self.current or self.current != self.mu:
            raise ContractViolation("synthesized profile does not yield the target matching")
        if engine.run(final, engine.WOMEN)[0] != self.mu:
            raise ContractViolation("women-proposing run disagrees with the target matching")


def _n_h(instance: Instance, mu: Matching) -> int:
    outsiders = [m for m in range(instance.n_men) if mu.m2w[m] is None]
    return sum(1 for w in mu.matched_women
               if any(instance.rank_m[m][w] != ABSENT for m in outsiders))


def manipulate_general(instance: Instance, mu: Matching, *, quiet_first: bool = True,
                       check: bool = False) -> ManipulationResult:
    """Profile forcing a perfect, men-rational ``mu`` on a balanced market.

    With ``quiet_first`` on, any pending woman who rejects nobody in the current
    run is fixed first, which only needs the cheap step.  ``check`` asserts
    the construction's invariants after every step.
    """
    _require_balanced_perfect(instance, mu)
    syn = _Synthesizer(instance, mu, quiet_first, check)
    if check:
        syn.check_invariants(None)
    syn.main_phase()
    syn.finish()
    return _result(syn.prefs_w, instance.n_men, syn.women, "general",
                   iterations=dict(syn.iterations), proposals=syn.stats["proposals"],
                   chosen_nights=syn.chosen_nights)


def manipulate_partial(instance: Instance, mu: Matching, *, quiet_first: bool = True,
                       check: bool = False) -> ManipulationResult:
    """Like ``manipulate_general`` for any side sizes and any men-rational ``mu``.

    Women without a target partner blacklist everyone.  Statistics cover the
    matched women only.
    """
    _require_rational(instance, mu)
    syn = _Synthesizer(instance, mu, quiet_first, check)
    if check:
        syn.check_invariants(None)
    syn.outsider_phase()
    syn.main_phase()
    syn.finish()
    return _result(syn.prefs_w, instance.n_men, syn.women, "partial",
                   iterations=dict(syn.iterations), proposals=syn.stats["proposals"],
                   chosen_nights=syn.chosen_nights, n_h=_n_h(instance, mu))


def naive_truncation(instance: Instance, mu: Matching) -> ManipulationResult:
    """Every matched woman lists only her target partner."""
    _require_rational(instance, mu)
    prefs_w = [[m] if m is not None else [] for m in mu.w2m]
    return _result(prefs_w, instance.n_men, sorted(mu.matched_women), "naive")
