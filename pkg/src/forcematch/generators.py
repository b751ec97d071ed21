"""Witness instances for the lower bounds, and seeded random instances."""
from __future__ import annotations

import random
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import DomainError
from .model import Instance, Matching, Profile


def _blocks(n: int, sizes: Sequence[int]) -> List[List[int]]:
    """Consecutive id blocks of sizes ``l+1``, then singletons up to ``n``."""
    out, start = [], 0
    for l in sizes:
        out.append(list(range(start, start + l + 1)))
        start += l + 1
    out.extend([i] for i in range(start, n))
    return out


def gen_tight_balanced(n: int, sizes: Sequence[int]) -> Tuple[Instance, Matching, Profile]:
    """Cyclic-block market in which ``len(sizes)`` blacklists of the given sizes are unavoidable.

    Returns the instance (its women's lists are the witness profile), the
    target matching and the witness profile itself.  Block ``i`` has
    ``sizes[i] + 1`` couples; each man ranks the women of his block cyclically
    starting just after his partner, then everyone else ascending.
    """
    sizes = tuple(int(l) for l in sizes)
    if n < 0:
        raise DomainError("n must be nonnegative")
    if any(l <= 0 for l in sizes):
        raise DomainError(f"block sizes must be positive, got {sizes}")
    if len(sizes) > n // 2:
        raise DomainError(f"at most {n // 2} blacklists are possible for n={n}")
    if sum(sizes) > n - len(sizes):
        raise DomainError(f"sizes sum to {sum(sizes)}, more than n - n_b = {n - len(sizes)}")
    blocks = _blocks(n, sizes)
    prefs_m: List[List[int]] = [[] for _ in range(n)]
    prefs_w: List[List[int]] = [[] for _ in range(n)]
    for block in blocks:
        inside = set(block)
        rest = [x for x in range(n) if x not in inside]
        size = len(block)
        for j, m in enumerate(block):
            prefs_m[m] = [block[(j + k) % size] for k in range(1, size + 1)] + rest
        for j, w in enumerate(block):
            if size == 1:
                prefs_w[w] = [w] + rest
            elif j == 0:
                prefs_w[w] = [w] + rest
            else:
                prefs_w[w] = [w, block[j - 1]] + [m for m in range(n) if m not in (w, block[j - 1])]
    mu = Matching.from_pairs(n, n, [(i, i) for i in range(n)])
    witness = tuple(tuple(lst) for lst in prefs_w)
    return Instance(n, n, witness, tuple(map(tuple, prefs_m))), mu, witness


def gen_divorce_tight(n: int) -> Tuple[Instance, Matching]:
    """Single cycle market that needs ``n - 1`` divorces; women's lists are left full."""
    if n < 1:
        raise DomainError("n must be at least 1")
    if n == 1:
        return Instance(1, 1, ((0,),), ((0,),)), Matching.from_pairs(1, 1, [(0, 0)])
    inst, mu, _ = gen_tight_balanced(n, (n - 1,))
    full = tuple(tuple(range(n)) for _ in range(n))
    return inst.with_women(full), mu


def gen_tight_partial(n_women: int, n_men: int, matched_women: Iterable[int], matched_men: Iterable[int],
                      sizes: Sequence[int] = (),
                      outsider_blacklists_w: Optional[Dict[int, Iterable[int]]] = None,
                      outsider_blacklists_m: Optional[Dict[int, Iterable[int]]] = None):
    """Witness market for unequal sides.

    ``matched_women``/``matched_men`` are the participants the target matches
    (equal counts).  Unmatched women and men may come with blacklists
    (``outsider_blacklists_w[w]``, ``outsider_blacklists_m[m]``); unmatched
    men list everyone else.  Returns ``(instance, mu, witness, n_h)`` where
    the instance carries the witness as the women's lists.
    """
    Wm = sorted(set(matched_women))
    Mm = sorted(set(matched_men))
    if len(Wm) != len(Mm):
        raise DomainError("matched women and matched men differ in number")
    if any(not 0 <= w < n_women for w in Wm) or any(not 0 <= m < n_men for m in Mm):
        raise DomainError("matched participant out of range")
    Wo = [w for w in range(n_women) if w not in set(Wm)]
    Mo = [m for m in range(n_men) if m not in set(Mm)]
    B_w = {w: set((outsider_blacklists_w or {}).get(w, ())) for w in Wo}
    B_m = {m: set((outsider_blacklists_m or {}).get(m, ())) for m in Mo}
    for key in (outsider_blacklists_w or {}):
        if key not in B_w:
            raise DomainError(f"woman {key} is matched; only unmatched women take a blacklist")
    for key in (outsider_blacklists_m or {}):
        if key not in B_m:
            raise DomainError(f"man {key} is matched; only unmatched men take a blacklist")
    H = [w for w in Wm if any(w not in B_m[m] for m in Mo)]
    n_mu, n_h = len(Wm), len(H)
    sizes = tuple(int(l) for l in sizes)
    if any(l <= 0 for l in sizes):
        raise DomainError(f"block sizes must be positive, got {sizes}")
    if sum(sizes) > n_mu - n_h - len(sizes):
        raise DomainError(f"sizes sum to {sum(sizes)}, more than n_mu - n_h - n_b = {n_mu - n_h - len(sizes)}")
    helpers = Mm[:n_h]
    pairs = list(zip(H, helpers))
    rest_w = [w for w in Wm if w not in set(H)]
    rest_m = Mm[n_h:]
    # blocks over the remaining matched participants
    blocks = [[(rest_w[i], rest_m[i]) for i in idx] for idx in _blocks(len(rest_w), sizes)]
    P = {m: [w for w in Wo if m in B_w[w]] for m in range(n_men)}
    prefs_m: List[List[int]] = [[] for _ in range(n_men)]
    prefs_w: List[List[int]] = [[] for _ in range(n_women)]
    for w, m in pairs:
        head = P[m] + [w]
        prefs_m[m] = head + [x for x in range(n_women) if x not in head]
        prefs_w[w] = [m] + [x for x in range(n_men) if x != m]
    for block in blocks:
        size = len(block)
        block_men = {m for _, m in block}
        for j, (w, m) in enumerate(block):
            head = P[m] + [block[(j + k) % size][0] for k in range(1, size + 1)]
            prefs_m[m] = head + [x for x in range(n_women) if x not in head]
            if size == 1 or j == 0:
                banned = block_men if size > 1 else set()
                prefs_w[w] = [m] + [x for x in range(n_men) if x != m and x not in banned]
            else:
                prev = block[j - 1][1]
                prefs_w[w] = [m, prev] + [x for x in range(n_men) if x not in (m, prev)]
    for m in Mo:
        prefs_m[m] = [w for w in range(n_women) if w not in B_m[m]]
    for w in Wo:
        banned = B_w[w] | {m for m in Mo if w not in B_m[m]}
        prefs_w[w] = [m for m in range(n_men) if m not in banned]
    mu = Matching.from_pairs(n_women, n_men, pairs + [p for block in blocks for p in block])
    witness = tuple(tuple(lst) for lst in prefs_w)
    inst = Instance(n_women, n_men, witness, tuple(map(tuple, prefs_m)))
    return inst, mu, witness, n_h


def gen_random(n_women: int, n_men: Optional[int] = None, seed=0, flat: bool = False):
    """Seeded random market with full lists and a uniform random target matching.

    The target is uniform over perfect matchings when the sides are equal,
    and over matchings saturating the smaller side otherwise.  With ``flat``
    the men's first choices are pairwise distinct.
    """
    if n_men is None:
        n_men = n_women
    if flat and n_men > n_women:
        raise DomainError("distinct first choices need at least as many women as men")
    rng = random.Random(seed)
    prefs_w = []
    for _ in range(n_women):
        lst = list(range(n_men))
        rng.shuffle(lst)
        prefs_w.append(tuple(lst))
    tops = rng.sample(range(n_women), n_men) if flat else None
    prefs_m = []
    for m in range(n_men):
        lst = list(range(n_women))
        rng.shuffle(lst)
        if flat:
            lst.remove(tops[m])
            lst.insert(0, tops[m])
        prefs_m.append(tuple(lst))
    if n_women <= n_men:
        men = rng.sample(range(n_men), n_women)
        mu = Matching.from_pairs(n_women, n_men, list(enumerate(men)))
    else:
        women = rng.sample(range(n_women), n_men)
        mu = Matching.from_pairs(n_women, n_men, [(w, m) for m, w in enumerate(women)])
    return Instance(n_women, n_men, tuple(prefs_w), tuple(prefs_m)), mu
