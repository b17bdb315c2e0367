"""Prime tables backed by a smallest-prime-factor sieve."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=8)
def spf_table(limit: int) -> np.ndarray:
    """Smallest prime factor of every integer in ``[0, limit]`` (0 and 1 map to themselves)."""
    limit = max(int(limit), 1)
    spf = np.arange(limit + 1, dtype=np.int64)
    for p in range(2, int(limit**0.5) + 1):
        if spf[p] != p:
            continue
        block = spf[p * p :: p]
        mask = block == np.arange(p * p, limit + 1, p)
        block[mask] = p
    spf.flags.writeable = False
    return spf


def primes_up_to(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    spf = spf_table(limit)
    idx = np.arange(2, limit + 1)
    return idx[spf[2:] == idx]


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    if m < 4:
        return True
    if m % 2 == 0:
        return False
    f = 3
    while f * f <= m:
        if m % f == 0:
            return False
        f += 2
    return True


def factorize(m: int) -> dict[int, int]:
    """Trial-division factorization, ``{p: e}``."""
    if m < 1:
        raise ValueError(f"cannot factor {m}")
    out: dict[int, int] = {}
    f = 2
    while f * f <= m:
        while m % f == 0:
            out[f] = out.get(f, 0) + 1
            m //= f
        f += 1 if f == 2 else 2
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out
