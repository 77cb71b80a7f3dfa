"""Integer-arithmetic substrate: primes, factorization, P⁺, modular inverses.

Everything here is exact.  Factorization is plain trial division against a
prime table (desk scale), and the pair-correlation gcd sum is evaluated by a
literal double loop (vectorized in blocks), since it serves as an oracle for
the analytic bound it mirrors, not as a hot path.
"""

from dataclasses import dataclass
from math import gcd, isqrt

import numpy as np

from .errors import CapacityError

GCD_SUM_MAX_U = 100_000


@dataclass
class PrimeTable:
    """All primes ≤ limit, in increasing order."""

    limit: int
    primes: list


@dataclass
class Factorization:
    """n = Π pᵉ with primes strictly increasing; n = 1 ⇔ empty factor list."""

    n: int
    factors: list  # [(prime, exponent), ...]

    def value(self) -> int:
        out = 1
        for p, e in self.factors:
            out *= p**e
        return out


def sieve_primes(limit: int) -> PrimeTable:
    """Classic sieve of Eratosthenes; limit < 2 yields an empty table."""
    if limit < 0:
        raise ValueError("limit must be >= 0")
    if limit < 2:
        return PrimeTable(limit, [])
    flags = bytearray(b"\x01") * (limit + 1)
    flags[0:2] = b"\x00\x00"
    for p in range(2, isqrt(limit) + 1):
        if flags[p]:
            start = p * p
            flags[start :: p] = b"\x00" * ((limit - start) // p + 1)
    return PrimeTable(limit, [i for i, v in enumerate(flags) if v])


def prime_array(limit: int) -> np.ndarray:
    """Primes ≤ limit as an int64 array (for vectorized prime sums)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.nonzero(flags)[0].astype(np.int64)


def factorize(n: int, table: PrimeTable) -> Factorization:
    """Trial division of n against the table.

    Requires table.limit² ≥ n (or that the table covers every prime factor);
    a leftover cofactor that the table cannot certify prime raises
    CapacityError.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    factors = []
    rem = n
    exhausted = True
    for p in table.primes:
        if p * p > rem:
            exhausted = False
            break
        if rem % p == 0:
            e = 0
            while rem % p == 0:
                rem //= p
                e += 1
            factors.append((p, e))
    if rem > 1:
        # If the loop broke on p² > rem the cofactor is certified prime;
        # otherwise it has no factor <= table.limit and is prime only when
        # rem <= limit².
        if exhausted and rem > table.limit * table.limit:
            raise CapacityError(f"prime table (limit {table.limit}) cannot certify cofactor {rem}")
        factors.append((rem, 1))
    return Factorization(n, factors)


def largest_prime_factor(n: int) -> int:
    """P⁺(n), with P⁺(1) = 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return 1
    best = 1
    while n % 2 == 0:
        best = 2
        n //= 2
    d = 3
    while d * d <= n:
        while n % d == 0:
            best = d
            n //= d
        d += 2
    return max(best, n) if n > 1 else best


def distinct_prime_factors(n: int) -> list:
    """Distinct prime divisors of n, increasing (trial division)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = []
    if n % 2 == 0:
        out.append(2)
        while n % 2 == 0:
            n //= 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 2
    if n > 1:
        out.append(n)
    return out


def euler_phi(n: int) -> int:
    """Euler totient φ(n)."""
    out = n
    for p in distinct_prime_factors(n):
        out -= out // p
    return out


def mod_inverse(a: int, q: int) -> int:
    """ā with a·ā ≡ 1 (mod q), normalized into [1, q].

    Raises ValueError when gcd(a, q) > 1.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    try:
        inv = pow(a, -1, q)
    except ValueError as exc:
        raise ValueError(f"{a} is not invertible mod {q}") from exc
    return inv if inv != 0 else q  # q = 1 gives pow(...) = 0; report 1


def gcd_sum(U: int, k: int, q: int) -> int:
    """Σ gcd(u₁−u₂, k·u₁·u₂) over u₁ ≠ u₂ in (U, 2U] with gcd(u₁u₂, q) = 1.

    Exact O(U²) evaluation, blocked through numpy when products fit int64;
    U is capped because this is an enumeration oracle.
    """
    if U < 1:
        raise ValueError("U must be >= 1")
    if k == 0:
        raise ValueError("k must be nonzero")
    if q < 1:
        raise ValueError("q must be >= 1")
    if U > GCD_SUM_MAX_U:
        raise CapacityError(f"U = {U} exceeds the oracle cap {GCD_SUM_MAX_U}")

    us = [u for u in range(U + 1, 2 * U + 1) if gcd(u, q) == 1]
    if len(us) < 2:
        return 0

    # int64 is safe iff |k| * (2U)^2 stays below 2^63.
    if abs(k) * 4 * U * U < 2**62:
        arr = np.array(us, dtype=np.int64)
        total = 0
        block = max(1, 10_000_000 // len(arr))
        for i in range(0, len(arr), block):
            u1 = arr[i : i + block]
            diff = u1[:, None] - arr[None, :]
            prod = k * u1[:, None] * arr[None, :]
            g = np.gcd(diff, prod)
            g[diff == 0] = 0
            total += int(g.sum(dtype=np.int64))
        return total

    total = 0
    for i, u1 in enumerate(us):
        for j, u2 in enumerate(us):
            if i != j:
                total += gcd(u1 - u2, k * u1 * u2)
    return total
