"""Kloosterman-sum kernels: complete sums, incomplete inverse-exponential
sums over an interval, the smooth-number Kloosterman average, and the proved
upper bound as a comparator.

All sums are evaluated directly (no Salié/stationary-phase tricks) in double
precision; modular inverses come from per-modulus tables so that averaging
over many residues costs one table build per modulus.
"""

from dataclasses import dataclass
from math import ceil, floor, gcd, hypot, pi

import numpy as np

from .errors import BudgetExceededError, CapacityError
from .smooth import smooth_sieve

INVERSE_TABLE_CAPACITY = 2_000_000
_TWO_PI = 2.0 * pi

_INV_CACHE = {}
_INV_CACHE_MAX = 64


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def inverse_table(c: int) -> np.ndarray:
    """inv[n] = n̄ mod c for units, −1 for non-units (cached per modulus)."""
    if c < 1:
        raise ValueError("c must be >= 1")
    if c > INVERSE_TABLE_CAPACITY:
        raise CapacityError(f"modulus {c} exceeds inverse-table capacity")
    tab = _INV_CACHE.get(c)
    if tab is not None:
        return tab
    if c == 1:
        tab = np.zeros(1, dtype=np.int64)  # 0 is the unit mod 1
    elif _is_prime(c):
        inv = [0] * c
        inv[1] = 1
        for n in range(2, c):
            inv[n] = (-(c // n) * inv[c % n]) % c
        tab = np.array(inv, dtype=np.int64)
        tab[0] = -1
    else:
        inv = [-1] * c
        for n in range(1 if c > 1 else 0, c):
            if gcd(n, c) == 1:
                inv[n] = pow(n, -1, c)
        tab = np.array(inv, dtype=np.int64)
    if len(_INV_CACHE) >= _INV_CACHE_MAX:
        _INV_CACHE.pop(next(iter(_INV_CACHE)))
    _INV_CACHE[c] = tab
    return tab


def complete_kloosterman(a: int, b: int, c: int) -> float:
    """S(a, b; c) = Σ_{n mod c, (n,c)=1} e((an + bn̄)/c).

    The sum is real (n ↔ −n pairs terms with conjugates); the imaginary
    residue is checked against 1e-9 before being dropped.
    """
    tab = inverse_table(c)
    units = np.nonzero(tab >= 0)[0].astype(np.int64)
    inv = tab[units]
    phases = ((a % c) * units + (b % c) * inv) % c
    ang = phases * (_TWO_PI / c)
    re = float(np.sum(np.cos(ang)))
    im = float(np.sum(np.sin(ang)))
    if abs(im) > 1e-9:
        raise ArithmeticError(f"Kloosterman sum imaginary residue {im} too large")
    return re


def incomplete_inverse_sum(b: int, c: int, Z1: float, Z2: float) -> complex:
    """Σ_{Z1 < n ≤ Z2, (n,c)=1} e(b·n̄/c), evaluated term by term."""
    if c < 2:
        raise ValueError("c must be >= 2")
    if Z2 <= Z1:
        return 0j
    n_lo = int(floor(Z1)) + 1
    n_hi = int(floor(Z2))
    if n_hi < n_lo:
        return 0j
    if n_hi - n_lo + 1 > 10**8:
        raise BudgetExceededError("interval too long")
    tab = inverse_table(c)
    ns = np.arange(n_lo, n_hi + 1, dtype=np.int64)
    inv = tab[ns % c]
    keep = inv >= 0
    phases = ((b % c) * inv[keep]) % c
    ang = phases * (_TWO_PI / c)
    return complex(np.sum(np.cos(ang)), np.sum(np.sin(ang)))


def kl_smooth_average(M: float, x: float, a: int, q: int, y: float, budget: int = 10**9) -> float:
    """Kl_y(M, x; a, q) = Σ_{m∼M} |Σ_{n<x, P⁺(n)≤y, (n,mq)=1} e(a·n̄/m)|.

    Exact double sum; n̄ is the inverse of n modulo m.
    """
    if M < 2 or x < 2:
        raise ValueError("need M, x >= 2")
    if a == 0:
        raise ValueError("a must be nonzero")
    if q < 1:
        raise ValueError("q must be >= 1")
    m_lo = int(floor(M)) + 1
    m_hi = int(floor(2 * M))
    n_max = int(ceil(x)) - 1  # n < x
    if n_max < 1 or m_hi < m_lo:
        return 0.0
    sv = smooth_sieve(1, n_max, y, 1)
    ns_all = np.arange(1, n_max + 1, dtype=np.int64)
    ns_all = ns_all[sv.smooth[: n_max]]
    ns_all = ns_all[np.gcd(ns_all, q) == 1]
    if (m_hi - m_lo + 1) * len(ns_all) > budget:
        raise BudgetExceededError("m x n loop exceeds budget")

    total = 0.0
    for m in range(m_lo, m_hi + 1):
        tab = inverse_table(m)
        inv = tab[ns_all % m]
        keep = inv >= 0
        phases = ((a % m) * inv[keep]) % m
        ang = phases * (_TWO_PI / m)
        total += hypot(float(np.sum(np.cos(ang))), float(np.sum(np.sin(ang))))
    return total


@dataclass
class KloostermanParams:
    """Inputs of the smooth-average bound: 2 ≤ y ≤ z < x, M ≥ 2, a ≠ 0."""

    M: float
    x: float
    a: int
    q: int
    y: float
    z: float
    eta: float

    def __post_init__(self):
        if self.M < 2:
            raise ValueError("M must be >= 2")
        if not (2 <= self.y <= self.z < self.x):
            raise ValueError("need 2 <= y <= z < x")
        if self.a == 0:
            raise ValueError("a must be nonzero")
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if self.eta <= 0:
            raise ValueError("eta must be > 0")


def kloos_bound_rhs(params: KloostermanParams) -> float:
    """The proved comparator with implied constant 1:

    (|a|xM)^η (1 + |a|/(xM))^{1/2} (M x^{1/2} y^{1/2} z^{1/2}
        + x^{3/2} M^{1/2} z^{-1/4}) + M z.
    """
    M, x, y, z = params.M, params.x, params.y, params.z
    amp = (abs(params.a) * x * M) ** params.eta
    lead = (1.0 + abs(params.a) / (x * M)) ** 0.5
    core = M * x**0.5 * y**0.5 * z**0.5 + x**1.5 * M**0.5 * z**-0.25
    return amp * lead * core + M * z


def optimal_z(M: float, x: float, y: float) -> float:
    """z = x^{2/3} clamped into [y, x): the exponent-balancing cut used with
    the smooth-average bound."""
    if y >= x:
        raise ValueError("cannot place z in [y, x): y >= x")
    return max(x ** (2.0 / 3.0), y)
