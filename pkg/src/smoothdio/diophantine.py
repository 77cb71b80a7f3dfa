"""Exact quadratic-irrational arithmetic and the smooth approximant target set.

The irrational being approximated is carried as α = (p + s√d)/r with integer
entries and d a positive nonsquare, so continued-fraction convergents, the
nearest integer to nα, and the distance ‖nα‖ can all be decided by integer
comparisons — no floating point in any decision path.  A decimal literal with
an explicit precision exponent is accepted as a fallback representation; its
error interval is propagated instead of ignored.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, exp, floor, gcd, isqrt, log, sqrt

import numpy as np

from .arith import mod_inverse
from .errors import CapacityError

THETA_MAX = Fraction(6, 17)

# Denominator scale for the exact error interval attached to a convergent:
# the slot [err_num, err_num + 1] / (2^64 q²) containing α − a/q.
_ERR_SCALE = 1 << 64


def _cmp_sqrt(B: int, d: int, x: int) -> int:
    """Exact sign of B·√d − x for d a positive nonsquare."""
    if B == 0:
        return (x < 0) - (x > 0)
    if B > 0:
        if x < 0:
            return 1
        return 1 if B * B * d > x * x else -1  # equality impossible: d nonsquare
    if x >= 0:
        return -1
    return -1 if B * B * d > x * x else 1


def floor_surd(A: int, B: int, d: int, C: int) -> int:
    """⌊(A + B√d)/C⌋, exact (d positive nonsquare, C ≠ 0)."""
    if C == 0:
        raise ZeroDivisionError("C must be nonzero")
    if C < 0:
        A, B, C = -A, -B, -C
    if B == 0:
        return A // C
    m = isqrt(B * B * d)
    n_lo = A + m if B > 0 else A - m - 1  # numerator lies in (n_lo, n_lo + 1)
    j = n_lo // C
    while _cmp_sqrt(B, d, (j + 1) * C - A) > 0:  # j+1 <= (A + B√d)/C ?
        j += 1
    return j


@dataclass
class QuadIrr:
    """α = (p + s√d)/r, canonicalized to gcd(p, s, r) = 1 and r > 0."""

    p: int
    s: int
    d: int
    r: int

    def __post_init__(self):
        if self.s == 0 or self.r == 0:
            raise ValueError("s and r must be nonzero")
        if self.d <= 0 or isqrt(self.d) ** 2 == self.d:
            raise ValueError("d must be a positive nonsquare")
        if self.r < 0:
            self.p, self.s, self.r = -self.p, -self.s, -self.r
        g = gcd(gcd(abs(self.p), abs(self.s)), self.r)
        if g > 1:
            self.p //= g
            self.s //= g
            self.r //= g

    def mirror(self) -> "QuadIrr":
        """The surd −α."""
        return QuadIrr(-self.p, -self.s, self.d, self.r)

    def to_float(self) -> float:
        return (self.p + self.s * sqrt(self.d)) / self.r


@dataclass
class DecimalAlpha:
    """Decimal fallback: |α − value| ≤ 10^(−prec), value an exact rational."""

    value: Fraction
    prec: int

    @property
    def width(self) -> Fraction:
        return Fraction(1, 10**self.prec)

    def to_float(self) -> float:
        return float(self.value)


def parse_alpha(text: str):
    """Parse "quad:p,s,d,r" or "dec:<digits>:<precision-exponent>"."""
    if text.startswith("quad:"):
        parts = text[5:].split(",")
        if len(parts) != 4:
            raise ValueError(f"bad quad spec {text!r}")
        p, s, d, r = (int(t) for t in parts)
        return QuadIrr(p, s, d, r)
    if text.startswith("dec:"):
        parts = text[4:].rsplit(":", 1)
        if len(parts) != 2:
            raise ValueError(f"bad dec spec {text!r}")
        return DecimalAlpha(Fraction(parts[0]), int(parts[1]))
    raise ValueError(f"unrecognized alpha spec {text!r}")


@dataclass
class Convergent:
    """a/q with gcd(a, q) = 1 and |α − a/q| ≤ 1/q².

    The exact interval [err_num − 1, err_num + 1] / err_den contains
    α − a/q (a centered slot: representable around any point, including 0).
    """

    a: int
    q: int
    err_num: int
    err_den: int

    def error_bounds(self):
        return (Fraction(self.err_num - 1, self.err_den), Fraction(self.err_num + 1, self.err_den))

    def error_float(self) -> float:
        return self.err_num / self.err_den


def _cf_terms(alpha: QuadIrr, count: int):
    """First `count` partial quotients of α, by the integer surd recurrence."""
    # Normalize to (P + √D)/Q with Q | D − P².
    if alpha.s > 0:
        P, Q, D = alpha.p, alpha.r, alpha.s * alpha.s * alpha.d
    else:
        P, Q, D = -alpha.p, -alpha.r, alpha.s * alpha.s * alpha.d
    if (D - P * P) % Q != 0:
        P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
    terms = []
    for _ in range(count):
        a = floor_surd(P, 1, D, Q)
        terms.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
    return terms


def cf_convergents(alpha, count: int):
    """First `count` continued-fraction convergents of α.

    For QuadIrr the computation is exact at any depth.  For DecimalAlpha,
    convergents are emitted only while |α − a/q| ≤ 1/q² is certified by the
    stored precision; past that a CapacityError is raised.
    """
    if count < 1:
        raise ValueError("count must be >= 1")

    if isinstance(alpha, QuadIrr):
        terms = _cf_terms(alpha, count)
        width = Fraction(0)
        value = None  # exact surd handled separately below
    elif isinstance(alpha, DecimalAlpha):
        value = alpha.value
        width = alpha.width
        terms = []
        v = value
        for _ in range(count):
            a = floor(v)
            terms.append(a)
            frac = v - a
            if frac == 0:
                break
            v = 1 / frac
    else:
        raise TypeError("alpha must be QuadIrr or DecimalAlpha")

    out = []
    h_prev, h = 1, terms[0]
    k_prev, k = 0, 1
    for i, _ in enumerate(terms):
        if i > 0:
            h_prev, h = h, terms[i] * h + h_prev
            k_prev, k = k, terms[i] * k + k_prev
        if isinstance(alpha, QuadIrr):
            out.append(_make_convergent_quad(alpha, h, k))
        else:
            conv = _make_convergent_dec(value, width, h, k)
            if conv is None:
                raise CapacityError(
                    f"decimal precision 1e-{alpha.prec} cannot certify convergent #{i + 1}"
                )
            out.append(conv)
    return out


def _make_convergent_quad(alpha: QuadIrr, a: int, q: int) -> Convergent:
    # α − a/q = (E + F√d)/G; round (α − a/q)·err_den to the nearest integer,
    # so the slot half-width 1/(2^64 q²) sits far below the 1/q² margin.
    E = q * alpha.p - a * alpha.r
    F = q * alpha.s
    G = alpha.r * q
    err_den = _ERR_SCALE * q * q
    err_num = floor_surd(2 * E * err_den + G, 2 * F * err_den, alpha.d, 2 * G)
    return Convergent(a, q, err_num, err_den)


def _make_convergent_dec(value: Fraction, width: Fraction, a: int, q: int):
    mid = value - Fraction(a, q)
    if abs(mid) + width > Fraction(1, q * q):
        return None
    # largest dyadic scale whose slot half-width 1/err_den covers the
    # rational uncertainty: width * err_den <= 1/2
    err_den = _ERR_SCALE * q * q
    while err_den > 1 and width * err_den > Fraction(1, 2):
        err_den //= 2
    err_num = floor(mid * err_den + Fraction(1, 2))
    return Convergent(a, q, err_num, err_den)


def dist_nearest(n: int, alpha) -> float:
    """‖nα‖: the nearest integer is decided exactly, then the residual is
    emitted as a float with ~1e-15 relative accuracy (conjugate evaluation,
    no catastrophic cancellation)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 0.0

    if isinstance(alpha, DecimalAlpha):
        t = n * alpha.value
        j = floor(t + Fraction(1, 2))
        return abs(float(t - j))

    A, B, C = n * alpha.p, n * alpha.s, alpha.r
    # nearest integer to (A + B√d)/C is ⌊(2A + C + 2B√d)/(2C)⌋ (ties cannot
    # occur: the value is irrational)
    j = floor_surd(2 * A + C, 2 * B, alpha.d, 2 * C)
    A -= j * C
    # (A + B√d)/C with |value| ≤ 1/2: evaluate via (A² − B²d)/(C(A − B√d))
    num = A * A - B * B * alpha.d
    den = C * (A - B * sqrt(alpha.d))
    return abs(num / den)


@dataclass
class ApproxParams:
    """Derived scales: X = q^{2/(1+θ)}, R = q^{(1−θ)/(1+θ)}, Y = (log X)^C."""

    theta: Fraction
    q: int
    X: float
    R: float
    Y: float
    C: float


def derive_params(q: int, theta, C: float = 10.0, Y: float = None) -> ApproxParams:
    """Scales for denominator q at exponent θ ∈ (0, 6/17).

    Y defaults to (log X)^C; pass Y explicitly (e.g. inf) to override.
    """
    theta = Fraction(theta)
    if not (0 < theta < THETA_MAX):
        raise ValueError(f"theta must lie in (0, 6/17), got {theta}")
    if q < 2:
        raise ValueError("q must be >= 2")
    lq = log(q)
    X = exp(lq * float(2 / (1 + theta)))
    R = exp(lq * float((1 - theta) / (1 + theta)))
    if abs(X - q * R) > 1e-12 * X:
        raise AssertionError("exponent identity X = qR violated beyond 1e-12")
    if Y is None:
        Y = log(X) ** C
    return ApproxParams(theta, q, X, R, Y, C)


TARGET_SIEVE_CAPACITY = 20_000_000


def build_target_set(params: ApproxParams, a: int) -> np.ndarray:
    """All n in [X/4, 4X] with P⁺(n) ≤ Y, gcd(n, q) = 1 and (na mod q) in
    [1, ⌊R⌋], ascending.

    When Y exceeds the interval top the smoothness constraint is vacuous and
    members are enumerated residue class by residue class; otherwise the
    interval is sieved (capacity permitting).
    """
    q = params.q
    if gcd(a, q) != 1:
        raise ValueError("a must be coprime to q")
    lo = ceil(params.X / 4)
    hi = floor(4 * params.X)
    if hi > 2**62:
        raise CapacityError(f"interval top {hi} beyond integer capacity")
    r_top = min(floor(params.R), q - 1)
    if r_top < 1 or hi < lo:
        return np.zeros(0, dtype=np.int64)

    if params.Y >= hi:
        abar = mod_inverse(a, q)
        chunks = []
        for r in range(1, r_top + 1):
            if gcd(r, q) != 1:
                continue
            base = (abar * r) % q
            n0 = lo + ((base - lo) % q)
            if n0 <= hi:
                chunks.append(np.arange(n0, hi + 1, q, dtype=np.int64))
        if not chunks:
            return np.zeros(0, dtype=np.int64)
        out = np.concatenate(chunks)
        out.sort()
        return out

    if hi - lo + 1 > TARGET_SIEVE_CAPACITY:
        raise CapacityError(f"interval [{lo}, {hi}] exceeds sieve capacity with finite Y")
    from .smooth import smooth_sieve

    sv = smooth_sieve(lo, hi, params.Y, q)
    ns = np.arange(lo, hi + 1, dtype=np.int64)
    res = ((ns % q) * (a % q)) % q  # reduce before multiplying: no int64 overflow
    keep = sv.smooth & sv.coprime & (res >= 1) & (res <= r_top)
    return ns[keep]


def connection_bound(params: ApproxParams) -> float:
    """R/q + 4X/q²: every target-set member n has ‖nα‖ below this when a/q
    is a convergent of α."""
    return params.R / params.q + 4 * params.X / params.q**2
