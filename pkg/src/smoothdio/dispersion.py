"""Dispersion apparatus: the fixed smooth bump φ, its Fourier transform, the
residue-window weight Φ_a(n, R), the master sum Σ(q, R), the bilinear sum
B(M, N), Type I reports, and the Type II sums S′₁, S′₂, S′₃, S′.

The bump is the concrete glue function

    σ(t) = exp(−1/t) (t > 0),   g(t) = σ(t)/(σ(t) + σ(1−t)),
    φ(x) = g(12(x − 1/4)) for x < 1/2,   g(12(3/4 − x)) otherwise,

which vanishes off [1/4, 3/4], is 1 on [1/3, 2/3], and integrates to 5/12
exactly (transition symmetry g(s) + g(1−s) = 1).  Its transform is computed
as a closed-form plateau term plus Gauss–Legendre panels over the two
transitions, with the panel count doubled until the change certifies the
requested tolerance.
"""

import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, exp, floor, gcd, log, pi

import numpy as np

from .diophantine import derive_params
from .errors import BudgetExceededError, NonConvergenceError
from .smooth import local_density, smooth_sieve

_TWO_PI = 2.0 * pi


# ---------------------------------------------------------------------------
# the bump
# ---------------------------------------------------------------------------


def _g(t: float) -> float:
    """Smooth step: 0 for t ≤ 0, 1 for t ≥ 1, C^∞ everywhere."""
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    a = exp(-1.0 / t)
    b = exp(-1.0 / (1.0 - t))
    return a / (a + b)


def _g_array(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t, dtype=np.float64)
    out[t >= 1.0] = 1.0
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    out[mid] = a / (a + b)
    return out


def bump_phi(x: float) -> float:
    """φ(x): supported on [1/4, 3/4], ≡ 1 on [1/3, 2/3], values in [0, 1]."""
    if x < 0.5:
        return _g(12.0 * (x - 0.25))
    return _g(12.0 * (0.75 - x))


def bump_phi_array(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    s = np.where(x < 0.5, 12.0 * (x - 0.25), 12.0 * (0.75 - x))
    return _g_array(s)


# ---------------------------------------------------------------------------
# Fourier transform of the bump
# ---------------------------------------------------------------------------

_GL_CACHE = {}
_GL_MAX_NODES = 1 << 17


def _gl_weights(n: int):
    """Gauss–Legendre nodes on [0, 1] with weights premultiplied by g."""
    cached = _GL_CACHE.get(n)
    if cached is None:
        x, w = np.polynomial.legendre.leggauss(n)
        s = 0.5 * (x + 1.0)
        cached = (s, 0.5 * w * _g_array(s))
        _GL_CACHE[n] = cached
    return cached


def _transition_transform(mu: np.ndarray, tol: float):
    """G(μ) = ∫₀¹ g(s) e(−μs) ds for each μ, with a doubling certificate."""
    n = 64
    s, wg = _gl_weights(n)
    prev = np.exp(-2j * pi * np.outer(mu, s)) @ wg
    while n < _GL_MAX_NODES:
        n *= 2
        s, wg = _gl_weights(n)
        cur = np.exp(-2j * pi * np.outer(mu, s)) @ wg
        err = float(np.max(np.abs(cur - prev))) if len(mu) else 0.0
        if err <= tol:
            return cur, err
        prev = cur
    raise NonConvergenceError("transition quadrature did not converge")


def _plateau_transform(xi: np.ndarray) -> np.ndarray:
    """∫_{1/3}^{2/3} e(−ξt) dt, closed form."""
    xi = np.asarray(xi, dtype=np.float64)
    out = np.full(xi.shape, 1.0 / 3.0, dtype=np.complex128)
    nz = xi != 0.0
    x = xi[nz]
    out[nz] = (np.exp(-2j * pi * x / 3.0) - np.exp(-4j * pi * x / 3.0)) / (2j * pi * x)
    return out


def bump_fourier_array(xis: np.ndarray, tol: float = 1e-10):
    """φ̂ at each frequency, plus one certified absolute error bound."""
    if tol < 1e-12:
        raise ValueError("tol must be >= 1e-12")
    xis = np.atleast_1d(np.asarray(xis, dtype=np.float64))
    G, errG = _transition_transform(xis / 12.0, tol * 6.0 * 0.9)
    phase1 = np.exp(-2j * pi * xis / 4.0)
    phase2 = np.exp(-2j * pi * xis * 3.0 / 4.0)
    vals = _plateau_transform(xis) + (phase1 * G + phase2 * np.conj(G)) / 12.0
    return vals, errG / 6.0 + 1e-15


def bump_fourier(xi: float, tol: float = 1e-10) -> complex:
    """φ̂(ξ) = ∫ φ(t) e(−ξt) dt with certified absolute error ≤ tol."""
    vals, _ = bump_fourier_array(np.array([xi]), tol)
    return complex(vals[0])


@dataclass
class FourierTable:
    """Cached φ̂ samples keyed by frequency rounded to 1e-12."""

    samples: dict
    tol: float

    def value(self, xi: float) -> complex:
        key = round(xi, 12)
        v = self.samples.get(key)
        if v is None:
            v = bump_fourier(xi, self.tol)
            self.samples[key] = v
        return v


def build_fourier_table(xis, tol: float = 1e-10) -> FourierTable:
    xis = np.asarray(xis, dtype=np.float64)
    vals, _ = bump_fourier_array(xis, tol)
    return FourierTable({round(float(x), 12): complex(v) for x, v in zip(xis, vals)}, tol)


_PHI_HAT_0 = None


def phi_hat_zero() -> float:
    """φ̂(0) = ∫φ = 5/12 (evaluated once by quadrature, cached)."""
    global _PHI_HAT_0
    if _PHI_HAT_0 is None:
        _PHI_HAT_0 = bump_fourier(0.0, 1e-12).real
    return _PHI_HAT_0


# ---------------------------------------------------------------------------
# the residue-window weight
# ---------------------------------------------------------------------------


def _check_weight_args(R: float, q: int, a: int) -> None:
    if q < 2:
        raise ValueError("q must be >= 2")
    if not (0 < R < q):
        raise ValueError("need 0 < R < q (single-representative window)")
    if gcd(a, q) != 1:
        raise ValueError("a must be coprime to q")


def phi_weight(n: int, R: float, q: int, a: int) -> float:
    """Φ_a(n, R) = φ(r/R) with r = n·a mod q in [0, q).

    R < q guarantees at most one residue representative meets the support
    of φ, so the single term is the whole sum over r ≡ na (mod q).
    """
    _check_weight_args(R, q, a)
    r = (int(n) * int(a)) % q
    return bump_phi(r / R)


def phi_weight_poisson(
    n: int, R: float, q: int, a: int, Kmax: int = None, tol: float = 1e-10, table: FourierTable = None
) -> float:
    """Poisson-expanded weight (R/q)·Σ_{|k| ≤ Kmax} φ̂(kR/q) e(nak/q).

    With Kmax omitted, the truncation starts at ⌈10q/R⌉ and doubles until
    the value moves by ≤ 1e-8 (the bump's transform still carries ~1e-2 mass
    near ξ = 10, so a fixed 10q/R cut is far from converged).
    """
    _check_weight_args(R, q, a)
    if Kmax is None:
        K = ceil(10 * q / R)
        v1 = phi_weight_poisson(n, R, q, a, K, tol, table)
        while K <= 1 << 22:
            K *= 2
            v2 = phi_weight_poisson(n, R, q, a, K, tol, table)
            if abs(v1 - v2) <= 1e-8:
                return v2
            v1 = v2
        raise NonConvergenceError("Poisson tail did not certify")
    if Kmax < 0:
        raise ValueError("Kmax must be >= 0")

    ks = np.arange(1, Kmax + 1, dtype=np.int64)
    xis = ks * (R / q)
    if table is not None:
        vals = np.array([table.value(float(x)) for x in xis], dtype=np.complex128)
    else:
        vals, _ = bump_fourier_array(xis, tol) if Kmax >= 1 else (np.zeros(0, np.complex128), 0.0)
    m0 = (int(n) * int(a)) % q
    phases = np.exp(2j * pi * ((m0 * ks) % q) / q)
    terms = vals * phases
    total = phi_hat_zero() + complex(np.sum(terms + np.conj(terms)))
    if abs(total.imag) > 1e-9:
        raise ArithmeticError(f"Poisson sum imaginary residue {total.imag}")
    return (R / q) * total.real


# ---------------------------------------------------------------------------
# parameter bundle and reports
# ---------------------------------------------------------------------------


@dataclass
class DispersionParams:
    """Bilinear ranges (M, N) against modulus q, window R, smoothness Y.

    Range conditions (the MN ≍ X window and the N-window against R) are
    recorded as flags, not rejections, so off-range diagnostics stay runnable.
    """

    M: float
    N: float
    q: int
    a: int
    R: float
    Y: float
    theta: Fraction = None
    delta: float = 0.1
    eta: float = 0.05
    flags: list = field(default_factory=list)

    def __post_init__(self):
        if self.M < 2 or self.N < 2:
            raise ValueError("need M, N >= 2")
        _check_weight_args(self.R, self.q, self.a)
        X = self.q * self.R
        if not (X / 4 <= self.M * self.N <= 4 * X):
            self.flags.append(f"MN = {self.M * self.N:g} outside [X/4, 4X] for X = {X:g}")
        n_lo = self.q / self.R ** (1 - self.delta)
        n_hi = self.R ** (12 / 11 - self.delta)
        if not (n_lo <= self.N <= n_hi):
            self.flags.append(f"N = {self.N:g} outside [{n_lo:g}, {n_hi:g}] (range condition)")
        if not (0 < self.eta < self.delta / 20):
            self.flags.append(f"eta = {self.eta:g} not in (0, delta/20)")

    @property
    def X(self) -> float:
        return self.q * self.R


@dataclass
class SumReport:
    """A computed sum, its benchmark main term, and diagnostics."""

    value: float
    main_term: float
    ratio: float
    truncation_error: float
    params: dict
    runtime_ms: float

    def to_json_dict(self, deterministic: bool = True) -> dict:
        return {
            "value": self.value,
            "main_term": self.main_term,
            "ratio": self.ratio,
            "truncation_error": self.truncation_error,
            "params": self.params,
            "runtime_ms": 0.0 if deterministic else self.runtime_ms,
        }


def _report(value, main, trunc, params, t0) -> SumReport:
    ratio = value / main if main != 0.0 else None
    return SumReport(value, main, ratio, trunc, params, 1000.0 * (time.perf_counter() - t0))


def _window_ints(lo: float, hi: float) -> np.ndarray:
    """Integers in (lo, hi]."""
    a = int(floor(lo)) + 1
    b = int(floor(hi))
    if b < a:
        return np.zeros(0, dtype=np.int64)
    return np.arange(a, b + 1, dtype=np.int64)


def _smooth_members(lo: float, hi: float, Y: float, q: int) -> np.ndarray:
    ns = _window_ints(lo, hi)
    if len(ns) == 0:
        return ns
    sv = smooth_sieve(int(ns[0]), int(ns[-1]), Y, q)
    return ns[sv.smooth & sv.coprime]


def _inner_sums(ms: np.ndarray, n_all: np.ndarray, ind: np.ndarray, R: float, q: int, a: int, budget: int):
    """A_m = Σ_n ind(n)·Φ_a(mn, R) and B_m = Σ_n Φ_a(mn, R), blocked."""
    if len(ms) * len(n_all) > budget:
        raise BudgetExceededError(f"{len(ms)} x {len(n_all)} pair loop exceeds budget")
    A = np.zeros(len(ms))
    B = np.zeros(len(ms))
    if len(ms) == 0 or len(n_all) == 0:
        return A, B
    n_mod = n_all % q
    amodq = a % q
    block = max(1, 4_000_000 // len(n_all))
    for i in range(0, len(ms), block):
        mb = ms[i : i + block]
        res = (((mb * amodq) % q)[:, None] * n_mod[None, :]) % q
        W = bump_phi_array(res / R)
        B[i : i + block] = W.sum(axis=1)
        A[i : i + block] = W @ ind
    return A, B


def sigma_qR(q: int, a: int, theta, C: float = 10.0, Y: float = None, budget: int = 10**9) -> SumReport:
    """Σ(q, R) = Σ_{X/4 ≤ n ≤ 4X} 1_{S_q(Y)}(n) Φ_a(n, R), exact, with the
    benchmark main term R^{2 − (1−θ)/(2C)} for the diagnostic ratio."""
    t0 = time.perf_counter()
    pr = derive_params(q, theta, C, Y)
    R, X = pr.R, pr.X
    lo = ceil(X / 4)
    hi = floor(4 * X)
    _check_weight_args(R, q, a)

    if pr.Y >= hi:
        # smoothness vacuous on the interval: walk the residues in the
        # support of the window
        if R / 2 > budget:
            raise BudgetExceededError("residue walk exceeds budget")
        value = 0.0
        from .arith import mod_inverse

        abar = mod_inverse(a, q)
        for r in range(max(1, floor(R / 4)), min(q - 1, ceil(3 * R / 4)) + 1):
            if gcd(r, q) != 1:
                continue
            w = bump_phi(r / R)
            if w == 0.0:
                continue
            n0 = lo + ((abar * r - lo) % q)
            if n0 <= hi:
                value += w * ((hi - n0) // q + 1)
    else:
        if hi - lo + 1 > budget:
            raise BudgetExceededError("interval exceeds budget")
        sv = smooth_sieve(lo, hi, pr.Y, q)
        ns = np.arange(lo, hi + 1, dtype=np.int64)
        keep = sv.smooth & sv.coprime
        res = ((ns[keep] % q) * (a % q)) % q
        value = float(np.sum(bump_phi_array(res / R)))

    theta_f = Fraction(theta)
    if Y is None:
        c_eff = C
    elif Y == float("inf"):
        c_eff = float("inf")
    else:
        c_eff = log(Y) / log(log(X))
    expo = 2.0 - float(1 - theta_f) / (2.0 * c_eff) if c_eff != float("inf") else 2.0
    main = R**expo
    params = {"q": q, "a": a, "theta": str(Fraction(theta)), "C": C, "Y": pr.Y, "X": X, "R": R}
    return _report(value, main, 0.0, params, t0)


def bilinear_B(params: DispersionParams, budget: int = 10**9) -> SumReport:
    """B(M, N) = Σ_{m∼M} 1_{S_q(Y)}(m) Σ_{n∼N} 1_{S_q(Y)}(n) Φ_a(mn, R).

    Benchmark main term: φ̂(0)·(R/q)·#{m} ·#{n} (the mean-window heuristic).
    """
    t0 = time.perf_counter()
    ms = _smooth_members(params.M, 2 * params.M, params.Y, params.q)
    n_all = _window_ints(params.N, 2 * params.N)
    if len(n_all):
        sv = smooth_sieve(int(n_all[0]), int(n_all[-1]), params.Y, params.q)
        ind = (sv.smooth & sv.coprime).astype(np.float64)
    else:
        ind = np.zeros(0)
    A, _ = _inner_sums(ms, n_all, ind, params.R, params.q, params.a, budget)
    value = float(A.sum())
    main = phi_hat_zero() * (params.R / params.q) * len(ms) * float(ind.sum())
    return _report(value, main, 0.0, _params_dict(params), t0)


def type1_report(params: DispersionParams, budget: int = 10**9) -> SumReport:
    """Σ_{m∼M} 1_{S_q(Y)}(m) Σ_{n∼N} Φ_a(mn, R) against the Type I main term
    φ̂(0)·(NR/q)·Σ_{m∼M} 1_{S_q(Y)}(m)."""
    t0 = time.perf_counter()
    ms = _smooth_members(params.M, 2 * params.M, params.Y, params.q)
    n_all = _window_ints(params.N, 2 * params.N)
    ind = np.zeros(len(n_all))
    A, B = _inner_sums(ms, n_all, ind, params.R, params.q, params.a, budget)
    value = float(B.sum())
    main = phi_hat_zero() * params.N * params.R / params.q * len(ms)
    return _report(value, main, 0.0, _params_dict(params), t0)


def dispersion_sums(params: DispersionParams, budget: int = 10**9):
    """The three opened-square sums and their combination:

    S′₁ = Σ_m φ(m/3M) A_m²,  S′₂ = K Σ_m φ(m/3M) A_m B_m,
    S′₃ = K² Σ_m φ(m/3M) B_m²,  S′ = S′₁ − 2S′₂ + S′₃,

    where A_m, B_m are the smooth-restricted and unrestricted inner sums and
    K = K(N, Y) is the local density.
    """
    ms = _window_ints(3 * params.M / 4 - 1, 9 * params.M / 4 + 1)
    w = bump_phi_array(ms / (3.0 * params.M))
    keep = w > 0.0
    ms, w = ms[keep], w[keep]
    n_all = _window_ints(params.N, 2 * params.N)
    if len(n_all):
        sv = smooth_sieve(int(n_all[0]), int(n_all[-1]), params.Y, params.q)
        ind = (sv.smooth & sv.coprime).astype(np.float64)
    else:
        ind = np.zeros(0)
    K = local_density(params.N, params.Y, params.q)
    A, B = _inner_sums(ms, n_all, ind, params.R, params.q, params.a, budget)
    S1 = float(np.sum(w * A * A))
    S2 = float(K * np.sum(w * A * B))
    S3 = float(K * K * np.sum(w * B * B))
    return S1, S2, S3, S1 - 2.0 * S2 + S3


def type2_report(params: DispersionParams, budget: int = 10**9) -> SumReport:
    """Discrepancy D = Σ_{m∼M} 1_{S_q(Y)}(m) Σ_{n∼N} (1_{S_q(Y)}(n) − K) Φ_a(mn, R)
    against the benchmark R^{2−η}, with the exact dispersion Cauchy–Schwarz
    check D² ≤ M·S′ attached."""
    t0 = time.perf_counter()
    ms = _smooth_members(params.M, 2 * params.M, params.Y, params.q)
    n_all = _window_ints(params.N, 2 * params.N)
    if len(n_all):
        sv = smooth_sieve(int(n_all[0]), int(n_all[-1]), params.Y, params.q)
        ind = (sv.smooth & sv.coprime).astype(np.float64)
    else:
        ind = np.zeros(0)
    K = local_density(params.N, params.Y, params.q)
    A, B = _inner_sums(ms, n_all, ind, params.R, params.q, params.a, budget)
    D = float(np.sum(A - K * B))
    S1, S2, S3, Sp = dispersion_sums(params, budget)
    cs_ok = D * D <= params.M * Sp * (1.0 + 1e-9) + 1e-12
    main = params.R ** (2.0 - params.eta)
    pd = _params_dict(params)
    pd["cauchy_schwarz"] = {"D_sq": D * D, "M_Sprime": params.M * Sp, "ok": bool(cs_ok)}
    pd["sums"] = {"S1": S1, "S2": S2, "S3": S3, "Sprime": Sp}
    return _report(D, main, 0.0, pd, t0)


def _params_dict(params: DispersionParams) -> dict:
    return {
        "M": params.M,
        "N": params.N,
        "q": params.q,
        "a": params.a,
        "R": params.R,
        "Y": params.Y,
        "theta": str(params.theta) if params.theta is not None else None,
        "delta": params.delta,
        "eta": params.eta,
        "flags": list(params.flags),
    }
