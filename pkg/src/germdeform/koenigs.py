"""Linearizing charts at repelling periodic points.

Around a repelling point of order q the q-fold composition is conjugate to
w -> lambda*w; the chart phi doing that (Koenigs coordinate, normalized to
phi' = 1 at the point) is computed as a truncated power series from the
functional equation, inverted by series reversion, and trusted only on a
disk whose radius is found by shrinking until the functional residual on a
validation ring passes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import ChartError, DomainError, EscapeError
from .germ import Germ
from .cycles import Cycle

SERIES_ORDER = 24
RESONANCE_TOL = 1e-10
CHART_RESIDUAL_TOL = 1e-9
RING_SAMPLES = 64
MAX_HALVINGS = 20
PSI_DOMAIN_FACTOR = 0.9
ITERATIVE_DEPTH = 40
ITERATIVE_STOP = 1e-12


def critical_points(germ: Germ) -> tuple[complex, ...]:
    """Roots of f' (all of them, inside U or not)."""
    d = germ.degree
    # highest power first for the companion-matrix root finder
    dcoeffs = [k * germ.coeffs[k - 1] for k in range(d, 0, -1)]
    roots = np.roots(np.array(dcoeffs, dtype=complex))
    return tuple(complex(r) for r in roots)


def _shifted_series(germ: Germ, p: complex, order: int) -> list[complex]:
    """Taylor coefficients of f(p+u) - f(p) in u, degrees 1..order.

    Exact binomial shift of the polynomial, so the constant term drops out
    with no numerical residue.
    """
    d = germ.degree
    out = [0j] * (order + 1)
    for k in range(1, d + 1):
        ck = germ.coeffs[k - 1]
        if ck == 0:
            continue
        binom = 1.0
        # walk m = 0..min(k, order), maintaining C(k, m)
        for m in range(0, min(k, order) + 1):
            if m > 0:
                out[m] += ck * binom * (p ** (k - m))
            binom = binom * (k - m) / (m + 1)
    return out[1:]


def _series_compose(outer: list[complex], inner: list[complex], order: int) -> list[complex]:
    # both series have zero constant term; coefficients are for degrees 1..order
    acc = [0j] * order
    power = inner[:order] + [0j] * (order - len(inner))
    power = power[:order]
    cur = list(power)
    for j, cj in enumerate(outer[:order], start=1):
        if j > 1:
            cur = _series_mul(cur, power, order)
        if cj != 0:
            for i in range(order):
                acc[i] += cj * cur[i]
    return acc


def _series_mul(a: list[complex], b: list[complex], order: int) -> list[complex]:
    # inputs indexed by degree-1, zero constant terms assumed
    out = [0j] * order
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        di = i + 1
        if di >= order:
            break
        for j, bj in enumerate(b):
            dj = j + 1
            if di + dj > order:
                break
            out[di + dj - 1] += ai * bj
    return out


def _series_eval(coeffs, u):
    acc = np.zeros_like(np.asarray(u)) if isinstance(u, np.ndarray) else 0j
    for c in reversed(coeffs):
        acc = acc * u + c
    return acc * u


def _series_eval_derivative(coeffs, u):
    acc = np.zeros_like(np.asarray(u)) if isinstance(u, np.ndarray) else 0j
    for k in range(len(coeffs), 0, -1):
        acc = acc * u + k * coeffs[k - 1]
    return acc


def _return_map_series(germ: Germ, points: tuple[complex, ...], base_index: int, order: int) -> list[complex]:
    """Series of f^q(center + u) - center in u, degrees 1..order."""
    q = len(points)
    cur = [1.0 + 0j] + [0j] * (order - 1)
    for step in range(q):
        p = points[(base_index + step) % q]
        shifted = _shifted_series(germ, p, order)
        cur = _series_compose(shifted, cur, order)
    return cur


def _reversion(a: list[complex], order: int) -> list[complex]:
    """Series B with A(B(w)) = w for A(u) = u + a2 u^2 + ...; a[0] must be 1."""
    b = [1.0 + 0j] + [0j] * (order - 1)
    for k in range(2, order + 1):
        comp = _series_compose(a, b, k)
        b[k - 1] = -comp[k - 1]
    return b


@dataclass(frozen=True)
class KoenigsChart:
    germ: Germ
    cycle: Cycle
    base_index: int
    center: complex
    multiplier: complex
    radius: float
    coeffs: tuple[complex, ...]      # phi(center + u) = u + coeffs[1]*u^2 + ...
    inverse_coeffs: tuple[complex, ...]

    def phi(self, z: complex) -> complex:
        z = complex(z)
        if abs(z - self.center) > self.radius:
            raise DomainError("point outside chart disk")
        return complex(_series_eval(self.coeffs, z - self.center))

    def dphi(self, z: complex) -> complex:
        z = complex(z)
        if abs(z - self.center) > self.radius:
            raise DomainError("point outside chart disk")
        return complex(_series_eval_derivative(self.coeffs, z - self.center))

    # vectorized, unchecked; grid samplers mask their own domains
    def phi_raw(self, z):
        return _series_eval(self.coeffs, z - self.center)

    def dphi_raw(self, z):
        return _series_eval_derivative(self.coeffs, z - self.center)

    def psi(self, w: complex) -> complex:
        """Inverse chart: series reversion estimate plus one Newton polish."""
        w = complex(w)
        if abs(w) > PSI_DOMAIN_FACTOR * self.radius:
            raise DomainError("coordinate outside inverse chart domain")
        u = complex(_series_eval(self.inverse_coeffs, w))
        # one Newton step on phi(center+u) = w sharpens the truncation error
        d = complex(_series_eval_derivative(self.coeffs, u))
        if d != 0:
            u = u - (complex(_series_eval(self.coeffs, u)) - w) / d
        return self.center + u

    def to_json(self) -> dict[str, Any]:
        return {
            "center": [self.center.real, self.center.imag],
            "multiplier": [self.multiplier.real, self.multiplier.imag],
            "order": self.cycle.order,
            "base_index": self.base_index,
            "radius": self.radius,
            "coeffs": [[c.real, c.imag] for c in self.coeffs],
            "inverse_coeffs": [[c.real, c.imag] for c in self.inverse_coeffs],
        }


def _ring(center: complex, radius: float, n: int = RING_SAMPLES):
    th = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    return center + radius * np.exp(1j * th)


def _functional_residual(germ: Germ, chart_coeffs, center, lam, radius, q) -> float:
    worst = 0.0
    for z in _ring(center, radius):
        z = complex(z)
        try:
            fz = germ.iterate(z, q).points[-1]
        except EscapeError:
            return math.inf
        if abs(fz - center) > 4.0 * radius * max(1.0, abs(lam)):
            return math.inf
        lhs = complex(_series_eval(chart_coeffs, fz - center))
        rhs = lam * complex(_series_eval(chart_coeffs, z - center))
        scale = max(abs(rhs), 1e-300)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst


def _roundtrip_residual(chart: KoenigsChart) -> float:
    worst = 0.0
    for z in _ring(chart.center, 0.5 * chart.radius):
        z = complex(z)
        back = chart.psi(chart.phi(z))
        worst = max(worst, abs(back - z) / max(abs(z - chart.center), 1e-300))
    return worst


def build_chart(germ: Germ, cycle: Cycle, base_index: int = 0) -> KoenigsChart:
    """Koenigs chart at one point of a repelling cycle.

    Raises ChartError on resonance (|lambda^k - lambda| below the guard for
    some series degree) or when no radius passes validation.
    """
    if cycle.kind != "repelling":
        raise ChartError("chart requires a repelling cycle (got %s)" % cycle.kind)
    q = cycle.order
    base_index %= q
    center = cycle.points[base_index]

    fser = _return_map_series(germ, cycle.points, base_index, SERIES_ORDER)
    lam = fser[0]
    if abs(lam - cycle.multiplier) > 1e-6 * max(1.0, abs(lam)):
        raise ChartError("series linear term disagrees with cycle multiplier")

    # phi coefficients from phi(F(u)) = lambda * phi(u), a1 = 1
    a = [1.0 + 0j] + [0j] * (SERIES_ORDER - 1)
    powers = [None, list(fser)]  # powers[j] = series of F^j, truncated
    for j in range(2, SERIES_ORDER + 1):
        powers.append(_series_mul(powers[j - 1], fser, SERIES_ORDER))
    for k in range(2, SERIES_ORDER + 1):
        denom = lam ** k - lam
        if abs(denom) < RESONANCE_TOL:
            raise ChartError("resonance at series degree %d" % k)
        s = 0j
        for j in range(1, k):
            s += a[j - 1] * powers[j][k - 1]
        a[k - 1] = -s / denom
    b = _reversion(a, SERIES_ORDER)

    other = [cycle.points[i] for i in range(q) if i != base_index]
    crit = [c for c in critical_points(germ)]
    dists = [abs(center - p) for p in other + crit if abs(center - p) > 0]
    r0 = 0.9 * (germ.radius_U - abs(center))
    if dists:
        r0 = min(r0, 0.5 * min(dists))
    if r0 <= 0:
        raise ChartError("cycle point leaves no room for a chart disk")

    radius = r0
    for _ in range(MAX_HALVINGS + 1):
        if _functional_residual(germ, a, center, lam, radius, q) < CHART_RESIDUAL_TOL:
            chart = KoenigsChart(
                germ=germ,
                cycle=cycle,
                base_index=base_index,
                center=center,
                multiplier=complex(lam),
                radius=radius,
                coeffs=tuple(a),
                inverse_coeffs=tuple(b),
            )
            if _roundtrip_residual(chart) < CHART_RESIDUAL_TOL:
                return chart
        radius *= 0.5
    raise ChartError("no chart radius passed validation after %d halvings" % MAX_HALVINGS)


def phi_iterative(chart: KoenigsChart, z: complex, depth: int = ITERATIVE_DEPTH) -> complex:
    """Koenigs coordinate by its defining limit, independent of the series.

    Walks the inverse branch of the return map toward the cycle point and
    rescales: phi(z) = lim lambda^n * (F^{-n}(z) - center). Used to
    cross-check the series route.
    """
    germ = chart.germ
    pts = chart.cycle.points
    q = chart.cycle.order
    i0 = chart.base_index
    w = complex(z)
    cur_idx = i0
    est_prev = w - chart.center
    change_prev = math.inf
    for n in range(1, depth + 1):
        # one inverse step of f^q along the cycle, linearized guesses
        for s in range(q):
            src_idx = (cur_idx - 1) % q
            target = pts[src_idx]
            guess = target + (w - pts[cur_idx]) / germ.derivative_raw(target)
            # tight tolerance: the rescaling amplifies step errors by lambda^n
            w = germ.inverse_step(w, guess, tol=1e-15)
            cur_idx = src_idx
        est = (chart.multiplier ** n) * (w - chart.center)
        change = abs(est - est_prev)
        if change < ITERATIVE_STOP * max(1.0, abs(est)):
            return complex(est)
        if n > 4 and change > change_prev:
            # amplified rounding noise has taken over; the previous
            # estimate sits at the accuracy floor
            return complex(est_prev)
        est_prev = est
        change_prev = change
    return complex(est_prev)
