"""Local model of the deformed germ near one repelling cycle.

Conjugating the torus shear back through the linearizing chart gives an
explicit (non-holomorphic) local conjugacy k with k(f(z)) = f1(k(z)) near
the cycle, where f1 has the target multiplier. The deformed return map is
evaluated piecewise, one chart per cycle point, and its multiplier is
measured by a Cauchy derivative on a small circle, with a two-radius
agreement gate before the number is trusted.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .beltrami import TorusShear, shear_coefficient
from .cycles import Cycle
from .errors import DomainError, UnreliableEstimateError
from .germ import Germ
from .koenigs import KoenigsChart, build_chart
from .numdiff import wirtinger_pair

TWO_PI_I = 2j * math.pi
WORKING_FACTOR = 0.25
MEASURE_POINTS = 256
MEASURE_AGREEMENT = 1e-5
RESIDUAL_RADII = 8
RESIDUAL_ANGLES = 8
RESIDUAL_STEP_REL = 1e-5


@dataclass(frozen=True)
class LocalConjugacy:
    """Charts at every point of one repelling cycle plus the shear that
    retargets its multiplier."""

    germ: Germ
    cycle: Cycle
    shear: TorusShear
    charts: tuple[KoenigsChart, ...]

    @classmethod
    def build(cls, germ: Germ, cycle: Cycle, target: complex) -> "LocalConjugacy":
        shear = shear_coefficient(cycle.multiplier, target)
        charts = tuple(build_chart(germ, cycle, i) for i in range(cycle.order))
        return cls(germ=germ, cycle=cycle, shear=shear, charts=charts)

    @property
    def target(self) -> complex:
        return self.shear.lam_prime

    def working_radius(self, index: int = 0) -> float:
        return WORKING_FACTOR * self.charts[index % self.cycle.order].radius

    def _nearest_index(self, z: complex) -> int:
        pts = self.cycle.points
        return min(range(len(pts)), key=lambda i: abs(z - pts[i]))

    def _shear_in_chart(self, z: complex, index: int, inverse: bool) -> complex:
        chart = self.charts[index]
        z = complex(z)
        if z == chart.center:
            return chart.center
        ph = chart.phi(z)
        if ph == 0:
            return chart.center
        xi = cmath.log(ph) / TWO_PI_I
        eta = self.shear.apply_inverse(xi) if inverse else self.shear.apply(xi)
        w = cmath.exp(TWO_PI_I * eta)
        return chart.psi(w)

    def k_eval(self, z: complex) -> complex:
        """The straightening near its cycle point: maps the germ's local
        dynamics to the deformed model's."""
        i = self._nearest_index(z)
        return self._shear_in_chart(z, i, inverse=False)

    def k_inverse(self, z: complex) -> complex:
        i = self._nearest_index(z)
        return self._shear_in_chart(z, i, inverse=True)

    def deformed_eval(self, z: complex) -> complex:
        """One step of the deformed map f1 = k o f o k^{-1}, using the chart
        at the nearest cycle point on the way in and the next chart on the
        way out."""
        i = self._nearest_index(z)
        q = self.cycle.order
        u = self._shear_in_chart(z, i, inverse=True)
        v = self.germ.eval(u)
        return self._shear_in_chart(v, (i + 1) % q, inverse=False)

    def deformed_return_map(self, z: complex) -> complex:
        w = complex(z)
        for _ in range(self.cycle.order):
            w = self.deformed_eval(w)
        return w


def cauchy_cycle_derivative(
    step_fn: Callable[[complex], complex],
    center: complex,
    order: int,
    radius: float,
    n_points: int = MEASURE_POINTS,
) -> complex:
    """Derivative at a fixed point of the order-fold composition of step_fn,
    by the trapezoid Cauchy integral on a circle."""
    theta = np.linspace(0.0, 2.0 * math.pi, n_points, endpoint=False)
    total = 0j
    for t in theta:
        z = center + radius * cmath.exp(1j * t)
        w = z
        for _ in range(order):
            w = step_fn(w)
        total += (w - center) * cmath.exp(-1j * t)
    return total / (n_points * radius)


def measure_multiplier(lc: LocalConjugacy, n_points: int = MEASURE_POINTS) -> complex:
    """Measured multiplier of the deformed cycle.

    The circle radius starts at an eighth of the chart radius and shrinks
    until the pulled-back circle sits well inside the chart (the inverse
    conjugacy expands when the target multiplier is larger). Estimates at
    the chosen radius and half of it must agree to 1e-5 relative; the
    half-radius estimate is returned.
    """
    chart = lc.charts[0]
    center = chart.center
    rho = chart.radius / 8.0
    for _ in range(24):
        ok = True
        for t in np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False):
            z = center + rho * cmath.exp(1j * t)
            try:
                u = lc.k_inverse(z)
            except DomainError:
                ok = False
                break
            if abs(u - center) > chart.radius / 3.0:
                ok = False
                break
        if ok:
            break
        rho *= 0.5
    else:
        raise UnreliableEstimateError("no usable measuring radius found")

    def attempt(r: float) -> complex:
        return cauchy_cycle_derivative(lc.deformed_eval, center, lc.cycle.order, r, n_points)

    for _ in range(8):
        try:
            m1 = attempt(rho)
            m2 = attempt(rho / 2.0)
        except DomainError:
            rho *= 0.5
            continue
        if abs(m1 - m2) > MEASURE_AGREEMENT * max(abs(m2), 1e-300):
            raise UnreliableEstimateError(
                "two-radius multiplier estimates disagree: %r vs %r" % (m1, m2)
            )
        return m2
    raise UnreliableEstimateError("measuring circle could not be placed inside the chart")


def holomorphy_residual(
    fn: Callable[[complex], complex],
    center: complex,
    radius: float,
    n_radii: int = RESIDUAL_RADII,
    n_angles: int = RESIDUAL_ANGLES,
    step_rel: float = RESIDUAL_STEP_REL,
    auto_shrink: bool = False,
) -> float:
    """max |dbar fn| / |d fn| over a polar grid in the disk.

    Near zero for holomorphic maps (finite-difference noise only); of order
    |mu| for a map with Beltrami coefficient mu. With auto_shrink the disk
    is halved until every probe point is inside fn's domain; the ratio
    itself does not depend on the disk size for the maps probed here.
    """
    if radius <= 0:
        raise DomainError("residual probe needs a positive radius")
    for _ in range(20 if auto_shrink else 1):
        h = step_rel * radius
        worst = 0.0
        seen = False
        try:
            for i in range(n_radii):
                r = radius * (0.1 + 0.7 * i / max(1, n_radii - 1))
                for j in range(n_angles):
                    z = center + r * cmath.exp(2j * math.pi * j / n_angles)
                    d, dbar = wirtinger_pair(fn, z, h)
                    if abs(d) < 1e-30:
                        continue
                    seen = True
                    worst = max(worst, abs(dbar) / abs(d))
        except DomainError:
            if not auto_shrink:
                raise
            radius *= 0.5
            continue
        if not seen:
            raise DomainError("derivative vanished at every probe point")
        return worst
    raise DomainError("no probe radius fit inside the map's domain")
