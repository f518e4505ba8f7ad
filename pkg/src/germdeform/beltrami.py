"""Torus shears and the invariant Beltrami field they induce.

The multiplier of a repelling cycle lives naturally on a torus: the quotient
of the punctured chart coordinate by multiplication with lambda. Changing
lambda to a new repelling target is an affine shear of that torus, whose
Beltrami coefficient is constant there. Pulling the constant back through
the chart and transporting it along backward orbits of the germ produces a
field invariant under the dynamics; straightening that field realizes the
new multiplier. This module computes the shear and samples the field.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import ConvergenceError, DomainError, ShearError, SingularDerivativeError
from .germ import Germ
from .koenigs import KoenigsChart

TWO_PI = 2.0 * math.pi
NEAR_DEGENERATE = 1.0 - 1e-9
PUNCTURE_RADIUS = 1e-8
TRANSPORT_DEPTH = 200
REPELLING_FLOOR = 1.0 + 1e-9


def tau_of(lam: complex) -> complex:
    """Torus modulus of a multiplier: (arg - i*log||)/(2*pi), in the upper
    half plane exactly when |lam| > 1."""
    lam = complex(lam)
    if lam == 0:
        raise DomainError("multiplier must be nonzero")
    return complex(cmath.phase(lam) - 1j * math.log(abs(lam))) / TWO_PI


@dataclass(frozen=True)
class TorusShear:
    """Affine torus map xi -> a*xi + b*conj(xi) sending modulus tau to
    tau_prime, fixing the lattice direction 1 (a + b = 1)."""

    lam: complex
    lam_prime: complex
    tau: complex
    tau_prime: complex
    mu: complex
    a: complex
    b: complex

    def apply(self, xi: complex) -> complex:
        return self.a * xi + self.b * xi.conjugate()

    def apply_inverse(self, eta: complex) -> complex:
        det = abs(self.a) ** 2 - abs(self.b) ** 2
        if abs(det) < 1e-300:
            raise ShearError("shear is numerically non-invertible")
        return (self.a.conjugate() * eta - self.b * eta.conjugate()) / det


def shear_coefficient(lam: complex, lam_prime: complex) -> TorusShear:
    """The shear carrying multiplier lam to lam_prime, both repelling.

    The Beltrami coefficient comes out two ways, the log-ratio form
    -L/(2 log|lam| + L) with L = Log(lam'/lam), and the modulus form
    (tau - tau')/(tau' - conj tau); the branch below makes them identical.
    """
    lam = complex(lam)
    lam_prime = complex(lam_prime)
    for name, val in (("lam", lam), ("lam_prime", lam_prime)):
        if not (math.isfinite(val.real) and math.isfinite(val.imag)):
            raise DomainError("%s must be finite" % name)
        if abs(val) <= REPELLING_FLOOR:
            raise ShearError("%s must be repelling, |%s| = %g" % (name, name, abs(val)))
    ell = cmath.log(lam_prime / lam)
    denom = 2.0 * math.log(abs(lam)) + ell
    if abs(denom) < 1e-300:
        raise ShearError("degenerate shear denominator")
    mu = -ell / denom
    if abs(mu) >= NEAR_DEGENERATE:
        raise ShearError("shear coefficient too close to the unit circle")
    tau = tau_of(lam)
    # branch chosen so the shift tau -> tau' equals Log(ratio)/(2*pi*i);
    # keeps the two mu formulas equal even when arg(lam') wraps
    tau_prime = tau + ell / (2j * math.pi)
    d = tau - tau.conjugate()
    a = (tau_prime - tau.conjugate()) / d
    b = (tau - tau_prime) / d
    return TorusShear(
        lam=lam, lam_prime=lam_prime, tau=tau, tau_prime=tau_prime,
        mu=complex(mu), a=complex(a), b=complex(b),
    )


def pullback_by_holomorphic(mu_val: complex, gprime_over_g_factor: complex) -> complex:
    """Beltrami pullback under a holomorphic map with derivative factor g':
    mu -> mu * conj(g')/g'."""
    if gprime_over_g_factor == 0:
        raise DomainError("pullback derivative factor must be nonzero")
    return mu_val * gprime_over_g_factor.conjugate() / gprime_over_g_factor


def transport_forward(mu_val: complex, derivative_product: complex) -> complex:
    """Push a coefficient forward along an orbit with chain-rule product P:
    mu -> mu * P/conj(P) (unimodular factor, |mu| is preserved)."""
    if derivative_product == 0:
        raise DomainError("transport needs a nonvanishing derivative product")
    return mu_val * derivative_product / derivative_product.conjugate()


@dataclass(frozen=True)
class FieldEntry:
    chart: KoenigsChart
    shear: TorusShear


@dataclass(frozen=True)
class BeltramiField:
    """Invariant field built from shears at one or more repelling cycles.

    Entries must sit on distinct cycles; each contributes the pullback of
    its constant torus coefficient on the chart disk, spread to the rest of
    the plane by backward iteration. Points whose backward orbit never hits
    a chart disk (or escapes the working disk) carry coefficient 0.
    """

    germ: Germ
    entries: tuple[FieldEntry, ...]
    transport_depth: int = TRANSPORT_DEPTH

    def __post_init__(self):
        if not self.entries:
            raise DomainError("field needs at least one chart entry")
        centers = []
        for e in self.entries:
            for p in e.chart.cycle.points:
                for c in centers:
                    if abs(p - c) < 1e-9:
                        raise DomainError("field entries must sit on distinct cycles")
            centers.extend(e.chart.cycle.points)

    def _chart_hit(self, w: complex):
        for e in self.entries:
            if abs(w - e.chart.center) <= e.chart.radius:
                return e
        return None

    def _seed_value(self, entry: FieldEntry, w: complex) -> complex:
        # chart-disk coefficient: constant torus value pulled back through
        # xi = Log(phi)/(2*pi*i), whose derivative factor is phi'/(2*pi*i*phi)
        c = entry.chart.center
        if abs(w - c) < PUNCTURE_RADIUS:
            d = w - c
            d = d / abs(d) if d != 0 else 1.0 + 0j
            w = c + PUNCTURE_RADIUS * d
        ph = entry.chart.phi_raw(w)
        dph = entry.chart.dphi_raw(w)
        g = dph / (2j * math.pi * ph)
        return pullback_by_holomorphic(entry.shear.mu, complex(g))

    def value(self, z: complex, diagnostics: dict[str, Any] | None = None) -> complex:
        """Field coefficient at one point, by honest backward walking."""
        z = complex(z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise DomainError("point must be finite")
        w = z
        prod = 1.0 + 0j  # derivative of f^m along the walked-back orbit
        for m in range(self.transport_depth + 1):
            if abs(w) > self.germ.radius_U:
                if diagnostics is not None:
                    diagnostics["escaped"] = diagnostics.get("escaped", 0) + 1
                return 0j
            hit = self._chart_hit(w)
            if hit is not None:
                nu = self._seed_value(hit, w)
                return complex(transport_forward(nu, prod))
            try:
                w_prev = self.germ.inverse_step(w, guess=w)
            except (ConvergenceError, SingularDerivativeError):
                if diagnostics is not None:
                    diagnostics["stalled"] = diagnostics.get("stalled", 0) + 1
                return 0j
            prod *= self.germ.derivative_raw(w_prev)
            w = w_prev
        if diagnostics is not None:
            diagnostics["depth_exhausted"] = diagnostics.get("depth_exhausted", 0) + 1
        return 0j

    def sample_grid(self, z_grid: np.ndarray, diagnostics: dict[str, Any] | None = None) -> np.ndarray:
        """Vectorized field over an array of points (same backward walk,
        batched; points that stall or escape get 0)."""
        germ = self.germ
        w = np.array(z_grid, dtype=complex)
        shape = w.shape
        w = w.ravel()
        mu = np.zeros_like(w)
        prod = np.ones_like(w)
        active = np.isfinite(w)
        escaped_total = 0
        for m in range(self.transport_depth + 1):
            if not active.any():
                break
            esc = active & (np.abs(w) > germ.radius_U)
            escaped_total += int(np.count_nonzero(esc))
            active &= ~esc
            for e in self.entries:
                hit = active & (np.abs(w - e.chart.center) <= e.chart.radius)
                if hit.any():
                    wh = w[hit]
                    d = wh - e.chart.center
                    tiny = np.abs(d) < PUNCTURE_RADIUS
                    if tiny.any():
                        dt = d[tiny]
                        adt = np.abs(dt)
                        unit = np.where(adt == 0, 1.0 + 0j, dt / np.where(adt == 0, 1.0, adt))
                        wh = wh.copy()
                        wh[tiny] = e.chart.center + PUNCTURE_RADIUS * unit
                    ph = e.chart.phi_raw(wh)
                    dph = e.chart.dphi_raw(wh)
                    g = dph / (2j * math.pi * ph)
                    nu = e.shear.mu * np.conj(g) / g
                    p = prod[hit]
                    mu[hit] = nu * p / np.conj(p)
                    active &= ~hit
            if not active.any():
                break
            # one batched Newton inverse step from the current position
            wa = w[active]
            zn = wa.copy()
            ok = np.ones(wa.shape, dtype=bool)
            for _ in range(40):
                fz = germ.eval_raw(zn)
                r = fz - wa
                conv = np.abs(r) <= 1e-12 * np.maximum(1.0, np.abs(wa))
                if conv.all():
                    break
                dfz = germ.derivative_raw(zn)
                bad = np.abs(dfz) < 1e-14
                ok &= ~bad
                step = np.where(bad, 0, r / np.where(bad, 1, dfz))
                zn = zn - np.where(conv, 0, step)
            fz = germ.eval_raw(zn)
            ok &= np.abs(fz - wa) <= 1e-10 * np.maximum(1.0, np.abs(wa))
            ok &= np.isfinite(zn)
            idx = np.flatnonzero(active)
            stalled = idx[~ok]
            active[stalled] = False
            good = idx[ok]
            w[good] = zn[ok]
            prod[good] = prod[good] * germ.derivative_raw(zn[ok])
        if diagnostics is not None:
            diagnostics["escaped"] = escaped_total
            diagnostics["unresolved"] = int(np.count_nonzero(active))
            diagnostics["max_abs"] = float(np.max(np.abs(mu))) if mu.size else 0.0
            diagnostics["support_fraction"] = float(np.mean(np.abs(mu) > 0))
        return mu.reshape(shape)


def field_to_csv(z_grid: np.ndarray, mu_grid: np.ndarray) -> str:
    """Flat deterministic table of sampled coefficients."""
    lines = ["re,im,mu_re,mu_im"]
    zf = np.asarray(z_grid).ravel()
    mf = np.asarray(mu_grid).ravel()
    for z, m in zip(zf, mf):
        lines.append("%.17g,%.17g,%.17g,%.17g" % (z.real, z.imag, m.real, m.imag))
    return "\n".join(lines) + "\n"
