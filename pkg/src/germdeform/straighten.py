"""Straightening a Beltrami field on a square grid, and what it buys.

The straightening map h solves dbar(h) = mu * d(h), fixes 0 and 1, and is
computed by a fixed-point sweep in the derivative variable, diagonalized by
the FFT. Central-difference Wirtinger operators make the sweep multiplier
unimodular, so the iteration contracts whenever sup|mu| < 1. The four modes
the central stencil cannot see (mean and the three Nyquist corners) are
matched explicitly through an affine channel and three checkerboard kernel
terms. Conjugating the germ by h realizes the requested multipliers
globally; sampling h along a parameter path gives the motion probe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .beltrami import BeltramiField, FieldEntry
from .cycles import Cycle, find_cycles
from .errors import (
    ConvergenceError,
    DomainError,
    EscapeError,
    InsufficientDataError,
    ShearError,
    SingularDerivativeError,
    UnreliableEstimateError,
)
from .germ import Germ
from .local_deform import LocalConjugacy, cauchy_cycle_derivative

SOLVER_TOL = 1e-8
MAX_SWEEPS = 200
DEFAULT_GRID = 1024
DEFAULT_PAD = 2
MU_SUP_CAP = 1.0 - 1e-3
BORDER_FRACTION = 0.05
INVERSE_NEWTON_STEPS = 6
INVERSE_TOL = 1e-7
GLOBAL_MEASURE_FACTOR = 0.45
GLOBAL_AGREEMENT = 1e-3
MOTION_GRID = 256
MOTION_TOL = 1e-10

_BOX_MIN_HALF_WIDTH = 1.25


@dataclass(frozen=True)
class Box:
    """Square window [cx - W, cx + W) x [cy - W, cy + W), sampled on an
    N x N lattice with the right endpoint excluded (FFT convention)."""

    center: complex = 0j
    half_width: float = _BOX_MIN_HALF_WIDTH

    def __post_init__(self):
        if not (math.isfinite(self.half_width) and self.half_width > 0):
            raise DomainError("box half width must be positive and finite")
        if not (math.isfinite(self.center.real) and math.isfinite(self.center.imag)):
            raise DomainError("box center must be finite")

    def spacing(self, n: int) -> float:
        return 2.0 * self.half_width / n

    def nodes(self, n: int) -> np.ndarray:
        dx = self.spacing(n)
        xs = self.center.real - self.half_width + dx * np.arange(n)
        ys = self.center.imag - self.half_width + dx * np.arange(n)
        gx, gy = np.meshgrid(xs, ys, indexing="xy")
        return gx + 1j * gy

    def extents(self) -> tuple[float, float, float, float]:
        return (
            self.center.real - self.half_width,
            self.center.real + self.half_width,
            self.center.imag - self.half_width,
            self.center.imag + self.half_width,
        )


def box_for(germ: Germ) -> Box:
    # keep the normalization point z = 1 strictly inside
    return Box(0j, max(2.0 * germ.radius_U, _BOX_MIN_HALF_WIDTH))


def _central_symbols(n: int, dx: float):
    j = np.fft.fftfreq(n, d=1.0 / n)  # integer mode indices
    s = np.sin(2.0 * np.pi * j / n) / dx
    s[np.abs(j.astype(int)) == n // 2] = 0.0  # exact zero at Nyquist
    sx = s[None, :]
    sy = s[:, None]
    return sx + 1j * sy  # s_c; dbar symbol is (i/2) s_c, d symbol (i/2) conj(s_c)


def _corner_bins(n: int):
    half = n // 2
    return ((0, half), (half, 0), (half, half))


def _checkerboards(n: int):
    sign = (-1.0) ** np.arange(n)
    c1 = np.broadcast_to(sign[None, :], (n, n))   # alternates along x
    c2 = np.broadcast_to(sign[:, None], (n, n))   # alternates along y
    c3 = c1 * c2
    return c1, c2, c3


_KERNEL_DBAR = (-0.5, -0.5j, -0.5)
_KERNEL_D = (-0.5, +0.5j, -0.5)


class GridMap:
    """Sampled straightening map with interpolation, inversion, and a
    finite-difference Beltrami readback.

    samples[i, j] is h at node (row i, col j) of box.nodes(n); h is already
    normalized to fix 0 and 1.
    """

    def __init__(self, box: Box, samples: np.ndarray, diagnostics: dict[str, Any] | None = None):
        samples = np.asarray(samples, dtype=complex)
        if samples.ndim != 2 or samples.shape[0] != samples.shape[1]:
            raise DomainError("grid map samples must be square")
        if not np.isfinite(samples.view(float)).all():
            raise DomainError("grid map samples must be finite")
        self.box = box
        self.n = samples.shape[0]
        self.samples = samples
        self.diagnostics = dict(diagnostics or {})
        self._interp = None
        self._deriv = None
        self._tree = None

    # ---- evaluation ----------------------------------------------------

    def _displacement_interp(self):
        if self._interp is None:
            disp = self.samples - self.box.nodes(self.n)
            self._interp = (
                ndimage.spline_filter(disp.real, order=3, mode="nearest"),
                ndimage.spline_filter(disp.imag, order=3, mode="nearest"),
            )
        return self._interp

    def _coords(self, z: np.ndarray):
        x0, _, y0, _ = self.box.extents()
        dx = self.box.spacing(self.n)
        col = (z.real - x0) / dx
        row = (z.imag - y0) / dx
        return np.vstack([row.ravel(), col.ravel()]), z.shape

    def __call__(self, z):
        """h at arbitrary points inside the box (bicubic in h - z)."""
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        zz = np.atleast_1d(z)
        x0, x1, y0, y1 = self.box.extents()
        if (
            np.any(zz.real < x0) or np.any(zz.real > x1)
            or np.any(zz.imag < y0) or np.any(zz.imag > y1)
        ):
            raise DomainError("evaluation point outside grid box")
        fre, fim = self._displacement_interp()
        coords, shape = self._coords(zz)
        out = (
            ndimage.map_coordinates(fre, coords, order=3, prefilter=False, mode="nearest")
            + 1j * ndimage.map_coordinates(fim, coords, order=3, prefilter=False, mode="nearest")
        ).reshape(shape) + zz
        return complex(out[0]) if scalar else out

    # ---- derivatives and inversion --------------------------------------

    def _derivative_interps(self):
        if self._deriv is None:
            dx = self.box.spacing(self.n)
            s = self.samples
            fx = (np.roll(s, -1, axis=1) - np.roll(s, 1, axis=1)) / (2 * dx)
            fy = (np.roll(s, -1, axis=0) - np.roll(s, 1, axis=0)) / (2 * dx)
            d = 0.5 * (fx - 1j * fy)
            db = 0.5 * (fx + 1j * fy)
            self._deriv = tuple(
                ndimage.spline_filter(a, order=3, mode="nearest")
                for a in (d.real, d.imag, db.real, db.imag)
            )
        return self._deriv

    def derivatives_at(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        dre, dim, bre, bim = self._derivative_interps()
        coords, shape = self._coords(z)
        d = (
            ndimage.map_coordinates(dre, coords, order=3, prefilter=False, mode="nearest")
            + 1j * ndimage.map_coordinates(dim, coords, order=3, prefilter=False, mode="nearest")
        ).reshape(shape)
        db = (
            ndimage.map_coordinates(bre, coords, order=3, prefilter=False, mode="nearest")
            + 1j * ndimage.map_coordinates(bim, coords, order=3, prefilter=False, mode="nearest")
        ).reshape(shape)
        return d, db

    def inverse(self, w, newton_steps: int = INVERSE_NEWTON_STEPS):
        """Preimage under h: nearest sampled value as seed, then Newton with
        the real-linear Wirtinger step."""
        w = np.asarray(w, dtype=complex)
        scalar = w.ndim == 0
        ww = np.atleast_1d(w).ravel()
        if self._tree is None:
            vals = self.samples.ravel()
            self._tree = cKDTree(np.column_stack([vals.real, vals.imag]))
        _, idx = self._tree.query(np.column_stack([ww.real, ww.imag]))
        nodes = self.box.nodes(self.n).ravel()
        z = nodes[idx].astype(complex)
        for _ in range(2):
            for _ in range(newton_steps):
                r = self(z) - ww
                d, db = self.derivatives_at(z)
                det = np.abs(d) ** 2 - np.abs(db) ** 2
                if np.any(np.abs(det) < 1e-14):
                    raise SingularDerivativeError("grid map inverse hit a degenerate cell")
                z = z - (np.conj(d) * r - db * np.conj(r)) / det
            res = np.max(np.abs(self(z) - ww) / np.maximum(1.0, np.abs(ww)))
            if res <= INVERSE_TOL:
                break
        else:
            raise ConvergenceError("grid map inversion stalled at residual %g" % res)
        z = z.reshape(np.atleast_1d(w).shape)
        return complex(z[0]) if scalar else z

    def beltrami_at(self, z: complex) -> complex:
        """mu = dbar h / d h from raw central differences at the nearest
        interior node. No interpolation, so it is an honest readback."""
        z = complex(z)
        x0, _, y0, _ = self.box.extents()
        dx = self.box.spacing(self.n)
        j = int(round((z.real - x0) / dx))
        i = int(round((z.imag - y0) / dx))
        if not (2 <= i < self.n - 2 and 2 <= j < self.n - 2):
            raise DomainError("point too close to the grid border for a derivative readback")
        s = self.samples
        fx = (s[i, j + 1] - s[i, j - 1]) / (2 * dx)
        fy = (s[i + 1, j] - s[i - 1, j]) / (2 * dx)
        d = 0.5 * (fx - 1j * fy)
        db = 0.5 * (fx + 1j * fy)
        if abs(d) < 1e-10:
            raise SingularDerivativeError("holomorphic derivative vanished at readback node")
        return complex(db / d)

    # ---- serialization ---------------------------------------------------

    def to_bytes(self) -> bytes:
        import struct

        head = struct.pack("<I", self.n) + struct.pack("<4d", *self.extents_for_io())
        body = np.empty((self.n, self.n, 2), dtype="<f8")
        body[:, :, 0] = self.samples.real
        body[:, :, 1] = self.samples.imag
        return head + body.tobytes(order="C")

    def extents_for_io(self):
        return self.box.extents()

    @classmethod
    def from_bytes(cls, raw: bytes) -> "GridMap":
        import struct

        if len(raw) < 4 + 32:
            raise DomainError("grid map blob too short")
        (n,) = struct.unpack_from("<I", raw, 0)
        x0, x1, y0, y1 = struct.unpack_from("<4d", raw, 4)
        expected = 4 + 32 + n * n * 16
        if len(raw) != expected:
            raise DomainError("grid map blob has wrong length for n = %d" % n)
        body = np.frombuffer(raw, dtype="<f8", offset=36).reshape(n, n, 2)
        samples = body[:, :, 0] + 1j * body[:, :, 1]
        box = Box(complex((x0 + x1) / 2, (y0 + y1) / 2), (x1 - x0) / 2)
        return cls(box, samples)

    def sidecar(self) -> dict[str, Any]:
        x0, x1, y0, y1 = self.box.extents()
        out = {"n": self.n, "box": [x0, x1, y0, y1]}
        out.update(self.diagnostics)
        return out


def solve_beltrami(
    mu: np.ndarray,
    box: Box,
    tol: float = SOLVER_TOL,
    max_sweeps: int = MAX_SWEEPS,
    pad: int = DEFAULT_PAD,
) -> GridMap:
    """Normalized solution of dbar h = mu * d h on the box.

    mu is sampled on box.nodes(n). A border frame is zeroed (the field is
    expected to be compactly supported well inside the box), the problem is
    embedded in a pad-times larger periodic grid to push wraparound images
    away, and the fixed point iterates the derivative field with mean and
    Nyquist-corner channels matched explicitly each sweep.
    """
    mu = np.array(mu, dtype=complex)
    if mu.ndim != 2 or mu.shape[0] != mu.shape[1]:
        raise DomainError("mu grid must be square")
    n0 = mu.shape[0]
    if n0 < 16 or n0 % 2:
        raise DomainError("mu grid size must be even and at least 16")
    if not np.isfinite(mu.view(float)).all():
        raise DomainError("mu grid must be finite")
    sup = float(np.max(np.abs(mu)))
    if sup > MU_SUP_CAP:
        raise DomainError("sup|mu| = %g exceeds the solvable cap %g" % (sup, MU_SUP_CAP))
    if pad < 1:
        raise DomainError("pad factor must be >= 1")

    frame = max(2, int(BORDER_FRACTION * n0))
    clipped = 0
    fr = mu.copy()
    interior = np.zeros_like(mu, dtype=bool)
    interior[frame:-frame, frame:-frame] = True
    clipped = int(np.count_nonzero(np.abs(mu[~interior]) > 0))
    fr[~interior] = 0
    mu = fr

    n = n0 * pad
    work = np.zeros((n, n), dtype=complex)
    off = (n - n0) // 2
    work[off : off + n0, off : off + n0] = mu

    dx = box.spacing(n0)
    sc = _central_symbols(n, dx)
    degenerate = sc == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        s_mult = np.where(degenerate, 0, np.conj(sc) / sc)
        c_mult = np.where(degenerate, 0, -2j / sc)
    corners = _corner_bins(n)
    boards = _checkerboards(n)

    rho = np.zeros((n, n), dtype=complex)
    gam = np.zeros(3, dtype=complex)
    sweeps = 0
    change = math.inf
    for sweeps in range(1, max_sweeps + 1):
        s_rho = np.fft.ifft2(np.fft.fft2(rho) * s_mult)
        dh_extra = sum(g * dk * ck for g, dk, ck in zip(gam, _KERNEL_D, boards))
        t = work * (1.0 + s_rho + dh_extra)
        th = np.fft.fft2(t)
        beta = th[0, 0] / (n * n)
        new_gam = np.array(
            [th[c] / (n * n) / _KERNEL_DBAR[k] for k, c in enumerate(corners)],
            dtype=complex,
        )
        th[0, 0] = 0
        for c in corners:
            th[c] = 0
        rho_new = np.fft.ifft2(th)
        change = float(np.sqrt(np.mean(np.abs(rho_new - rho) ** 2))) + float(
            np.max(np.abs(new_gam - gam))
        )
        rho = rho_new
        gam = new_gam
        if change < tol:
            break
    else:
        raise ConvergenceError(
            "solver did not reach tol %g in %d sweeps (last change %g)" % (tol, max_sweeps, change)
        )

    big_box = Box(box.center, box.half_width * pad)
    z_big = big_box.nodes(n) - box.center
    corr = np.fft.ifft2(np.fft.fft2(rho) * c_mult)
    h = z_big + beta * np.conj(z_big) + corr
    x_big, y_big = z_big.real, z_big.imag
    h = h + gam[0] * x_big * boards[0] + gam[1] * y_big * boards[1] + gam[2] * x_big * boards[2]
    h = h + box.center
    h = h[off : off + n0, off : off + n0]

    gm = GridMap(box, h)
    # normalize: send 0 to 0 and 1 to 1 exactly
    h0 = gm(0j)
    h1 = gm(1.0 + 0j)
    scale = h1 - h0
    if abs(scale) < 1e-12:
        raise ConvergenceError("normalization points collapsed")
    normalized = (h - h0) / scale

    # orientation must survive: discrete Jacobian positive at interior nodes
    s = normalized
    fx = (np.roll(s, -1, axis=1) - np.roll(s, 1, axis=1)) / (2 * dx)
    fy = (np.roll(s, -1, axis=0) - np.roll(s, 1, axis=0)) / (2 * dx)
    d = 0.5 * (fx - 1j * fy)
    db = 0.5 * (fx + 1j * fy)
    jac = (np.abs(d) ** 2 - np.abs(db) ** 2)[2:-2, 2:-2]
    min_jac = float(np.min(jac))
    if min_jac <= 0:
        raise ConvergenceError("straightening lost orientation (min Jacobian %g)" % min_jac)

    diag = {
        "sweeps": sweeps,
        "final_change": change,
        "beta": [beta.real, beta.imag],
        "gammas": [[g.real, g.imag] for g in gam],
        "mu_sup": sup,
        "support_fraction": float(np.mean(np.abs(mu) > 0)),
        "frame_clipped": clipped,
        "pad": pad,
        "tol": tol,
        "min_jacobian": min_jac,
        "normalization": [[h0.real, h0.imag], [scale.real, scale.imag]],
    }
    return GridMap(box, normalized, diag)


@dataclass(frozen=True)
class Deformation:
    """One multiplier retarget: which repelling cycle (by order, and index
    among that order's repelling cycles in canonical sort) and the new
    multiplier."""

    order: int
    target: complex
    cycle_index: int = 0


def _select_cycle(germ: Germ, d: Deformation) -> Cycle:
    reps = [c for c in find_cycles(germ, d.order) if c.kind == "repelling"]
    if not reps:
        raise InsufficientDataError("no repelling cycle of order %d in the working disk" % d.order)
    if not (0 <= d.cycle_index < len(reps)):
        raise DomainError(
            "cycle_index %d out of range (%d repelling cycles of order %d)"
            % (d.cycle_index, len(reps), d.order)
        )
    return reps[d.cycle_index]


def build_field(germ: Germ, deformations: Sequence[Deformation]) -> BeltramiField:
    """Invariant field realizing all requested retargets at once."""
    if not deformations:
        raise DomainError("need at least one deformation")
    entries = []
    for d in deformations:
        cycle = _select_cycle(germ, d)
        lc = LocalConjugacy.build(germ, cycle, d.target)
        entries.append(FieldEntry(chart=lc.charts[0], shear=lc.shear))
    return BeltramiField(germ=germ, entries=tuple(entries))


class DeformedGerm:
    """The germ conjugated by the straightening of its invariant field.

    eval(z) computes h(f(h^{-1}(z))); the deformed cycles sit at the
    h-images of the original ones and carry the target multipliers.
    """

    def __init__(self, germ: Germ, field: BeltramiField, grid_map: GridMap):
        self.germ = germ
        self.field = field
        self.grid_map = grid_map

    def eval(self, z: complex) -> complex:
        u = self.grid_map.inverse(complex(z))
        v = self.germ.eval(complex(u))
        return complex(self.grid_map(v))

    def cycle_image(self, entry_index: int = 0) -> complex:
        c = self.field.entries[entry_index].chart.center
        return complex(self.grid_map(c))

    def measure_multiplier(
        self,
        entry_index: int = 0,
        radius: float | None = None,
        agreement: float | None = None,
    ) -> complex:
        """Cauchy-derivative measurement of the deformed cycle multiplier,
        gated on two-radius agreement. The larger-radius estimate wins: the
        integral damps interpolation noise linearly in the radius."""
        entry = self.field.entries[entry_index]
        chart = entry.chart
        order = chart.cycle.order
        center = self.cycle_image(entry_index)
        if radius is None:
            radius = GLOBAL_MEASURE_FACTOR * chart.radius
        if agreement is None:
            # discretization error in h scales with grid spacing, so coarse
            # grids get a proportionally looser gate
            n = self.grid_map.samples.shape[0]
            spacing = self.grid_map.box.spacing(n)
            agreement = max(GLOBAL_AGREEMENT, 2.0 * spacing / radius)
        m1 = cauchy_cycle_derivative(self.eval, center, order, radius)
        m2 = cauchy_cycle_derivative(self.eval, center, order, radius / 2.0)
        if abs(m1 - m2) > agreement * max(abs(m1), 1e-300):
            raise UnreliableEstimateError(
                "global multiplier estimates disagree: %r vs %r" % (m1, m2)
            )
        return m1


def global_deform(
    germ: Germ,
    deformations: Sequence[Deformation],
    box: Box | None = None,
    n: int = DEFAULT_GRID,
    tol: float = SOLVER_TOL,
    pad: int = DEFAULT_PAD,
) -> DeformedGerm:
    """Full pipeline: census, charts, shears, field sampling, straightening."""
    if box is None:
        box = box_for(germ)
    field = build_field(germ, deformations)
    diag: dict[str, Any] = {}
    mu = field.sample_grid(box.nodes(n), diagnostics=diag)
    gm = solve_beltrami(mu, box, tol=tol, pad=pad)
    gm.diagnostics["field"] = diag
    return DeformedGerm(germ, field, gm)


def motion_targets(germ: Germ, t: complex, orders: Sequence[int]) -> list[Deformation]:
    """The standard parameter slice: every repelling cycle of the listed
    orders is sent to multiplier 1/t, so t must sit in the punctured unit
    disk minus the degenerate rays."""
    t = complex(t)
    if t == 0 or abs(t) >= 1.0:
        raise DomainError("motion parameter must satisfy 0 < |t| < 1")
    out = []
    for q in orders:
        reps = [c for c in find_cycles(germ, q) if c.kind == "repelling"]
        for i, _ in enumerate(reps):
            out.append(Deformation(order=q, target=1.0 / t, cycle_index=i))
    if not out:
        raise InsufficientDataError("no repelling cycles found for the requested orders")
    return out


def motion_sample(
    germ: Germ,
    t: complex,
    points: Sequence[complex],
    orders: Sequence[int] = (1,),
    box: Box | None = None,
    n: int = MOTION_GRID,
    tol: float = MOTION_TOL,
    pad: int = DEFAULT_PAD,
) -> list[complex]:
    """h_t at the given points: one straightening per parameter value."""
    dg = global_deform(germ, motion_targets(germ, t, orders), box=box, n=n, tol=tol, pad=pad)
    return [complex(dg.grid_map(complex(p))) for p in points]
