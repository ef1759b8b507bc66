"""Closed-form test maps: the folding harmonic map, power maps, disk-squeeze
maps that collapse an inner disk onto a segment, and the piecewise square
fold. Each is evaluable at arbitrary points; several carry analytic
derivatives and energy records used as test oracles.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "GalleryMap",
    "EnergyRecord",
    "fig1_map",
    "fig1_wirtinger",
    "fig1_jacobian",
    "power_map",
    "squeeze_map",
    "log_squeeze_map",
    "log_squeeze_energy_bound",
    "squeeze_annulus_constant",
    "example1_disks",
    "example1_map",
    "example2_map",
    "square_fold_map",
    "square_fold_disk_map",
    "identity_map",
    "ellipse_map",
    "get_gallery_map",
    "GALLERY_NAMES",
]


@dataclass(frozen=True)
class EnergyRecord:
    """Closed-form Dirichlet-energy value or upper bound for a gallery map."""

    kind: str          # "exact" or "bound"
    value: float
    note: str


@dataclass(frozen=True)
class GalleryMap:
    """A named closed-form map with optional analytic extras.

    evaluate is vectorized over complex ndarray input. wirtinger, when
    present, returns the analytic (hz, hzbar) pair at given points.
    """

    name: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    domain_note: str
    analytic_energy_bound: Optional[EnergyRecord] = None
    wirtinger: Optional[Callable[[np.ndarray], tuple]] = None


# -- folding harmonic map ---------------------------------------------------

def fig1_map(z):
    """u + iv with u = (1-x)^2 - y^2 + 1.6(x+y), v = x^2 - (2+y)^2 - x - 2y.

    Componentwise harmonic; its Jacobian 4 - 15.2x - 1.2y changes sign
    inside the unit disk, so the map folds.
    """
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    u = (1.0 - x) ** 2 - y ** 2 + 1.6 * (x + y)
    v = x ** 2 - (2.0 + y) ** 2 - x - 2.0 * y
    return u + 1j * v


def fig1_wirtinger(z):
    """Analytic Wirtinger derivatives of fig1_map."""
    z = np.asarray(z, dtype=complex)
    hz = (-3.2 - 1.3j) + (1.0 + 1.0j) * z
    hzbar = (2.8 + 0.3j) + (1.0 + 1.0j) * np.conj(z)
    return hz, hzbar


def fig1_jacobian(z):
    """Analytic Jacobian of fig1_map; equals 4 - 15.2x - 1.2y."""
    hz, hzbar = fig1_wirtinger(z)
    return np.abs(hz) ** 2 - np.abs(hzbar) ** 2


# exact Dirichlet energy of fig1_map over the unit disk:
# |hz|^2 + |hzbar|^2 = 4|z|^2 - 2.8x + 8.8y + 19.86, integral = 21.86*pi,
# energy = 2 * 21.86 * pi
_FIG1_ENERGY = 2.0 * 21.86 * np.pi


# -- power maps --------------------------------------------------------------

def power_map(z, n: int = 2):
    """z^n for integer n >= 2; nonnegative Jacobian, identically zero
    Hopf product, not monotone."""
    n = int(n)
    if n < 2:
        raise ValueError(f"power_map needs n >= 2, got {n}")
    return np.asarray(z, dtype=complex) ** n


def power_wirtinger(z, n: int = 2):
    z = np.asarray(z, dtype=complex)
    return n * z ** (n - 1), np.zeros_like(z)


# -- squeeze maps ------------------------------------------------------------

def squeeze_map(z, omega=0.0 + 0.0j, s=0.5, a=1.0 + 0.0j):
    """Map of the closed disk B(omega, 2s) to itself: the outer annulus
    s <= r <= 2s goes homeomorphically onto the punctured disk via
    omega + 2(r-s)e^{i theta}, while the inner disk r < s collapses onto the
    segment from omega to omega + a via omega + a(s-r)/s.

    Identity on the boundary circle |z - omega| = 2s; Jacobian >= 0.
    """
    z = np.asarray(z, dtype=complex)
    s = float(s)
    if s <= 0:
        raise ValueError("s must be positive")
    w = z - omega
    r = np.abs(w)
    if np.any(r > 2.0 * s * (1.0 + 1e-12)):
        raise ValueError("point outside the closed disk B(omega, 2s)")
    out = np.empty_like(w)
    outer = r >= s
    # e^{i theta} = w / r is safe on the outer branch since r >= s > 0
    out[outer] = omega + 2.0 * (r[outer] - s) * (w[outer] / r[outer])
    inner = ~outer
    out[inner] = omega + a * (s - r[inner]) / s
    return out


def log_squeeze_map(z, omega=0.0 + 0.0j, s=0.5, a=1.0 + 0.0j, eps=0.05):
    """Variant of squeeze_map that sends the circles r < s onto the segment
    logarithmically: omega + a log(s/r)/log(s/eps) for eps < r < s and
    omega + a for r <= eps. Continuous across both branch radii."""
    z = np.asarray(z, dtype=complex)
    s = float(s)
    eps = float(eps)
    if not (0.0 < eps < s):
        raise ValueError("need 0 < eps < s")
    w = z - omega
    r = np.abs(w)
    if np.any(r > 2.0 * s * (1.0 + 1e-12)):
        raise ValueError("point outside the closed disk B(omega, 2s)")
    out = np.empty_like(w)
    outer = r >= s
    out[outer] = omega + 2.0 * (r[outer] - s) * (w[outer] / r[outer])
    mid = (~outer) & (r > eps)
    out[mid] = omega + a * (np.log(s / r[mid]) / np.log(s / eps))
    core = r <= eps
    out[core] = omega + a
    return out


def squeeze_annulus_constant() -> float:
    """Exact Dirichlet energy of the annulus branch of the squeeze maps,
    divided by s^2: integral over s<=r<=2s of (4 + 4(r-s)^2/r^2) r dr dtheta
    evaluates to 8*pi*(1+log 2) * s^2."""
    return 8.0 * np.pi * (1.0 + np.log(2.0))


def log_squeeze_energy_bound(s: float, a, eps: float,
                             annulus_constant: float | None = None) -> float:
    """Upper bound C1 s^2 + 2 pi |a|^2 / log(s/eps) for the Dirichlet energy
    of log_squeeze_map over B(omega, 2s). The inner-log branch contributes
    exactly 2 pi |a|^2 / log(s/eps); C1 defaults to the exact annulus value."""
    c1 = squeeze_annulus_constant() if annulus_constant is None else annulus_constant
    return c1 * s ** 2 + 2.0 * np.pi * abs(a) ** 2 / np.log(s / eps)


# -- boundary-wild accumulation map ------------------------------------------

def example1_disks(k_terms: int):
    """Default disk parameters (omega_k, s_k, eps_k) with omega_k = 1 - 1/k,
    s_k = 10^-k and eps_k = e^{-k^4} s_k; eps_k is clamped to the smallest
    normal positive double (with a warning) when it underflows."""
    if k_terms < 1:
        raise ValueError("k_terms must be >= 1")
    tiny = np.finfo(float).tiny
    disks = []
    for k in range(1, k_terms + 1):
        omega = 1.0 - 1.0 / k
        s = 10.0 ** (-k)
        eps = np.exp(-float(k) ** 4) * s
        if eps < tiny:
            warnings.warn(
                f"eps underflowed for k={k}; clamped to the smallest normal double",
                RuntimeWarning, stacklevel=2)
            eps = tiny
        disks.append((omega, s, eps))
    return disks


def _validate_disjoint_disks(disks):
    for i in range(len(disks)):
        wi, si, _ = disks[i]
        if abs(wi) + 2.0 * si > 1.0:
            raise ValueError(
                f"disk {i + 1} B({wi}, {2 * si}) is not contained in the unit disk")
        for j in range(i + 1, len(disks)):
            wj, sj, _ = disks[j]
            if abs(wi - wj) <= 2.0 * (si + sj):
                raise ValueError(
                    f"disks {i + 1} and {j + 1} are not disjoint")


def example1_map(z, k_terms: int = 4, disks=None):
    """Identity on the closed unit disk except on a family of disjoint disks
    B(omega_k, 2 s_k) accumulating at 1, where it applies the logarithmic
    squeeze with a = 2. Finite energy, identity trace, yet each center
    omega_k is sent to omega_k + 2 outside the closed disk, so the map has
    no continuous boundary extension.

    disks overrides the default (omega, s, eps) list; overrides that break
    disjointness or leave the unit disk are rejected.
    """
    if disks is None:
        disks = example1_disks(k_terms)
    _validate_disjoint_disks(disks)
    z = np.asarray(z, dtype=complex)
    out = z.astype(complex).copy()
    flat = out.ravel()
    zf = z.ravel()
    for omega, s, eps in disks:
        mask = np.abs(zf - omega) <= 2.0 * s
        if mask.any():
            flat[mask] = log_squeeze_map(zf[mask], omega, s, 2.0, eps)
    return out


# -- single squeeze counterexample -------------------------------------------

def example2_map(z):
    """squeeze_map with omega=0, s=1/2, a=1: maps the closed unit disk onto
    itself, identity trace, J >= 0 a.e., but the preimage of any point in
    (0,1) is a circle plus a separate point, so the map is not monotone."""
    return squeeze_map(z, 0.0 + 0.0j, 0.5, 1.0 + 0.0j)


# -- square fold --------------------------------------------------------------

def square_fold_map(z):
    """Piecewise stretch of the square (0,2)x(0,2) onto itself:
    (x,y) -> (2x, y) for x <= 1 and (-2x+4, y) for x > 1. Continuous,
    satisfies the 1-oscillation inequality, not monotone."""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    if np.any((x < -1e-12) | (x > 2 + 1e-12) | (y < -1e-12) | (y > 2 + 1e-12)):
        raise ValueError("point outside the square [0,2]x[0,2]")
    u = np.where(x <= 1.0, 2.0 * x, -2.0 * x + 4.0)
    return u + 1j * y


_SQ_CENTER = 1.0 + 1.0j
_SQ_SCALE = 0.95


def square_fold_disk_map(z):
    """square_fold_map transplanted onto the unit disk by the similarity
    z -> (1+i) + 0.95 z, so oscillation and fiber tests can run on disk
    meshes. Similarities preserve oscillation ratios and fiber counts."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > 1.0 + 1e-12):
        raise ValueError("point outside the closed unit disk")
    w = square_fold_map(_SQ_CENTER + _SQ_SCALE * z)
    return (w - _SQ_CENTER) / _SQ_SCALE


# -- plain shapes used as boundary data ---------------------------------------

def identity_map(z):
    return np.asarray(z, dtype=complex)


def ellipse_map(z, b: float = 0.5):
    """x + i b y: squeezes the disk onto an axis-aligned ellipse."""
    z = np.asarray(z, dtype=complex)
    return z.real + 1j * b * z.imag


# -- registry -----------------------------------------------------------------

GALLERY_NAMES = (
    "fig1", "power:n", "squeeze:om,s,a", "logsqueeze:om,s,a,eps",
    "example1:K", "example2", "squarefold", "identity", "ellipse:b",
)


def get_gallery_map(spec: str) -> GalleryMap:
    """Resolve a gallery name like 'fig1', 'power:3', 'squeeze:0,0.5,1',
    'logsqueeze:0,0.5,1,0.05', 'example1:4', 'example2', 'squarefold',
    'identity' or 'ellipse:0.5' to a GalleryMap."""
    name, _, argstr = spec.partition(":")
    args = [t for t in argstr.split(",") if t] if argstr else []

    if name == "fig1":
        return GalleryMap(
            "fig1", fig1_map, "entire plane (used on the closed unit disk)",
            EnergyRecord("exact", _FIG1_ENERGY, "closed-form polar integral"),
            fig1_wirtinger)
    if name == "power":
        n = int(args[0]) if args else 2
        return GalleryMap(
            f"power:{n}", lambda z, n=n: power_map(z, n),
            "entire plane (used on the closed unit disk)",
            EnergyRecord("exact", 2.0 * np.pi * n, "closed-form polar integral"),
            lambda z, n=n: power_wirtinger(z, n))
    if name == "squeeze":
        om = complex(args[0]) if args else 0j
        s = float(args[1]) if len(args) > 1 else 0.5
        a = complex(args[2]) if len(args) > 2 else 1.0 + 0j
        e = squeeze_annulus_constant() * s ** 2 + np.pi * abs(a) ** 2
        return GalleryMap(
            f"squeeze:{om},{s},{a}",
            lambda z, om=om, s=s, a=a: squeeze_map(z, om, s, a),
            f"closed disk B({om}, {2 * s})",
            EnergyRecord("exact", e, "annulus constant 8pi(1+log2)s^2 plus pi|a|^2"))
    if name == "logsqueeze":
        om = complex(args[0]) if args else 0j
        s = float(args[1]) if len(args) > 1 else 0.5
        a = complex(args[2]) if len(args) > 2 else 1.0 + 0j
        eps = float(args[3]) if len(args) > 3 else 0.05
        return GalleryMap(
            f"logsqueeze:{om},{s},{a},{eps}",
            lambda z, om=om, s=s, a=a, eps=eps: log_squeeze_map(z, om, s, a, eps),
            f"closed disk B({om}, {2 * s})",
            EnergyRecord("bound", log_squeeze_energy_bound(s, a, eps),
                         "C1 s^2 + 2 pi |a|^2 / log(s/eps)"))
    if name == "example1":
        k = int(args[0]) if args else 4
        return GalleryMap(
            f"example1:{k}", lambda z, k=k: example1_map(z, k),
            "closed unit disk")
    if name == "example2":
        return GalleryMap(
            "example2", example2_map, "closed unit disk",
            EnergyRecord("exact",
                         squeeze_annulus_constant() * 0.25 + np.pi,
                         "squeeze energy at s=1/2, a=1"))
    if name == "squarefold":
        return GalleryMap("squarefold", square_fold_disk_map, "closed unit disk")
    if name == "identity":
        return GalleryMap(
            "identity", identity_map, "entire plane",
            EnergyRecord("exact", 2.0 * np.pi, "|Dh|^2 = 2 on the disk"),
            lambda z: (np.ones_like(np.asarray(z, dtype=complex)),
                       np.zeros_like(np.asarray(z, dtype=complex))))
    if name == "ellipse":
        b = float(args[0]) if args else 0.5
        return GalleryMap(
            f"ellipse:{b}", lambda z, b=b: ellipse_map(z, b),
            "entire plane",
            EnergyRecord("exact", np.pi * (1 + b ** 2),
                         "constant-gradient affine map"),
            lambda z, b=b: ((1 + b) / 2 * np.ones_like(np.asarray(z, dtype=complex)),
                            (1 - b) / 2 * np.ones_like(np.asarray(z, dtype=complex))))
    raise ValueError(f"unknown gallery map {spec!r}")
