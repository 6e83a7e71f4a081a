"""
Numerical free additive convolution.

The Cauchy transform of a probability measure is ``G(z) = int dmu(x) / (z - x)``
and its R-transform is ``R(w) = G^{-1}(w) - 1/w``. R-transforms add under
free convolution, so the inverse Cauchy transform of ``a [+] b`` is

    g(w) = G_a^{-1}(w) + G_b^{-1}(w) - 1/w.

The edges of the support of ``a [+] b`` are ``g(w*)`` at the zeros ``w*`` of
``g'`` in ``(max(G_a(s_a), G_b(s_b)), 0)`` and ``(0, min(G_a(t_a), G_b(t_b)))``,
where ``[s, t]`` is the support hull of each input. ``g'`` is evaluated
through ``d/dw G^{-1}(w) = 1 / G'(G^{-1}(w))``.

Densities come from Stieltjes inversion, ``rho(x) = -Im G(x + i eps) / pi``,
where ``G(z)`` for ``a [+] b`` is obtained by solving ``g(w) = z`` in the
upper half-plane. The solve is written in terms of the subordination points
``omega_a = G_a^{-1}(w)`` and ``omega_b = G_b^{-1}(w)``::

    G_a(omega_a) = G_b(omega_b),    omega_a + omega_b - 1 / G_a(omega_a) = z,

which avoids inverting either transform explicitly and lets us reject
wrong-branch solutions (both ``omega`` must lie in the upper half-plane).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError, InvalidInputError, SolverFailureError
from .esd import (
    Empirical,
    Quartercircle,
    QuartercirclePair,
    Scaled,
    Semicircle,
    Shifted,
    SpectralLaw,
    Tabulated,
)

__all__ = [
    "ALPHA_THETA",
    "TAU_RADIUS",
    "THETA_SHIFT",
    "RADIUS_GAMMA",
    "TransformableMeasure",
    "SupportInterval",
    "FreeConvDensity",
    "point_mass",
    "quartercircle_cauchy",
    "cauchy",
    "cauchy_inverse",
    "r_transform",
    "free_conv_support",
    "free_conv_density",
    "theta_prediction_inputs",
    "radius_prediction_inputs",
    "predict_theta_support",
    "predict_theta_constant",
    "predict_radius_support",
    "predict_radius_constant",
]

#: Semicircle parameter of the sign-resampled theta corrector, normalized by sqrt(n).
ALPHA_THETA = float(np.sqrt(1.0 - 64.0 / (9.0 * np.pi**2)))
#: Semicircle parameter of the sign-resampled radius corrector, normalized by sqrt(n).
TAU_RADIUS = float(np.sqrt(9.0 * np.pi**2 / 64.0 - 1.0))
#: Spectral shift produced by removing half the diagonal of the theta corrector.
THETA_SHIFT = float(4.0 / (3.0 * np.pi))
#: Gap half-width of the radius-variant pair law.
RADIUS_GAMMA = float(3.0 * np.pi / 16.0)

MODES = ("closed_form_semicircle", "closed_form_quartercircle", "atoms", "quadrature")

_NEG_INF = complex(-np.inf, 0.0)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def _semicircle_g(z: complex, a: float) -> complex:
    if not np.isfinite(z):
        return 0j
    r = np.sqrt(z - 2 * a) * np.sqrt(z + 2 * a)
    return 2.0 / (z + r)


def _semicircle_dg(z: complex, a: float) -> complex:
    r = np.sqrt(z - 2 * a) * np.sqrt(z + 2 * a)
    if r == 0:
        return _NEG_INF
    return -_semicircle_g(z, a) / r


def quartercircle_cauchy(z: complex, b: float) -> complex:
    """Closed-form Cauchy transform of the quartercircle law on ``[0, 2b]``.

    ``G(z) = -s/(b^2 pi) * log(-(s + 2b)/z) + 2/(b pi) + z/(2 b^2)`` with
    ``s = sqrt(4 b^2 - z^2)``, principal branches. Valid in the upper
    half-plane and on the real axis off ``[0, 2b]``; the lower half-plane is
    reached by conjugation.
    """
    z = complex(z)
    if z.imag < 0:
        return quartercircle_cauchy(z.conjugate(), b).conjugate()
    if z == 0:
        return _NEG_INF
    s = np.sqrt(4 * b * b - z * z + 0j)
    return -s / (b * b * np.pi) * np.log(-(s + 2 * b) / z) + 2.0 / (b * np.pi) + z / (2 * b * b)


def _quartercircle_quad(z: complex, b: float, power: int) -> complex:
    # int rho(x) / (z - x)^power dx for the quartercircle, by quadrature.
    def part(fn):
        return integrate.quad(lambda x: fn(np.sqrt(max(4 * b * b - x * x, 0.0)) / (np.pi * b * b) / (z - x) ** power),
                              0.0, 2 * b, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    return complex(part(lambda v: v.real), part(lambda v: v.imag))


def _quartercircle_dg(z: complex, b: float) -> complex:
    z = complex(z)
    if z.imag < 0:
        return _quartercircle_dg(z.conjugate(), b).conjugate()
    if z == 2 * b:
        return _NEG_INF
    s = np.sqrt(4 * b * b - z * z + 0j)
    if abs(s) < 1e-7 or z == 0:
        # The closed form is 0/0 at z = -2b; fall back to quadrature there.
        return -_quartercircle_quad(z, b, 2)
    lg = np.log(-(s + 2 * b) / z)
    return (z * lg / s + z / (s + 2 * b) + s / z) / (b * b * np.pi) + 1.0 / (2 * b * b)


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------

def _half_sum(u: complex, v: complex) -> complex:
    if np.isinf(u.real) or np.isinf(v.real):
        return _NEG_INF
    return 0.5 * (u + v)


def _default_mode(law) -> str:
    while isinstance(law, (Shifted, Scaled)):
        law = law.base
    if isinstance(law, Semicircle):
        return "closed_form_semicircle"
    if isinstance(law, (Quartercircle, QuartercirclePair)):
        return "closed_form_quartercircle"
    if isinstance(law, Empirical):
        return "atoms"
    return "quadrature"


def _transform_pair(law, mode) -> Tuple[Callable, Callable]:
    """Return ``(G, G')`` callables on complex scalars for ``law`` under ``mode``."""
    if isinstance(law, Shifted):
        g, dg = _transform_pair(law.base, mode)
        c = law.offset
        return (lambda z: g(z - c)), (lambda z: dg(z - c))
    if isinstance(law, Scaled):
        g, dg = _transform_pair(law.base, mode)
        f = law.factor
        return (lambda z: g(z / f) / f), (lambda z: dg(z / f) / (f * f))
    if mode == "closed_form_semicircle":
        if not isinstance(law, Semicircle):
            raise InvalidInputError("closed_form_semicircle mode needs a semicircle law")
        a = law.a
        return (lambda z: _semicircle_g(z, a)), (lambda z: _semicircle_dg(z, a))
    if mode == "closed_form_quartercircle":
        if isinstance(law, Quartercircle):
            b = law.b
            return (lambda z: quartercircle_cauchy(z, b)), (lambda z: _quartercircle_dg(z, b))
        if isinstance(law, QuartercirclePair):
            al, be, ga = law.alpha, law.beta, law.gamma
            # Left half is the mirror image of a quartercircle: G_refl(z) = -G(-z).
            return (
                lambda z: 0.5 * (quartercircle_cauchy(z - ga, be) - quartercircle_cauchy(-z - ga, al)),
                lambda z: _half_sum(_quartercircle_dg(z - ga, be), _quartercircle_dg(-z - ga, al)),
            )
        raise InvalidInputError("closed_form_quartercircle mode needs a quartercircle or pair law")
    if mode == "atoms":
        if not isinstance(law, Empirical):
            raise InvalidInputError("atoms mode needs an empirical law")
        x = law.samples
        return (lambda z: complex(np.mean(1.0 / (z - x)))), (lambda z: complex(-np.mean(1.0 / (z - x) ** 2)))
    if mode == "quadrature":
        return (lambda z: _quad_transform(law, z, 1)), (lambda z: -_quad_transform(law, z, 2))
    raise InvalidInputError(f"unknown cauchy mode {mode!r}; expected one of {MODES}")


def _quad_transform(law: SpectralLaw, z: complex, power: int) -> complex:
    pts = law.breakpoints()
    re = im = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi <= lo:
            continue
        re += integrate.quad(lambda x: (float(law.density(x)) / (z - x) ** power).real, lo, hi,
                             epsabs=1e-13, epsrel=1e-12, limit=200)[0]
        if z.imag != 0:
            im += integrate.quad(lambda x: (float(law.density(x)) / (z - x) ** power).imag, lo, hi,
                                 epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    return complex(re, im)


class TransformableMeasure:
    """A compactly supported law together with a way to evaluate its Cauchy transform.

    Parameters
    ----------
    law : SpectralLaw
        Semicircle, quartercircle, pair (shifted or not), any shifted or
        scaled version of these, an empirical sample or any other law with
        a density.
    cauchy_mode : str, optional
        ``closed_form_semicircle``, ``closed_form_quartercircle``, ``atoms``
        (exact finite sum over an empirical sample) or ``quadrature``.
        Picked from the law when omitted.
    """

    def __init__(self, law: SpectralLaw, cauchy_mode: Optional[str] = None):
        self.law = law
        self.cauchy_mode = cauchy_mode or _default_mode(law)
        self._g, self._dg = _transform_pair(law, self.cauchy_mode)
        self._support = law.support()

    def __repr__(self):
        return f"TransformableMeasure({self.law!r}, cauchy_mode={self.cauchy_mode!r})"

    @property
    def hull(self) -> Tuple[float, float]:
        return self._support[0][0], self._support[-1][1]

    def _check_domain(self, z: complex):
        if z.imag == 0:
            x = z.real
            for lo, hi in self._support:
                if lo < x < hi or (lo == hi == x):
                    raise DomainError(f"z = {x} lies inside the support", valid=self._support)

    def cauchy(self, z) -> complex:
        """``G(z)``; real output for real ``z`` outside the support."""
        z = complex(z)
        self._check_domain(z)
        val = complex(self._g(z))
        return complex(val.real, 0.0) if z.imag == 0 else val

    def dcauchy(self, z) -> complex:
        """``G'(z)``; ``-inf`` at square-root edges."""
        z = complex(z)
        self._check_domain(z)
        val = complex(self._dg(z))
        return complex(val.real, 0.0) if z.imag == 0 else val

    def edge_values(self) -> Tuple[float, float]:
        """``(G(s), G(t))`` at the lower and upper ends of the support hull."""
        s, t = self.hull
        return self.cauchy(s).real, self.cauchy(t).real

    def inverse(self, w: float) -> float:
        """Real ``z`` outside the support hull with ``G(z) = w``."""
        w = float(w)
        gs, gt = self.edge_values()
        if w == 0 or not gs <= w <= gt or not np.isfinite(w):
            raise DomainError(f"w = {w} is outside the image [{gs}, 0) U (0, {gt}]", valid=[(gs, 0.0), (0.0, gt)])
        if self.cauchy_mode == "closed_form_semicircle" and isinstance(self.law, Semicircle):
            return 1.0 / w + self.law.a**2 * w
        s, t = self.hull
        if w == gt:
            return t
        if w == gs:
            return s
        span = max(t - s, 1.0)
        g = lambda z: self._g(complex(z)).real - w
        if w > 0:
            lo = t
            if not np.isfinite(g(lo)):
                lo = t + 1e-14 * (1.0 + abs(t))
            hi = t + 2.0 / w + span
            while g(hi) > 0:
                hi = t + 2.0 * (hi - t)
        else:
            hi = s
            if not np.isfinite(g(hi)):
                hi = s - 1e-14 * (1.0 + abs(s))
            lo = s + 2.0 / w - span
            while g(lo) < 0:
                lo = s - 2.0 * (s - lo)
        if g(lo) == 0:
            return lo
        if g(hi) == 0:
            return hi
        return optimize.brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)

    def inverse_derivative(self, w: float) -> float:
        """``d/dw G^{-1}(w) = 1 / G'(G^{-1}(w))``; zero where ``G'`` is infinite."""
        if self.cauchy_mode == "closed_form_semicircle" and isinstance(self.law, Semicircle):
            return -1.0 / (w * w) + self.law.a**2
        d = self._dg(complex(self.inverse(w))).real
        return 0.0 if np.isinf(d) else 1.0 / d


class _PointMass(TransformableMeasure):
    def __init__(self, c: float):
        self.c = float(c)
        self.law = Empirical([self.c])
        self.cauchy_mode = "atoms"
        self._support = [(self.c, self.c)]
        self._g = lambda z: 1.0 / (z - self.c)
        self._dg = lambda z: -1.0 / (z - self.c) ** 2

    def edge_values(self):
        return -np.inf, np.inf

    def inverse(self, w):
        if w == 0 or not np.isfinite(w):
            raise DomainError("point mass inverse needs finite non-zero w", valid=[(-np.inf, 0.0), (0.0, np.inf)])
        return 1.0 / w + self.c

    def inverse_derivative(self, w):
        return -1.0 / (w * w)


def point_mass(c: float) -> TransformableMeasure:
    """Dirac mass at ``c``; its R-transform is the constant ``c``."""
    return _PointMass(c)


def _as_measure(m) -> TransformableMeasure:
    return m if isinstance(m, TransformableMeasure) else TransformableMeasure(m)


def cauchy(m, z) -> complex:
    return _as_measure(m).cauchy(z)


def cauchy_inverse(m, w: float) -> float:
    return _as_measure(m).inverse(w)


def r_transform(m, w: float) -> float:
    """``R(w) = G^{-1}(w) - 1/w``."""
    return _as_measure(m).inverse(w) - 1.0 / w


# ---------------------------------------------------------------------------
# Support of a free convolution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SupportInterval:
    """Support ``[s, t]`` of a free convolution.

    ``g_s`` and ``g_t`` are the roots of ``g'`` (in the ``w`` variable) whose
    images are ``s`` and ``t``; ``residual`` is ``max |g'|`` at those roots.
    """

    s: float
    t: float
    g_s: float
    g_t: float
    residual: float

    def as_dict(self):
        return {"s": self.s, "t": self.t, "g_s": self.g_s, "g_t": self.g_t, "residual": self.residual}


def _g_funcs(a: TransformableMeasure, b: TransformableMeasure):
    def g(w):
        return a.inverse(w) + b.inverse(w) - 1.0 / w

    def gprime(w):
        return a.inverse_derivative(w) + b.inverse_derivative(w) + 1.0 / (w * w)

    return g, gprime


def _root_in(gprime, outer: float, label: str) -> float:
    """Zero of ``g'`` between 0 and ``outer`` (same sign as ``outer``).

    ``g' < 0`` near ``w = 0`` and ``g' > 0`` near the outer end. When ``g'``
    is still non-positive at the outer end (one input is a point mass, say)
    ``g`` is monotone on the whole interval and the edge itself is returned.
    """
    samples = []
    edge = outer * (1.0 - 1e-10)
    val_edge = gprime(edge)
    samples.append((edge, val_edge))
    if np.isnan(val_edge):
        raise SolverFailureError(f"g' is undefined at the end of the {label} interval", samples=samples)
    if val_edge <= 0:
        val_outer = gprime(outer)
        samples.append((outer, val_outer))
        if np.isfinite(val_outer) and val_outer <= 0:
            return outer
        raise SolverFailureError(f"g' does not change sign on the {label} interval", samples=samples)
    inner = 0.5 * outer
    for _ in range(200):
        val = gprime(inner)
        samples.append((inner, val))
        if val < 0:
            break
        inner *= 0.5
    else:
        raise SolverFailureError(f"g' stays positive near 0 on the {label} interval", samples=samples)
    lo, hi = sorted((inner, edge))
    return optimize.brentq(gprime, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def free_conv_support(a, b) -> SupportInterval:
    """Support hull of ``a [+] b`` from the zeros of ``g'``."""
    a, b = _as_measure(a), _as_measure(b)
    gs_a, gt_a = a.edge_values()
    gs_b, gt_b = b.edge_values()
    w_hi = min(gt_a, gt_b)
    w_lo = max(gs_a, gs_b)
    if not np.isfinite(w_hi) or not np.isfinite(w_lo):
        raise SolverFailureError("at least one input must have finite edge values of G")
    g, gprime = _g_funcs(a, b)
    root_t = _root_in(gprime, w_hi, "upper")
    root_s = _root_in(gprime, w_lo, "lower")
    residual = max(abs(gprime(root_t)), abs(gprime(root_s)))
    return SupportInterval(s=float(g(root_s)), t=float(g(root_t)), g_s=float(root_s), g_t=float(root_t), residual=float(residual))


# ---------------------------------------------------------------------------
# Density of a free convolution
# ---------------------------------------------------------------------------

@dataclass
class FreeConvDensity:
    grid: np.ndarray
    density: np.ndarray
    failed: np.ndarray
    epsilon: float
    support: Optional[SupportInterval] = None
    cauchy_values: np.ndarray = field(default=None, repr=False)

    @property
    def mass(self) -> float:
        ok = ~self.failed
        return float(np.trapezoid(self.density[ok], self.grid[ok]))

    def law(self) -> Tabulated:
        ok = ~self.failed
        return Tabulated(self.grid[ok], self.density[ok])


def _subordination_newton(ga, dga, gb, dgb, z, wa, wb, iters=60, tol=1e-13):
    for _ in range(iters):
        Ga, Gb = ga(wa), gb(wb)
        if not (np.isfinite(Ga) and np.isfinite(Gb)) or Ga == 0:
            return None
        f1 = Ga - Gb
        f2 = wa + wb - 1.0 / Ga - z
        if abs(f1) < tol * max(1.0, abs(Ga)) and abs(f2) < tol * max(1.0, abs(z)):
            return wa, wb
        dA, dB = dga(wa), dgb(wb)
        j11, j12 = dA, -dB
        j21, j22 = 1.0 + dA / (Ga * Ga), 1.0
        det = j11 * j22 - j12 * j21
        if det == 0 or not np.isfinite(det):
            return None
        da = (f1 * j22 - j12 * f2) / det
        db = (j11 * f2 - j21 * f1) / det
        step = 1.0
        # Damp the step so that both subordination points stay in the upper half-plane.
        while step > 1e-6 and ((wa - step * da).imag <= 0 or (wb - step * db).imag <= 0):
            step *= 0.5
        wa, wb = wa - step * da, wb - step * db
    return None


def _subordination_fixed_point(ga, gb, z, iters=20000):
    # omega_a <- z + h_b(z + h_a(omega_a)), h(w) = 1/G(w) - w; converges for Im z > 0.
    wa = z + 1j * max(1.0, abs(z))
    for _ in range(iters):
        wb = z + 1.0 / ga(wa) - wa
        new = z + 1.0 / gb(wb) - wb
        if abs(new - wa) < 1e-14 * max(1.0, abs(wa)):
            wa = new
            break
        wa = new
    wb = z + 1.0 / ga(wa) - wa
    return wa, wb


def free_conv_density(a, b, grid, epsilon: float = 1e-4) -> FreeConvDensity:
    """Density of ``a [+] b`` on ``grid`` by Stieltjes inversion at height ``epsilon``.

    Points where the solve fails are flagged in ``failed`` and get density NaN.
    """
    a, b = _as_measure(a), _as_measure(b)
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InvalidInputError("grid must be a non-empty 1-D array")
    if not epsilon > 0:
        raise InvalidInputError("epsilon must be positive")
    ga, dga, gb, dgb = a._g, a._dg, b._g, b._dg
    dens = np.full(x.size, np.nan)
    gvals = np.full(x.size, np.nan + 0j)
    failed = np.zeros(x.size, dtype=bool)
    prev = None
    for k, xk in enumerate(x):
        z = complex(xk, epsilon)
        sol = None
        if prev is not None:
            sol = _subordination_newton(ga, dga, gb, dgb, z, *prev)
        if sol is None:
            sol = _subordination_newton(ga, dga, gb, dgb, z, *_subordination_fixed_point(ga, gb, z))
        if sol is None or sol[0].imag <= 0 or sol[1].imag <= 0:
            failed[k] = True
            prev = None
            continue
        prev = sol
        gz = ga(sol[0])
        gvals[k] = gz
        im = -gz.imag / np.pi
        dens[k] = im if abs(gz.imag) >= 1e-8 else 0.0
    return FreeConvDensity(grid=x, density=dens, failed=failed, epsilon=epsilon, cauchy_values=gvals)


def free_conv_law(a, b, points: int = 400, epsilon: float = 1e-4, margin: float = 0.05) -> FreeConvDensity:
    """Density of ``a [+] b`` on an even grid covering its support with a small margin."""
    sup = free_conv_support(a, b)
    pad = margin * (sup.t - sup.s)
    res = free_conv_density(a, b, np.linspace(sup.s - pad, sup.t + pad, points), epsilon)
    res.support = sup
    return res


# ---------------------------------------------------------------------------
# Headline predictions
# ---------------------------------------------------------------------------

def theta_prediction_inputs() -> Tuple[TransformableMeasure, TransformableMeasure]:
    """Pair law of ``((3/2) X^- + (1/2) X^+) / sqrt(n)`` and the law of ``W / (2 sqrt(n))``."""
    return (TransformableMeasure(QuartercirclePair(1.5, 0.5)),
            TransformableMeasure(Semicircle(ALPHA_THETA / 2.0)))


def radius_prediction_inputs() -> Tuple[TransformableMeasure, TransformableMeasure]:
    """Shifted pair law of the radius construction and the law of its resampled corrector / 2."""
    return (TransformableMeasure(QuartercirclePair(0.5, 0.5, RADIUS_GAMMA)),
            TransformableMeasure(Semicircle(TAU_RADIUS / 2.0)))


def predict_theta_support() -> SupportInterval:
    """Support of the theta certificate's limiting law, before the diagonal shift."""
    return free_conv_support(*theta_prediction_inputs())


def predict_theta_constant() -> float:
    """Predicted ``lambda_1(M) / sqrt(n)`` of the theta certificate."""
    return predict_theta_support().t + THETA_SHIFT


def predict_radius_support() -> SupportInterval:
    return free_conv_support(*radius_prediction_inputs())


def predict_radius_constant() -> float:
    """Predicted ``sigma_1(M) / sqrt(n)`` of the radius certificate."""
    sup = predict_radius_support()
    return max(abs(sup.s), sup.t)
