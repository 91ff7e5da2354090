"""Least-squares fits of force-gap series.

The main model is F(g) = a exp(-b g) + c, solved with a damped Gauss-Newton
(Levenberg-Marquardt) iteration started from a log-linear regression.  A
power law F = a g^-p is available for comparison.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bias import ExponentialBias
from .errors import ValidationError
from .magnetics import ForceCurve

MAX_ITERATIONS = 200
GRADIENT_TOL = 1e-10


@dataclass(frozen=True)
class FitResult:
    amplitude: float
    decay_rate: float
    floor: float
    rms_residual: float
    iterations: int
    converged: bool
    gap_range: tuple = (0.0, math.inf)

    def __call__(self, gap):
        return self.amplitude * np.exp(-self.decay_rate * np.asarray(gap)) + self.floor


@dataclass(frozen=True)
class PowerLawFit:
    amplitude: float
    exponent: float
    rms_residual: float
    iterations: int
    converged: bool
    gap_range: tuple = (0.0, math.inf)

    def __call__(self, gap):
        return self.amplitude * np.asarray(gap, dtype=float) ** -self.exponent


def levenberg_marquardt(residual_and_jacobian, p0, max_iterations=MAX_ITERATIONS,
                        gtol=GRADIENT_TOL, feasible=None):
    """Minimize 0.5 |r(p)|^2.

    ``residual_and_jacobian(p)`` returns ``(r, J)``.  Damping starts at 1e-3
    and is divided by 10 after an accepted step, multiplied by 10 after a
    rejected one.  Returns ``(p, iterations, converged)``; converged means
    the gradient max-norm fell below ``gtol``.
    """
    p = np.asarray(p0, dtype=float)
    r, jac = residual_and_jacobian(p)
    cost = r @ r
    lam = 1e-3
    for iteration in range(1, max_iterations + 1):
        grad = jac.T @ r
        if np.max(np.abs(grad)) < gtol:
            return p, iteration - 1, True
        jtj = jac.T @ jac
        damped = jtj + lam * np.diag(np.maximum(np.diag(jtj), 1e-300))
        try:
            step = np.linalg.solve(damped, -grad)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue
        trial = p + step
        if feasible is None or feasible(trial):
            r_new, jac_new = residual_and_jacobian(trial)
            cost_new = r_new @ r_new
        else:
            cost_new = math.inf
        # ties accepted: near the optimum the cost is flat to rounding while
        # the gradient can still be reduced
        if cost_new <= cost:
            p, r, jac, cost = trial, r_new, jac_new, cost_new
            lam = max(lam / 10.0, 1e-15)
        else:
            lam *= 10.0
            if lam > 1e15:
                break
    grad = jac.T @ r
    return p, iteration, bool(np.max(np.abs(grad)) < gtol)


def _prepare(curve: ForceCurve, min_points):
    if len(curve) < min_points:
        raise ValidationError(f"need at least {min_points} points, got {len(curve)}")
    g = curve.gap_array
    f = curve.force_array
    if np.any(f < 0):
        raise ValidationError("forces must be >= 0")
    return g, f, (float(g[0]), float(g[-1]))


def fit_exponential(curve: ForceCurve, max_iterations=MAX_ITERATIONS,
                    gtol=GRADIENT_TOL) -> FitResult:
    g, f, gap_range = _prepare(curve, 4)
    spread = float(np.ptp(f))
    if spread <= 1e-12 * max(float(np.max(np.abs(f))), 1e-300):
        mean = float(np.mean(f))
        rms = float(np.sqrt(np.mean((f - mean) ** 2)))
        return FitResult(0.0, 0.0, mean, rms, 0, True, gap_range)

    # work on O(1) numbers: gaps / longest gap, forces / peak force
    g_scale, f_scale = float(np.max(g)), float(np.max(np.abs(f)))
    x, y = g / g_scale, f / f_scale
    shift = float(np.min(y)) - 1e-3 * float(np.ptp(y))
    slope, intercept = np.polyfit(x, np.log(y - shift), 1)
    p0 = [math.exp(intercept), max(-slope, 1e-6), shift]

    w = 1.0 / math.sqrt(x.size)  # objective is the mean square residual

    def model(p):
        e = np.exp(-p[1] * x)
        r = p[0] * e + p[2] - y
        jac = np.column_stack([e, -p[0] * x * e, np.ones_like(x)])
        return w * r, w * jac

    p, iterations, converged = levenberg_marquardt(
        model, p0, max_iterations, gtol, feasible=lambda p: p[1] >= 0)
    r, _ = model(p)
    rms = float(np.sqrt(r @ r)) * f_scale
    return FitResult(p[0] * f_scale, p[1] / g_scale, p[2] * f_scale, rms, iterations,
                     converged, gap_range)


def fit_power_law(curve: ForceCurve, max_iterations=MAX_ITERATIONS,
                  gtol=GRADIENT_TOL) -> PowerLawFit:
    g, f, gap_range = _prepare(curve, 3)
    if np.any(f <= 0):
        raise ValidationError("power-law fit needs strictly positive forces")
    g_scale, f_scale = float(np.sqrt(g[0] * g[-1])), float(np.max(f))
    x, y = g / g_scale, f / f_scale
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)

    w = 1.0 / math.sqrt(x.size)

    def model(p):
        xp = x ** -p[1]
        r = p[0] * xp - y
        jac = np.column_stack([xp, -p[0] * np.log(x) * xp])
        return w * r, w * jac

    p, iterations, converged = levenberg_marquardt(
        model, [math.exp(intercept), -slope], max_iterations, gtol)
    r, _ = model(p)
    rms = float(np.sqrt(r @ r)) * f_scale
    return PowerLawFit(p[0] * f_scale * g_scale ** p[1], float(p[1]), rms, iterations,
                       converged, gap_range)


def fit_best(curve: ForceCurve):
    """Exponential and power-law fits; the one with lower rms is returned."""
    fits = [fit_exponential(curve)]
    try:
        fits.append(fit_power_law(curve))
    except ValidationError:
        pass
    return min(fits, key=lambda fit: fit.rms_residual)


def compare_fits(first: FitResult, second: FitResult, rel_tol=0.1):
    """Parameters whose relative disagreement exceeds ``rel_tol``.

    Returns ``{name: relative difference}``; empty means the two series are
    consistent.  The floor is compared relative to the larger amplitude.
    """
    out = {}
    for name in ("amplitude", "decay_rate"):
        a, b = getattr(first, name), getattr(second, name)
        ref = max(abs(a), abs(b))
        diff = 0.0 if ref == 0 else abs(a - b) / ref
        if diff > rel_tol:
            out[name] = diff
    ref = max(abs(first.amplitude), abs(second.amplitude), 1e-300)
    diff = abs(first.floor - second.floor) / ref
    if diff > rel_tol:
        out["floor"] = diff
    return out


def calibrated_pm_mre(fit: FitResult, offset, name="") -> ExponentialBias:
    """Bias whose force at deflection d is the fitted force at gap offset - d."""
    if not fit.converged:
        raise ValidationError("fit did not converge; refusing to build a bias from it")
    return ExponentialBias(fit.amplitude, fit.decay_rate, fit.floor, offset,
                           tuple(fit.gap_range), name)


def format_fit_report(fit, source=""):
    """Key-value text in the configuration syntax."""
    lines = ["[fit]"]
    if source:
        lines.append(f"source = {source}")
    if isinstance(fit, FitResult):
        lines += ["model = exponential",
                  f"amplitude = {fit.amplitude:.9g} N",
                  f"decay_rate = {fit.decay_rate:.9g} 1/m",
                  f"floor = {fit.floor:.9g} N"]
    else:
        lines += ["model = power_law",
                  f"amplitude = {fit.amplitude:.9g} N*m^p",
                  f"exponent = {fit.exponent:.9g}"]
    lines += [f"rms_residual = {fit.rms_residual:.6g} N",
              f"iterations = {fit.iterations}",
              f"converged = {'yes' if fit.converged else 'no'}",
              f"gap_min = {fit.gap_range[0] * 1e3:.6g} mm",
              f"gap_max = {fit.gap_range[1] * 1e3:.6g} mm"]
    return "\n".join(lines) + "\n"
