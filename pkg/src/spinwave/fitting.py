"""Decay-curve fits and the temperature regression of decay times.

All decay models are fitted through a linearizing transform:

* gaussian      ln eta = ln eta0 - t^2/tau^2
* exponential   ln eta = ln eta0 - t/tau
* algebraic     1/eta  = (1 + t^2/tau^2) / eta0
* stretched     ln eta = ln eta0 - (t/tau)^p, with p found by a bounded 1D
  search and the other two parameters solved linearly for each p.

Uncertainties come from the linearized covariance scaled by the reduced
chi-square of the residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .constants import M_RB87, k_B
from .errors import FitError
from .models import DecayCurve

GAUSSIAN = "gaussian"
EXPONENTIAL = "exponential"
ALGEBRAIC = "algebraic"
STRETCHED = "stretched"
MODELS = (GAUSSIAN, EXPONENTIAL, ALGEBRAIC, STRETCHED)

#: bracket and tolerance of the stretched-exponent search
P_BRACKET = (0.5, 4.0)
P_XTOL = 1e-4


def model_eta(kind, t, params):
    """Evaluate a fitted decay model; ``params`` maps names to values."""
    t = np.asarray(t, float)
    eta0, tau = params["eta0"], params["tau"]
    if kind == GAUSSIAN:
        return eta0 * np.exp(-((t / tau) ** 2))
    if kind == EXPONENTIAL:
        return eta0 * np.exp(-t / tau)
    if kind == ALGEBRAIC:
        return eta0 / (1.0 + (t / tau) ** 2)
    if kind == STRETCHED:
        return eta0 * np.exp(-((t / tau) ** params["p"]))
    raise FitError(f"unknown decay model {kind!r}")


@dataclass(frozen=True)
class FitResult:
    """Best-fit parameters with 1 sigma uncertainties.

    ``params`` maps each name to ``(value, sigma)``.  ``residual_norm`` is
    |eta_fit - eta| / |eta| over the included points.
    """

    model: str
    params: dict
    residual_norm: float
    n_points: int
    n_excluded: int = 0
    covariance: np.ndarray = field(default=None, repr=False, compare=False)

    def value(self, name):
        return self.params[name][0]

    def sigma(self, name):
        return self.params[name][1]

    def evaluate(self, t):
        return model_eta(self.model, t, {k: v[0] for k, v in self.params.items()})

    def to_dict(self):
        return {
            "model": self.model,
            "params": {k: {"value": v, "sigma": s} for k, (v, s) in self.params.items()},
            "residual_norm": self.residual_norm,
            "n_points": self.n_points,
            "n_excluded": self.n_excluded,
        }


def _weighted_line(x, y, sigma):
    """Weighted least squares y = a + b x; returns (a, b), covariance, chi2."""
    A = np.column_stack([np.ones_like(x), x])
    w = 1.0 / sigma
    Aw, yw = A * w[:, None], y * w
    coef, *_ = np.linalg.lstsq(Aw, yw, rcond=None)
    r = yw - Aw @ coef
    chi2 = float(r @ r)
    dof = x.size - 2
    try:
        cov = np.linalg.inv(Aw.T @ Aw)
    except np.linalg.LinAlgError as exc:
        raise FitError("degenerate design matrix") from exc
    if dof > 0:
        cov = cov * chi2 / dof
    return coef, cov, chi2


def _prepare(curve: DecayCurve, floor, min_points):
    t, eta = curve.times, curve.eta
    sig = curve.sigma_eta
    keep = eta > floor * eta.max() if eta.size and eta.max() > 0 else np.zeros(eta.shape, bool)
    t, eta = t[keep], eta[keep]
    sig = None if sig is None else sig[keep]
    if t.size < min_points:
        raise FitError(f"insufficient points: {t.size} usable, {min_points} required")
    if sig is not None and not np.any(sig > 0):
        raise FitError("all weights are zero")
    if sig is not None and np.any(sig <= 0):
        # zero uncertainty would give infinite weight
        raise FitError("uncertainties must be positive where supplied")
    return t, eta, sig, int(np.count_nonzero(~keep))


def _log_sigma(eta, sig):
    return np.ones_like(eta) if sig is None else sig / eta


def fit_decay(curve: DecayCurve, model=GAUSSIAN, floor=1e-4) -> FitResult:
    """Fit a decay model to a sampled efficiency curve.

    Parameters
    ----------
    curve : DecayCurve
        Efficiencies with optional uncertainties ``sigma_eta``.
    model : {"gaussian", "exponential", "algebraic", "stretched"}
    floor : float
        Points with eta <= floor * max(eta) are excluded.

    Returns
    -------
    FitResult

    Raises
    ------
    FitError
        Too few usable points, zero weights or no convergence of the
        exponent search.
    """
    if model not in MODELS:
        raise FitError(f"unknown decay model {model!r}")
    t, eta, sig, n_excl = _prepare(curve, floor, 5 if model == STRETCHED else 4)

    if model in (GAUSSIAN, EXPONENTIAL):
        x = t**2 if model == GAUSSIAN else t
        (a, b), cov, _ = _weighted_line(x, np.log(eta), _log_sigma(eta, sig))
        if b >= 0:
            raise FitError("data do not decay")
        eta0, tau = math.exp(a), (-b) ** (-0.5 if model == GAUSSIAN else -1.0)
        # d eta0/da = eta0; d tau/db = -tau/(k b) with k = 2 or 1
        k = 2.0 if model == GAUSSIAN else 1.0
        J = np.array([[eta0, 0.0], [0.0, -tau / (k * b)]])
        pcov = J @ cov @ J.T
        names = ("eta0", "tau")
        values = (eta0, tau)

    elif model == ALGEBRAIC:
        s = np.ones_like(eta) if sig is None else sig / eta**2
        (a, b), cov, _ = _weighted_line(t**2, 1.0 / eta, s)
        if a <= 0 or b <= 0:
            raise FitError("data are not of the algebraic form")
        eta0, tau = 1.0 / a, math.sqrt(a / b)
        J = np.array([[-1.0 / a**2, 0.0], [0.5 * tau / a, -0.5 * tau / b]])
        pcov = J @ cov @ J.T
        names = ("eta0", "tau")
        values = (eta0, tau)

    else:
        y = np.log(eta)
        s = _log_sigma(eta, sig)
        scale = t.max()
        u = t / scale

        def chi2(p):
            return _weighted_line(u**p, y, s)[2]

        res = optimize.minimize_scalar(chi2, bounds=P_BRACKET, method="bounded",
                                       options={"xatol": P_XTOL})
        if not res.success:
            raise FitError(f"exponent search did not converge: {res.message}")
        (a, b), _, _ = _weighted_line(u**res.x, y, s)
        if b >= 0:
            raise FitError("data do not decay")
        # polish (ln eta0, ln tau, p) jointly from the bracketed solution

        def resid(q):
            return (q[0] - (t / math.exp(q[1])) ** q[2] - y) / s

        def jac(q):
            x = (t / math.exp(q[1])) ** q[2]
            with np.errstate(divide="ignore", invalid="ignore"):
                lx = np.where(t > 0, np.log(t) - q[1], 0.0)
            return np.column_stack([np.ones_like(t), q[2] * x, -x * lx]) / s[:, None]

        q0 = np.array([a, math.log(scale) - math.log(-b) / res.x, res.x])
        sol = optimize.least_squares(resid, q0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15,
                                     gtol=1e-15)
        if not sol.success or not P_BRACKET[0] - P_XTOL <= sol.x[2] <= P_BRACKET[1] + P_XTOL:
            raise FitError("stretched exponent left the search bracket")
        eta0, tau, p = math.exp(sol.x[0]), math.exp(sol.x[1]), float(sol.x[2])
        J = jac(sol.x)
        c2 = float(sol.fun @ sol.fun)
        dof = t.size - 3
        try:
            cov = np.linalg.inv(J.T @ J) * (c2 / dof if dof > 0 else 1.0)
        except np.linalg.LinAlgError as exc:
            raise FitError("degenerate stretched-exponential fit") from exc
        D = np.diag([eta0, tau, 1.0])
        pcov = D @ cov @ D
        names = ("eta0", "tau", "p")
        values = (eta0, tau, p)

    errs = np.sqrt(np.clip(np.diag(pcov), 0.0, None))
    params = {n: (float(v), float(e)) for n, v, e in zip(names, values, errs)}
    fitted = model_eta(model, t, {n: v for n, v in zip(names, values)})
    rnorm = float(np.linalg.norm(fitted - eta) / np.linalg.norm(eta))
    return FitResult(model, params, rnorm, int(t.size), n_excl, pcov)


# --- temperature regression ---------------------------------------------------

@dataclass(frozen=True)
class TemperatureFit:
    """Straight-line fit 1/tau^2 = slope * T + intercept.

    ``tau_offset`` is None when the intercept is not positive ("none resolved").
    Unpacks as ``(lambda_R, tau_offset)``.
    """

    lambda_R: float
    sigma_lambda_R: float
    tau_offset: float | None
    sigma_tau_offset: float | None
    slope: float
    intercept: float
    covariance: np.ndarray = field(repr=False, compare=False, default=None)

    def __iter__(self):
        return iter((self.lambda_R, self.tau_offset))

    def to_dict(self):
        return {
            "lambda_R": self.lambda_R,
            "sigma_lambda_R": self.sigma_lambda_R,
            "tau_offset": self.tau_offset,
            "sigma_tau_offset": self.sigma_tau_offset,
            "slope": self.slope,
            "intercept": self.intercept,
        }


def fit_tau_vs_temperature(points, mass=M_RB87, weighted=False) -> TemperatureFit:
    """Extract the spin-wave wavelength and the T -> 0 offset from decay times.

    Parameters
    ----------
    points : sequence of (T, tau) or (T, tau, sigma_tau)
        Temperatures in K and Gaussian 1/e times in s.
    mass : float
        Atomic mass in kg.
    weighted : bool
        Weight by sigma(1/tau^2) = 2 sigma_tau / tau^3; needs sigma_tau.

    Returns
    -------
    TemperatureFit
        lambda_R = 2 pi / sqrt(slope m / k_B), tau_offset = intercept^(-1/2).
    """
    arr = np.asarray(points, float)
    if arr.ndim != 2 or arr.shape[1] not in (2, 3):
        raise FitError("points must be (T, tau) or (T, tau, sigma_tau) rows")
    if arr.shape[0] < 2:
        raise FitError(f"insufficient points: {arr.shape[0]} temperatures")
    T, tau = arr[:, 0], arr[:, 1]
    if np.any(tau <= 0) or np.any(T <= 0):
        raise FitError("temperatures and decay times must be positive")
    if weighted:
        if arr.shape[1] != 3:
            raise FitError("weighted regression needs sigma_tau for every point")
        s = 2.0 * arr[:, 2] / tau**3
        if np.any(s <= 0):
            raise FitError("all weights must be positive")
    else:
        s = np.ones_like(T)
    (a, b), cov, _ = _weighted_line(T, 1.0 / tau**2, s)
    if b <= 0:
        raise FitError("decay rate does not grow with temperature")
    k_R = math.sqrt(b * mass / k_B)
    lam = 2.0 * math.pi / k_R
    sig_lam = 0.5 * lam * math.sqrt(cov[1, 1]) / b
    if a > 0:
        t_off = a**-0.5
        sig_off = 0.5 * t_off * math.sqrt(cov[0, 0]) / a
    else:
        t_off = sig_off = None
    if t_off is not None:
        t_off, sig_off = float(t_off), float(sig_off)
    return TemperatureFit(float(lam), float(sig_lam), t_off, sig_off, float(b), float(a), cov)
