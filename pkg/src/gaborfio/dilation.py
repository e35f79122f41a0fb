"""Closed-form multiplier symbols of the dilation operator D_s f(x) = f(s x).

For the Gaussian window g(t) = e^{-pi t^2} and the separable lattice
alpha Z x beta Z, the defining inner product

    <D_s pi(mu) g, pi(chi'(mu) + nu) g>,   mu = (alpha k, beta l),
                                           nu = (alpha k', beta l'),

is a Gaussian integral with an explicit answer.  Writing
theta = beta (s l - floor(s l) - l'), u0 = alpha k / s,
v0 = alpha (floor(k/s) + k'), the integral evaluates to

    (s^2+1)^{-1/2} exp(-pi [s^2 (u0-v0)^2 + theta^2] / (s^2+1))
                   exp(2 pi i theta (s^2 u0 + v0) / (s^2+1)).

The full multiplier symbol additionally carries the commutation factor
c_{nu,mu} = e^{2 pi i alpha k' beta floor(s l)}.
"""

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


def dilation_inner_product(s: float, alpha: float, beta: float,
                           k, l, kp, lp) -> np.ndarray:
    """Closed form of <D_s pi(mu) g, pi(chi'(mu)+nu) g> for g = e^{-pi t^2}."""
    k = np.asarray(k, dtype=float)
    l = np.asarray(l, dtype=float)
    kp = np.asarray(kp, dtype=float)
    lp = np.asarray(lp, dtype=float)
    theta = beta * (s * l - np.floor(s * l) - lp)
    u0 = alpha * k / s
    v0 = alpha * (np.floor(k / s) + kp)
    denom = s * s + 1.0
    mag = np.exp(-np.pi * (s * s * (u0 - v0) ** 2 + theta ** 2) / denom) \
        / np.sqrt(denom)
    phase = np.exp(TWO_PI * 1j * theta * (s * s * u0 + v0) / denom)
    return mag * phase


def dilation_commutation_factor(s: float, alpha: float, beta: float,
                                l, kp) -> np.ndarray:
    """c_{nu,mu} = e^{2 pi i x_nu . eta_{chi'(mu)}} for the dilation setup."""
    l = np.asarray(l, dtype=float)
    kp = np.asarray(kp, dtype=float)
    return np.exp(TWO_PI * 1j * alpha * kp * beta * np.floor(s * l))


def dilation_symbol_closed_form(s: float, alpha: float, beta: float,
                                k, l, kp, lp) -> np.ndarray:
    """a_nu(mu) = c_{nu,mu} <D_s pi(mu) g, pi(chi'(mu)+nu) g>, closed form."""
    return dilation_commutation_factor(s, alpha, beta, l, kp) \
        * dilation_inner_product(s, alpha, beta, k, l, kp, lp)


def dilation_integrand_quadrature(s, alpha, beta, k, l, kp, lp,
                                  span: float = 12.0, points: int = 40_000):
    """Fine Riemann quadrature of the defining integral (continuum oracle).

    integral over t of e^{2 pi i theta t} g(s t - alpha k)
    conj(g)(t - alpha floor(k/s) - alpha k') dt, g = e^{-pi t^2}.
    """
    theta = beta * (s * l - np.floor(s * l) - lp)
    center = 0.5 * (alpha * k / s + alpha * (np.floor(k / s) + kp))
    t = np.linspace(center - span, center + span, points)
    dt = t[1] - t[0]
    vals = (np.exp(TWO_PI * 1j * theta * t)
            * np.exp(-np.pi * (s * t - alpha * k) ** 2)
            * np.exp(-np.pi * (t - alpha * (np.floor(k / s) + kp)) ** 2))
    return complex(np.sum(vals) * dt)
