"""Tame phase functions and the canonical transformation they generate.

A tame phase is supplied as an evaluator bundle (value, both gradients,
mixed Hessian).  The canonical transformation chi solves

    y  = grad_eta Phi(x, eta)      (for x, given (y, eta))
    xi = grad_x  Phi(x, eta)

by a damped Newton iteration seeded with the identity-phase guess x0 = y.
Raw continuum outputs are kept unwrapped; torus wrapping is applied only
when grid objects are built from them.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import Grid, Weight
from .frames import Lattice


class NewtonDivergenceError(RuntimeError):
    """Newton solve for the canonical transformation failed to converge."""

    def __init__(self, point, residuals):
        self.point = point
        self.residuals = residuals
        super().__init__(
            f"Newton iteration did not converge at {point}; residual trace "
            f"{[float(r) for r in residuals[-5:]]} (phase may not be tame)")


@dataclass(frozen=True)
class TamePhase:
    """Evaluator bundle for Phi and its derivatives.

    All callables take arrays x, eta of shape (..., d) and return
    value (...,), gradients (..., d), mixed Hessian (..., d, d) with
    entry [i, j] = d^2 Phi / dx_i deta_j.
    """

    name: str
    d: int
    phi: Callable
    grad_x: Callable
    grad_eta: Callable
    mixed_hessian: Callable
    declared_delta: float
    declared_deriv_bound: float

    def split(self, z):
        z = np.asarray(z, dtype=float)
        return z[..., :self.d], z[..., self.d:]


def linear_phase(d: int = 1) -> TamePhase:
    """Phi = x.eta, the identity operator's phase."""
    return TamePhase(
        name="linear", d=d,
        phi=lambda x, e: np.sum(x * e, axis=-1),
        grad_x=lambda x, e: np.broadcast_to(e, np.broadcast(x, e).shape).copy(),
        grad_eta=lambda x, e: np.broadcast_to(x, np.broadcast(x, e).shape).copy(),
        mixed_hessian=lambda x, e: _const_hessian(x, e, np.eye(d)),
        declared_delta=1.0, declared_deriv_bound=1.0)


def dilation_phase(s: float, d: int = 1) -> TamePhase:
    """Phi = s x.eta, generating the dilation f -> f(s x)."""
    if s <= 0:
        raise ValueError("dilation needs s > 0")
    return TamePhase(
        name=f"dilation(s={s:g})", d=d,
        phi=lambda x, e: s * np.sum(x * e, axis=-1),
        grad_x=lambda x, e: s * np.broadcast_to(e, np.broadcast(x, e).shape).copy(),
        grad_eta=lambda x, e: s * np.broadcast_to(x, np.broadcast(x, e).shape).copy(),
        mixed_hessian=lambda x, e: _const_hessian(x, e, s * np.eye(d)),
        declared_delta=s ** d, declared_deriv_bound=s)


def chirp_phase(c: float, d: int = 1) -> TamePhase:
    """Phi = x.eta + (c/2)|eta|^2, a metaplectic shear."""
    return TamePhase(
        name=f"chirp(c={c:g})", d=d,
        phi=lambda x, e: np.sum(x * e, axis=-1) + 0.5 * c * np.sum(e * e, axis=-1),
        grad_x=lambda x, e: np.broadcast_to(e, np.broadcast(x, e).shape).copy(),
        grad_eta=lambda x, e: (np.broadcast_to(x, np.broadcast(x, e).shape) + c * e),
        mixed_hessian=lambda x, e: _const_hessian(x, e, np.eye(d)),
        declared_delta=1.0, declared_deriv_bound=max(1.0, abs(c)))


def perturbed_phase(eps: float) -> TamePhase:
    """Phi = x eta + eps sin(x) sin(eta), a genuinely nonlinear tame phase (d=1)."""
    if not 0 <= eps < 1:
        raise ValueError("perturbation strength must satisfy 0 <= eps < 1")

    def hess(x, e):
        h = 1.0 + eps * np.cos(x) * np.cos(e)
        return h[..., None]

    return TamePhase(
        name=f"perturbed(eps={eps:g})", d=1,
        phi=lambda x, e: (x * e + eps * np.sin(x) * np.sin(e))[..., 0],
        grad_x=lambda x, e: e + eps * np.cos(x) * np.sin(e),
        grad_eta=lambda x, e: x + eps * np.sin(x) * np.cos(e),
        mixed_hessian=hess,
        declared_delta=1.0 - eps, declared_deriv_bound=1.0 + eps)


BUILTIN_PHASES = {
    "linear": lambda params: linear_phase(int(params.get("d", 1))),
    "dilation": lambda params: dilation_phase(float(params.get("s", 2.0)),
                                              int(params.get("d", 1))),
    "chirp": lambda params: chirp_phase(float(params.get("c", 1.0)),
                                        int(params.get("d", 1))),
    "perturbed": lambda params: perturbed_phase(float(params.get("eps", 0.1))),
}


def _const_hessian(x, e, H):
    shape = np.broadcast(x, e).shape[:-1]
    return np.broadcast_to(H, shape + H.shape).copy()


@dataclass
class CanonicalMap:
    """chi and chi^{-1} solved from the phase by damped Newton iteration."""

    phase: TamePhase
    newton_tol: float = 1e-12
    max_iter: int = 50
    lipschitz_estimate: float = field(default=0.0)

    def forward(self, z) -> np.ndarray:
        """chi(y, eta) = (x, xi), vectorized over rows of z (..., 2d)."""
        z = np.atleast_2d(np.asarray(z, dtype=float))
        y, eta = self.phase.split(z)
        x = self._newton(
            target=y, fixed=eta,
            func=lambda u: self.phase.grad_eta(u, eta),
            jac=lambda u: np.swapaxes(self.phase.mixed_hessian(u, eta), -1, -2),
            seed=y.copy())
        xi = self.phase.grad_x(x, eta)
        out = np.concatenate([x, xi], axis=-1)
        return out[0] if out.shape[0] == 1 and np.asarray(z).ndim == 1 else out

    def inverse(self, z) -> np.ndarray:
        """chi^{-1}(x, xi) = (y, eta)."""
        z = np.atleast_2d(np.asarray(z, dtype=float))
        x, xi = self.phase.split(z)
        eta = self._newton(
            target=xi, fixed=x,
            func=lambda u: self.phase.grad_x(x, u),
            jac=lambda u: self.phase.mixed_hessian(x, u),
            seed=xi.copy())
        y = self.phase.grad_eta(x, eta)
        out = np.concatenate([y, eta], axis=-1)
        return out[0] if out.shape[0] == 1 and np.asarray(z).ndim == 1 else out

    def _newton(self, target, fixed, func, jac, seed):
        u = seed
        res = func(u) - target
        resnorm = np.linalg.norm(res, axis=-1)
        trace = [float(np.max(resnorm))]
        for _ in range(self.max_iter):
            if np.max(resnorm) < self.newton_tol:
                return u
            try:
                step = np.linalg.solve(jac(u), res[..., None])[..., 0]
            except np.linalg.LinAlgError:
                worst = int(np.argmax(resnorm))
                raise NewtonDivergenceError(np.concatenate(
                    [np.atleast_2d(target)[worst],
                     np.atleast_2d(fixed)[worst]]), trace) from None
            # Damped update: halve the step where the residual grew.
            scale = np.ones_like(resnorm)
            for _ in range(30):
                cand = u - scale[..., None] * step
                cres = func(cand) - target
                cnorm = np.linalg.norm(cres, axis=-1)
                bad = cnorm > resnorm
                if not np.any(bad):
                    break
                scale = np.where(bad, scale / 2.0, scale)
            u, res, resnorm = cand, cres, cnorm
            trace.append(float(np.max(resnorm)))
        if np.max(resnorm) >= self.newton_tol:
            worst = int(np.argmax(resnorm))
            raise NewtonDivergenceError(np.concatenate(
                [np.atleast_2d(target)[worst], np.atleast_2d(fixed)[worst]]), trace)
        return u


def canonical_map(phase: TamePhase, **kwargs) -> CanonicalMap:
    return CanonicalMap(phase=phase, **kwargs)


@dataclass
class TamenessReport:
    min_det_mixed_hessian: float
    max_second_derivative: float
    max_third_derivative: float
    max_gradient_mismatch: float
    passes: bool


def tameness_audit(phase: TamePhase, box: float = 4.0, samples: int = 200,
                   seed: int = 0, fd_step: float = 1e-5) -> TamenessReport:
    """Sampled audit of the tameness conditions.

    Checks |det mixed Hessian| >= declared_delta, bounds second/third
    finite-difference derivatives against declared_deriv_bound, and
    verifies the supplied gradients against central differences.
    """
    rng = np.random.default_rng(seed)
    d = phase.d
    x = rng.uniform(-box, box, size=(samples, d))
    e = rng.uniform(-box, box, size=(samples, d))
    dets = np.abs(np.linalg.det(phase.mixed_hessian(x, e)))

    # Gradient consistency by central differences on Phi.
    mismatch = 0.0
    for i in range(d):
        step = np.zeros(d)
        step[i] = fd_step
        gx = (phase.phi(x + step, e) - phase.phi(x - step, e)) / (2 * fd_step)
        ge = (phase.phi(x, e + step) - phase.phi(x, e - step)) / (2 * fd_step)
        denom = 1.0 + np.abs(phase.grad_x(x, e)[:, i])
        mismatch = max(mismatch,
                       float(np.max(np.abs(gx - phase.grad_x(x, e)[:, i]) / denom)),
                       float(np.max(np.abs(ge - phase.grad_eta(x, e)[:, i]) /
                                    (1.0 + np.abs(phase.grad_eta(x, e)[:, i])))))

    # Second/third derivative magnitudes of the full gradient by differences
    # in each of the 2d phase-space directions (step 1e-3 keeps the third
    # difference above the rounding floor).
    h2 = 1e-3
    z = np.concatenate([x, e], axis=-1)

    def grad(zz):
        xx, ee = zz[..., :d], zz[..., d:]
        return np.concatenate([phase.grad_x(xx, ee), phase.grad_eta(xx, ee)],
                              axis=-1)

    max2 = 0.0
    max3 = 0.0
    for i in range(2 * d):
        step = np.zeros(2 * d)
        step[i] = h2
        gp, g0, gm = grad(z + step), grad(z), grad(z - step)
        second = (gp - gm) / (2 * h2)
        third = (gp - 2 * g0 + gm) / h2 ** 2
        max2 = max(max2, float(np.max(np.abs(second))))
        max3 = max(max3, float(np.max(np.abs(third))))

    passes = (float(np.min(dets)) >= phase.declared_delta - 1e-9
              and mismatch < 1e-6
              and max2 <= phase.declared_deriv_bound + 1e-6
              and max3 <= phase.declared_deriv_bound + 1e-3)
    return TamenessReport(
        min_det_mixed_hessian=float(np.min(dets)),
        max_second_derivative=max2,
        max_third_derivative=max3,
        max_gradient_mismatch=mismatch,
        passes=passes)


def symplectic_matrix(d: int) -> np.ndarray:
    J = np.zeros((2 * d, 2 * d))
    J[:d, d:] = np.eye(d)
    J[d:, :d] = -np.eye(d)
    return J


def symplectic_audit(cm: CanonicalMap, samples: int = 50, box: float = 3.0,
                     seed: int = 0, fd_step: float = 1e-4) -> float:
    """Max deviation ||(D chi)^T J (D chi) - J||_max over sampled points.

    The Jacobian is taken by central finite differences with the given step.
    """
    rng = np.random.default_rng(seed)
    d = cm.phase.d
    J = symplectic_matrix(d)
    z = rng.uniform(-box, box, size=(samples, 2 * d))
    worst = 0.0
    for zi in z:
        D = np.empty((2 * d, 2 * d))
        for k in range(2 * d):
            step = np.zeros(2 * d)
            step[k] = fd_step
            D[:, k] = (cm.forward(zi + step) - cm.forward(zi - step)) / (2 * fd_step)
        worst = max(worst, float(np.max(np.abs(D.T @ J @ D - J))))
    return worst


def chi_prime(cm: CanonicalMap, lattice: Lattice, lam) -> np.ndarray:
    """Lattice-rounded map chi'(lambda) = A floor(A^{-1} chi(lambda)).

    lam: integer grid coordinates of a lattice point (any representative).
    Returns integer grid coordinates of the image, wrapped to the torus.
    """
    return chi_prime_table(cm, lattice, np.atleast_2d(lam))[0]


def chi_prime_table(cm: CanonicalMap, lattice: Lattice, lams=None) -> np.ndarray:
    """chi' for many lattice points at once, integer grid coordinates."""
    grid = lattice.grid
    if lams is None:
        lams = lattice.int_coords
    lams = np.atleast_2d(np.asarray(lams))
    cont = cm.forward(lams * grid.h)           # continuum chi(lambda), unwrapped
    steps = np.atleast_2d(cont) / grid.h       # grid units
    Ainv = np.linalg.inv(lattice.A)
    m = np.floor(Ainv @ steps.T + 1e-9).T      # tolerate float fuzz at integers
    img = (lattice.A @ m.T).T
    img = np.round(img).astype(int)
    return np.asarray(grid.wrap_index(img))


def chi_prime_displacement_bound(lattice: Lattice) -> float:
    """sqrt(2d) ||A|| with the generator in continuum units."""
    d = lattice.grid.d
    A_cont = lattice.A * lattice.grid.h
    return float(np.sqrt(2 * d) * np.linalg.norm(A_cont, 2))


def chi_prime_multiplicity(cm: CanonicalMap, lattice: Lattice) -> int:
    """Max preimage count of chi' over the lattice (almost-injectivity report)."""
    table = chi_prime_table(cm, lattice)
    keys = [tuple(int(v) for v in row) for row in np.mod(table, lattice.grid.n)]
    counts = {}
    for k in keys:
        counts[k] = counts.get(k, 0) + 1
    return max(counts.values())


@dataclass
class WeightTransportReport:
    ratio_min: float
    ratio_max: float
    supported: bool


def weight_transport_audit(cm: CanonicalMap, w: Weight, samples: int = 500,
                           box: float = 4.0, seed: int = 0) -> WeightTransportReport:
    """Sampled min/max of v(chi(z)) / v(z); polynomial weights only."""
    if w.kind != "polynomial":
        return WeightTransportReport(np.nan, np.nan, supported=False)
    rng = np.random.default_rng(seed)
    z = rng.uniform(-box, box, size=(samples, 2 * cm.phase.d))
    ratios = w(cm.forward(z)) / w(z)
    return WeightTransportReport(float(np.min(ratios)), float(np.max(ratios)),
                                 supported=True)


def growth_equivalence_constant(cm: CanonicalMap, samples: int = 500,
                                box: float = 6.0, seed: int = 0) -> float:
    """Sampled K with 1/K <= (1+|chi(z)|)/(1+|z|) <= K."""
    rng = np.random.default_rng(seed)
    z = rng.uniform(-box, box, size=(samples, 2 * cm.phase.d))
    num = 1.0 + np.linalg.norm(cm.forward(z), axis=-1)
    den = 1.0 + np.linalg.norm(z, axis=-1)
    r = num / den
    return float(max(np.max(r), 1.0 / np.min(r)))
