"""Warped Gabor multipliers and the shifted-multiplier representation of an FIO.

With a Parseval frame the finite algebra is exact: extracting the symbols

    a_nu(mu) = c_{nu,mu} <T pi(mu) g, pi(chi'(mu) + nu) g>

over the whole lattice group and re-assembling sum_nu pi(nu) M_{a_nu}
reproduces the dense operator matrix to machine precision.  Truncating
the nu-sum to |nu| <= L gives the approximation whose error decay is
measured by truncation_error_curve.
"""

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import Signal, Weight, TWO_PI
from .frames import GaborFrameSpec, gabor_mod_norm, is_parseval
from .phases import CanonicalMap, chi_prime_table
from .fio import FioOperator, fio_matrix
from .diagnostics import NormEstimate, loglog_fit, operator_norm


@dataclass
class GaborMultiplier:
    """M_a f = sum_lambda a_lambda <f, pi(lambda) g> pi(chi'(lambda)) g."""

    a: np.ndarray            # complex, one value per lattice point
    spec: GaborFrameSpec
    warp_idx: np.ndarray     # lattice index of chi'(lambda) per point

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=complex).reshape(-1)
        N = self.spec.lattice.npoints
        if self.a.size != N or self.warp_idx.size != N:
            raise ValueError("symbol/warp length must match the lattice size")


def identity_warp_indices(spec: GaborFrameSpec) -> np.ndarray:
    return np.arange(spec.lattice.npoints)


def warp_indices(cm: CanonicalMap, spec: GaborFrameSpec) -> np.ndarray:
    """Lattice index of chi'(lambda) for every lattice point."""
    lat = spec.lattice
    table = chi_prime_table(cm, lat)
    return np.array([lat.index_of(row) for row in table])


def apply_multiplier(M: GaborMultiplier, f: Signal) -> Signal:
    atoms = M.spec.atoms
    coeff = atoms.conj().T @ f.values
    return Signal(f.grid, atoms[:, M.warp_idx] @ (M.a * coeff))


def multiplier_matrix(M: GaborMultiplier) -> np.ndarray:
    atoms = M.spec.atoms
    return (atoms[:, M.warp_idx] * M.a[None, :]) @ atoms.conj().T


@dataclass
class MultiplierNormReport:
    empirical_norm: float
    symbol_sup: float
    ratio: float
    probes: int


def multiplier_norm_check(M: GaborMultiplier, p: float, m: Weight,
                          mtilde: Optional[Weight] = None, probes: int = 50,
                          seed: int = 0) -> MultiplierNormReport:
    """Probe the bound ||M_a||_{M^p_{(m o chi')/mtilde} -> M^p_m} <~ ||a||_{linf_mtilde}.

    The input norm uses the weight m(chi'(lambda)) / mtilde(lambda); the
    output norm uses m.  The reported ratio empirical/symbol_sup should
    stay bounded across resolutions.
    """
    if mtilde is None:
        mtilde = Weight("polynomial", 0.0)
    spec = M.spec
    lat = spec.lattice
    grid = spec.window.grid
    rng = np.random.default_rng(seed)
    win = m(lat.coords()[M.warp_idx]) / mtilde(lat.coords())
    input_weight = Weight("custom", table=_coord_table(lat, win))
    best = 0.0
    for _ in range(probes):
        f = Signal(grid, rng.standard_normal(grid.size)
                   + 1j * rng.standard_normal(grid.size))
        out = apply_multiplier(M, f)
        denom = gabor_mod_norm(f, p, input_weight, spec)
        if denom == 0:
            continue
        best = max(best, gabor_mod_norm(out, p, m, spec) / denom)
    sup = float(np.max(np.abs(M.a) * mtilde(lat.coords()))) if M.a.size else 0.0
    ratio = best / sup if sup > 0 else np.inf
    return MultiplierNormReport(empirical_norm=best, symbol_sup=sup,
                                ratio=ratio, probes=probes)


def _coord_table(lat, values):
    """Weight table that looks up lattice points by coordinates."""
    lookup = {tuple(np.round(c / lat.grid.h).astype(int) % lat.grid.n): v
              for c, v in zip(lat.coords(), values)}

    def table(z):
        z = np.atleast_2d(np.asarray(z, dtype=float))
        keys = np.round(z / lat.grid.h).astype(int) % lat.grid.n
        return np.array([lookup[tuple(k)] for k in keys])

    return table


@dataclass
class MultiplierSymbolTable:
    """The family a_nu(mu) with its unimodular factors c_{nu,mu}."""

    spec: GaborFrameSpec
    cmap: CanonicalMap
    nu_indices: np.ndarray     # (K,) lattice indices of the shifts nu
    a: np.ndarray              # (K, N) complex
    c: np.ndarray              # (K, N) unit complex
    warp_idx: np.ndarray       # (N,) lattice index of chi'(mu)
    nu_radius: float

    @property
    def nu_norms(self) -> np.ndarray:
        return self.spec.lattice.torus_norms()[self.nu_indices]


def commutation_factors(spec: GaborFrameSpec, nu_int: np.ndarray,
                        chi_int: np.ndarray) -> np.ndarray:
    """c_{nu,mu} = e^{2 pi i x_nu . eta_{chi'(mu)}} from integer grid coords.

    Computed analytically from coordinates; the phase x_nu . eta equals
    (j_x m_eta)/n and is invariant under the choice of torus representative.
    """
    grid = spec.window.grid
    d = grid.d
    dots = np.einsum("ka,ma->km", nu_int[:, :d].astype(float),
                     chi_int[:, d:].astype(float))
    return np.exp(TWO_PI * 1j * dots / grid.n)


class ExtractionRadiusError(ValueError):
    pass


def extract_symbols(T: FioOperator, spec: GaborFrameSpec, cmap: CanonicalMap,
                    nu_radius: float) -> MultiplierSymbolTable:
    """Multiplier symbols a_nu(mu) for all shifts with torus norm |nu| <= nu_radius."""
    if not is_parseval(spec):
        warnings.warn("extract_symbols called with a non-Parseval frame spec",
                      stacklevel=2)
    lat = spec.lattice
    grid = spec.window.grid
    atoms = spec.atoms
    cross = atoms.conj().T @ (fio_matrix(T) @ atoms)    # [lam, mu]
    chi_int = chi_prime_table(cmap, lat)                # (N, 2d)
    warp_idx = np.array([lat.index_of(row) for row in chi_int])
    norms = lat.torus_norms()
    nu_indices = np.flatnonzero(norms <= nu_radius + 1e-12)
    nu_int = lat.int_coords[nu_indices]
    c = commutation_factors(spec, nu_int, chi_int)
    K, N = nu_indices.size, lat.npoints
    a = np.empty((K, N), dtype=complex)
    for k in range(K):
        targets = chi_int + nu_int[k]
        lam_idx = np.array([lat.index_of(row) for row in targets])
        a[k] = c[k] * cross[lam_idx, np.arange(N)]
    return MultiplierSymbolTable(spec=spec, cmap=cmap, nu_indices=nu_indices,
                                 a=a, c=c, warp_idx=warp_idx,
                                 nu_radius=float(nu_radius))


def full_nu_radius(spec: GaborFrameSpec) -> float:
    """Torus radius covering every lattice shift."""
    return float(np.max(spec.lattice.torus_norms()) + 1.0)


def assemble_truncated(tsym: MultiplierSymbolTable, spec: GaborFrameSpec,
                       L: float) -> np.ndarray:
    """Dense matrix of sum_{|nu| <= L} pi(nu) M_{a_nu}.

    Uses pi(nu) pi(chi'(mu)) g = conj(c_{nu,mu}) pi(chi'(mu)+nu) g, so each
    term is assembled from plain frame atoms without explicit shift matrices.
    """
    covers_group = tsym.nu_indices.size == spec.lattice.npoints
    if L > tsym.nu_radius + 1e-12 and not covers_group:
        raise ExtractionRadiusError(
            f"L={L} exceeds the extraction radius {tsym.nu_radius}")
    lat = spec.lattice
    atoms = spec.atoms
    chi_int = lat.int_coords[tsym.warp_idx]
    size = atoms.shape[0]
    out = np.zeros((size, size), dtype=complex)
    norms = tsym.nu_norms
    Nidx = np.arange(lat.npoints)
    for k in np.flatnonzero(norms <= L + 1e-12):
        nu = lat.int_coords[tsym.nu_indices[k]]
        lam_idx = np.array([lat.index_of(row) for row in chi_int + nu])
        weights = tsym.a[k] * np.conj(tsym.c[k])
        out += (atoms[:, lam_idx] * weights[None, :]) @ atoms.conj().T
    return out


def symbol_decay_points(tsym: MultiplierSymbolTable):
    """(|nu|, ||a_nu||_inf) pairs for the sup-decay fit, diagonal shell excluded."""
    norms = tsym.nu_norms
    sup = np.max(np.abs(tsym.a), axis=1)
    keep = norms > 1e-12
    return np.column_stack([np.sqrt(1.0 + norms[keep] ** 2), sup[keep]])


def truncation_error_curve(T: FioOperator, tsym: MultiplierSymbolTable,
                           spec: GaborFrameSpec, L_list: Sequence[float],
                           p: float = 2.0, m: Optional[Weight] = None,
                           probes: int = 200, seed: int = 0,
                           error_floor: float = 1e-16):
    """Empirical operator-norm error ||T - T_L|| for each L, plus log-log slope.

    p = 2 with trivial weight uses the largest singular value of the dense
    difference; other (p, m) use a probe-sup estimate of the norm from
    M^p_{m o chi'} to M^p_m, reported as a lower-bound estimate.
    """
    L_list = list(L_list)
    if len(L_list) < 3:
        raise ValueError("need at least 3 truncation radii")
    if m is None:
        m = Weight("polynomial", 0.0)
    lat = spec.lattice
    target = fio_matrix(T)
    exact_p2 = (p == 2 and m.kind == "polynomial" and m.s == 0.0)
    if not exact_p2:
        win = m(lat.coords()[tsym.warp_idx])
        input_weight = Weight("custom", table=_coord_table(lat, win))
        rng = np.random.default_rng(seed)
        probes_f = [Signal(spec.window.grid,
                           rng.standard_normal(spec.window.grid.size)
                           + 1j * rng.standard_normal(spec.window.grid.size))
                    for _ in range(probes)]
    curve = []
    for L in L_list:
        diff = target - assemble_truncated(tsym, spec, L)
        if exact_p2:
            err = operator_norm(diff, "singular-value").value
        else:
            err = 0.0
            for f in probes_f:
                denom = gabor_mod_norm(f, p, input_weight, spec)
                if denom == 0:
                    continue
                err = max(err, gabor_mod_norm(Signal(f.grid, diff @ f.values),
                                              p, m, spec) / denom)
        curve.append((float(L), float(err)))
    pts = np.array([(L, max(e, error_floor)) for L, e in curve])
    slope, _, _ = loglog_fit(pts)
    return curve, slope
