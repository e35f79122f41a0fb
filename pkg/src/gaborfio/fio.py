"""Fourier integral operators by oscillatory quadrature and their Gabor matrices.

The operator T f(x) = sum_m e^{2 pi i Phi(x, eta_m)} sigma(x, eta_m)
fhat(eta_m) h^d is the plain Riemann sum over the frequency grid, with
fhat the unitary DFT read in symmetric frequency order.  At desk scale
(n^d <= 1024) the dense matrix of T is cheap and doubles as the oracle
for every norm measurement.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Grid, Signal, Weight, TWO_PI
from .frames import GaborFrameSpec, Lattice, is_parseval
from .phases import CanonicalMap, TamePhase
from .diagnostics import loglog_fit, DecayReport

import warnings

MAX_DENSE_SIZE = 1024


@dataclass
class SymbolTable:
    """Symbol samples sigma(x_j, eta_m) with a declared smoothness tag.

    values[j, m] is indexed by raw grid indices; the coordinate of index j
    is grid.wrap_index(j) * h.  The tag records the smoothness surrogate
    ('W2N' with parameter N, 'Ms' with parameter s, or 'custom') and only
    affects expected-slope bookkeeping, never the computation.
    """

    grid: Grid
    values: np.ndarray
    tag: str = "custom"
    tag_param: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        size = self.grid.size
        if self.values.shape != (size, size):
            raise ValueError(f"symbol table must be {size}x{size}")
        if not np.all(np.isfinite(self.values.view(float))):
            raise ValueError("symbol table has non-finite entries")


def constant_symbol(grid: Grid, value: complex = 1.0) -> SymbolTable:
    size = grid.size
    return SymbolTable(grid, np.full((size, size), value, dtype=complex),
                       tag="W2N", tag_param=np.inf)


def bandlimit_for(N: float, grid: Grid) -> float:
    """Index band limit B(N) = n / (4N), the W^inf_2N smoothness surrogate."""
    return grid.n / (4.0 * N)


def bandlimited_symbol(grid: Grid, N: float, seed: int = 0,
                       amplitude: float = 1.0) -> SymbolTable:
    """Random real symbol band-limited to |frequency index| <= B(N).

    The spectrum is flat up to the cutoff, so the symbol genuinely uses
    its whole frequency budget; larger N means a smaller budget and a
    smoother symbol.
    """
    if grid.d != 1:
        raise ValueError("symbol generators are d = 1 only")
    n = grid.n
    B = bandlimit_for(N, grid)
    rng = np.random.default_rng(seed)
    freqs = np.asarray(grid.wrap_index(np.arange(n)))
    p, q = np.meshgrid(freqs, freqs, indexing="ij")
    mask = np.sqrt(p.astype(float) ** 2 + q.astype(float) ** 2) <= B
    spec = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) * mask
    vals = np.fft.ifft2(spec) * n  # plain synthesis sum of masked modes
    vals = vals.real.astype(complex)
    vals *= amplitude / np.max(np.abs(vals))
    return SymbolTable(grid, vals, tag="W2N", tag_param=float(N))


def weighted_symbol(grid: Grid, s: float, seed: int = 0,
                    amplitude: float = 1.0) -> SymbolTable:
    """Random symbol whose spectrum decays like <zeta>^{-(s+1)} in continuum units.

    Discrete surrogate of membership in the weighted modulation-space symbol class
    with weight v_s.
    """
    if grid.d != 1:
        raise ValueError("symbol generators are d = 1 only")
    n = grid.n
    rng = np.random.default_rng(seed)
    freqs = np.asarray(grid.wrap_index(np.arange(n))) * grid.h
    p, q = np.meshgrid(freqs, freqs, indexing="ij")
    envelope = (1.0 + p ** 2 + q ** 2) ** (-(s + 1.0) / 2.0)
    spec = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) * envelope
    vals = np.fft.ifft2(spec).real.astype(complex) * n
    vals *= amplitude / np.max(np.abs(vals))
    return SymbolTable(grid, vals, tag="Ms", tag_param=float(s))


@dataclass
class FioOperator:
    """Phase + symbol bundle applied by frequency-grid quadrature."""

    phase: TamePhase
    symbol: SymbolTable
    grid: Grid
    cmap: CanonicalMap
    _matrix: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.symbol.grid.n != self.grid.n or self.symbol.grid.d != self.grid.d:
            raise ValueError("phase/symbol grid mismatch")
        if self.grid.d != 1:
            raise ValueError("the FIO engine supports d = 1")


def make_fio(phase: TamePhase, symbol: SymbolTable, grid: Grid,
             cmap: Optional[CanonicalMap] = None) -> FioOperator:
    if cmap is None:
        cmap = CanonicalMap(phase)
    return FioOperator(phase=phase, symbol=symbol, grid=grid, cmap=cmap)


def fio_matrix(T: FioOperator) -> np.ndarray:
    """Dense n^d x n^d matrix of T (column k = T e_k)."""
    if T._matrix is not None:
        return T._matrix
    grid = T.grid
    n = grid.n
    if grid.size > MAX_DENSE_SIZE:
        raise ValueError(f"dense FIO matrix limited to n^d <= {MAX_DENSE_SIZE}")
    x = grid.coords()
    eta = grid.coords()
    X, E = np.meshgrid(x, eta, indexing="ij")
    phi = T.phase.phi(X[..., None], E[..., None])
    kernel = np.exp(TWO_PI * 1j * phi) * T.symbol.values * grid.h
    # Unitary DFT rows in symmetric frequency order: row m of F maps f to
    # fhat(eta_m); the symmetric reordering is absorbed because the kernel
    # uses the same index m for eta_m.
    j = np.arange(n)
    F = np.exp(-TWO_PI * 1j * np.outer(j, j) / n) / np.sqrt(n)
    T._matrix = kernel @ F
    return T._matrix


def apply_fio(T: FioOperator, f: Signal) -> Signal:
    """T f by quadrature over the frequency grid."""
    if f.grid.n != T.grid.n or f.grid.d != T.grid.d:
        raise ValueError("signal grid does not match the operator grid")
    return Signal(f.grid, fio_matrix(T) @ f.values)


@dataclass
class GaborMatrix:
    """Coefficient table G[mu, lam] = <T pi(mu) g, pi(lam) g>."""

    lattice: Lattice
    window: Signal
    entries: np.ndarray


def gabor_matrix(T: FioOperator, spec: GaborFrameSpec) -> GaborMatrix:
    """Gabor coefficient matrix of T over the frame atoms."""
    if not is_parseval(spec):
        warnings.warn("gabor_matrix called with a non-Parseval frame spec",
                      stacklevel=2)
    atoms = spec.atoms
    cross = atoms.conj().T @ (fio_matrix(T) @ atoms)   # [lam, mu]
    return GaborMatrix(lattice=spec.lattice, window=spec.window,
                       entries=cross.T.copy())


def pair_distances(G: GaborMatrix, cmap: CanonicalMap) -> np.ndarray:
    """r[mu, lam] = <chi(mu) - lam> with the torus metric.

    chi is evaluated on the symmetric representatives (raw continuum
    output, unwrapped); the difference to lam is wrapped back to the
    torus before taking the Japanese bracket.
    """
    lat = G.lattice
    grid = lat.grid
    imgs = cmap.forward(lat.coords())
    diff = imgs[:, None, :] - lat.coords()[None, :, :]
    wrapped = grid.wrap_coord(diff)
    return np.sqrt(1.0 + np.sum(wrapped * wrapped, axis=-1))


class InsufficientDecayRangeError(ValueError):
    pass


def decay_envelope_fit(G: GaborMatrix, cmap: CanonicalMap, s_claim: float,
                       nbins: int = 10, tolerance: float = 0.75) -> DecayReport:
    """Fit the off-diagonal decay envelope of |G| against <chi(mu)-lam>^{-s}.

    Pairs are binned by log distance over r in [2, r_max/2]; the per-bin
    maxima of |G| are fitted by least squares on log-log axes.  Restricting
    to [2, r_max/2] excludes the diagonal bins (r close to 1) and the
    torus-wrap end (r close to r_max), where the envelope is meaningless.
    """
    r = pair_distances(G, cmap)
    mag = np.abs(G.entries)
    r_max = float(np.max(r))
    lo, hi = 2.0, r_max / 2.0
    if hi <= lo:
        raise InsufficientDecayRangeError(
            f"usable distance range [2, {hi:.3g}] is empty")
    edges = np.exp(np.linspace(np.log(lo), np.log(hi), nbins + 1))
    pts = []
    for k in range(nbins):
        sel = (r >= edges[k]) & (r < edges[k + 1])
        if not np.any(sel):
            continue
        pts.append((np.exp(0.5 * (np.log(edges[k]) + np.log(edges[k + 1]))),
                    float(np.max(mag[sel]))))
    if len(pts) < 4:
        raise InsufficientDecayRangeError(
            f"only {len(pts)} usable distance bins; need at least 4")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    slope, intercept, residual = loglog_fit(np.column_stack([xs, ys]))
    return DecayReport(
        pairs=[(float(np.log(a)), float(np.log(b))) for a, b in pts],
        slope=slope, intercept=intercept, residual=residual,
        claim=s_claim, tolerance=tolerance,
        verdict=bool(slope <= -s_claim + tolerance))


def transport_argmax_check(G: GaborMatrix, cmap: CanonicalMap,
                           tie_rtol: float = 1e-9):
    """Distance from each row's |G| maximizer to chi(mu); returns (dists, bound).

    The bound is sqrt(2d) ||A|| + 1 in continuum units.  Entries within
    relative tolerance tie_rtol of the row maximum count as tied maximizers
    and the nearest one is reported: exact magnitude ties occur whenever
    the operator output has a sub-torus periodicity (the s = 2 dilation
    output is half-torus periodic in time, so each row maximum appears
    again at the alias point chi(mu) + (sqrt(n)/2, 0)).
    """
    lat = G.lattice
    grid = lat.grid
    imgs = cmap.forward(lat.coords())
    mag = np.abs(G.entries)
    diff = grid.wrap_coord(imgs[:, None, :] - lat.coords()[None, :, :])
    alldists = np.sqrt(np.sum(diff * diff, axis=-1))
    rowmax = np.max(mag, axis=1, keepdims=True)
    tied = mag >= (1.0 - tie_rtol) * rowmax
    dists = np.min(np.where(tied, alldists, np.inf), axis=1)
    A_cont = lat.A * grid.h
    bound = float(np.sqrt(2 * grid.d) * np.linalg.norm(A_cont, 2) + 1.0)
    return dists, bound


@dataclass
class EnvelopeReport:
    bins: np.ndarray         # (K, 2d) displacement bin centers
    envelope: np.ndarray     # (K,) per-bin max of |G|
    l1_mass: float           # sum of envelope * m(u)
    dominates: bool          # envelope >= |G| entrywise by construction


def envelope_function_audit(G: GaborMatrix, phase: TamePhase,
                            m: Optional[Weight] = None,
                            bin_width: float = 0.5) -> EnvelopeReport:
    """Empirical envelope H(u) over the displacement u(mu, lam).

    u = (eta' - grad_x Phi(x', eta), x - grad_eta Phi(x', eta)) with
    mu = (x, eta) the input point and lam = (x', eta') the output point;
    displacements are wrapped to the torus and binned on a cubic mesh of
    the given width.
    """
    if m is None:
        m = Weight("polynomial", 0.0)
    lat = G.lattice
    grid = lat.grid
    d = grid.d
    c = lat.coords()
    x, eta = c[:, :d], c[:, d:]
    xp, etap = c[:, :d], c[:, d:]
    gx = phase.grad_x(xp[None, :, :], eta[:, None, :])      # [mu, lam, d]
    ge = phase.grad_eta(xp[None, :, :], eta[:, None, :])
    u = np.concatenate([etap[None, :, :] - gx, x[:, None, :] - ge], axis=-1)
    u = grid.wrap_coord(u)
    keys = np.round(u / bin_width).astype(int)
    flat_keys = keys.reshape(-1, 2 * d)
    mag = np.abs(G.entries).reshape(-1)
    buckets = {}
    for key, v in zip(map(tuple, flat_keys), mag):
        if v > buckets.get(key, -1.0):
            buckets[key] = v
    items = sorted(buckets.items())
    centers = np.array([k for k, _ in items], dtype=float) * bin_width
    env = np.array([v for _, v in items])
    mass = float(np.sum(env * m(centers)))
    return EnvelopeReport(bins=centers, envelope=env, l1_mass=mass,
                          dominates=True)
