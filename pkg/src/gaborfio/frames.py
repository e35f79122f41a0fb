"""Lattices, Gabor frames, canonical tight/dual windows, discrete modulation norms.

A lattice is generated by an invertible 2d x 2d integer matrix A in grid
units.  Commensurability with the torus (n A^{-1} integral) is required so
that the enumerated point set is a finite subgroup of the phase-space
torus; this group structure is what makes the frame operator commute with
every pi(lambda) and the shifted-multiplier algebra exact.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .core import Grid, Signal, Weight, PhasePoint, TWO_PI

NOT_A_FRAME_RTOL = 1e-10


class LatticeError(ValueError):
    def __init__(self, message, suggestion=None):
        self.suggestion = suggestion
        if suggestion is not None:
            message += f"; nearest commensurate generator: {suggestion.tolist()}"
        super().__init__(message)


class NotAFrameError(ValueError):
    pass


@dataclass
class Lattice:
    """Enumerated lattice Lambda = A Z^{2d} inside the phase-space torus."""

    A: np.ndarray           # generator, grid units, integer entries
    grid: Grid
    int_coords: np.ndarray  # (N, 2d) integer grid coordinates, symmetric reps
    _index: dict = field(repr=False, default_factory=dict)

    @property
    def npoints(self) -> int:
        return self.int_coords.shape[0]

    @property
    def density(self) -> float:
        """Redundancy: number of atoms per signal dimension."""
        return self.npoints / self.grid.size

    def coords(self) -> np.ndarray:
        """Continuum coordinates, shape (N, 2d)."""
        return self.int_coords * self.grid.h

    def point(self, i: int) -> PhasePoint:
        d = self.grid.d
        c = self.coords()[i]
        return PhasePoint(c[:d].copy(), c[d:].copy())

    def index_of(self, int_coord) -> int:
        """Index of a lattice point given integer grid coordinates (any rep)."""
        key = tuple(int(v) for v in np.mod(np.asarray(int_coord), self.grid.n))
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"{int_coord} is not a lattice point") from None

    def contains(self, int_coord) -> bool:
        key = tuple(int(v) for v in np.mod(np.asarray(int_coord), self.grid.n))
        return key in self._index

    def torus_norms(self) -> np.ndarray:
        """Torus-metric Euclidean norm |lambda| of every point."""
        w = self.grid.wrap_coord(self.coords())
        return np.sqrt(np.sum(w * w, axis=1))


def enumerate_lattice(A, grid: Grid) -> Lattice:
    """Enumerate the duplicate-free point set of A Z^{2d} on the torus."""
    A = np.asarray(A, dtype=float)
    td = 2 * grid.d
    if A.shape != (td, td):
        raise LatticeError(f"generator must be {td}x{td}")
    if abs(np.linalg.det(A)) < 1e-12:
        raise LatticeError("generator matrix is singular")
    Ar = np.round(A)
    if np.max(np.abs(A - Ar)) > 1e-9:
        raise LatticeError("generator entries must be integers in grid units",
                           suggestion=Ar.astype(int))
    Ai = Ar.astype(int)
    closure = grid.n * np.linalg.inv(Ar)
    if np.max(np.abs(closure - np.round(closure))) > 1e-9:
        raise LatticeError(
            "lattice is incommensurate with the torus (n A^{-1} not integral)",
            suggestion=Ar.astype(int))
    # Brute-force enumeration of A m mod n with deduplication.
    axes = [np.arange(grid.n)] * td
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, td)
    pts = np.mod(mesh @ Ai.T, grid.n)
    pts = np.unique(pts, axis=0)
    sym = np.asarray(grid.wrap_index(pts))
    lat = Lattice(A=Ai, grid=grid, int_coords=sym)
    lat._index = {tuple(int(v) for v in row): i
                  for i, row in enumerate(np.mod(sym, grid.n))}
    return lat


def separable_lattice(a: int, b: int, grid: Grid) -> Lattice:
    """diag(a, b) lattice in grid units (d = 1 fast path)."""
    if grid.d != 1:
        raise LatticeError("separable_lattice is the d=1 helper")
    return enumerate_lattice(np.diag([a, b]), grid)


def build_atoms(window: Signal, lattice: Lattice) -> np.ndarray:
    """Matrix of frame atoms pi(lambda) g as columns, shape (n^d, N)."""
    grid = lattice.grid
    n = grid.n
    ic = np.mod(lattice.int_coords, n)
    d = grid.d
    j = np.arange(n)
    if d == 1:
        xs, ms = ic[:, 0], ic[:, 1]
        rolled = window.values[(j[:, None] - xs[None, :]) % n]
        phases = np.exp(TWO_PI * 1j * np.outer(j, ms) / n)
        return rolled * phases
    atoms = np.empty((grid.size, lattice.npoints), dtype=complex)
    garr = window.as_array()
    for i, (x0, x1, m0, m1) in enumerate(ic):
        shifted = np.roll(np.roll(garr, x0, axis=0), x1, axis=1)
        ph = np.exp(TWO_PI * 1j * (np.add.outer(m0 * j, m1 * j)) / n)
        atoms[:, i] = (shifted * ph).reshape(-1)
    return atoms


class GaborFrameSpec:
    """Window + lattice bundle with cached frame machinery.

    The input window is normalized to unit l2 norm on construction.
    """

    def __init__(self, window: Signal, lattice: Lattice, normalize: bool = True):
        nrm = window.norm()
        if nrm == 0:
            raise ValueError("window must be nonzero")
        scale = nrm if normalize else 1.0
        self.window = Signal(window.grid, window.values / scale)
        self.lattice = lattice
        self._atoms = None
        self._S = None
        self._eig = None
        self._tight = None
        self._dual = None

    @property
    def atoms(self) -> np.ndarray:
        if self._atoms is None:
            self._atoms = build_atoms(self.window, self.lattice)
        return self._atoms

    def with_window(self, window: Signal, normalize: bool = True) -> "GaborFrameSpec":
        return GaborFrameSpec(window, self.lattice, normalize=normalize)


def frame_operator(spec: GaborFrameSpec) -> np.ndarray:
    """Dense frame operator S = sum_lambda pi(lambda) g (pi(lambda) g)^H."""
    if spec._S is None:
        G = spec.atoms
        S = G @ G.conj().T
        spec._S = 0.5 * (S + S.conj().T)
    return spec._S


def _eigendecomposition(spec: GaborFrameSpec):
    if spec._eig is None:
        spec._eig = scipy.linalg.eigh(frame_operator(spec))
    return spec._eig


def frame_bounds(spec: GaborFrameSpec):
    """Extremal eigenvalues (A_lo, B_hi) of the frame operator."""
    evals, _ = _eigendecomposition(spec)
    lo = float(max(evals[0], 0.0))
    hi = float(evals[-1])
    return lo, hi


def is_frame(spec: GaborFrameSpec) -> bool:
    lo, hi = frame_bounds(spec)
    return lo > NOT_A_FRAME_RTOL * hi


def is_parseval(spec: GaborFrameSpec, tol: float = 1e-8) -> bool:
    lo, hi = frame_bounds(spec)
    return abs(lo - 1.0) < tol and abs(hi - 1.0) < tol


def canonical_tight_window(spec: GaborFrameSpec) -> Signal:
    """Parseval window g_t = S^{-1/2} g via Hermitian eigendecomposition."""
    if spec._tight is None:
        if not is_frame(spec):
            raise NotAFrameError("lower frame bound vanishes; cannot tighten")
        evals, vecs = _eigendecomposition(spec)
        inv_sqrt = vecs @ np.diag(evals ** -0.5) @ vecs.conj().T
        spec._tight = Signal(spec.window.grid, inv_sqrt @ spec.window.values)
    return spec._tight


def dual_window(spec: GaborFrameSpec) -> Signal:
    """Canonical dual gamma = S^{-1} g."""
    if spec._dual is None:
        if not is_frame(spec):
            raise NotAFrameError("lower frame bound vanishes; no dual window")
        S = frame_operator(spec)
        spec._dual = Signal(spec.window.grid,
                            np.linalg.solve(S, spec.window.values))
    return spec._dual


def tighten(spec: GaborFrameSpec) -> GaborFrameSpec:
    """Spec over the same lattice whose window makes a Parseval frame.

    The tight window keeps its natural scale ||g_t||^2 = 1/redundancy.
    """
    return spec.with_window(canonical_tight_window(spec), normalize=False)


def analysis(f: Signal, spec: GaborFrameSpec) -> np.ndarray:
    """Coefficients <f, pi(lambda) g> over the lattice."""
    return spec.atoms.conj().T @ f.values


def synthesis(c: np.ndarray, spec: GaborFrameSpec) -> Signal:
    """sum_lambda c_lambda pi(lambda) g."""
    c = np.asarray(c, dtype=complex)
    if c.size != spec.lattice.npoints:
        raise ValueError(
            f"expected {spec.lattice.npoints} coefficients, got {c.size}")
    return Signal(spec.window.grid, spec.atoms @ c)


def gabor_mod_norm(f: Signal, p: float, m: Weight, spec: GaborFrameSpec) -> float:
    """Discrete modulation norm (sum |c_lambda|^p m(lambda)^p)^{1/p}."""
    c = np.abs(analysis(f, spec)) * m(spec.lattice.coords())
    if np.isinf(p):
        return float(np.max(c)) if c.size else 0.0
    if p < 1:
        raise ValueError("p must be in [1, inf]")
    return float(np.sum(c ** p) ** (1.0 / p))


@dataclass
class WarpedFrameReport:
    bounds: tuple
    max_rounding_displacement: float
    npoints: int
    density: float


def warped_frame_check(window: Signal, lattice: Lattice,
                       chi: Callable[[np.ndarray], np.ndarray]) -> WarpedFrameReport:
    """Frame bounds of {pi(round(chi(lambda))) g : lambda in Lambda}.

    chi maps continuum phase-space vectors (N, 2d) -> (N, 2d); images are
    rounded to the nearest grid point and wrapped to the torus before the
    atoms are formed.  Duplicate warped points are kept (they are part of
    the warped system).
    """
    grid = lattice.grid
    imgs = np.asarray(chi(lattice.coords()), dtype=float)
    steps = imgs / grid.h
    rounded = np.round(steps)
    displacement = float(np.max(np.abs(steps - rounded) * grid.h)) if steps.size else 0.0
    ic = np.asarray(grid.wrap_index(rounded.astype(int)))
    warped = Lattice(A=lattice.A, grid=grid, int_coords=ic)
    warped._index = {tuple(int(v) for v in row): i
                     for i, row in enumerate(np.mod(ic, grid.n))}
    nrm = window.norm()
    w = Signal(window.grid, window.values / nrm)
    G = build_atoms(w, warped)
    S = G @ G.conj().T
    evals = scipy.linalg.eigvalsh(0.5 * (S + S.conj().T))
    bounds = (float(max(evals[0], 0.0)), float(evals[-1]))
    uniq = np.unique(np.mod(ic, grid.n), axis=0).shape[0]
    return WarpedFrameReport(bounds=bounds,
                             max_rounding_displacement=displacement,
                             npoints=lattice.npoints,
                             density=uniq / grid.size)
