"""Finite-difference grid on [-L, L]: derivative stencils, cutoffs, quadrature.

The grid is cell-centered: x_i = -L + (i + 1/2) dx with dx = 2L/N, so the
boundary faces sit at +-L and ghost values are even (Neumann) or odd
(Dirichlet) reflections about the face.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, GridTooSmall

_BC_SIGNS = {"neumann": 1.0, "dirichlet": -1.0}


@dataclass(frozen=True)
class Grid:
    """Cell-centered uniform grid on [-L, L].

    m_cutoff is the steepness of the logistic cutoffs used by the far-field
    decomposition; the constructor enforces that the cutoff is resolved
    (m*dx <= 2) and that its derivatives vanish at the boundary
    (exp(-m*(L-2)) < 1e-12).
    """

    L: float
    N: int
    order: int = 4
    m_cutoff: float = 10.0
    bc: tuple[str, str] = ("neumann", "neumann")
    validate_cutoff: bool = True  # oracle grids skip far-field cutoff gates

    def __post_init__(self):
        if self.order not in (2, 4):
            raise ConfigError(f"order must be 2 or 4, got {self.order}")
        if self.N < 4:
            raise GridTooSmall(f"N={self.N} is too small")
        if self.validate_cutoff:
            if self.m_cutoff * self.dx > 2.0 + 1e-12:
                raise ConfigError(
                    f"cutoff unresolved: m_cutoff*dx = {self.m_cutoff * self.dx:.3g} > 2"
                )
            if self.m_cutoff * (self.L - 2.0) < -np.log(1e-12):
                raise ConfigError(
                    f"cutoff tails do not vanish at |x|=L: exp(-m*(L-2)) = "
                    f"{np.exp(-self.m_cutoff * (self.L - 2.0)):.3g} >= 1e-12"
                )
        for side in self.bc:
            if side not in _BC_SIGNS:
                raise ConfigError(f"unknown boundary condition {side!r}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return -self.L + (np.arange(self.N) + 0.5) * self.dx


def stencil(deriv: int, order: int) -> tuple[np.ndarray, int]:
    """Centered finite-difference weights for d^deriv/dx^deriv at accuracy `order`.

    Returns (weights, half_width); weights are for unit spacing and must be
    scaled by dx**-deriv.
    """
    half = (deriv + 1) // 2 + order // 2 - 1
    offsets = np.arange(-half, half + 1, dtype=float)
    npts = offsets.size
    # Taylor matching: sum_k w_k * o_k^m / m! = delta_{m,deriv}
    A = np.vander(offsets, npts, increasing=True).T
    rhs = np.zeros(npts)
    rhs[deriv] = float(_factorial(deriv))
    w = np.linalg.solve(A, rhs)
    return w, half


def _factorial(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


@dataclass(frozen=True)
class DiffOps:
    """Banded derivative matrices D[j] ~ d^j/dx^j with reflection closure."""

    grid: Grid
    D: dict[int, sp.csr_matrix]
    half_widths: dict[int, int] = field(default_factory=dict)

    @property
    def max_half_width(self) -> int:
        return max(self.half_widths.values())


def build_ops(g: Grid, max_order: int) -> DiffOps:
    """Assemble D_1 .. D_max_order as sparse matrices on the grid.

    Boundary rows fold ghost points back by reflection about the boundary
    face: even reflection for Neumann (exact on constants), odd for
    Dirichlet.
    """
    if not 1 <= max_order <= 4:
        raise ConfigError(f"max_order must be in 1..4, got {max_order}")
    widest = 2 * ((max_order + 1) // 2 + g.order // 2 - 1) + 1
    if g.N <= 4 * widest:
        raise GridTooSmall(f"N={g.N} <= 4*stencil width {widest}")
    sign_lo = _BC_SIGNS[g.bc[0]]
    sign_hi = _BC_SIGNS[g.bc[1]]
    N = g.N
    mats = {}
    halves = {}
    for j in range(1, max_order + 1):
        w, half = stencil(j, g.order)
        w = w / g.dx**j
        rows, cols, vals = [], [], []
        for i in range(N):
            for o, coeff in zip(range(-half, half + 1), w):
                k = i + o
                s = 1.0
                if k < 0:
                    k = -k - 1
                    s = sign_lo
                elif k >= N:
                    k = 2 * N - 1 - k
                    s = sign_hi
                rows.append(i)
                cols.append(k)
                vals.append(s * coeff)
        mats[j] = sp.csr_matrix((vals, (rows, cols)), shape=(N, N))
        halves[j] = half
    return DiffOps(grid=g, D=mats, half_widths=halves)


def _logistic_deriv_polys(max_deriv: int) -> list[np.ndarray]:
    """Coefficient arrays r_k with d^k sigma/dz^k = sigma(1-sigma) r_k(sigma).

    Recurrence: r_{k+1} = (1-2s) r_k + s(1-s) r_k'.
    """
    polys = [np.array([1.0])]
    for _ in range(max_deriv - 1):
        r = polys[-1]
        one_minus_2s = np.zeros(r.size + 1)
        one_minus_2s[: r.size] += r
        one_minus_2s[1:] -= 2.0 * r
        dr = r[1:] * np.arange(1, r.size)
        s_one_minus_s = np.zeros(r.size + 1)
        if dr.size:
            s_one_minus_s[1 : 1 + dr.size] += dr
            s_one_minus_s[2 : 2 + dr.size] -= dr
        polys.append(one_minus_2s + s_one_minus_s)
    return polys


@dataclass(frozen=True)
class CutoffData:
    """Sampled logistic cutoffs and their analytic derivatives.

    chi_plus saturates to 1 ahead of the front (x -> +L) and to 0 in the
    wake; chi_minus = 1 - chi_plus. dchi_plus[k] for k >= 1 are exact
    derivative samples (dchi_minus = -dchi_plus).
    """

    chi_plus: np.ndarray
    chi_minus: np.ndarray
    dchi_plus: dict[int, np.ndarray]


def cutoffs(g: Grid, max_deriv: int = 4) -> CutoffData:
    """Sample chi_+ = (1 + exp(-m x))^-1 and its derivatives up to max_deriv."""
    m = g.m_cutoff
    z = m * g.x
    sig = _expit(z)
    mask = sig * (1.0 - sig)
    polys = _logistic_deriv_polys(max_deriv)
    dchi = {}
    for k in range(1, max_deriv + 1):
        r = polys[k - 1]
        dchi[k] = m**k * mask * np.polynomial.polynomial.polyval(sig, r)
    return CutoffData(chi_plus=sig, chi_minus=1.0 - sig, dchi_plus=dchi)


def _expit(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def gaussian_quadrature_weights(g: Grid) -> np.ndarray:
    """Midpoint weights dx * exp(-x_i^2) for the phase-condition integral."""
    return g.dx * np.exp(-g.x**2)
