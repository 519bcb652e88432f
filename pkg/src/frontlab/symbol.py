"""Leading-edge symbol: dispersion relations, double roots, tail eigenvectors.

The symbol of the linearization at the unstable state in a frame moving with
speed c is

    A(lambda, nu, c) = sum_j P_j nu^j + c nu M + f_u(u_+) - lambda M,

its determinant d = det A is the dispersion relation, and linear spreading
speeds are pinned by simple double roots d = d_nu = 0 with nu < 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateRoot,
    MultipleRoots,
    NoConvergence,
    NoRootInBracket,
    PositiveNu,
    ResonanceAbort,
    WrongSign,
)

_CS_STEP = 1e-24  # complex-step size; truncation is O(step^2), no subtraction


@dataclass(frozen=True)
class SymbolMatrix:
    """Frozen numeric symbol data for one parameter point."""

    n: int
    order: int
    P: dict[int, np.ndarray]
    M: np.ndarray
    fu0: np.ndarray
    fu_deriv: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def scale(self) -> float:
        s = max(1.0, float(np.max(np.abs(self.fu0))))
        for mat in self.P.values():
            s = max(s, float(np.max(np.abs(mat))))
        return s


def make_symbol(model, params: dict[str, float]) -> SymbolMatrix:
    """Build the symbol for a model at given parameters.

    The reaction Jacobian is taken at the reference unstable state u_+;
    derivative-slot linearizations there are rejected at model load, so only
    the u-Jacobian enters.
    """
    _, u_plus = model.reference_states(params)
    return SymbolMatrix(
        n=model.n,
        order=model.order,
        P=model.p_matrices(params),
        M=np.asarray(model.mass, dtype=float),
        fu0=model.reaction_jac(u_plus, params),
    )


def eval_symbol(sm: SymbolMatrix, lam: complex, nu: complex, c: float) -> np.ndarray:
    """A(lambda, nu, c) as an n x n complex (or real) matrix."""
    dtype = complex if (np.iscomplexobj(lam) or np.iscomplexobj(nu) or np.iscomplexobj(c)
                        or isinstance(lam, complex) or isinstance(nu, complex)) else float
    A = np.array(sm.fu0, dtype=dtype)
    for j, Pj in sm.P.items():
        A = A + Pj * nu**j
    for k, Jk in sm.fu_deriv.items():
        A = A + Jk * nu**k
    A = A + (c * nu) * np.diag(sm.M).astype(dtype)
    A = A - lam * np.diag(sm.M).astype(dtype)
    return A


def dnu_symbol(sm: SymbolMatrix, lam: complex, nu: complex, c: float) -> np.ndarray:
    """Exact d A / d nu."""
    dtype = complex if isinstance(nu, complex) or np.iscomplexobj(nu) else float
    A = np.zeros((sm.n, sm.n), dtype=dtype)
    for j, Pj in sm.P.items():
        A = A + j * Pj * nu ** (j - 1)
    for k, Jk in sm.fu_deriv.items():
        A = A + k * Jk * nu ** (k - 1)
    A = A + c * np.diag(sm.M).astype(dtype)
    return A


def dispersion(sm: SymbolMatrix, lam: complex, nu: complex, c: float) -> complex:
    """det A(lambda, nu, c); closed-form cofactors for n <= 3, else LU."""
    A = eval_symbol(sm, lam, nu, c)
    n = sm.n
    if n == 1:
        return A[0, 0]
    if n == 2:
        return A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if n == 3:
        return (
            A[0, 0] * (A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1])
            - A[0, 1] * (A[1, 0] * A[2, 2] - A[1, 2] * A[2, 0])
            + A[0, 2] * (A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0])
        )
    return np.linalg.det(A.astype(complex))


def dispersion_dnu(sm: SymbolMatrix, lam: complex, nu: float, c: float) -> float:
    """d d/d nu at real arguments by complex step."""
    return float(np.imag(dispersion(sm, lam, nu + 1j * _CS_STEP, c)) / _CS_STEP)


def dispersion_dlambda(sm: SymbolMatrix, lam: float, nu: float, c: float) -> float:
    """d d/d lambda at real arguments by complex step."""
    return float(np.imag(dispersion(sm, lam + 1j * _CS_STEP, nu, c)) / _CS_STEP)


def dispersion_dnunu(sm: SymbolMatrix, lam: float, nu: float, c: float) -> float:
    """d^2 d/d nu^2: central difference of complex-step first derivatives."""
    h = 1e-6 * (1.0 + abs(nu))
    return (dispersion_dnu(sm, lam, nu + h, c) - dispersion_dnu(sm, lam, nu - h, c)) / (2.0 * h)


def dispersion_coeffs(sm: SymbolMatrix, c: float, lam: complex = 0.0, radius: float | None = None) -> np.ndarray:
    """Coefficients of the nu-polynomial d(lam, . , c), ascending order.

    Exact (up to conditioning) by interpolation at Chebyshev nodes; ellipticity
    guarantees the leading coefficient is nonzero.
    """
    deg = sm.order * sm.n
    R = radius if radius is not None else 2.0
    nodes = R * np.cos(np.pi * (np.arange(deg + 1) + 0.5) / (deg + 1))
    vals = np.array([dispersion(sm, lam, z, c) for z in nodes])
    V = np.polynomial.polynomial.polyvander(nodes, deg)
    coeffs = np.linalg.solve(V, vals)
    if not np.iscomplexobj(vals) or np.max(np.abs(vals.imag)) == 0.0:
        coeffs = coeffs.real
    return coeffs


def spatial_roots(sm: SymbolMatrix, c: float, lam: complex = 0.0, radius: float | None = None) -> np.ndarray:
    """All roots of d(lam, ., c) via companion-matrix eigenvalues."""
    coeffs = dispersion_coeffs(sm, c, lam=lam, radius=radius)
    return np.polynomial.polynomial.polyroots(coeffs)


@dataclass(frozen=True)
class DoubleRoot:
    """A solved pinched double root at lambda = 0."""

    c_lin: float
    nu_lin: float
    u0: np.ndarray
    u1: np.ndarray
    d10: float
    d02: float
    anchor: int = 0

    @property
    def slope_ratio(self) -> float:
        """d10/d02 * nu_lin, the radicand of the pushed-root expansion."""
        return self.d10 / self.d02 * self.nu_lin


def _kernel_guess(A: np.ndarray) -> np.ndarray:
    _, _, vt = np.linalg.svd(A)
    return vt[-1]


def _left_kernel(A: np.ndarray) -> np.ndarray:
    u, _, _ = np.linalg.svd(A)
    return u[:, -1]


def _root_checks(sm, c, nu, u0, u1, anchor, tol_degenerate=1e-8):
    scale = max(1.0, float(np.max(np.abs(dispersion_coeffs(sm, c)))))
    d10 = dispersion_dlambda(sm, 0.0, nu, c)
    dnunu = dispersion_dnunu(sm, 0.0, nu, c)
    d02 = 0.5 * dnunu
    dr = DoubleRoot(c_lin=c, nu_lin=nu, u0=u0, u1=u1, d10=d10, d02=d02, anchor=anchor)
    if abs(dnunu) <= tol_degenerate * scale or abs(d10) <= tol_degenerate * scale:
        raise DegenerateRoot(
            f"double root degenerate: d_nunu={dnunu:.3e}, d_lambda={d10:.3e}", root=dr
        )
    if dnunu * d10 >= 0:
        raise WrongSign(
            f"double root violates sign condition: d_nunu*d_lambda = {dnunu * d10:.3e} >= 0",
            root=dr,
        )
    if nu >= 0:
        raise PositiveNu(f"double root has nu = {nu:.6g} >= 0", root=dr)
    return dr


def solve_double_root(
    sm: SymbolMatrix,
    guess: tuple[float, float],
    anchor: int | None = None,
    max_iter: int = 50,
    tol_residual: float = 1e-12,
    tol_step: float = 1e-11,
) -> DoubleRoot:
    """Newton on the matrix-pencil system for (u0, u1, c, nu).

    The 2n+2 unknowns solve A u0 = 0, A_nu u0 + A u1 = 0 together with the
    normalizations <u0 - u0_g, u0_g> = <u1 - u1_g, u0_g> = 0 against the
    initial kernel guesses; the basin of the supplied (c, nu) guess selects
    which double root is found.
    """
    c0, nu0 = float(guess[0]), float(guess[1])
    n = sm.n
    A0 = eval_symbol(sm, 0.0, nu0, c0)
    u0g = _kernel_guess(A0)
    u1g, *_ = np.linalg.lstsq(A0, -dnu_symbol(sm, 0.0, nu0, c0) @ u0g, rcond=None)
    scale = max(1.0, float(np.max(np.abs(dispersion_coeffs(sm, c0)))))

    def F(z):
        u0, u1, c, nu = z[:n], z[n : 2 * n], z[2 * n], z[2 * n + 1]
        A = eval_symbol(sm, 0.0, nu, c)
        Anu = dnu_symbol(sm, 0.0, nu, c)
        return np.concatenate(
            [A @ u0, Anu @ u0 + A @ u1, [(u0 - u0g) @ u0g], [(u1 - u1g) @ u0g]]
        )

    z = np.concatenate([u0g, u1g, [c0, nu0]])
    converged = False
    for _ in range(max_iter):
        r = F(z)
        if np.max(np.abs(r)) < tol_residual * scale:
            converged = True
            break
        J = _fd_jacobian(F, z, r)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            raise NoConvergence(
                "singular Jacobian in double-root Newton", residual_norm=float(np.max(np.abs(r)))
            ) from None
        z = z + step
        if np.max(np.abs(step)) < tol_step * (1.0 + np.max(np.abs(z))):
            converged = np.max(np.abs(F(z))) < tol_residual * scale * 100
            break
    if not converged:
        r = F(z)
        raise NoConvergence(
            f"double-root Newton failed: |F| = {np.max(np.abs(r)):.3e}",
            residual_norm=float(np.max(np.abs(r))),
            iterations=max_iter,
        )
    u0, u1, c, nu = z[:n], z[n : 2 * n], float(z[2 * n]), float(z[2 * n + 1])
    if anchor is None:
        anchor = int(np.argmax(np.abs(u0)))
    u0, u1 = _gauge(u0, u1, anchor)
    return _root_checks(sm, c, nu, u0, u1, anchor)


def _gauge(u0: np.ndarray, u1: np.ndarray, anchor: int) -> tuple[np.ndarray, np.ndarray]:
    """Scale so u0[anchor] = 1 and shift so u1[anchor] = 0."""
    s = u0[anchor]
    if abs(s) < 1e-10 * np.max(np.abs(u0)):
        raise ResonanceAbort(
            f"tail gauge degenerate: kernel vector vanishes in component {anchor}"
        )
    u0 = u0 / s
    u1 = u1 / s
    return u0, u1 - u1[anchor] * u0


def _fd_jacobian(F, z, r0, step=1e-7):
    m = r0.size
    J = np.empty((m, z.size))
    for j in range(z.size):
        h = step * (1.0 + abs(z[j]))
        zp = z.copy()
        zp[j] += h
        J[:, j] = (F(zp) - r0) / h
    return J


def double_root_determinant(
    sm: SymbolMatrix,
    guess: tuple[float, float],
    max_iter: int = 50,
    tol_residual: float = 1e-12,
) -> tuple[float, float]:
    """(c_lin, nu_lin) from Newton on d = 0, d_nu = 0 in (c, nu)."""
    c, nu = float(guess[0]), float(guess[1])
    scale = max(1.0, float(np.max(np.abs(dispersion_coeffs(sm, c)))))
    for _ in range(max_iter):
        r = np.array(
            [np.real(dispersion(sm, 0.0, nu, c)), dispersion_dnu(sm, 0.0, nu, c)]
        )
        if np.max(np.abs(r)) < tol_residual * scale:
            return c, nu
        ddc = float(np.imag(dispersion(sm, 0.0, nu, c + 1j * _CS_STEP)) / _CS_STEP)
        ddnu = dispersion_dnu(sm, 0.0, nu, c)
        h = 1e-6 * (1.0 + abs(nu))
        ddnuc = (
            float(np.imag(dispersion(sm, 0.0, nu + h, c + 1j * _CS_STEP)) / _CS_STEP)
            - float(np.imag(dispersion(sm, 0.0, nu - h, c + 1j * _CS_STEP)) / _CS_STEP)
        ) / (2.0 * h)
        ddnunu = dispersion_dnunu(sm, 0.0, nu, c)
        J = np.array([[ddc, ddnu], [ddnuc, ddnunu]])
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            raise NoConvergence("singular Jacobian in determinant double-root Newton") from None
        c, nu = c + step[0], nu + step[1]
    raise NoConvergence(f"determinant double-root Newton failed at (c, nu)=({c:.6g}, {nu:.6g})")


def double_root_lambda(
    sm: SymbolMatrix,
    c: float,
    guess: tuple[float, float] = (0.0, -1.0),
    max_iter: int = 50,
    tol_residual: float = 1e-12,
) -> tuple[float, float]:
    """(lambda_dr, nu_dr) solving d = d_nu = 0 at fixed speed c."""
    lam, nu = float(guess[0]), float(guess[1])
    scale = max(1.0, float(np.max(np.abs(dispersion_coeffs(sm, c)))))
    for _ in range(max_iter):
        r = np.array(
            [np.real(dispersion(sm, lam, nu, c)), dispersion_dnu(sm, lam, nu, c)]
        )
        if np.max(np.abs(r)) < tol_residual * scale:
            return lam, nu
        ddlam = dispersion_dlambda(sm, lam, nu, c)
        ddnu = dispersion_dnu(sm, lam, nu, c)
        h = 1e-6 * (1.0 + abs(nu))
        ddnulam = (
            dispersion_dlambda(sm, lam, nu + h, c) - dispersion_dlambda(sm, lam, nu - h, c)
        ) / (2.0 * h)
        ddnunu = dispersion_dnunu(sm, lam, nu, c)
        J = np.array([[ddlam, ddnu], [ddnulam, ddnunu]])
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            raise NoConvergence("singular Jacobian in lambda double-root Newton") from None
        lam, nu = lam + step[0], nu + step[1]
    raise NoConvergence(f"lambda double-root Newton failed at c={c:.6g}")


def find_decay_root(sm: SymbolMatrix, c: float, bracket: tuple[float, float]) -> float:
    """The unique real root of d(0, ., c) inside the bracket.

    Used to pin the steeper decay rate of pushed fronts; the bracket must
    isolate it.  A collided pair inside the bracket (c at the linear speed)
    reports MultipleRoots.
    """
    lo, hi = min(bracket), max(bracket)
    roots = spatial_roots(sm, c, radius=max(2.0, 2.0 * max(abs(lo), abs(hi))))
    tol_im = 1e-8
    hits = [
        float(r.real)
        for r in roots
        if abs(r.imag) <= tol_im * (1.0 + abs(r.real)) and lo - 1e-12 <= r.real <= hi + 1e-12
    ]
    if not hits:
        raise NoRootInBracket(f"no real dispersion root in [{lo:.6g}, {hi:.6g}] at c={c:.6g}")
    if len(hits) > 1:
        raise MultipleRoots(
            f"{len(hits)} real dispersion roots in [{lo:.6g}, {hi:.6g}] at c={c:.6g}: {hits}"
        )
    return hits[0]


@dataclass(frozen=True)
class ResonanceWarning:
    """One offending spatial root near or ahead of the critical decay rate."""

    kind: str  # "near_collision" | "weak_decay"
    root: complex
    distance: float
    severity: str  # "hard" | "soft"

    def describe(self) -> str:
        return (
            f"{self.kind}: root {self.root:.6g} at distance {self.distance:.3g} "
            f"from the critical decay rate ({self.severity})"
        )


def resonance_check(
    sm: SymbolMatrix,
    dr: DoubleRoot,
    warn_tol: float = 0.1,
    hard_tol: float = 0.02,
) -> list[ResonanceWarning]:
    """Scan all spatial roots at (0, ., c_lin) for collisions with nu_lin.

    The double root itself accounts for the two roots nearest nu_lin; any
    further root within warn_tol is a (near-)resonance, hard within hard_tol.
    Roots strictly between nu_lin and 0 decay more weakly than the tail
    ansatz and are flagged softly.
    """
    roots = spatial_roots(sm, dr.c_lin, radius=max(2.0, 3.0 * abs(dr.nu_lin)))
    order = np.argsort(np.abs(roots - dr.nu_lin))
    rest = roots[order][2:]
    warnings = []
    eps = 1e-9 * (1.0 + abs(dr.nu_lin))
    for r in rest:
        dist = float(abs(r - dr.nu_lin))
        if dist < warn_tol:
            warnings.append(
                ResonanceWarning(
                    kind="near_collision",
                    root=complex(r),
                    distance=dist,
                    severity="hard" if dist < hard_tol else "soft",
                )
            )
        elif dr.nu_lin + eps < r.real < -eps:
            warnings.append(
                ResonanceWarning(
                    kind="weak_decay",
                    root=complex(r),
                    distance=dist,
                    severity="soft",
                )
            )
    return warnings


def hard_resonances(warnings: list[ResonanceWarning]) -> list[ResonanceWarning]:
    return [w for w in warnings if w.severity == "hard"]


@dataclass(frozen=True)
class TailBasis:
    """Bordered-solve machinery for the tail eigenvector chain.

    Fixed bordering vectors (a reference kernel vector and a reference adjoint
    kernel vector) make the kernel/generalized-kernel solves smooth in
    (c, nu, params) even off the dispersion set; the gauge pins
    u0[anchor] = 1, u1[anchor] = 0 so the tail coefficients (alpha, beta)
    have a fixed meaning along a branch.
    """

    anchor: int
    u0_ref: np.ndarray
    ead_ref: np.ndarray

    def vectors(self, sm: SymbolMatrix, c: float, nu: float) -> tuple[np.ndarray, np.ndarray]:
        n = sm.n
        A = eval_symbol(sm, 0.0, nu, c)
        Anu = dnu_symbol(sm, 0.0, nu, c)
        B = np.zeros((n + 1, n + 1))
        B[:n, :n] = A
        B[:n, n] = self.ead_ref
        B[n, :n] = self.u0_ref
        rhs0 = np.zeros(n + 1)
        rhs0[n] = 1.0
        sol0 = np.linalg.solve(B, rhs0)
        u0 = sol0[:n]
        rhs1 = np.zeros(n + 1)
        rhs1[:n] = -(Anu @ u0)
        sol1 = np.linalg.solve(B, rhs1)
        u1 = sol1[:n]
        return _gauge(u0, u1, self.anchor)


def tail_basis_from_root(sm: SymbolMatrix, dr: DoubleRoot) -> TailBasis:
    A = eval_symbol(sm, 0.0, dr.nu_lin, dr.c_lin)
    ead = _left_kernel(A)
    u0 = dr.u0 / np.linalg.norm(dr.u0)
    return TailBasis(anchor=dr.anchor, u0_ref=u0, ead_ref=ead)
