"""Built-in reaction-diffusion(-elliptic) systems and the declarative model format.

A model is

    M u_t = sum_j P_j d^j u/dx^j + f(u, u_x, ..., u_x^(K); params)

with diagonal mass flags M in {0,1}, strictly linear differential part P and
all nonlinear (possibly advective) terms folded into the reaction f.  The
reaction is a sum of polynomial terms, each a coefficient times a monomial in
the components and their derivatives; this keeps Jacobians exact and makes
model documents round-trip bitwise.  Coefficients and P entries may be
parameter expressions like "sigma", "-1*gamma" or "r*a2".
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import EllipticityViolation, EquilibriumResidual, ParseError, UnknownModel

try:
    import tomllib as _toml
except ModuleNotFoundError:  # python < 3.11
    import tomli as _toml

BUILTIN_NAMES = (
    "nagumo",
    "kpp_burgers",
    "efkpp",
    "autocatalytic",
    "keller_segel",
    "lotka_volterra",
)


def eval_param_expr(expr, params: dict[str, float]) -> float:
    """Evaluate a parameter expression: product of floats and parameter names."""
    if not isinstance(expr, str):
        return float(expr)
    acc = 1.0
    for part in expr.split("*"):
        part = part.strip()
        try:
            acc *= float(part)
        except ValueError:
            if part not in params:
                raise ParseError(f"unknown parameter {part!r} in expression {expr!r}")
            acc *= params[part]
    return acc


@dataclass(frozen=True)
class Term:
    """One polynomial reaction term: coeff * prod_a,k (d^k u_a)^powers[a][k]."""

    row: int
    coeff: float
    powers: tuple[tuple[int, ...], ...]
    coeff_param: str | None = None

    def coefficient(self, params: dict[str, float]) -> float:
        c = self.coeff
        if self.coeff_param is not None:
            c *= eval_param_expr(self.coeff_param, params)
        return c


@dataclass(frozen=True)
class ModelSpec:
    """A concrete model: operators, reaction terms, equilibria, defaults."""

    name: str
    n: int
    order: int
    mass: np.ndarray
    P: dict[int, list]
    terms: tuple[Term, ...]
    params: dict[str, float]
    u_minus: np.ndarray
    u_plus: np.ndarray
    anchor_component: int = 0
    tail_component: int | None = None
    guess: dict[str, float] = field(default_factory=dict)

    @property
    def deriv_order(self) -> int:
        """Highest derivative slot the reaction reads."""
        k = 0
        for t in self.terms:
            for row in t.powers:
                for j, e in enumerate(row):
                    if e > 0:
                        k = max(k, j)
        return k

    def p_matrices(self, params: dict[str, float]) -> dict[int, np.ndarray]:
        """Numeric P_j at the given parameter values."""
        out = {}
        for j, rows in self.P.items():
            out[j] = np.array(
                [[eval_param_expr(v, params) for v in row] for row in rows],
                dtype=float,
            )
        return out

    def reaction(self, derivs: list[np.ndarray], params: dict[str, float]) -> np.ndarray:
        """Evaluate f at sampled (u, u_x, ...): each derivs[k] is (npts, n)."""
        npts = derivs[0].shape[0]
        out = np.zeros((npts, self.n))
        for t in self.terms:
            val = np.full(npts, t.coefficient(params))
            for a, row in enumerate(t.powers):
                for k, e in enumerate(row):
                    if e:
                        val = val * derivs[k][:, a] ** e
            out[:, t.row] += val
        return out

    def reaction_jac(self, u: np.ndarray, params: dict[str, float]) -> np.ndarray:
        """d f / d u at a constant state (derivative slots zero)."""
        derivs = [np.asarray(u, dtype=float)[None, :]] + [
            np.zeros((1, self.n)) for _ in range(self.deriv_order)
        ]
        return self.reaction_slot_jacs(derivs, params)[0][0]

    def reaction_slot_jacs(
        self, derivs: list[np.ndarray], params: dict[str, float]
    ) -> list[np.ndarray]:
        """Pointwise Jacobians d f / d (d^k u): list over k of (npts, n, n)."""
        npts = derivs[0].shape[0]
        K = self.deriv_order
        jacs = [np.zeros((npts, self.n, self.n)) for _ in range(K + 1)]
        for t in self.terms:
            base = np.full(npts, t.coefficient(params))
            factors = []
            for a, row in enumerate(t.powers):
                for k, e in enumerate(row):
                    if e:
                        factors.append((a, k, e, derivs[k][:, a]))
            for idx, (a, k, e, vals) in enumerate(factors):
                g = base * e
                if e > 1:
                    g = g * vals ** (e - 1)
                for jdx, (_, _, e2, vals2) in enumerate(factors):
                    if jdx != idx:
                        g = g * vals2**e2
                jacs[k][:, t.row, a] += g
        return jacs

    def reaction_at_state(self, u: np.ndarray, params: dict[str, float] | None = None) -> np.ndarray:
        derivs = [np.asarray(u, dtype=float)[None, :]] + [
            np.zeros((1, self.n)) for _ in range(self.deriv_order)
        ]
        return self.reaction(derivs, params if params is not None else self.params)[0]

    def validate(self) -> None:
        """Check ellipticity, mass layout, and equilibrium residuals."""
        p = self.p_matrices(self.params)
        m = self.order // 2
        top = p.get(self.order)
        if top is None:
            raise EllipticityViolation(f"{self.name}: P_{self.order} missing")
        lams = np.linalg.eigvals(top)
        if np.any(np.real((-1.0) ** m * lams) >= 0):
            raise EllipticityViolation(
                f"{self.name}: Re((-1)^{m} lambda) >= 0 for an eigenvalue of P_{self.order}"
            )
        if self.mass.shape != (self.n,) or not set(np.unique(self.mass)) <= {0.0, 1.0}:
            raise ParseError(f"{self.name}: mass flags must be 0/1 of length n")
        k = int(np.sum(self.mass))
        if k < 1 or np.any(self.mass[:k] != 1.0) or np.any(self.mass[k:] != 0.0):
            raise ParseError(f"{self.name}: mass flags must be [1]*k + [0]*(n-k), k>=1")
        for label, state in (("u_minus", self.u_minus), ("u_plus", self.u_plus)):
            r = self.reaction_at_state(state)
            if np.max(np.abs(r)) > 1e-12:
                raise EquilibriumResidual(
                    f"{self.name}: |f({label})| = {np.max(np.abs(r)):.3g} > 1e-12"
                )

    def default_guess(self, params: dict[str, float]) -> tuple[float, float]:
        """Seed (c, nu) targeting the relevant double root at these parameters."""
        if self.name in _GUESSES:
            return _GUESSES[self.name](params)
        return self.guess.get("c", 2.0), self.guess.get("nu", -1.0)

    def reference_states(self, params: dict[str, float]) -> tuple[np.ndarray, np.ndarray]:
        """Reference equilibria at the given parameters (seeds and pins)."""
        if self.name in _STATE_FNS:
            return _STATE_FNS[self.name](params)
        return self.u_minus, self.u_plus

    def with_params(self, **updates: float) -> "ModelSpec":
        p = dict(self.params)
        p.update(updates)
        spec = replace(self, params=p)
        um, up = spec.reference_states(p)
        return replace(spec, u_minus=um, u_plus=up)


def _check_slot_linearization(spec: ModelSpec) -> None:
    """Refuse reactions whose derivative slots linearize nontrivially at u_plus.

    Linear advective terms belong in P; the leading-edge symbol only sees the
    u-Jacobian of the reaction.
    """
    derivs = [spec.u_plus[None, :]] + [np.zeros((1, spec.n))] * spec.deriv_order
    jacs = spec.reaction_slot_jacs(derivs, spec.params)
    for k in range(1, len(jacs)):
        if np.max(np.abs(jacs[k])) > 1e-12:
            raise ParseError(
                f"{spec.name}: reaction has a linear d^{k}u term at the unstable "
                "state; fold linear derivative terms into P"
            )


# ---------------------------------------------------------------------------
# builtins


def _t(row, coeff, powers, param=None):
    return Term(row=row, coeff=coeff, powers=tuple(tuple(p) for p in powers), coeff_param=param)


_GUESSES = {
    "nagumo": lambda p: (2.0 * np.sqrt(p["mu"]), -np.sqrt(p["mu"])),
    "kpp_burgers": lambda p: (2.0, -1.0),
    "efkpp": lambda p: (2.0, -1.0),
    "autocatalytic": lambda p: (2.0 * np.sqrt(p["sigma"]), -1.0 / np.sqrt(p["sigma"])),
    "keller_segel": lambda p: (2.0, -1.0),
    "lotka_volterra": lambda p: (2.0 * np.sqrt(1.0 - p["a1"]), -np.sqrt(1.0 - p["a1"])),
}

_STATE_FNS = {
    "efkpp": lambda p: (
        np.array([(p["mu"] + np.sqrt(p["mu"] ** 2 + 40.0)) / 20.0]),
        np.array([0.0]),
    ),
}


def _nagumo() -> ModelSpec:
    # u_t = u_xx + u(1-u)(mu+u) = u_xx + mu*u + (1-mu)*u^2 - u^3
    return ModelSpec(
        name="nagumo",
        n=1,
        order=2,
        mass=np.array([1.0]),
        P={2: [[1.0]]},
        terms=(
            _t(0, 1.0, [[1]], param="mu"),
            _t(0, 1.0, [[2]]),
            _t(0, -1.0, [[2]], param="mu"),
            _t(0, -1.0, [[3]]),
        ),
        params={"mu": 1.0},
        u_minus=np.array([1.0]),
        u_plus=np.array([0.0]),
    )


def _kpp_burgers() -> ModelSpec:
    # u_t + mu (u u_x) = u_xx + u - u^2
    return ModelSpec(
        name="kpp_burgers",
        n=1,
        order=2,
        mass=np.array([1.0]),
        P={2: [[1.0]]},
        terms=(
            _t(0, 1.0, [[1]]),
            _t(0, -1.0, [[2]]),
            _t(0, -1.0, [[1, 1]], param="mu"),
        ),
        params={"mu": 4.0},
        u_minus=np.array([1.0]),
        u_plus=np.array([0.0]),
    )


def _efkpp() -> ModelSpec:
    # u_t = -gamma u_xxxx + u_xx + u + mu u^2 - 10 u^3
    mu = 1.0
    return ModelSpec(
        name="efkpp",
        n=1,
        order=4,
        mass=np.array([1.0]),
        P={2: [[1.0]], 4: [["-1*gamma"]]},
        terms=(
            _t(0, 1.0, [[1]]),
            _t(0, 1.0, [[2]], param="mu"),
            _t(0, -10.0, [[3]]),
        ),
        params={"mu": mu, "gamma": 0.05},
        u_minus=np.array([(mu + np.sqrt(mu**2 + 40.0)) / 20.0]),
        u_plus=np.array([0.0]),
    )


def _autocatalytic() -> ModelSpec:
    # u_t = u_xx - uv - k u v^2 ; v_t = sigma v_xx + uv + k u v^2
    return ModelSpec(
        name="autocatalytic",
        n=2,
        order=2,
        mass=np.array([1.0, 1.0]),
        P={2: [[1.0, 0.0], [0.0, "sigma"]]},
        terms=(
            _t(0, -1.0, [[1], [1]]),
            _t(0, -1.0, [[1], [2]], param="k"),
            _t(1, 1.0, [[1], [1]]),
            _t(1, 1.0, [[1], [2]], param="k"),
        ),
        params={"sigma": 4.0, "k": 1.0},
        u_minus=np.array([0.0, 1.0]),
        u_plus=np.array([1.0, 0.0]),
        anchor_component=0,
        tail_component=1,
    )


def _keller_segel() -> ModelSpec:
    # u_t = u_xx + chi (u v_x)_x + u(1-u) ; 0 = sigma v_xx + u - v
    # cross term expanded: chi (u_x v_x + u v_xx)
    return ModelSpec(
        name="keller_segel",
        n=2,
        order=2,
        mass=np.array([1.0, 0.0]),
        P={2: [[1.0, 0.0], [0.0, "sigma"]]},
        terms=(
            _t(0, 1.0, [[0, 1], [0, 1]], param="chi"),
            _t(0, 1.0, [[1, 0, 0], [0, 0, 1]], param="chi"),
            _t(0, 1.0, [[1]]),
            _t(0, -1.0, [[2]]),
            _t(1, 1.0, [[1], [0]]),
            _t(1, -1.0, [[0], [1]]),
        ),
        params={"sigma": 3.5, "chi": 1.0},
        u_minus=np.array([1.0, 1.0]),
        u_plus=np.array([0.0, 0.0]),
        anchor_component=0,
        tail_component=0,
    )


def _lotka_volterra() -> ModelSpec:
    # u_t = u_xx + u(1-u-a1 v) ; v_t = sigma v_xx + r v(1-a2 u - v)
    # The v equation is kept parabolic, matching the displayed symbol matrix
    # (and the transition benchmarks); flip the mass flag in a model document
    # for the quasi-static variant.
    return ModelSpec(
        name="lotka_volterra",
        n=2,
        order=2,
        mass=np.array([1.0, 1.0]),
        P={2: [[1.0, 0.0], [0.0, "sigma"]]},
        terms=(
            _t(0, 1.0, [[1], [0]]),
            _t(0, -1.0, [[2], [0]]),
            _t(0, -1.0, [[1], [1]], param="a1"),
            _t(1, 1.0, [[0], [1]], param="r"),
            _t(1, -1.0, [[0], [2]], param="r"),
            _t(1, -1.0, [[1], [1]], param="r*a2"),
        ),
        params={"sigma": 1.0, "a1": 0.5, "a2": 5.0, "r": 1.0},
        u_minus=np.array([1.0, 0.0]),
        u_plus=np.array([0.0, 1.0]),
        anchor_component=0,
        tail_component=0,
    )


_BUILDERS = {
    "nagumo": _nagumo,
    "kpp_burgers": _kpp_burgers,
    "efkpp": _efkpp,
    "autocatalytic": _autocatalytic,
    "keller_segel": _keller_segel,
    "lotka_volterra": _lotka_volterra,
}


def builtin(name: str, **param_overrides: float) -> ModelSpec:
    """Return a builtin model, optionally overriding parameter defaults."""
    try:
        spec = _BUILDERS[name]()
    except KeyError:
        raise UnknownModel(f"unknown builtin model {name!r}") from None
    if param_overrides:
        spec = spec.with_params(**param_overrides)
    spec.validate()
    _check_slot_linearization(spec)
    return spec


# ---------------------------------------------------------------------------
# declarative documents


def load_model(text_or_path) -> ModelSpec:
    """Parse a model document (TOML text or path) into a validated ModelSpec."""
    if isinstance(text_or_path, (str, os.PathLike)) and "\n" not in str(text_or_path) and os.path.exists(text_or_path):
        with open(text_or_path, "rb") as fh:
            try:
                doc = _toml.load(fh)
            except _toml.TOMLDecodeError as exc:
                raise ParseError(f"invalid model document: {exc}") from exc
    else:
        try:
            doc = _toml.loads(str(text_or_path))
        except _toml.TOMLDecodeError as exc:
            raise ParseError(f"invalid model document: {exc}") from exc
    try:
        spec = _spec_from_doc(doc)
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"invalid model document: {exc}") from exc
    spec.validate()
    _check_slot_linearization(spec)
    return spec


def _spec_from_doc(doc: dict) -> ModelSpec:
    n = int(doc["n"])
    order = int(doc["order"])
    K = order - 1
    terms = []
    for raw in doc["reaction"]["terms"]:
        powers = raw["powers"]
        if len(powers) != n:
            raise ParseError(f"term powers must have {n} rows, got {len(powers)}")
        for row in powers:
            if len(row) > K + 1:
                raise ParseError("derivative order in a term exceeds 2m-1")
        padded = tuple(
            tuple(int(e) for e in row) + (0,) * (K + 1 - len(row)) for row in powers
        )
        terms.append(
            Term(
                row=int(raw["row"]),
                coeff=float(raw["coeff"]),
                powers=padded,
                coeff_param=raw.get("coeff_param"),
            )
        )
    if "jac" not in doc:
        warnings.warn(
            "model document omits an explicit Jacobian table; synthesizing the "
            "Jacobian from the polynomial terms",
            stacklevel=2,
        )
    P = {int(k): [list(row) for row in rows] for k, rows in doc["P"].items()}
    return ModelSpec(
        name=str(doc.get("name", "custom")),
        n=n,
        order=order,
        mass=np.array([float(v) for v in doc["mass"]]),
        P=P,
        terms=tuple(terms),
        params={k: float(v) for k, v in doc.get("params", {}).items()},
        u_minus=np.array([float(v) for v in doc["equilibria"]["u_minus"]]),
        u_plus=np.array([float(v) for v in doc["equilibria"]["u_plus"]]),
        anchor_component=int(doc.get("anchor", 0)),
        tail_component=doc.get("tail_component"),
        guess={k: float(v) for k, v in doc.get("guess", {}).items()},
    )


def serialize_model(spec: ModelSpec) -> str:
    """Emit the TOML document for a ModelSpec (round-trips bitwise)."""
    lines = [
        f'name = "{spec.name}"',
        f"n = {spec.n}",
        f"order = {spec.order}",
        f"mass = [{', '.join(repr(float(v)) for v in spec.mass)}]",
        f"anchor = {spec.anchor_component}",
    ]
    if spec.tail_component is not None:
        lines.append(f"tail_component = {spec.tail_component}")
    lines.append("")
    lines.append("[params]")
    for k, v in spec.params.items():
        lines.append(f"{k} = {v!r}")
    lines.append("")
    lines.append("[P]")
    for j, rows in sorted(spec.P.items()):
        body = ", ".join(
            "[" + ", ".join(f'"{v}"' if isinstance(v, str) else repr(float(v)) for v in row) + "]"
            for row in rows
        )
        lines.append(f'"{j}" = [{body}]')
    lines.append("")
    lines.append("[equilibria]")
    lines.append(f"u_minus = [{', '.join(repr(float(v)) for v in spec.u_minus)}]")
    lines.append(f"u_plus = [{', '.join(repr(float(v)) for v in spec.u_plus)}]")
    if spec.guess:
        lines.append("")
        lines.append("[guess]")
        for k, v in spec.guess.items():
            lines.append(f"{k} = {v!r}")
    lines.append("")
    lines.append("[reaction]")
    lines.append("terms = [")
    for t in spec.terms:
        powers = ", ".join("[" + ", ".join(str(e) for e in row) + "]" for row in t.powers)
        entry = f"  {{row = {t.row}, coeff = {t.coeff!r}, powers = [{powers}]"
        if t.coeff_param is not None:
            entry += f', coeff_param = "{t.coeff_param}"'
        entry += "},"
        lines.append(entry)
    lines.append("]")
    lines.append("")
    return "\n".join(lines)
