"""Exception types shared across the toolkit."""


class FrontlabError(Exception):
    """Base class for all frontlab errors."""


class ConfigError(FrontlabError):
    """Invalid run or grid configuration."""


class GridTooSmall(ConfigError):
    """Grid has too few points for the requested stencil."""


class UnknownModel(FrontlabError):
    """Requested builtin model name does not exist."""


class ParseError(FrontlabError):
    """Model document could not be parsed."""


class EllipticityViolation(FrontlabError):
    """Leading-order diffusion matrix violates the ellipticity sign condition."""


class EquilibriumResidual(FrontlabError):
    """Declared equilibrium does not annihilate the reaction."""


class NoConvergence(FrontlabError):
    """Newton iteration failed to converge."""

    def __init__(self, message, residual_norm=None, iterations=None):
        super().__init__(message)
        self.residual_norm = residual_norm
        self.iterations = iterations


class DegenerateRoot(FrontlabError):
    """Double root fails the simplicity condition (a derivative is ~0).

    The offending root is attached as ``.root`` so callers can still
    inspect and report it.
    """

    def __init__(self, message, root=None):
        super().__init__(message)
        self.root = root


class WrongSign(FrontlabError):
    """Double root violates the sign condition on second/lambda derivatives."""

    def __init__(self, message, root=None):
        super().__init__(message)
        self.root = root


class PositiveNu(FrontlabError):
    """Double root has non-negative spatial decay rate."""

    def __init__(self, message, root=None):
        super().__init__(message)
        self.root = root


class NoRootInBracket(FrontlabError):
    """No real dispersion root inside the requested bracket."""


class MultipleRoots(FrontlabError):
    """More than one real dispersion root inside the requested bracket."""


class ResonanceAbort(FrontlabError):
    """A secondary spatial root collided with the critical decay rate."""

    def __init__(self, message, warnings=None):
        super().__init__(message)
        self.warnings = warnings or []


class FlatProfile(FrontlabError):
    """Degenerate seed with identical asymptotic states."""


class SingularJacobian(FrontlabError):
    """LU factorization hit a negligible pivot."""


class NaNInJacobian(FrontlabError):
    """Finite-difference Jacobian assembly produced non-finite entries."""


class FirstStepFailure(FrontlabError):
    """Continuation could not produce a second branch point."""


class WrongSide(FrontlabError):
    """Pushed solve landed on the sub-critical side (speed below linear)."""


class UnsupportedModel(FrontlabError):
    """Operation does not apply to this model (e.g. elliptic oracle run)."""


class FrontExitedDomain(FrontlabError):
    """Tracked front reached the simulation boundary."""


class CFLViolation(ConfigError):
    """Explicit time step violates the stability bound."""
