"""Exception hierarchy shared by every module of the package."""


class LrsyncError(Exception):
    """Base class for all errors raised by lrsync."""


class DimensionError(LrsyncError, ValueError):
    """Operand shapes are inconsistent with the requested operation."""


class PreconditionError(LrsyncError, ValueError):
    """An input violates a documented precondition."""


class DomainError(LrsyncError, ValueError):
    """A scalar parameter lies outside its admissible range."""


class ConvergenceError(LrsyncError, RuntimeError):
    """An iterative method hit its iteration cap."""


class DivergenceError(LrsyncError, FloatingPointError):
    """A simulated state became NaN or infinite."""

    def __init__(self, step, time):
        super().__init__(f"non-finite state at step {step} (t = {time:.6f})")
        self.step = step
        self.time = time


class SolverStallError(LrsyncError, RuntimeError):
    """The simplex method exceeded its pivot budget."""


class GenerationFailure(LrsyncError, RuntimeError):
    """A random graph generator exhausted its attempts."""


class NotStabilizableError(LrsyncError, ValueError):
    """The agent is not E-stabilizable, so the regulator LP is infeasible."""


class VerificationError(LrsyncError, RuntimeError):
    """The LP maximizer failed to satisfy the regulator equation."""

    def __init__(self, residual, tol):
        super().__init__(f"regulator equation residual {residual:.3e} exceeds tolerance {tol:.1e}")
        self.residual = residual
        self.tol = tol


class HypothesisViolation(LrsyncError, ValueError):
    """A protocol hypothesis (Metzler structure, gain bound) does not hold."""


class NotHurwitzError(LrsyncError, RuntimeError):
    """No linear Lyapunov certificate exists for a closed-loop mode."""

    def __init__(self, lambda_i):
        super().__init__(f"mode lambda = {lambda_i:.12g} admits no Hurwitz certificate")
        self.lambda_i = lambda_i


class ConstructionFailure(LrsyncError, RuntimeError):
    """The orthant-exit search failed; this contradicts the necessity of B K >= 0 for positivity."""


class ScenarioError(LrsyncError, ValueError):
    """A scenario file is malformed; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
