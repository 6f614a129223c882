"""Exception hierarchy shared by the simulator and the CLI."""


class SpringHandError(Exception):
    """Base class for every error raised by springhand."""


class InvalidModelError(SpringHandError):
    """A hand, spring or tendon description violates a type invariant."""

    def __init__(self, message, *, where=None):
        super().__init__(message if where is None else f"{where}: {message}")
        self.where = where


class RomViolationError(SpringHandError):
    """A joint angle lies outside the range of motion of its DOF."""

    def __init__(self, dof, angle, rom):
        lo, hi = rom
        super().__init__(
            f"angle {angle:.6g} rad outside range of motion [{lo:.6g}, {hi:.6g}] of DOF {dof!r}"
        )
        self.dof = dof
        self.angle = angle
        self.rom = rom


class ConfigurationShapeError(SpringHandError):
    """A configuration vector does not match the hand's DOF count."""


class NetworkConsistencyError(SpringHandError):
    """A tendon path or junction references something that does not exist."""


class SlackViolationError(SpringHandError):
    """A tendon was asked to carry a negative (pushing) tension."""


class JunctionInfeasibleError(SpringHandError):
    """A knot junction admits no non-negative tension split."""


class DivergedError(SpringHandError):
    """The equilibrium iteration did not reach its tolerance."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


class ContactInfeasibleError(SpringHandError):
    """No configuration satisfies the contact constraints."""


class SchemaError(SpringHandError):
    """A description file is malformed or misses a required field."""
