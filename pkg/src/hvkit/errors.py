"""Exception hierarchy shared by every hvkit module."""


class HVError(Exception):
    """Base class for all hvkit errors."""


class InvariantError(HVError, ValueError):
    """A type invariant was violated.

    ``invariant`` names the rule; ``where`` carries the offending
    identifiers (state, cell, observable) when known.
    """

    def __init__(self, invariant, message, **where):
        self.invariant = invariant
        self.where = where
        loc = ", ".join(f"{k}={v!r}" for k, v in where.items())
        super().__init__(f"[{invariant}] {message}" + (f" ({loc})" if loc else ""))


class MissingEntryError(HVError, KeyError):
    """A state, observable, table, or cell is not present in a model."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class WrongAuditError(HVError):
    """The audit does not apply to this kind of response table."""


class TotalNoShowError(HVError):
    """The detection probability is zero, so conditional statistics are undefined."""


class PreconditionError(HVError):
    """An operation's precondition does not hold for its inputs."""


class NoWitnessError(PreconditionError):
    """No hidden variable lies in every preparation's support."""
