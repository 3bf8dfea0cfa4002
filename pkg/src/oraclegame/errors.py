"""Exception hierarchy shared by every module."""


class OracleError(Exception):
    """Base class for all errors raised by this package."""


class InputError(OracleError, ValueError):
    """An argument violates an operation's precondition."""


class RegistrationError(OracleError, KeyError):
    """A node id is not present in the reputation table."""

    def __str__(self) -> str:
        # KeyError quotes its argument; keep the message readable.
        return str(self.args[0]) if self.args else ""


class StateError(OracleError):
    """An operation was attempted in the wrong protocol state."""


class ConfigError(OracleError, ValueError):
    """A run configuration is invalid."""


class SubmissionRejected(OracleError):
    """A commit or reveal was refused by the task contract.

    ``verdict`` is a short machine-readable reason such as ``"not selected"``,
    ``"duplicate"``, ``"digest mismatch"`` or ``"no commit"``.
    """

    def __init__(self, verdict: str, node: int | None = None):
        self.verdict = verdict
        self.node = node
        super().__init__(f"node {node}: {verdict}" if node is not None else verdict)
