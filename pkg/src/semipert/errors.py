"""Shared exception types."""


class PreconditionError(ValueError):
    """An operation's stated precondition was violated by the inputs."""


class HypothesisViolation(RuntimeError):
    """A generation-theorem hypothesis fails, so the construction refuses to run.

    ``condition`` is a short machine-checkable name of the violated hypothesis,
    ``detail`` the human-readable explanation with the offending numbers.
    """

    def __init__(self, condition: str, detail: str):
        self.condition = condition
        self.detail = detail
        super().__init__(f"hypothesis violated [{condition}]: {detail}")
