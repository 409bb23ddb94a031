"""Exception types shared across the package."""


class InvalidConfigError(ValueError):
    """A configuration value violates its documented constraints."""


class InvalidArgumentError(ValueError):
    """An operation was called with arguments outside its contract."""


class DomainError(ValueError):
    """A scalar function was evaluated at a point where it is singular."""


class BlowUpError(RuntimeError):
    """A trajectory produced non-finite coefficients.

    Carries the step index and a snapshot of the last finite state so the
    caller can diagnose or censor the path.
    """

    def __init__(self, step, time, last_state=None):
        super().__init__(f"non-finite state at step {step} (t = {time:.6g})")
        self.step = step
        self.time = time
        self.last_state = last_state
