import math


def stepsize(base, schedule, k, tau=1.0):
    """Step size at iteration ``k`` (0-based).

    ``constant`` returns ``base``; ``sqrt`` returns ``base / sqrt(1 + k / tau)``,
    which is ``base / sqrt(k + 1)`` for the default ``tau = 1``.
    """
    if schedule == "constant":
        return base
    if schedule == "sqrt":
        return base / math.sqrt(1.0 + k / tau)
    raise ValueError(f"unknown step size schedule {schedule!r}")
