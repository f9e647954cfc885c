from app.env.constants import TIMEOUT_PENALTY
from app.env.views import CompileStatus
from app.errors import NonPositiveTimeError


def reward(t_baseline: float, t_candidate: float, status: CompileStatus) -> float:
    """
    Relative speedup over the baseline; timeouts and errors earn the fixed penalty.

    Raises:
        NonPositiveTimeError: t_baseline <= 0, or t_candidate <= 0 for an ok status
    """
    if t_baseline <= 0:
        raise NonPositiveTimeError(context={"t_baseline": t_baseline})
    status = CompileStatus(status)
    if status != CompileStatus.OK:
        return TIMEOUT_PENALTY
    if t_candidate <= 0:
        raise NonPositiveTimeError(context={"t_candidate": t_candidate})
    return (t_baseline - t_candidate) / t_baseline
