"""
First moment bounds on P(|Z_{alpha N}| >= 1), as exponential rates in nats per
dimension.

annealed:               E|Z_t| = 2^(N - t)  ->  rate (1 - alpha) ln 2
conditional_spherical:  on the event {|F(A) - GD(alpha)| < eps},
                        P(A(O sigma) > 0 | A) <= exp(N (GD(alpha) + eps)),
                        summed over 2^N sign vectors  ->  rate ln 2 + GD(alpha) + eps
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from src.PerceptronLab.engines import gardner_derrida as gd
from src.PerceptronLab.engines.quadrature import DEFAULT_SPEC
from src.PerceptronLab.utils.errors import DomainError

LN2 = gd.LN2
DEFAULT_SLACK = 1e-4


class BoundMethod(str, Enum):
    ANNEALED = "annealed"
    CONDITIONAL_SPHERICAL = "conditional_spherical"


class Conclusion(str, Enum):
    BOUND_HOLDS = "bound_holds"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class BoundCertificate:
    alpha: float
    method: BoundMethod
    rate: float
    slack_epsilon: float
    conclusion: Conclusion
    log2_term: float
    gd_value: Optional[float] = None
    q_star: Optional[float] = None

    def to_dict(self, bits=False):
        out = {
            "alpha": self.alpha,
            "method": self.method.value,
            "rate": self.rate,
            "slack_epsilon": self.slack_epsilon,
            "conclusion": self.conclusion.value,
            "decomposition": {
                "log2": self.log2_term,
                "gd": self.gd_value,
                "slack": self.slack_epsilon,
            },
            "q_star": self.q_star,
            "units": "nats",
        }
        if bits:
            out["rate_bits"] = self.rate / LN2
        return out


def _conclude(rate):
    return Conclusion.BOUND_HOLDS if rate < 0.0 else Conclusion.INCONCLUSIVE


def _check_slack(slack_epsilon):
    if not slack_epsilon >= 0.0:
        raise DomainError(f"slack_epsilon must be >= 0, got {slack_epsilon}")


def annealed_rate(alpha):
    """Growth rate of E|Z_{alpha N}| in nats per dimension: (1 - alpha) ln 2."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    return (1.0 - alpha) * LN2


def annealed_certificate(alpha):
    rate = annealed_rate(alpha)
    return BoundCertificate(
        alpha=alpha,
        method=BoundMethod.ANNEALED,
        rate=rate,
        slack_epsilon=0.0,
        conclusion=_conclude(rate),
        log2_term=LN2,
        gd_value=-alpha * LN2,
        q_star=0.0,
    )


def conditional_rate(alpha, slack_epsilon=DEFAULT_SLACK, spec=DEFAULT_SPEC, opt_tol=1e-8):
    """Certificate with rate ln 2 + GD(alpha) + slack_epsilon."""
    _check_slack(slack_epsilon)
    evaluation = gd.gd_min(alpha, spec, opt_tol)
    rate = LN2 + evaluation.value + slack_epsilon
    return BoundCertificate(
        alpha=alpha,
        method=BoundMethod.CONDITIONAL_SPHERICAL,
        rate=rate,
        slack_epsilon=slack_epsilon,
        conclusion=_conclude(rate),
        log2_term=LN2,
        gd_value=evaluation.value,
        q_star=evaluation.q_star,
    )


def rate_at_overlap(alpha, q, slack_epsilon=DEFAULT_SLACK, spec=DEFAULT_SPEC):
    """
    The conditional chain with GD(alpha) replaced by GD(alpha, q) for one fixed q.

    Any q gives an upper bound on GD(alpha), so a negative rate here still
    certifies. q = 0 collapses to the annealed rate; q = 1/2 is the closed form.
    """
    _check_slack(slack_epsilon)
    point = gd.GdPoint(alpha, q)
    value = gd.gd_at(point, spec)
    rate = LN2 + value + slack_epsilon
    return BoundCertificate(
        alpha=alpha,
        method=BoundMethod.CONDITIONAL_SPHERICAL,
        rate=rate,
        slack_epsilon=slack_epsilon,
        conclusion=_conclude(rate),
        log2_term=LN2,
        gd_value=value,
        q_star=point.q,
    )


def markov_tail_bound(certificate, n_dim):
    """min(1, exp(N * rate)): the finite-N Markov bound the certificate stands for."""
    if n_dim < 1:
        raise DomainError(f"n_dim must be >= 1, got {n_dim}")
    exponent = n_dim * certificate.rate
    return 1.0 if exponent >= 0.0 else math.exp(exponent)


def capacity_upper_bound(slack_epsilon=0.0, spec=DEFAULT_SPEC, root_tol=1e-6,
                         bracket=gd.DEFAULT_ALPHA_BRACKET):
    """Smallest alpha (to root_tol) whose conditional rate is negative."""
    _check_slack(slack_epsilon)
    return gd.critical_alpha(spec, root_tol, offset=slack_epsilon, bracket=bracket)
