"""
Scalar Gaussian special functions: density, tail H(x) = P(Z >= x), ln H(x) and the
Mills ratio H(x) / phi(x).

The complementary error function comes from scipy.special, which wraps the Cephes
library (rational approximations of W. J. Cody's type on |x| < 8, asymptotic
continued fraction beyond; relative error below 1e-15 over the double range).
The scaled function erfcx(z) = exp(z^2) erfc(z) is the Faddeeva-package
implementation by S. G. Johnson (Chebyshev fits on moderate arguments, continued
fraction for large ones) and carries the same accuracy without underflow.

No function here ever returns NaN for a finite argument.
"""
import math

from scipy import special

SQRT2 = math.sqrt(2.0)
SQRT_2PI = math.sqrt(2.0 * math.pi)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
SQRT_PI_OVER_2 = math.sqrt(math.pi / 2.0)

# Direct log(H) below this point, Mills-ratio expansion above.
LOG_TAIL_SWITCH = 6.0


def gauss_pdf(x: float) -> float:
    """Standard normal density. Underflows to 0 for |x| above ~38.6."""
    return math.exp(-0.5 * x * x) / SQRT_2PI


def gauss_tail(x: float) -> float:
    """
    H(x) = P(Z >= x) = erfc(x / sqrt(2)) / 2.

    Never formed as 1 - Phi(x). Underflows to 0 for x above ~38.5; use
    log_gauss_tail when the logarithm is needed.
    """
    return 0.5 * float(special.erfc(x / SQRT2))


def mills_ratio(x: float) -> float:
    """
    R(x) = H(x) / phi(x) = sqrt(pi/2) * erfcx(x / sqrt(2)).

    Positive and strictly decreasing; x < 1/R(x) < x + 1/x for x > 0. Overflows to
    +inf for x below ~-37.6, where phi(x) itself underflows.
    """
    return SQRT_PI_OVER_2 * float(special.erfcx(x / SQRT2))


def _log_tail_direct(x: float) -> float:
    if x < 0.0:
        # ln(1 - H(-x)); keeps the tiny negative value that log(H) rounds to 0.
        return math.log1p(-gauss_tail(-x))
    return math.log(gauss_tail(x))


def _log_tail_mills(x: float) -> float:
    # ln H(x) = -x^2/2 - ln sqrt(2 pi) + ln R(x), and for large x
    # ln R(x) = -ln x + ln(1 - x^-2 + 3 x^-4 - ...).
    return -0.5 * x * x - LOG_SQRT_2PI + math.log(mills_ratio(x))


def log_gauss_tail(x: float) -> float:
    """
    ln H(x), finite for every finite x up to the overflow of x^2.

    Strictly decreasing wherever the result is representable; for x below ~-38
    the exact value is smaller in magnitude than the least subnormal and the
    result rounds to -0.0.
    """
    if x <= LOG_TAIL_SWITCH:
        return _log_tail_direct(x)
    return _log_tail_mills(x)


def d_log_gauss_tail(x: float) -> float:
    """Derivative of ln H: -phi(x)/H(x) = -1/R(x)."""
    return -1.0 / mills_ratio(x)
