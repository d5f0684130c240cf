"""Coefficient tables shared by both backend implementations.

Asymptotic (Bernoulli-number) expansions used for the gamma-family
functions once the argument has been recurrence-shifted to >= SHIFT_AT.
Truncation error at x = 10 is below 1e-14 for all three series, well
inside the documented 1e-10 accuracy target on [1e-4, 1e6].
"""

import math

#: Recurrence shift threshold: series are evaluated at x >= SHIFT_AT.
SHIFT_AT = 10.0

#: psi(x) ~ ln x - 1/(2x) - sum_n B_{2n} / (2n x^{2n}); Horner in r = 1/x^2.
DIGAMMA_TAIL = (
    1.0 / 12.0,
    1.0 / 120.0,
    1.0 / 252.0,
    1.0 / 240.0,
    1.0 / 132.0,
    691.0 / 32760.0,
    1.0 / 12.0,
)

#: psi1(x) ~ 1/x + 1/(2x^2) + x^{-3} * Horner(r); r = 1/x^2.
TRIGAMMA_TAIL = (
    1.0 / 6.0,
    1.0 / 30.0,
    1.0 / 42.0,
    1.0 / 30.0,
    5.0 / 66.0,
    691.0 / 2730.0,
    7.0 / 6.0,
)

#: ln Gamma(x) ~ (x - 1/2) ln x - x + ln(2 pi)/2 + (1/x) * Horner(r).
LGAMMA_TAIL = (
    1.0 / 12.0,
    1.0 / 360.0,
    1.0 / 1260.0,
    1.0 / 1680.0,
    1.0 / 1188.0,
    691.0 / 360360.0,
    1.0 / 156.0,
)

HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

#: exp-map concentration clamp bounds (overflow safety for alpha = exp(z)).
CONC_CLAMP = 10.0

#: Loss kind codes shared by the training kernels.
LOSS_CE = 0
LOSS_LS_STANDARD = 1
LOSS_LS_PAPER = 2
LOSS_BM_EXP = 3
LOSS_BM_SOFTPLUS = 4

#: Concentration map codes.
MAP_EXP = 0
MAP_SOFTPLUS_PLUS_ONE = 1
