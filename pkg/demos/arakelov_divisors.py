# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Arakelov divisors and angular data
#
# A principal divisor records valuations at the primes and log|sigma(f)| at
# each infinite place.

# %%
from fractions import Fraction

from idelek.arakelov import (
    ArakelovDivisor, ArchValue, angular_part, field_order, k0_to_pic_hat, metric_of_divisor, pic_hat_equal,
    principal_divisor,
)
from idelek.ideles import Idele, Numeric, idele_class
from idelek.number_field import quadratic_field

F = quadratic_field(-5)
print(principal_divisor(F([1, 1])).to_json())

# %% [markdown]
# In Q(sqrt 2) the unit 1 + sqrt 2 gives the vector (log eps, -log eps), which
# is zero in Pic-hat. The vector (log eps, log eps) is not.

# %%
K = quadratic_field(2)
log_eps = ArchValue(Fraction(0), ((K([1, 1]), Fraction(1)),))
zero = ArakelovDivisor.zero(K)
print(pic_hat_equal(ArakelovDivisor(K, {}, [log_eps, log_eps]), zero))
print(pic_hat_equal(ArakelovDivisor(K, {}, [log_eps, -log_eps]), zero))

# %% [markdown]
# The metric attached to a divisor has ||1||^2 = c exp(-2x), with c = 2 at a
# complex place.

# %%
Fi = quadratic_field(-1)
print(metric_of_divisor(ArakelovDivisor.zero(Fi)).norms_sq)
print(metric_of_divisor(principal_divisor(Fi([1, 1]))).norms_sq)

# %% [markdown]
# Classes in the relative group that map to zero in Pic-hat are described by
# their angles modulo the roots of unity.

# %%
Oi = field_order(Fi)
x = idele_class(Idele(Oi, {}, {(0, 0): Numeric(arg_pi=Fraction(1, 4))}))
print(pic_hat_equal(k0_to_pic_hat(x), ArakelovDivisor.zero(Fi)))
print(angular_part(x).to_json())
