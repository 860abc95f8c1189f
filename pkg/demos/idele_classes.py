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
# # Idèle classes for a few small orders
#
# The ring of integers of Q(sqrt -5) has class number two. An idèle that is
# 1 + sqrt -5 at the prime 2 and 1 elsewhere picks out the nontrivial class.

# %%
from fractions import Fraction

from idelek.algebra import field_algebra
from idelek.ideles import (
    Idele, Numeric, class_equal, extended_boundary, frohlich_class, idele_class, lattice_of_idele, swan_to_class,
    theta,
)
from idelek.number_field import class_group, quadratic_field
from idelek.order_lattice import hurwitz_order, maximal_order

F = quadratic_field(-5)
O = maximal_order(field_algebra(F), F.name)
print(class_group(F).describe())

a = Idele(O, {(0, 2): F([1, 1])})
print(frohlich_class(a).describe())

# %% [markdown]
# The lattice aO agrees with (1 + sqrt -5) O at 2 and with O elsewhere.
# Its index in O is the 2-part of the norm 6.

# %%
L = lattice_of_idele(a)
print("[O : aO] =", L.index())

# %% [markdown]
# Going through the Swan generator [O, a_inf, aO] and back gives the same class.
# Projecting to the class group recovers the locally free class.

# %%
s = theta(a)
c = swan_to_class(s)
print(c.describe())
print(class_equal(c.cl_projection(), frohlich_class(a)))

# %% [markdown]
# Infinite components matter in the relative group. Over Q(i) a rotation by
# an eighth of a turn is not absorbed by any global unit.

# %%
Fi = quadratic_field(-1)
Oi = maximal_order(field_algebra(Fi), Fi.name)
rot = idele_class(Idele(Oi, {}, {(0, 0): Numeric(arg_pi=Fraction(1, 4))}))
quarter = idele_class(Idele(Oi, {}, {(0, 0): Fi([0, 1])}))
print("e^{i pi/4} trivial:", rot.is_trivial())
print("i trivial:", quarter.is_trivial())

# %% [markdown]
# The extended boundary map on the Hurwitz order. The value -3 is not a
# reduced norm at the real place, so a twist lambda < 0 is needed. Two
# different twists give the same class.

# %%
H = hurwitz_order()
x = extended_boundary(H, -3, -1)
y = extended_boundary(H, -3, -5)
print(x.describe())
print(y.describe())
print(class_equal(x, y))
