"""Why a quaternionic phase is detectable at all.

Complex phases commute, so a photon picking up exp(i a) then exp(i b) ends
up in the same state no matter the order.  Quaternionic phases do not, and
the generalized defect |r*a*b - b*a*r| measures by how much, with the
beamsplitter reflection unit r participating in the game.
"""

import math

from darkport import (
    I,
    J,
    K,
    PhaseVector,
    commutator_norm,
    generalized_defect,
    qexp,
)

print("Hamilton table spot checks")
print("  i*j =", I * J)
print("  j*i =", J * I)
print()

# two ordinary (complex) phases: everything commutes
a = qexp(PhaseVector(0.7, 0.0, 0.0))
b = qexp(PhaseVector(-1.9, 0.0, 0.0))
print("complex phases 0.7 and -1.9 rad:")
print(f"  commutator norm   {commutator_norm(a, b):.3e}")
print(f"  generalized defect {generalized_defect(a, b, I):.3e}")
print()

# tilt the first phase onto the j axis and the defect switches on
for eps in (0.01, 0.05, 0.2):
    a = qexp(PhaseVector(0.0, eps, 0.0))
    b = qexp(PhaseVector(math.pi, 0.0, 0.0))
    d = generalized_defect(a, b, I)
    print(f"j-axis phase eps={eps:<5} defect {d:.6f}  (2 sin eps = {2*math.sin(eps):.6f})")
print()

# the maximally non-commuting pair
print("alpha = j, beta = k, r = i:")
print(f"  defect {generalized_defect(J, K, I):.1f}  (the maximum, 2)")
