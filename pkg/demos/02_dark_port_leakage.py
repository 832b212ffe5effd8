"""Sagnac dark port: dark iff the loop phases commute.

Both directions traverse the same elements, in opposite order.  With
commuting phases the two amplitudes rejoin perfectly and the dark port
stays dark up to the instrument's own visibility v.  A non-commuting
element leaks light into it, and the leak feeds the downstream
Mach-Zehnder visibility V = sqrt(1 - v^2 Gamma^2).
"""

import math

from darkport import (
    PhaseElement,
    PhaseVector,
    SagnacModel,
    dark_port_prob,
    gamma_of_model,
    mz_visibility_from_ports,
)

V_SAGNAC = 0.9992774

lc = PhaseElement("lc", PhaseVector(math.pi, 0.0, 0.0))
nim = PhaseElement("nim", PhaseVector(-math.pi, 0.0, 0.0),
                   amplitude_transmission=math.sqrt(0.13))

commuting = SagnacModel(visibility_v=V_SAGNAC, elements=(lc, nim))
p = dark_port_prob(commuting)
print("commuting loop (LC pi, NIM -pi):")
print(f"  P_dark  {p.p_dark:.6f}   ((1-v)/2 = {(1-V_SAGNAC)/2:.6f})")
print(f"  Gamma   {gamma_of_model(commuting):.6f}")
print(f"  V_MZ    {mz_visibility_from_ports(p):.6f}")
print()

print("tilting the LC phase onto the j axis:")
print(f"{'eps':>6} {'P_dark':>10} {'Gamma':>10} {'V_MZ':>8}")
for eps in (0.0, 0.02, 0.05, 0.1, 0.5, math.pi / 2):
    model = SagnacModel(visibility_v=V_SAGNAC, elements=(
        PhaseElement("lc", PhaseVector(0.0, eps, 0.0)), nim))
    p = dark_port_prob(model)
    print(f"{eps:6.3f} {p.p_dark:10.6f} {gamma_of_model(model):10.6f} "
          f"{mz_visibility_from_ports(p):8.4f}")
print()
print("eps = pi/2 makes the LC quaternion a pure j: the defect saturates")
print("at 2, Gamma reaches -1, and half the light exits the dark port.")
