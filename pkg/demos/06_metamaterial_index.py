"""Effective index of the multilayer stack from its measured phase.

The fishnet stack is 3 x (40 nm Ag + 50 nm MgF2) + 15 nm cap = 285 nm.
A single-pass phase more negative than -2 pi d / lambda means the
effective index itself is negative.
"""

import math

import numpy as np

from darkport import PhaseSpectrum, SlabSpec, index_spectrum, index_to_phase, phase_to_index

slab = SlabSpec()
print(f"slab thickness {slab.thickness_nm:.0f} nm")
print()

for wl, phi in ((750.0, -2.388), (770.0, -2.78), (790.0, -math.pi), (790.0, -3.17)):
    n = phase_to_index(phi, wl, slab)
    print(f"  lambda {wl:.0f} nm, phase {phi:+.3f} rad -> n = {n:+.4f}")
print()

# a smooth synthetic spectrum with one instrument rewrap in the middle
wl = np.linspace(740.0, 800.0, 31)
ph_750 = index_to_phase(0.0, 750.0, slab)
ph_790 = index_to_phase(-0.4, 790.0, slab)
phase = ph_750 + (ph_790 - ph_750) * (wl - 750.0) / 40.0
wrapped = phase.copy()
wrapped[wl > 775.0] += 2.0 * math.pi
retrieved = index_spectrum(PhaseSpectrum(wl, wrapped), slab)

print("unwrapped spectrum (instrument jump at 775 nm removed):")
print(f"  ambiguous points: {int(retrieved.ambiguous.sum())}")
crossings = np.where(np.diff(np.sign(retrieved.n)) < 0)[0]
i = crossings[0]
lam0 = wl[i] - retrieved.n[i] * (wl[i + 1] - wl[i]) / (retrieved.n[i + 1] - retrieved.n[i])
print(f"  n = 0 crossing at {lam0:.1f} nm")
print(f"  n({wl[-1]:.0f} nm) = {retrieved.n[-1]:+.4f}")
