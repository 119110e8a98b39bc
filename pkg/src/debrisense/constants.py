"""Physical constants shared across the simulator.

SPEED_OF_LIGHT is the round 3e8 m/s figure conventional in link-budget
work; FREE_SPACE_IMPEDANCE is derived from the exact SI vacuum
permeability/permittivity so that impedance computations land on the
textbook 376.73 ohm.
"""

import math

SPEED_OF_LIGHT = 3.0e8  # m/s

VACUUM_PERMEABILITY = 4.0 * math.pi * 1e-7  # H/m
VACUUM_PERMITTIVITY = 8.8541878128e-12      # F/m
FREE_SPACE_IMPEDANCE = math.sqrt(VACUUM_PERMEABILITY / VACUUM_PERMITTIVITY)  # ohm
