"""Physical constants used throughout the package.

Values are CODATA 2018, pinned as literals so results do not drift with
the installed scipy version. The test suite cross-checks them against
scipy.constants at 1e-9 relative tolerance.

All quantities are SI.
"""

import math

#: Planck constant over 2*pi [J s]. h is exact (6.62607015e-34 J s by the
#: 2019 SI redefinition); hbar = h / (2*pi) evaluated to double precision.
HBAR = 1.0545718176461564e-34

#: Bohr radius a_0 [m].
BOHR_RADIUS = 5.29177210903e-11

#: Hartree energy E_h [J].
HARTREE = 4.3597447222071e-18

TWO_PI = 2.0 * math.pi
