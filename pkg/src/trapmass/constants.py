"""Fixed physical constants (SI) used by the SI unit mode.

Values are pinned so that golden numbers in tests and emitted files are
reproducible bit-for-bit; natural-unit runs override them explicitly.
"""

CONSTANTS_VERSION = "codata2018-v1"

C_LIGHT = 299792458.0          # m/s, exact
HBAR = 1.054571817e-34         # J s
K_B = 1.380649e-23             # J/K, exact
G_STANDARD = 9.81              # m/s^2, local gravitational acceleration
