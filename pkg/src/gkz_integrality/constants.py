"""Constants for gkz_integrality.

Contains the default search bounds, resource guards, certificate status strings
and command-line exit codes.
"""

TOOL_VERSION = "0.1.0"

# Search defaults (echoed into every certificate)
DEFAULT_MAX_B_MULTIPLIER = 3     # b ranges over a, 2a, ..., 3a
DEFAULT_BOX_RADIUS = 40          # kernel-basis coefficient radius
DEFAULT_ORDER = 40               # truncation order for expansions
DEFAULT_ENUMERATION_GUARD = 10**6
DEFAULT_THREADS = 1

# Largest modulus for which multiplicative orders are computed
MAX_ORDER_MODULUS = 10**6

# Largest b tried when looking for a valid truncation length
MAX_TRUNCATION_LENGTH = 4096

# Certificate statuses
INTEGRAL_CERTIFIED = "integral_certified"
UNBOUNDED_CERTIFIED = "unbounded_certified"
UNDECIDED = "undecided"

# Minimal negative support verdicts
MINIMAL = "minimal"
NOT_MINIMAL = "not_minimal"
MINIMAL_WITHIN_BOUND = "minimal_within_bound"

# Classical / geometric criterion verdicts
CRITERION_HOLDS = "criterion_holds"
CRITERION_FAILS = "criterion_fails"
VERIFIED = "verified"

# Exit codes
EXIT_CERTIFIED = 0
EXIT_INPUT_ERROR = 1
EXIT_UNDECIDED = 2
EXIT_RESOURCE_GUARD = 3

# Problem file modes (one per subcommand)
MODES = ("analyze", "classical", "series", "bound", "thm63", "eisenstein")

REPORT_FORMATS = ("json", "text")
