"""Allow ``python -m gkz_integrality``."""

import sys

from gkz_integrality.cli import main

sys.exit(main())
