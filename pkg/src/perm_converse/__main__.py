"""Entry point for python -m perm_converse."""

import sys

from perm_converse.app import main

if __name__ == "__main__":
    sys.exit(main())
