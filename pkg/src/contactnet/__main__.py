"""Allow `python -m contactnet` as an alias for the console script."""

import sys

from contactnet.cli import main

if __name__ == "__main__":
    sys.exit(main())
