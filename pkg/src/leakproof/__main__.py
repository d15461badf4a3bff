import sys

from leakproof.cli import main

sys.exit(main())
