import sys

from corestable.cli import main

sys.exit(main())
