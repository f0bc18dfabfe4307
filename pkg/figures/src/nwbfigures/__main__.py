import sys

from nwbfigures.cli import main

sys.exit(main())
