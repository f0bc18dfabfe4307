import sys

from nwbsim.cli import main

sys.exit(main())
