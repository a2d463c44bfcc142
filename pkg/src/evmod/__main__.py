import sys

from evmod.cli import main

sys.exit(main())
