import sys

from .xbench import main

sys.exit(main())
