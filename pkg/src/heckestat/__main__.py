import sys

from heckestat.cli import main

sys.exit(main())
