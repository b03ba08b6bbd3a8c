import sys

from bidinflation.cli import main

sys.exit(main())
