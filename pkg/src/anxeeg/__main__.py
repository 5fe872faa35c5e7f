import sys

from anxeeg.cli import main

sys.exit(main())
