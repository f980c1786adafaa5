import sys

from kpdkit.cli import main

sys.exit(main())
