import sys

from corrshift.cli import main

sys.exit(main())
