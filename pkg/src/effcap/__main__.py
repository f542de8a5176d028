import sys

from effcap.cli import main

sys.exit(main())
