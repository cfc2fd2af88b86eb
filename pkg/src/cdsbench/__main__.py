import sys

from cdsbench.cli import main

sys.exit(main())
