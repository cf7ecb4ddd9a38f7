import sys

from thinset.cli import main

sys.exit(main())
