import sys

from uso.cli import main

sys.exit(main())
