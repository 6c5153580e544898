import sys

from latentsat.command import main

sys.exit(main())
