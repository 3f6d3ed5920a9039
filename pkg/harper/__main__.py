import sys

from harper.main import main

sys.exit(main())
