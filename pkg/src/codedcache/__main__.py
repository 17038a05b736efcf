import sys

from codedcache.cli import main

sys.exit(main())
