import sys
from hetr.cli import main

sys.exit(main())
