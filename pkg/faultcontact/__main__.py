import sys

from faultcontact.index import main

sys.exit(main())
