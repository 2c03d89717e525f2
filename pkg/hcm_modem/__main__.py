import sys

from hcm_modem.cli import main

sys.exit(main())
