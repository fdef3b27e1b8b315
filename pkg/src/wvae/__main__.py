import sys

from wvae.cli import main

sys.exit(main())
