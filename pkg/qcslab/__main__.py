"""
Allow `python -m qcslab`.
"""

import sys

from qcslab.index import main

sys.exit(main())
