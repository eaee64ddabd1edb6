"""
Main application entry point for qcslab.

Equivalent to `python -m qcslab`; see qcslab/index.py for the sub-commands.
"""
import sys

from qcslab.index import main

if __name__ == "__main__":
    sys.exit(main())
