"""Simple runner script to call the veto command line from a source checkout."""
import sys
from vetocore.cli import run

if __name__ == '__main__':
    sys.exit(run())
