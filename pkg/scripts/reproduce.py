"""Run the acceptance suite and write the summary table as JSON."""

import sys

from tasep_pgf.cli import main

if __name__ == "__main__":
    sys.exit(main(["reproduce", *sys.argv[1:]]))
