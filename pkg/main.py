# ============================ #
#     Main Execution Script    #
# ============================ #

import sys

from activity_sos.pipeline.cli import run

# ---------------- Main Script ----------------
# python main.py explore models/fork.yaml --mode complete
if __name__ == "__main__":
    sys.exit(run(sys.argv[1:]))
