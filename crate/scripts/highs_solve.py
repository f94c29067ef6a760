#!/usr/bin/env python3
"""Solve an LP file with highspy and write a HiGHS solution file.

Usage: highs_solve.py MODEL.lp SOLUTION.sol [TIME_LIMIT]
"""
import sys

import highspy


def main(argv):
    if len(argv) < 3:
        print(__doc__.strip(), file=sys.stderr)
        return 2
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("threads", 1)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 1e-7)
    if len(argv) > 3:
        h.setOptionValue("time_limit", float(argv[3]))
    if h.readModel(argv[1]) != highspy.HighsStatus.kOk:
        print(f"cannot read {argv[1]}", file=sys.stderr)
        return 1
    h.run()
    h.writeSolution(argv[2], 0)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
