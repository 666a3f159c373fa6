"""Regenerate the bundled fixture and the golden pipeline outputs.

    python tests/regen_golden.py

Only run this after an intended behavior change, and review the diff.
"""

import sys

from egokit.fixture import write_fixture

from smoke import FIXTURE, GOLDEN, run_smoke


def main() -> int:
    write_fixture(FIXTURE)
    for argv, code, err in run_smoke(GOLDEN):
        if code != 0:
            print(f"step failed ({code}): {' '.join(argv)}\n{err}", file=sys.stderr)
            return 1
    print(f"wrote {FIXTURE} and {GOLDEN}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
