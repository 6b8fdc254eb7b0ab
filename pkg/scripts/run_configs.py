"""Run every command on every config in configs/ and tabulate exit codes."""

import argparse
import sys
from pathlib import Path

from polychain.cli import main

COMMANDS = ["discriminant", "moment-test", "track", "verify"]


def run(config: Path, out_root: Path, commands):
    codes = {}
    for cmd in commands:
        out = out_root / config.stem / cmd
        codes[cmd] = main([cmd, "--config", str(config), "--out", str(out)])
    return codes


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--configs", default="configs")
    ap.add_argument("--out", default="out")
    ap.add_argument("--commands", nargs="*", default=COMMANDS)
    args = ap.parse_args()
    rows = []
    for cfg in sorted(Path(args.configs).glob("*.yaml")):
        rows.append((cfg.stem, run(cfg, Path(args.out), args.commands)))
    print("config".ljust(20) + "".join(c.ljust(14) for c in args.commands), file=sys.stderr)
    for name, codes in rows:
        print(name.ljust(20) + "".join(str(codes[c]).ljust(14) for c in args.commands), file=sys.stderr)
