"""Print the comparison table at one N and list cells that miss their reference."""
import argparse
import sys

from macroscopicity import cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=9)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--max-group-size", type=int, default=3)
    ap.add_argument("--json", help="also write the JSON report here")
    args = ap.parse_args()
    cfg = cli.RunConfig("table", n_list=[args.n], delta=args.delta,
                        max_group_size=args.max_group_size)
    report = cli.cmd_table(cfg)
    sys.stdout.write(cli.render(report, "text"))
    for row, mid in cli.table_mismatches(report):
        cell = next(r for r in report["rows"] if r["row"] == row)["cells"][mid]
        print(f"mismatch: {row} / {mid}: {cell['value']:.4g} [{cell['verdict']}] "
              f"reference {cell['reference']}")
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(cli.dump_json(report))


if __name__ == "__main__":
    main()
