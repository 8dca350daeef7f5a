#!/usr/bin/env python3
"""Convert Google cluster-data (2011) task_events files to a farmsim trace.

Keeps SUBMIT events (event type 0), converts microsecond timestamps to
seconds since the first kept event, and maps the scheduling class (0-3) to
job type ids 1-4. The class-to-type mapping is a choice; pass --map to
change it, e.g. --map 0:1,1:2,2:2,3:3.

Output: CSV with header timestamp_s,type_id, sorted by time.
"""

import argparse
import csv
import gzip
import sys

SUBMIT = 0
TIMESTAMP, EVENT_TYPE, SCHEDULING_CLASS = 0, 5, 7


def open_any(path):
    return gzip.open(path, "rt", newline="") if path.endswith(".gz") else open(path, newline="")


def parse_map(text):
    mapping = {}
    for pair in text.split(","):
        key, value = pair.split(":")
        mapping[int(key)] = int(value)
    return mapping


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("inputs", nargs="+", help="task_events part files (.csv or .csv.gz)")
    parser.add_argument("-o", "--output", default="-", help="output CSV (default stdout)")
    parser.add_argument("--map", default="0:1,1:2,2:3,3:4", help="scheduling_class:type_id pairs")
    parser.add_argument("--hours", type=float, default=0.0, help="keep only the first N hours")
    args = parser.parse_args(argv)

    mapping = parse_map(args.map)
    rows, skipped = [], 0
    for path in args.inputs:
        with open_any(path) as f:
            for record in csv.reader(f):
                try:
                    if int(record[EVENT_TYPE]) != SUBMIT:
                        continue
                    cls = int(record[SCHEDULING_CLASS])
                    rows.append((int(record[TIMESTAMP]), mapping[cls]))
                except (IndexError, ValueError, KeyError):
                    skipped += 1
    rows.sort(key=lambda r: r[0])
    start = rows[0][0] if rows else 0
    limit = args.hours * 3600.0 if args.hours > 0 else None

    out = sys.stdout if args.output == "-" else open(args.output, "w", newline="")
    with out:
        writer = csv.writer(out)
        writer.writerow(["timestamp_s", "type_id"])
        for micros, type_id in rows:
            t = (micros - start) / 1e6
            if limit is not None and t >= limit:
                break
            writer.writerow([f"{t:.6f}", type_id])
    if skipped:
        print(f"skipped {skipped} unusable rows", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
