"""Atlas of solvable hands for five precision positions, b = 3, 4, 5 branches.

Prints per-edge-count tallies and the grand totals; ``--list`` also prints
every candidate, ``--out`` writes the atlases as JSON.
"""
import argparse

from handsynth import formats
from handsynth.enumeration import search_range
from handsynth.topology import format_notation


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-m", "--positions", type=int, default=5)
    ap.add_argument("--branches", type=int, nargs="+", default=[3, 4, 5])
    ap.add_argument("--max-edges", type=int, default=9)
    ap.add_argument("--list", action="store_true", help="print every candidate topology")
    ap.add_argument("--out", help="write the atlases to this JSON file")
    args = ap.parse_args()

    everything = []
    for b in args.branches:
        atlases = search_range(args.positions, b, b, args.max_edges)
        everything += atlases
        for a in atlases:
            print(f"b={b} e={a.query.e}: {len(a.candidates)} candidates, {len(a.isomorphism_classes)} classes")
            if args.list:
                for t in a.candidates:
                    print(f"    {format_notation(t)}")
        print(f"b={b}: {sum(len(a.candidates) for a in atlases)} solvable topologies\n")
    if args.out:
        inputs = {"positions": args.positions, "branches": args.branches, "max_edges": args.max_edges}
        formats.dump({"manifest": formats.manifest("five_position_atlas", inputs, outputs=[args.out]),
                      "atlases": [formats.atlas_record(a) for a in everything]}, args.out)


if __name__ == "__main__":
    main()
