"""Enumerate candidate topologies for a batch of (m, b, e) queries and print the counts.

    python3 scripts/type_synthesis_table.py            # the 27 reference queries
    python3 scripts/type_synthesis_table.py 5,3,5 9,4,6
"""
import argparse
import time

from handsynth.enumeration import EnumerationQuery, topology_search
from handsynth.solvability import format_rational

QUERIES = [
    (3, 2, 2), (3, 2, 3), (3, 3, 3), (5, 2, 3), (5, 3, 3), (5, 3, 4), (5, 3, 5), (5, 4, 4), (5, 4, 5),
    (5, 4, 6), (5, 4, 7), (6, 3, 4), (6, 3, 5), (9, 4, 4), (9, 4, 5), (9, 4, 6), (9, 4, 7), (13, 2, 3),
    (13, 4, 5), (13, 4, 6), (13, 4, 7), (13, 6, 7), (21, 2, 3), (21, 3, 3), (21, 3, 4), (21, 5, 5), (21, 5, 6),
]


def query(text):
    m, b, e = (int(v) for v in text.split(","))
    return m, b, e


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("queries", nargs="*", type=query, help="m,b,e triples (default: the reference batch)")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    print(f"{'m':>3} {'b':>2} {'e':>2} {'Joints':>7} {'j':>5} {'p':>2} {'cand':>5} {'classes':>7} {'dup':>4} {'s':>6}")
    start = time.perf_counter()
    for m, b, e in args.queries or QUERIES:
        t0 = time.perf_counter()
        a = topology_search(EnumerationQuery(m, b, e), workers=args.threads)
        dt = time.perf_counter() - t0
        print(f"{m:>3} {b:>2} {e:>2} {format_rational(a.total_joints):>7} {a.joint_array_count:>5} "
              f"{a.parent_array_count:>2} {len(a.candidates):>5} {len(a.isomorphism_classes):>7} "
              f"{len(a.duplicates):>4} {dt:>6.2f}")
    print(f"total {time.perf_counter() - start:.1f} s")


if __name__ == "__main__":
    main()
