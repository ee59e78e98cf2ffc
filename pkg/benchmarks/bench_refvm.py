#!/usr/bin/env python3
"""Time the reference-VM tree walk compiled with numba against the plain
Python fallback (KMLAB_DISABLE_NUMBA=1), and check both agree."""
import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import hashlib, json, sys, time
import numpy as np
from kmlab import refvm
from kmlab._jit import backend

L, T, depth = map(int, sys.argv[1:4])
empty = np.zeros(0, np.uint8)
refvm.vm_walk(empty, 4, 10, 2, empty, -1, -1)   # compile outside the timer
t0 = time.perf_counter()
res = refvm.vm_walk(empty, L, T, depth, empty, -1, -1)
dt = time.perf_counter() - t0
h = hashlib.sha1()
for a in res[:-1]:
    h.update(np.ascontiguousarray(a).tobytes())
print(json.dumps({"backend": backend(), "seconds": dt, "visited": int(res[-1]),
                  "records": int(len(res[0])), "digest": h.hexdigest()}))
"""


def run(L, T, depth, disable):
    env = dict(os.environ)
    if disable:
        env["KMLAB_DISABLE_NUMBA"] = "1"
    else:
        env.pop("KMLAB_DISABLE_NUMBA", None)
    out = subprocess.run([sys.executable, "-c", CHILD, str(L), str(T), str(depth)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="10,12,14", help="program length limits")
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--depth", type=int, default=6)
    args = ap.parse_args()

    print(f"{'L':>3} {'nodes':>9} {'numba s':>9} {'python s':>9} {'speedup':>8}  same")
    for L in map(int, args.sizes.split(",")):
        fast = run(L, args.steps, args.depth, disable=False)
        slow = run(L, args.steps, args.depth, disable=True)
        speedup = slow["seconds"] / max(fast["seconds"], 1e-9)
        same = fast["digest"] == slow["digest"]
        print(f"{L:>3} {fast['visited']:>9} {fast['seconds']:>9.4f} "
              f"{slow['seconds']:>9.4f} {speedup:>7.1f}x  {same}")
        if not same:
            sys.exit("backends disagree")


if __name__ == "__main__":
    main()
