"""Audit the library's inequalities on random data.

Every catalogued claim is an inequality lhs <= C * rhs.  The audit draws
paths from several generators, evaluates both sides and reports the worst
ratio per grid size.  Explicit constants must keep the ratio below 1; for
implicit ones we only ask that the ratio stays put as the grid is refined.
"""

from roughkit.verify import run_suite

rep = run_suite(["trivial", "nested_norm", "integration"], seeds=4, sizes=(64, 128))
for s in rep.summaries:
    tag = "skipped" if s.skipped else ("ok" if s.passed else "FAIL")
    ratios = "  ".join(f"n={n}: {v:.3f}" for n, v in s.max_ratio_by_size.items())
    kind = "explicit" if s.explicit else "implicit"
    print(f"{s.claim_id:32s} {kind:8s} {ratios}  {tag}")
print("all passed:", rep.passed)
