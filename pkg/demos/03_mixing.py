"""Mixing times: plain cycle versus chords, with and without clockwise drift."""
import math

from cyclemix import ChainParams, LongRangeGraph, build_homogeneous, generate, mixing_time
from cyclemix.mixing import rev_vs_nonrev_gap

# without chords the lazy walk needs order n^2 steps
for n in (32, 64, 128):
    res = mixing_time(build_homogeneous(LongRangeGraph(n, ()), ChainParams(0.25, 0.0)))
    print(f"plain cycle n={n:4d}: t_mix={res.t_mix:6d}  t_mix/n^2={res.t_mix / n**2:.3f}")

# chords plus drift
params = ChainParams.for_alpha(1.5)
for n in (128, 256, 512):
    g = generate("M2", n, 1.5, n)
    rev = mixing_time(build_homogeneous(g, params))
    fwd = mixing_time(build_homogeneous(g, params.with_r(0.15)))
    print(f"M2 n={n:4d}: reversible {rev.t_mix:5d}, drift 0.15 {fwd.t_mix:5d}, "
          f"speedup {rev.t_mix / fwd.t_mix:.2f}")

# the worst start's distance profile falls monotonically through epsilon
res = mixing_time(build_homogeneous(generate("M2", 256, 1.5, 1), params.with_r(0.15)))
k = res.t_mix
print(f"worst start {res.worst_start}: d({k - 1})={res.profile[k - 1]:.4f} > 1/8 >= d({k})={res.profile[k]:.4f}")

gap = rev_vs_nonrev_gap(build_homogeneous(generate("M2", 256, 1.5, 2), params.with_r(0.15)))
print(f"t_rev / (t_drift^2 log n) = {gap.ratio:.4f}  "
      f"({gap.reversible.t_mix} vs {gap.nonreversible.t_mix}, log n = {math.log(256):.2f})")
