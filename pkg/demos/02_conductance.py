"""Conductance: exhaustive search, connected-set search and the empty-arc bound."""
import time

from cyclemix import (
    ChainParams,
    LongRangeGraph,
    build_homogeneous,
    conductance_arc_upper,
    conductance_connected,
    conductance_exact,
    generate,
    phi_of_set,
    reversibilize,
)

# the lazy walk on a 4-cycle: the two halves are the bottleneck
P4 = build_homogeneous(LongRangeGraph(4, ()), ChainParams(0.25, 0.0))
est = conductance_exact(P4)
print("4-cycle:", est.kind, est.value, "witness", est.witness.set)
print("  Phi({0}) =", phi_of_set(P4, [0]).phi)

# an M2 graph small enough for both exact routes
g = generate("M2", 18, 1.5, 3)
params = ChainParams.for_alpha(1.5, r=0.1)
P = build_homogeneous(g, params)
for fn in (conductance_exact, conductance_connected):
    t0 = time.perf_counter()
    est = fn(P)
    print(f"{fn.__name__:22s} Phi={est.value:.6f} set={est.witness.set} "
          f"({(time.perf_counter() - t0) * 1e3:.0f} ms)")

# averaging P with its transpose leaves every cut unchanged
R = reversibilize(P)
S = est.witness.set
print("same cut after reversibilizing:", phi_of_set(P, S).phi, phi_of_set(R, S).phi)

# beyond 40 nodes only the arc bound is cheap; it still tracks n^(1-alpha)
for n in (256, 1024, 4096):
    g = generate("M1", n, 1.5, 1)
    P = build_homogeneous(g, params.with_r(0.0))
    b = conductance_arc_upper(P, g)
    print(f"M1 n={n:5d}: arc bound {b.value:.5f}, bound * sqrt(n) = {b.value * n ** 0.5:.3f}")
