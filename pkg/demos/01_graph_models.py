"""Walk through the three random chord models on a 400-node cycle."""
from cyclemix import (
    degree_cap,
    empty_arcs,
    generate,
    max_long_range_degree,
    reduce_m1,
    reduce_with_splitting,
    wind_up,
)
from cyclemix.topology import format_graph, generate_m1

n, alpha = 400, 1.5
print(f"n={n} alpha={alpha}: degree cap d(alpha) = {degree_cap(alpha)}")

for model in ("M1", "M2", "M3"):
    g = generate(model, n, alpha, 2024)
    arcs = empty_arcs(g)
    print(f"{model}: {g.num_edges:3d} chords, {g.endpoints().size:3d} endpoints, "
          f"max degree {max_long_range_degree(g)}, longest empty arc {arcs[0].length} "
          f"starting at node {arcs[0].start}")

# M1 endpoints sit every n^(alpha-1)/2 = 10 nodes
g1 = generate_m1(n, alpha, 2024)
print("M1 endpoints:", g1.endpoints()[:8].tolist(), "...")
print(format_graph(g1).splitlines()[:4])

# collapsing the empty arcs leaves a cycle whose chords form a perfect matching
red = reduce_m1(g1)
print(f"reduced M1 cycle: m={red.m}, first pairs {red.matching[:3]}")

g2 = generate("M2", n, alpha, 7)
red2 = reduce_with_splitting(g2, 7)
print(f"reduced M2 cycle: m={red2.m} (twice the {g2.num_edges} chords)")

# equidistant endpoints with 400 % 40 == 0 can be wound onto a 10-cycle
w = wind_up(g1)
print(f"wound quotient: {w.m} nodes, loops per node {w.loops}")
