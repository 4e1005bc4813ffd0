# h_{a,b} = a f + b g is a two-parameter family.  Along a straight line in the
# (a, b) plane it behaves like a one-parameter family, and the ratio of gaps
# depends on which maximum shape dominates along that line.
from feigenlab import catalog, delta_report, directional_bifurcations, find_critical_points

h = catalog("pic12_h")
print(h.source)
for a, b in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]:
    maxima = [c for c in find_critical_points(h, (a, b)) if c.kind == "maximum"]
    desc = ", ".join(f"{c.x:.4f} (degree {c.degree})" for c in maxima)
    print(f"  at (a, b) = ({a}, {b}) maxima at {desc}")

# Walk away from (1, 1) along each axis and along the diagonal.
for direction in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]:
    seq, rep = directional_bifurcations(h, (1.0, 1.0), direction, N=5)
    print("direction", direction, "events at", [tuple(round(p, 4) for p in e.params)
                                               for e in seq.events])
    if rep is not None:
        print("   gap ratios", [round(d, 4) for d in rep.delta_seq])
