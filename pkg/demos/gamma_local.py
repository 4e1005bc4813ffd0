# gamma_a(x) = a (sin(2 pi x)/2 + x) maps the real line to itself and commutes
# with x -> x + 1 up to a shift, so each unit cell can host its own attractor.
# Scanning one seed per small cell finds them all.
from feigenlab import catalog, scan_local_attractors

fam = catalog("gamma_sine")
rep = scan_local_attractors(fam, 1.05, (0.0, 7.0), 0.05, workers=4)
print("attractors found in [0, 7]:", rep.located_pattern())
for (lo, hi), att in rep.located():
    print(f"  [{lo:8.4f}, {hi:8.4f}]  {att.kind:9s}",
          f"period {att.period}" if att.kind == "periodic" else "")
