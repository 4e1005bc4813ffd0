# Write the bifurcation diagram of x^(a x) to a CSV file for external plotting.
# Each row holds one parameter value followed by attractor samples.
import sys

from feigenlab.cli import main

out = sys.argv[1] if len(sys.argv) > 1 else "feigentree_xpow_ax.csv"
code = main(["diagram", "--catalog", "xpow_ax", "--range", "2:5.5", "--grid", "300",
             "--samples", "100", "--workers", "4", "--output", out])
print("wrote", out, "exit", code)
