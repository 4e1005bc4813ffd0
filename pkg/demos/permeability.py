# Two maps that are conjugate to each other must share their bifurcation
# points.  Here the outer and inner placement of the same transformation is
# compared, first for a pair that is conjugate and then for one that is not.
from feigenlab import PermeabilityCase, catalog, parse_map, permeability_test, transform

base = parse_map("sin(pi*x)")
case = PermeabilityCase.from_base("exp_sine", base, ("exp_outer", "exp_inner"),
                                  c=2.718281828459045, t_range=(0.5, 4.0), depth=4)
res = permeability_test(case)
print(case.families[0].source)
print(case.families[1].source)
print("outcome:", res.outcome)
for u, v in zip(*res.sequences):
    print(f"  {u:.12f}  {v:.12f}  diff {abs(u - v):.1e}")

# Psi and Xi are built independently but turn out to be conjugate.
res = permeability_test(PermeabilityCase("psi_xi", (catalog("Psi"), catalog("Xi")), depth=4))
print("Psi / Xi:", res.outcome, [round(v, 6) for v in res.sequences[0]])

# A reparameterised logistic family is not conjugate to the original.
other = transform(parse_map("4*x*(1-x)"), "outer_pow").with_(cascade=(0.5, 4.0))
res = permeability_test(PermeabilityCase("mismatch", (catalog("logistic"), other), depth=2))
print("logistic vs outer power:", res.outcome, "at rank", res.rank)
print("  ", "; ".join(res.notes))
