# Where is the Schwarzian derivative negative?  For most textbook maps it is
# negative everywhere, but several self-exponential maps change sign once or
# twice on their interval.
from feigenlab import catalog, check_bifurcation_readiness, parse_map, schwarzian_at, sign_profile

logistic = catalog("logistic")
print("logistic, S at 0.25:", schwarzian_at(logistic, 3.0, 0.25))

# x^(1/x) is x^x seen through x -> 1/x, so its change sits at the reciprocal.
for src, interval in [("x^x", (0.001, 0.999)), ("x^(1/x)", (1.001, 30.0)),
                      ("x^x*x^(1/x)", (0.001, 0.999))]:
    prof = sign_profile(parse_map(src, interval), (), interval)
    signs = "".join("+" if s > 0 else "-" for s in prof.signs)
    print(f"{src:14s} changes at {[round(c, 6) for c in prof.changes]}  signs {signs}")

# A negative Schwarzian is sufficient, not necessary.  The readiness check
# only asks that the conditions which matter for a cascade hold.
for name, a in [("logistic", 3.5), ("two_max_octic", 3.0), ("singer", 1.0)]:
    rep = check_bifurcation_readiness(catalog(name), a)
    print(f"{name:14s} verdict {rep.verdict}")
    for c in rep.checks:
        print(f"    {c.name:24s} {'ok' if c.ok else 'no'}  {c.detail}")
