# Period doubling of x -> x^(a/x) on the half-line [1, inf).
# The fixed point loses stability at a = e^2, after which the
# cascade runs up to an accumulation point near 14.77.
import math

from feigenlab import bifurcation_sequence, catalog, delta_report, superstable_sequence

fam = catalog("xpow_a_over_x")
print(fam.source, "on", fam.domain)

seq = bifurcation_sequence(fam, N=7)
for ev in seq.events:
    print(f"  flip {ev.rank}: a = {ev.value:.10f}   (period {ev.period_before} -> {2 * ev.period_before})")
print("first flip minus e^2:", seq.values[0] - math.e ** 2)

rep = delta_report(seq)
print("gap ratios:", ", ".join(f"{d:.5f}" for d in rep.delta_seq))
print("accumulation point:", rep.b_inf)
print("accumulation / first flip:", rep.b_inf / seq.values[0])

# The same cascade seen through x -> 1/x lives on [0, 1] as x^(a x).
# Its critical point is 1/e, so every superstable orbit passes through it.
conj = catalog("xpow_ax")
for s in superstable_sequence(conj, N=4):
    print(f"  superstable a = {s:.10f}")
