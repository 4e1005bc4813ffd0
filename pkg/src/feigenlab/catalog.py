"""Named map families."""
from __future__ import annotations

import math

from .family import DECREASING, INCREASING, FamilyError, MapFamily, parse_family, parse_map, transform

INF = math.inf

# name: (source, domain, orientation, cascade range in parameter units, pinned critical point, note)
_ENTRIES = {
    "logistic": ("a*x*(1-x)", (0.0, 1.0), INCREASING, (1.5, 4.0), 0.5,
                 "factor parameter, quadratic maximum"),
    "xpow_a_over_x": ("x^(a/x)", (1.0, INF), INCREASING, (2.0, 20.0), math.e,
                      "exponent parameter on the semi-line; maximum at x = e"),
    "xpow_ax": ("x^(a*x)", (0.0, 1.0), INCREASING, (2.0, 20.0), 1 / math.e,
                "reciprocal conjugate of x^(a/x); minimum at 1/e"),
    "xi_sin": ("(sin(pi/x)+1)^a", (1.0, INF), INCREASING, (1.0, 12.0), None,
               "exponent parameter on the semi-line"),
    "psi_quad": ("((x^2+x-1)/x^2)^a", (1.0, INF), INCREASING, (1.0, 30.0), None,
                 "exponent parameter on the semi-line"),
    "recip_sin": ("1/(sin(pi*x)+1)^a", (0.0, 1.0), INCREASING, (0.5, 12.0), 0.5,
                  "feigentree branches cross y = 1/2"),
    "Psi": ("exp(-sin(pi*x))^a", (0.0, 1.0), INCREASING, (0.5, 4.0), 0.5,
            "outer exponent; twin of Xi"),
    "Xi": ("exp(-sin(pi*x^a))", (0.0, 1.0), INCREASING, (0.5, 4.0), None,
           "inner exponent; twin of Psi"),
    "singer": ("a*(7.86*x-23.31*x^2+28.75*x^3-13.3*x^4)", (0.0, 1.0), INCREASING,
               (0.5, 1.0), None, "quartic with a positive-Schwarzian stretch"),
    "example_I": ("a*(1-x^x*(1-x)^(1-x))", (0.0, 1.0), INCREASING, (1.0, 2.0), 0.5,
                  "no finite derivative at the endpoints"),
    "example_II": ("a*(-1.55*x^4+4.34*x^3-4.56*x^2+1.77*x)", (0.0, 1.0), INCREASING,
                   (1.0, 6.0), None, "Schwarzian positive near x = 1"),
    "two_max_octic": ("a*(-x^8+4*x^3-5*x^2+2*x)", (0.0, 1.0), INCREASING, (2.0, 3.5), None,
                      "two unequal maxima"),
    "triple_max_1": ("a*(9*x*(1-x)*(1-3*x*(1-x))+x^4*(1-x^4)+0.25*(-(2*x-1)^2+1)^44)",
                     (0.0, 1.0), INCREASING, (0.3, 1.0), None, "three maxima"),
    "triple_max_2": ("a*(2.75*(-x^8+4*x^3-5*x^2+2*x)+0.05*(-(2*x-1)^2+1)^42)",
                     (0.0, 1.0), INCREASING, (0.5, 1.4), None, "three maxima"),
    "triple_max_3": ("a*(2.75*(-x^8+4*x^3-5*x^2+2*x)+0.03*(-(2*x-1)^2+1)^42)",
                     (0.0, 1.0), INCREASING, (0.5, 1.4), None, "three maxima"),
    "dec_selfexp": ("(x*(1-x))^(a-x*(1-x))", (0.0, 1.0), DECREASING, (0.95, 0.25), 0.5,
                    "cascade runs as the parameter decreases"),
    "sin_exp": ("a^sin(pi*x)*sin(pi*x)", (0.0, 1.0), INCREASING, (0.4, 1.0), 0.5,
                "parameter in exponent and factor positions"),
    "gamma_sine": ("a*(sin(2*pi*x)/2+x)", (-50.0, 50.0), INCREASING, None, None,
                   "odd map of the real line with many local attractors"),
    "pic12_f": ("a*1.5625*(0.25-(x-0.5)^2)", (0.0, 1.0), INCREASING, (1.0, 2.56), 0.5,
                "quadratic component"),
    "pic12_g": ("a*(0.25-(2.5*(0.25-(x-0.5)^2)-0.5)^2)", (0.0, 1.0), INCREASING, (1.0, 4.0), 0.5,
                "component with two maxima"),
    "pic12_h": ("a*1.5625*(0.25-(x-0.5)^2)+b*(0.25-(2.5*(0.25-(x-0.5)^2)-0.5)^2)",
                (0.0, 1.0), INCREASING, None, 0.5, "two-parameter mixture a f + b g"),
    "two_max_power": ("a*(1.2*x^7.9*(1-x)^7.9+(1-x)^2*(1-(1-x)^2))", (0.0, 1.0), INCREASING,
                  (2.0, 3.2), None, "two maxima bifurcating at different rates"),
    "pow_no_bifurcation": ("(x*(1-x))^a", (0.0, 1.0), INCREASING, (0.1, 20.0), 0.5,
                           "exponent family without a cascade"),
    # canonical local bifurcations on [-10, 10]
    "flip_outer": ("a-x-x^2", (-10.0, 10.0), INCREASING, (-0.5, 1.5), None, "flip at a = 0"),
    "flip_inner": ("-(x+a)-(x+a)^2", (-10.0, 10.0), INCREASING, (-0.5, 1.5), None,
                   "shift twin of flip_outer"),
    "fold_outer": ("a-x^2", (-10.0, 10.0), INCREASING, (-1.0, 0.5), None, "fold at a = -1/4"),
    "fold_inner": ("-(a+x)^2", (-10.0, 10.0), INCREASING, (-1.0, 0.5), None,
                   "shift twin of fold_outer"),
    "pitchfork_1": ("a*x-x^3", (-10.0, 10.0), INCREASING, (0.5, 3.0), None, "pitchfork at a = 1"),
    "pitchfork_2": ("a*(x-x^3)", (-10.0, 10.0), INCREASING, (0.5, 3.0), None, "pitchfork at a = 1"),
    "pitchfork_3": ("a*x-(a*x)^3", (-10.0, 10.0), INCREASING, (0.5, 3.0), None, "pitchfork at a = 1"),
    "transcritical_1": ("a*x-x^2", (-10.0, 10.0), INCREASING, (0.5, 3.6), None,
                        "transcritical at a = 1"),
    "transcritical_2": ("a*(x-x^2)", (-10.0, 10.0), INCREASING, (0.5, 3.6), None,
                        "transcritical at a = 1"),
    "transcritical_3": ("a*x-(a*x)^2", (-10.0, 10.0), INCREASING, (0.5, 3.6), None,
                        "transcritical at a = 1"),
}

# the picture-10 formula as printed has (-2x-1)^4, which sends x = 1 to -12; the
# catalog uses (2x-1)^4 and keeps the printed variant under its own name
PICTURE10 = "a*(0.15*(1-(2*x-1)^4)+0.5*(1-(2*(1-x)^8-1)^4)+2.4*x^2*(1-x^2))"


def _picture10_source(printed: bool) -> str:
    return PICTURE10.replace("(1-(2*x-1)^4)", "(1-(-2*x-1)^4)") if printed else PICTURE10


def names() -> list[str]:
    return sorted(list(_ENTRIES) + ["phi_outer", "phi_inner", "picture10", "feigenmap"])


def catalog(name: str) -> MapFamily:
    """A named family; raises ``KeyError`` for unknown names."""
    if name in _ENTRIES:
        src, dom, orient, casc, crit, note = _ENTRIES[name]
        fam = parse_family(src, dom, orient, name=name)
        return fam.with_(cascade=casc, critical=crit, note=note)
    if name in ("phi_outer", "phi_inner"):
        kind = "outer_scale" if name == "phi_outer" else "inner_scale"
        fam = transform(parse_map("x^3-x", (-1.0, 1.0)), kind, name=name)
        note = ("cubic with one maximum and one minimum" if kind == "outer_scale"
                else "(a x)^3 - a x on the shrinking interval [-1/a, 1/a]")
        return fam.with_(cascade=(0.5, 2.6), note=note)
    if name == "picture10":
        return picture10()
    if name == "feigenmap":
        return feigenmap(2, 2)
    raise KeyError(f"unknown catalog family {name!r}; known: {', '.join(names())}")


def picture10(printed: bool = False) -> MapFamily:
    fam = parse_family(_picture10_source(printed), (0.0, 1.0), name="picture10")
    return fam.with_(cascade=(0.9, 1.25), note="two maxima; printed sign variant available")


def feigenmap(n_left: float = 2, n_right: float | None = None) -> MapFamily:
    """``1 - a |x|^n`` on [-1, 1]; with two degrees the sides differ."""
    n_right = n_left if n_right is None else n_right
    if n_left < 1 or n_right < 1:
        raise FamilyError("degrees must be >= 1")
    if n_left == n_right:
        src = f"1-a*abs(x)^{_num(n_left)}"
    else:
        src = (f"1-a*(((abs(x)-x)/2)^{_num(n_left)}+((abs(x)+x)/2)^{_num(n_right)})")
    fam = parse_family(src, (-1.0, 1.0), name=f"feigenmap({_num(n_left)},{_num(n_right)})")
    return fam.with_(cascade=(0.1, 2.0), critical=0.0,
                     note="maximum of degree n at 0")


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


TWINS = {
    "phi_outer": "phi_inner",
    "Psi": "Xi",
    "flip_outer": "flip_inner",
    "fold_outer": "fold_inner",
}

TRIPLES = {
    "pitchfork": ("pitchfork_1", "pitchfork_2", "pitchfork_3"),
    "transcritical": ("transcritical_1", "transcritical_2", "transcritical_3"),
}
