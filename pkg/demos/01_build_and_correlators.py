#!/usr/bin/env python3
"""Walk through building a spectral curve and filling its correlator table.

The running example is the local-model curve x = z^2, y = z, whose single
active ramification point sits at the origin.  We build the curve, look at
its sheet involution and recursion kernel, then compute the symmetric
correlation differentials level by level and print the exact tensors.
"""

from spectral_rec import (
    EXACT,
    CorrelatorTable,
    build_curve,
    parse_expression,
    recursion_kernel,
    unstable_forms,
    verify_correlators,
)
from spectral_rec._rat import point_str, rat_str
from spectral_rec.algebra import format_rational_function


def show_tensor(corr):
    print(f"  W({corr.g},{corr.n}):")
    for key, coeff in sorted(corr.terms.items(), key=lambda kv: str(kv[0])):
        slots = " x ".join(f"d z/(z - {point_str(q)})^{k}" if point_str(q) != "inf"
                           else f"dw/w^{k} at infinity" for q, k in key)
        print(f"    {rat_str(coeff):>8}  *  {slots}")


def main():
    x = parse_expression("z^2")
    y = parse_expression("z")
    curve = build_curve(x, y, EXACT, name="airy")

    print("curve: x = z^2, y = z")
    print("tautological form: y dx =", format_rational_function(curve.ydx.fn), "dz")
    for ram in curve.ram_points:
        state = "active" if ram.active else "inactive"
        print(f"ramification point {point_str(ram.location)}: {state}, "
              f"form vanishing order {ram.form_order}")

    form, kernel_marker = unstable_forms(curve)
    print("unstable pieces: the curve form above, and the", kernel_marker)

    kern = recursion_kernel(curve, curve.active_points()[0])
    print("kernel value at (z, z1) = (3, 5):", rat_str(kern.value(3, 5)),
          " [closed form 1/(2 z (z1^2 - z^2))]")

    print("\nfilling the table to level 4 (all stable (g,n) with 2g-2+n <= 4)...")
    table = CorrelatorTable(curve).fill(4)
    for (g, n) in sorted(table.entries, key=lambda gn: (2 * gn[0] - 2 + gn[1], gn)):
        show_tensor(table.w(g, n))

    report = verify_correlators(table)
    print("\nstructural verification:", "all pass" if report.ok else "FAILED")
    print("checks run:", len(report.checks))


if __name__ == "__main__":
    main()
