#!/usr/bin/env python3
"""Print the coupled matrix equations for one system per constraint class.

The folded boundary equations carry the twisted-transpose decorations and,
for the symplectic central block, the small antidiagonal symplectic form.
"""

from todakit import SeriesTag, build_system, emit_equations

GALLERY = [
    ("A", 2, (1, 2), "general linear chain"),
    ("B", 2, (1, 3, 1), "orthogonal, odd block count"),
    ("D", 4, (2, 2, 2, 2), "orthogonal, even block count"),
    ("C", 2, (1, 2, 1), "symplectic, odd block count"),
    ("C", 2, (2, 2), "symplectic, even block count"),
]


def main():
    for series, rank, sizes, title in GALLERY:
        system = build_system(SeriesTag(series, rank), sizes)
        print(f"== {title}: series {series}, rank {rank}, blocks {sizes}")
        print(f"   constraint class {system.constraint_set}, "
              f"{system.independent_beta_count} independent field blocks")
        print()
        for line in emit_equations(system, "text").splitlines():
            print("   " + line if line else "")
        print()


if __name__ == "__main__":
    main()
