"""Regenerate the S_2(Gamma_0(N)) cusp-form fixtures in mfcoeffs v1 format.

Coefficients come from PARI/GP (via cypari2): ``mfbasis`` for the expansion
at infinity and ``mfslashexpansion`` with S = [0,-1;1,0] for the expansion
at the cusp 0, written in the local variable q^(1/N).

    pip install --only-binary :all: cypari2
    python3 tools/gen_fixtures.py crates/core/fixtures
"""

import sys
from pathlib import Path

import cypari2

LEVELS = (11, 23, 29, 31)
N_MAX = 400

pari = cypari2.Pari()
pari.allocatemem(2 * 10**9)
slash = pari("(mf,F,n)->my(A);[mfslashexpansion(mf,F,[0,-1;1,0],n,1,&A),A]")


def emit(level, out_dir):
    mf = pari.mfinit([level, 2], 1)
    basis = pari.mfbasis(mf)
    dim = len(basis)
    lines = [
        "format mfcoeffs 1",
        f"level {level}",
        "weight 2",
        f"dim {dim}",
        f"provenance PARI/GP {'.'.join(map(str, pari.version()))} mfinit([{level},2],1) mfbasis; cusp zero via mfslashexpansion",
    ]
    for i, f in enumerate(basis, start=1):
        inf = pari.mfcoefs(f, N_MAX)
        for n in range(1, N_MAX + 1):
            lines.append(f"basis {i} cusp inf part aplus {n} {inf[n]}")
        zero, info = slash(mf, f, N_MAX)
        width = int(info[1])
        if width != level or int(info[0]) != 0:
            raise SystemExit(f"unexpected slash data for level {level}: {info}")
        for n in range(1, N_MAX + 1):
            lines.append(f"basis {i} cusp zero part aplus {n} {zero[n]}")
    path = Path(out_dir) / f"s2_gamma0_{level}.mfc"
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path} (dim {dim})")


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "crates/core/fixtures"
    for level in LEVELS:
        emit(level, out_dir)


if __name__ == "__main__":
    main()
