"""|I(q)| for conj on the hyperbolic chain on square grids 128^2 .. 512^2."""

import argparse

from polychain import I_of_q, build_hyperbolic_chain, builtin

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--function", default="conj")
    ap.add_argument("--nu", type=int, default=1)
    ap.add_argument("--levels", nargs="*", type=int, default=[128, 256, 512])
    args = ap.parse_args()
    chain = build_hyperbolic_chain(0.3, -0.4 + 0.2j)
    fn = builtin(args.function)
    print("q,n,abs_I,excluded_fraction")
    for q in (3, 3j, -3, 2 + 2j):
        for n in args.levels:
            r = I_of_q(chain, fn, args.nu, q, n_theta=n, n_t=n)
            print(f"{q},{n},{abs(r.value):.3e},{r.excluded_fraction:.2g}")
