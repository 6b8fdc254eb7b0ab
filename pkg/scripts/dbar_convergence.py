"""Cramer identity residual under t-grid refinement (stencil order 2 and 4)."""

import argparse

from polychain import build_hyperbolic_chain, builtin, t_grid
from polychain.dbar import identity_check, observed_order

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--functions", nargs="*", default=["conj", "abs2", "analytic_p"])
    ap.add_argument("--levels", nargs="*", type=int, default=[128, 256, 512, 1024])
    ap.add_argument("--order", type=int, default=4)
    args = ap.parse_args()
    chain = build_hyperbolic_chain(0.3, -0.4 + 0.2j)
    print("function,n_t,residual,observed_order")
    for fid in args.functions:
        fn = builtin(fid)
        res = []
        for n in args.levels:
            reps = identity_check(chain, fn, t_grid(chain, n), g=fn.exact_dbar, order=args.order)
            res.append(max(r.max_identity_residual for r in reps))
        orders = [float("nan")] + observed_order(res)
        for n, r, p in zip(args.levels, res, orders):
            print(f"{fid},{n},{r:.3e},{p:.2f}")
