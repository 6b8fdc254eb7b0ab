"""Command-line experiments.

Exit codes: 0 when every verdict passes, 2 when a structural hypothesis is
violated (no extension of the requested pole order, condition (*) fails,
unbalanced traveling branches, ...), 1 on errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import polyfit, svg
from .chains import CircleT, discriminant_grid, junction_smoothness, t_grid
from .config import DEFAULTS, ExperimentConfig, build_chain, chain_from_flag, load_config
from .dbar import identity_check, pole_reduction_check
from .discriminant import classify_chain, condition_star, discriminant_set
from .dynamics import (I_of_q, count_traveling, merge_intervals, polyline_distance, track_branches, verify_zp_balance,
                       winding_mismatches)
from .errors import ExtendibilityError, ZeroFunctionError
from .functions import list_functions, resolve_function
from .laurent import analyze_circle, coefficient_rows, merom_test, moment_rows

log = logging.getLogger("polychain")

PASS, VIOLATION, ERROR = 0, 2, 1

# which DEFAULTS entry --nt / --samples stand for in each command
NT_KEY = {"discriminant": "disc_nt", "track": "track_nt", "verify": "dbar_nt"}
SAMPLES_KEY = {"track": "track_samples"}


# -- output helpers ------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def write_json(path: Path, cfg: ExperimentConfig, payload: dict):
    doc = {"config_hash": cfg.hash(), "seed": cfg.seed, "config": cfg.to_dict()}
    doc.update(payload)
    with open(path, "w") as fh:
        json.dump(_jsonable(doc), fh, indent=2)


def _outdir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _grid(cfg: ExperimentConfig, chain, key: str = "nt"):
    return t_grid(chain, int(cfg.get(key)), delta=float(cfg.get("delta")), r_floor=float(cfg.get("r_floor")))


def _envelope(canvas, chain, ts, every: int = 16):
    cs = np.asarray(chain.center_fn(ts), dtype=complex)
    rs = np.asarray(chain.radius_fn(ts), dtype=float)
    svg.chain_envelope(canvas, cs, rs, every=max(1, len(ts) // every))
    return cs, rs


def _extent(chain, ts):
    cs = np.asarray(chain.center_fn(ts), dtype=complex)
    rs = np.asarray(chain.radius_fn(ts), dtype=float)
    return np.concatenate([cs + rs, cs - rs, cs + 1j * rs, cs - 1j * rs,
                           [chain.endpoint_a, chain.endpoint_b]])


# -- commands ------------------------------------------------------------------

def cmd_discriminant(cfg: ExperimentConfig) -> tuple:
    chain = build_chain(cfg.chain)
    ts = discriminant_grid(chain, int(cfg.get("disc_nt")))
    cloud = discriminant_set(chain, ts, epsilon=cfg.get("epsilon"))
    star = condition_star(cloud, chain.endpoint_a, chain.endpoint_b)
    regime = classify_chain(chain, ts)
    out = _outdir(cfg)
    # source marks closure points (limits and double roots on |w| = 1) apart from inner roots
    write_csv(out / "cloud.csv", ["t", "re_s", "im_s", "abs_w", "component_id", "source"],
              ((t, s.real, s.imag, abs(w), lab, src)
               for t, s, w, lab, src in zip(cloud.t, cloud.s, cloud.w, cloud.labels, cloud.source)))
    canvas = svg.Canvas.fit(_extent(chain, ts))
    _envelope(canvas, chain, ts)
    if len(cloud.s):
        canvas.points(cloud.s, color="red", size=1.5)
    for name, z in (("a", chain.endpoint_a), ("b", chain.endpoint_b)):
        canvas.points([z], color="blue", size=3)
        canvas.text(z, name, color="blue")
    canvas.save(out / "discriminant.svg", title=f"discriminant set, {chain.kind} chain")
    verdict = {
        "command": "discriminant",
        "condition_star": star.holds,
        "epsilon": star.epsilon,
        "n_components": star.n_components,
        "components": cloud.component_summary(),
        "regime": regime.regime,
        "min_speed_gap": regime.min_speed_gap,
        "n_t": len(ts),
        "derivative_mode": chain.derivative_mode,
        "singular_params": list(chain.singular_params),
        "junctions": junction_smoothness(chain),
    }
    write_json(out / "verdict.json", cfg, verdict)
    return (PASS if star.holds else VIOLATION), verdict


def cmd_moment_test(cfg: ExperimentConfig) -> tuple:
    chain = build_chain(cfg.chain)
    fn = resolve_function(cfg.function)
    ts = _grid(cfg, chain)
    out = _outdir(cfg)
    N, K, nu, tol = cfg.samples, cfg.band, cfg.nu, cfg.tol
    m_max = int(cfg.get("moment_max"))
    coef_rows, mom_rows, defects, passed = [], [], [], []
    for t in ts:
        circ = CircleT(complex(chain.center_fn(t)), float(chain.radius_fn(t)), float(t))
        data = analyze_circle(fn, circ, N, K)
        res = merom_test(data, nu, tol)
        coef_rows.extend(coefficient_rows(data))
        mom_rows.extend(moment_rows(data, m_max))
        defects.append(res.defect)
        passed.append(res.passed)
    write_csv(out / "coefficients.csv", ["t", "k", "re", "im"], coef_rows)
    write_csv(out / "moments.csv", ["t", "m", "abs_moment"], mom_rows)
    write_csv(out / "defect.csv", ["t", "defect"], zip(ts, defects))
    svg.line_plot({f"nu={nu}": (ts, np.maximum(defects, 1e-18))}, out / "defect.svg",
                  title=f"extension defect of {fn.id}", logy=True)
    ok = bool(all(passed))
    summary = {
        "command": "moment-test", "function": fn.id, "nu": nu, "passed": ok,
        "max_defect": float(np.max(defects)), "n_failed": int(len(passed) - sum(passed)), "n_t": len(ts),
    }
    write_json(out / "summary.json", cfg, summary)
    return (PASS if ok else VIOLATION), summary


def _balance_qs(bs, qs, margin: float = 0.1):
    """q values farther than ``margin`` from every traveling chain path."""
    keep, skipped = [], []
    paths = [bs.chain_path(ch) for kind in ("zero", "pole") for ch in bs.traveling_chains(kind)]
    for q in qs:
        if all(polyline_distance(p, q) >= margin for p in paths):
            keep.append(q)
        else:
            skipped.append(q)
    return keep, skipped


def cmd_track(cfg: ExperimentConfig) -> tuple:
    chain = build_chain(cfg.chain)
    fn = resolve_function(cfg.function)
    ts = _grid(cfg, chain, "track_nt")
    out = _outdir(cfg)
    N = int(cfg.get("track_samples"))
    try:
        bs = track_branches(chain, fn, cfg.nu, ts, N=N, tol=cfg.tol)
    except (ExtendibilityError, ZeroFunctionError) as exc:
        summary = {"command": "track", "function": fn.id, "hypothesis_violation": str(exc)}
        write_json(out / "summary.json", cfg, summary)
        return VIOLATION, summary
    write_csv(out / "branches.csv", ["branch_id", "kind", "t", "re_z", "im_z", "multiplicity", "traveling"],
              bs.rows())
    write_csv(out / "winding.csv", ["t", "n_zeros", "pole_order", "winding", "n_boundary"],
              ((r.t, r.n_zeros, r.pole_order, "" if r.winding is None else r.winding, r.n_boundary)
               for r in bs.records))
    n_g, m_g = count_traveling(bs)
    qs, skipped = _balance_qs(bs, cfg.qs)
    bal = verify_zp_balance(bs, qs, tol=float(cfg.get("balance_tol")))
    mism = winding_mismatches(bs)
    merges = merge_intervals(bs)

    canvas = svg.Canvas.fit(_extent(chain, ts))
    _envelope(canvas, chain, ts)
    colors = ["#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]
    for b in bs.branches:
        pts = b.points()
        col = "#d62728" if b.kind == "pole" else colors[b.id % len(colors)]
        if len(pts) > 1:
            canvas.polyline(pts, color=col, width=2 if b.traveling else 1, dashed=(b.kind == "pole"))
        else:
            canvas.points(pts, color=col)
    for name, z in (("a", chain.endpoint_a), ("b", chain.endpoint_b)):
        canvas.points([z], color="black", size=3)
        canvas.text(z, name)
    canvas.save(out / "branches.svg", title=f"branches of {fn.id}, zeros solid, poles dashed")

    ok = (n_g == m_g) and bal.passed and not mism
    summary = {
        "command": "track", "function": fn.id, "nu": cfg.nu,
        "N_g": n_g, "M_g": m_g, "balanced": n_g == m_g,
        "zp_balance": {"passed": bal.passed, "max_abs": bal.max_abs, "tol": bal.tol,
                       "values": [{"q": q, "value": v} for q, v in bal.values.items()],
                       "skipped_q": skipped},
        "winding_mismatches": mism,
        "boundary_degenerate": bs.boundary_degenerate,
        "merged_intervals": merges,
        "n_branches": len(bs.branches), "n_t": len(ts),
    }
    write_json(out / "summary.json", cfg, summary)
    return (PASS if ok else VIOLATION), summary


def _fit_samples(cfg: ExperimentConfig, fn):
    z = polyfit.annulus_samples(int(cfg.get("fit_samples")), float(cfg.get("fit_r0")),
                                float(cfg.get("fit_r1")), seed=cfg.seed)
    return z, fn(z)


def cmd_verify(cfg: ExperimentConfig) -> tuple:
    """Moment test at nu, then pole bookkeeping for df/dzbar, then order detection."""
    chain = build_chain(cfg.chain)
    fn = resolve_function(cfg.function)
    out = _outdir(cfg)
    nu = cfg.nu
    summary = {"command": "verify", "function": fn.id, "nu": nu}

    # 1. extendibility with a pole of order <= nu on every circle
    ts = _grid(cfg, chain)
    worst = 0.0
    for t in ts:
        circ = CircleT(complex(chain.center_fn(t)), float(chain.radius_fn(t)), float(t))
        res = merom_test(analyze_circle(fn, circ, cfg.samples, cfg.band), nu, cfg.tol)
        worst = max(worst, res.defect)
        if not res.passed:
            summary.update(stage="moment-test", passed=False, max_defect=worst,
                           hypothesis_violation=f"no extension of pole order {nu} at t={t:.6g}")
            write_json(out / "summary.json", cfg, summary)
            return VIOLATION, summary
    summary["moment_test"] = {"passed": True, "max_defect": worst, "n_t": len(ts)}

    # 2. the Cramer identity and pole orders of g = df/dzbar
    dts = _grid(cfg, chain, "dbar_nt")
    cloud = discriminant_set(chain, discriminant_grid(chain, int(cfg.get("disc_nt"))), epsilon=cfg.get("epsilon"))
    ident = identity_check(chain, fn, dts, n_theta=min(cfg.ntheta, 64), g=fn.exact_dbar)
    max_res = max(r.max_identity_residual for r in ident)
    try:
        pr = pole_reduction_check(chain, fn, nu, dts, g=fn.exact_dbar, cloud=cloud)
    except ExtendibilityError as exc:
        summary.update(stage="pole-reduction", passed=False, hypothesis_violation=str(exc))
        write_json(out / "summary.json", cfg, summary)
        return VIOLATION, summary
    write_csv(out / "dbar.csv", ["t", "residual_max", "center_order", "n_extra_poles", "nearest_discriminant_distance"],
              ((a.t, a.max_identity_residual, b.center_order, len(b.extra_pole_locations),
                "" if b.nearest_discriminant_distance is None else b.nearest_discriminant_distance)
               for a, b in zip(ident, pr.reports)))
    svg.line_plot({"identity residual": ([r.t for r in ident], [max(r.max_identity_residual, 1e-18) for r in ident])},
                  out / "dbar.svg", title=f"Cramer identity residual, {fn.id}", logy=True)
    dbar_ok = pr.passed and max_res < float(cfg.get("dbar_tol"))
    summary["dbar"] = {"passed": dbar_ok, "max_identity_residual": max_res,
                       "pole_reduction_passed": pr.passed, "zero_function": pr.zero_function,
                       "g_source": pr.g_source, "failures": pr.failures[:20]}

    # 3. polyanalytic order from samples
    z, vals = _fit_samples(cfg, fn)
    det = polyfit.order_detect(z, vals, nu_max=int(cfg.get("fit_nu_max")), D=int(cfg.get("fit_degree")),
                               tol=float(cfg.get("fit_tol")), form=fn.form, seed=cfg.seed)
    summary["order_detect"] = {"order": det.order, "residuals": det.residuals,
                               "truncation_residual": det.truncation_residual}
    if det.order is not None:
        dec = polyfit.fit(z, vals, det.order, int(cfg.get("fit_degree")), form=fn.form, seed=cfg.seed)
        polyfit.save(dec, out / "decomposition.json")
        r0, r1 = float(cfg.get("fit_r0")), float(cfg.get("fit_r1"))
        radii = [0.5 * r0, r1 + 0.5 * (1 - r1)] if fn.form == "hyperbolic" else [0.5 * r0, 0.5 * (1 + r1), 1.2]
        summary["order_detect"]["extrapolation"] = polyfit.extrapolation_error(dec, fn, radii)
    conclusion = det.order is not None and det.order <= nu
    summary["conclusion_holds"] = conclusion
    ok = dbar_ok and conclusion
    summary["passed"] = ok
    write_json(out / "summary.json", cfg, summary)
    return (PASS if ok else VIOLATION), summary


def cmd_iq(cfg: ExperimentConfig) -> tuple:
    chain = build_chain(cfg.chain)
    fn = resolve_function(cfg.function)
    out = _outdir(cfg)
    finest = (cfg.ntheta, cfg.nt)
    levels = [(n, n) for n in cfg.get("iq_levels") if n < min(finest)] + [finest]
    rows, table = [], {}
    for q in cfg.qs:
        for n_theta, n_t in levels:
            res = I_of_q(chain, fn, cfg.nu, q, n_theta=n_theta, n_t=n_t)
            rows.append((q.real, q.imag, n_t, n_theta, res.value.real, res.value.imag, abs(res.value),
                         res.excluded_fraction))
            table.setdefault(q, []).append(res)
    write_csv(out / "iq.csv", ["re_q", "im_q", "n_t", "n_theta", "re_I", "im_I", "abs_I", "excluded_fraction"], rows)
    svg.line_plot({f"q={q:.3g}": ([r.n_t for r in rs], [max(abs(r.value), 1e-18) for r in rs])
                   for q, rs in table.items()}, out / "iq.svg", title=f"|I(q)| under refinement, {fn.id}", logy=True)
    tol = float(cfg.get("iq_tol"))
    entries, ok = [], True
    for q, rs in table.items():
        mags = [abs(r.value) for r in rs]
        dec = all(b <= a for a, b in zip(mags[:-1], mags[1:]))
        good = mags[-1] < tol and dec
        ok &= good
        entries.append({"q": q, "re_I": rs[-1].value.real, "im_I": rs[-1].value.imag,
                        "excluded_fraction": rs[-1].excluded_fraction, "decreasing": dec, "passed": good})
    summary = {"command": "iq", "function": fn.id, "nu": cfg.nu, "tol": tol, "passed": bool(ok),
               "levels": levels, "balance": entries}
    write_json(out / "balance.json", cfg, summary)
    return (PASS if ok else VIOLATION), summary


def cmd_list_functions(cfg: ExperimentConfig | None = None) -> tuple:
    entries = list_functions()
    width = max(len(e["id"]) for e in entries)
    for e in entries:
        order = "-" if e["order"] is None else str(e["order"])
        flag = "" if e["regular"] else "  (not regular)"
        print(f"{e['id']:<{width}}  order {order:>2}  {e['form']:<10}  {e['description']}{flag}")
    return PASS, {"command": "list-functions", "functions": entries}


COMMANDS = {
    "discriminant": cmd_discriminant,
    "moment-test": cmd_moment_test,
    "track": cmd_track,
    "verify": cmd_verify,
    "iq": cmd_iq,
    "list-functions": cmd_list_functions,
}


# -- argument handling ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polychain", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        if name == "list-functions":
            continue
        sp.add_argument("--config", help="YAML or JSON experiment file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--nt", type=int, help="parameter grid size")
        sp.add_argument("--ntheta", type=int, help="angle grid size")
        sp.add_argument("--samples", type=int, help="samples per circle N")
        sp.add_argument("--band", type=int, help="retained Laurent band K")
        sp.add_argument("--tol", type=float, help="extendibility tolerance")
        sp.add_argument("--nu", type=int, help="pole order at the center")
        sp.add_argument("--function", help="registry id (see list-functions) or a CSV of samples")
        sp.add_argument("--chain", help="hyperbolic | horicycle | mixed | linear | segment")
        sp.add_argument("--seed", type=int)
    return p


def config_from_args(args) -> ExperimentConfig:
    over = {k: getattr(args, k) for k in ("out", "nt", "ntheta", "samples", "band", "tol", "nu", "seed")}
    if args.function is not None:
        fid = args.function
        over["function"] = {"file": fid} if fid.endswith(".csv") else fid
    if args.chain is not None:
        over["chain"] = chain_from_flag(args.chain)
    cmd = args.command
    # --nt and --samples also stand for the command's own grid entries
    if args.nt is not None and cmd in NT_KEY:
        over[NT_KEY[cmd]] = args.nt
    if args.samples is not None and cmd in SAMPLES_KEY:
        over[SAMPLES_KEY[cmd]] = args.samples
    if args.samples is not None and args.band is None:
        over["band"] = args.samples // 4
    cfg = load_config(args.config, **over)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "list-functions":
            code, _ = cmd_list_functions()
            return code
        cfg = config_from_args(args)
        code, summary = COMMANDS[args.command](cfg)
    except Exception as exc:  # noqa: BLE001 - report and map to exit code 1
        log.debug("failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return ERROR
    verdict = "pass" if code == PASS else "hypothesis violation"
    print(json.dumps({"verdict": verdict, **_jsonable({k: v for k, v in summary.items() if k != "components"})}))
    return code


if __name__ == "__main__":
    sys.exit(main())
