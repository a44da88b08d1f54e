"""Command-line harness.

    regpos props --seed 1
    regpos qs --config qs.json --seed 7 --out results/

The config is a single JSON document (see README for per-subcommand keys).
Each experiment writes one JSONL record stream plus a CSV summary into
--out; outputs are byte-identical for identical (config, seed, threads).
Exit codes: 0 pass, 1 invariant failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
import time

import numpy as np

from . import bodies as bd
from . import experiments as ex
from .records import JsonlWriter, write_csv
from .zoo import default_zoo, preset


class ConfigError(Exception):
    pass


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _build_bodies(cfg, default_n=16):
    entries = cfg.get("bodies")
    n = int(cfg.get("n", default_n))
    if entries is None:
        return default_zoo(n)
    out = []
    for e in entries:
        try:
            if "preset" in e:
                body = preset(e["preset"], int(e.get("dim", n)))
                name = e.get("name", e["preset"])
            else:
                body = bd.from_spec(e)
                name = e.get("name", body.family)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad body entry {e!r}: {exc}")
        out.append((name, body))
    return out


def _single_body(cfg, default_n=32):
    if "body" in cfg:
        e = cfg["body"]
        if isinstance(e, dict) and "preset" in e:
            return preset(e["preset"], int(e.get("dim", cfg.get("n", default_n))))
        try:
            return bd.from_spec(e)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad body spec: {exc}")
    return bd.cross_polytope(int(cfg.get("n", default_n)))


@contextlib.contextmanager
def _writer(out, name):
    if out is None:
        yield None
        return
    os.makedirs(out, exist_ok=True)
    w = JsonlWriter(os.path.join(out, f"{name}.jsonl"))
    try:
        yield w
    finally:
        w.close()


def _summary_csv(out, name, rows, fieldnames):
    if out is None or not rows:
        return
    os.makedirs(out, exist_ok=True)
    write_csv(os.path.join(out, f"{name}_summary.csv"), rows, fieldnames)


def _cmd_props(args, cfg):
    results = ex.run_property_suites(seed=args.seed, names=cfg.get("names"))
    rows = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name:28s} ({r.elapsed:5.1f}s)  {r.detail}")
        rows.append({"name": r.name, "passed": int(r.passed), "detail": r.detail,
                     "seconds": f"{r.elapsed:.2f}"})
    _summary_csv(args.out, "props", rows, ["name", "passed", "detail", "seconds"])
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} suite(s) failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def _cmd_ellpos(args, cfg):
    bodies = _build_bodies(cfg)
    with _writer(args.out, "ellpos") as w:
        rows = ex.run_ell_positions(
            bodies, samples=int(cfg.get("samples", 20000)), seed=args.seed,
            tol=float(cfg.get("tol", 1e-6)), threads=args.threads, writer=w,
        )
    for r in rows:
        print(f"{r['body']:12s} n={r['n']:3d} ell2={r['objective']:.4f} "
              f"residual={r['residual']:.2e} product/nlog(1+n)={r['product_over_nlogn']:.3f}")
    _summary_csv(args.out, "ellpos", rows, list(rows[0]) if rows else [])
    return 0


def _cmd_regpos(args, cfg):
    bodies = [(n, b) for n, b in _build_bodies(cfg) if b.as_weighted_lp() is not None]
    with _writer(args.out, "regpos") as w:
        rows = ex.run_regular_positions(
            bodies, alpha=float(cfg.get("alpha", 0.75)),
            samples=int(cfg.get("samples", 20000)), seed=args.seed,
            threads=args.threads, writer=w,
        )
    bad = 0
    for r in rows:
        print(f"{r['body']:12s} n={r['n']:3d} residual={r['residual']:.2e} "
              f"iters={r['iterations']:3d} balance={r['balance']:.4f} "
              f"certificate={r['certificate']:.2e} converged={r['converged']}")
        bad += not r["converged"]
    _summary_csv(args.out, "regpos", rows, list(rows[0]) if rows else [])
    return 1 if bad else 0


def _cmd_sections(args, cfg):
    bodies = _build_bodies(cfg)
    with _writer(args.out, "sections") as w:
        rows = ex.run_section_tables(
            bodies, k_grid=cfg.get("k_grid"), samples=int(cfg.get("samples", 400)),
            c=float(cfg.get("c", 0.5)), seed=args.seed, writer=w,
        )
    for r in rows:
        print(f"{r['body']:12s} n={r['n']:3d} k={r['k']:3d} cr_k={r['cr_k']:.4f} "
              f"ci=[{r['ci_lo']:.4f},{r['ci_hi']:.4f}] upper={r['c_k_upper']:.4f}")
    _summary_csv(args.out, "sections", rows, list(rows[0]) if rows else [])
    return 0


def _cmd_lowmstar(args, cfg):
    with _writer(args.out, "lowmstar") as w:
        summary = ex.run_lowmstar_check(
            n_list=tuple(cfg.get("n_list", (16, 32, 64))),
            samples=int(cfg.get("samples", 1000)), c=float(cfg.get("c", 0.5)),
            seed=args.seed, writer=w, threads=args.threads,
        )
    for (name, n), val in summary["C_emp"].items():
        print(f"{name:12s} n={n:3d}  C_emp = {val:.3f}")
    print(f"max C_emp = {summary['C_emp_max']:.3f}")
    _summary_csv(args.out, "lowmstar", summary["rows"],
                 list(summary["rows"][0]) if summary["rows"] else [])
    return 0 if summary["C_emp_max"] <= 3.0 else 1


def _cmd_qs(args, cfg):
    K = _single_body(cfg)
    k = int(cfg.get("k", 8))
    alpha = cfg.get("alpha")
    with _writer(args.out, "qs") as w:
        s = ex.run_qs_experiment(
            K, None if alpha is None else float(alpha), k,
            trials=int(cfg.get("trials", 500)), seed=args.seed,
            c=float(cfg.get("c", 0.5)), fp_samples=int(cfg.get("fp_samples", 20000)),
            report_samples=int(cfg.get("report_samples", 400)),
            writer=w, threads=args.threads,
        )
    print(f"n={s.n} k={s.k} alpha={s.alpha:.4f} trials={s.trials}")
    print(f"P_emp={s.P_emp:.4f} threshold Rbar^2={s.threshold:.4f}")
    for name, q in s.quantiles.items():
        print(f"  {name}: d_sop={q['d_section_of_projection']:.4f} "
              f"d_pos={q['d_projection_of_section']:.4f}")
    print(f"exceedance: sop={s.exceed_sop:.4f} pos={s.exceed_pos:.4f} "
          f"(bound 2e^-ck = {2*np.exp(-float(cfg.get('c', 0.5))*k):.4f})")
    row = {
        "n": s.n, "k": s.k, "alpha": s.alpha, "trials": s.trials,
        "P_emp": s.P_emp, "threshold": s.threshold,
        "d90_sop": s.quantiles["q90"]["d_section_of_projection"],
        "d90_pos": s.quantiles["q90"]["d_projection_of_section"],
        "exceed_sop": s.exceed_sop, "exceed_pos": s.exceed_pos,
    }
    _summary_csv(args.out, "qs", [row], list(row))
    return 0


def _cmd_curve(args, cfg):
    K = _single_body(cfg)
    with _writer(args.out, "curve") as w:
        res = ex.run_regularity_curve(
            K, alphas=tuple(cfg.get("alphas", (0.6, 0.75, 1.0))),
            samples=int(cfg.get("samples", 400)), seed=args.seed,
            c=float(cfg.get("c", 0.5)), fp_samples=int(cfg.get("fp_samples", 20000)),
            k_grid=cfg.get("k_grid"), writer=w, threads=args.threads,
        )
    for pt in res["curve"]:
        print(f"alpha={pt['alpha']:.3f} P_emp={pt['P_emp']:.4f} "
              f"shape=C/sqrt(a-1/2)~{pt['reference_shape']:.3f} "
              f"converged={pt['fp_converged']}")
    _summary_csv(args.out, "curve", res["rows"], list(res["rows"][0]) if res["rows"] else [])
    if args.out:
        write_csv(os.path.join(args.out, "curve_alpha.csv"), res["curve"],
                  list(res["curve"][0]))
    return 0


_COMMANDS = {
    "props": _cmd_props,
    "ellpos": _cmd_ellpos,
    "regpos": _cmd_regpos,
    "sections": _cmd_sections,
    "lowmstar": _cmd_lowmstar,
    "qs": _cmd_qs,
    "curve": _cmd_curve,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="regpos", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON config path")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out", default=None, help="output directory for JSONL/CSV")
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    t0 = time.time()
    try:
        rc = _COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(f"[{args.command}] done in {time.time() - t0:.1f}s", file=sys.stderr)
    return rc


if __name__ == "__main__":
    sys.exit(main())
