"""Command line interface.

Exit codes: 0 success, 1 invalid configuration or input, 2 numerical
failure, 3 iteration budget exhausted (partial results are still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ensembles import parse_measure, sample_density_matrices, stream
from .errors import EntvolError, InvalidData
from .estimator import WalkParams, estimate_eof
from .experiments import (
    CampaignConfig,
    fit_exponential,
    run_bound_entanglement_campaign,
    run_fixed_spectrum_study,
    run_pure_state_study,
    run_r_binned_scan,
    run_scatter_ct,
    run_volume_campaign,
)
from .io import read_states, to_jsonable, write_csv, write_json, write_states
from .states import BipartiteSplit, analyze

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_BUDGET = 0, 1, 2, 3
FULL_SCALE_SAMPLES = 100_000

log = logging.getLogger("entvol")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _header(args, extra=None):
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "stdin")}
    head = {"tool": "entvol", "version": __version__, "command": args.command, "config": cfg}
    if extra:
        head.update(extra)
    return head


def _emit(args, summary, records):
    doc = {"header": _header(args), "summary": summary, "records": records}
    write_json(doc, args.out)
    if args.out and args.out != "-" and records:
        write_csv(records, Path(args.out).with_suffix(".csv"))


def _split(args) -> BipartiteSplit:
    return BipartiteSplit(args.na, args.nb)


def _walk_params(args, n) -> WalkParams:
    over = {k: getattr(args, k) for k in ("chi0", "chi_end", "alpha", "i_change", "l_mat",
                                          "m_min", "m_max", "i_max", "q")
            if getattr(args, k, None) is not None}
    if getattr(args, "ec", None) is not None:
        over["e_cut"] = args.ec
    return WalkParams.defaults_for(n, **over)


def _config(args, samples=None) -> CampaignConfig:
    split = _split(args)
    n_samples = samples or args.count
    if getattr(args, "full_scale", False) and samples is None:
        n_samples = max(n_samples, FULL_SCALE_SAMPLES)
    return CampaignConfig(
        split=split,
        measure=parse_measure(args.measure),
        samples=n_samples,
        seed=args.seed,
        bins=args.bins,
        e_cut=args.ec,
        walk=_walk_params(args, split.n),
        estimate_ppt=not getattr(args, "no_eof", False),
        workers=args.workers,
    )


def _drop_records(result):
    d = to_jsonable(result)
    d.pop("records", None)
    return d


# -------------------------------------------------------------------- commands


def cmd_sample(args):
    rng = stream(args.seed, 0, 0)
    rhos = sample_density_matrices(args.n, parse_measure(args.measure), args.count, rng)
    write_states(rhos, args.out)
    return EXIT_OK


def _input_states(args):
    if args.stdin or args.input in (None, "-"):
        return read_states(sys.stdin)
    return read_states(args.input)


def cmd_analyze(args):
    split = _split(args)
    records = []
    for i, rho in enumerate(_input_states(args)):
        rec = analyze(rho, split, renyi_orders=args.renyi)
        row = {"index": i, "t": rec.negativity, "R": rec.participation, "H1": rec.von_neumann,
               "ppt": rec.ppt}
        row.update({f"H{q:g}": v for q, v in rec.renyi.items()})
        row["pt_spectrum"] = rec.pt_spectrum
        records.append(row)
    doc = {"header": _header(args), "summary": {"states": len(records)}, "records": records}
    write_json(doc, args.out)
    if args.out and args.out != "-" and records:
        write_csv([{k: v for k, v in r.items() if k != "pt_spectrum"} for r in records],
                  Path(args.out).with_suffix(".csv"))
    return EXIT_OK


def cmd_eof(args):
    split = _split(args)
    params = _walk_params(args, split.n)
    records = []
    incomplete = False
    for i, rho in enumerate(_input_states(args)):
        est = estimate_eof(rho, split, params, stream(args.seed, 1, i))
        incomplete |= not est.complete
        records.append({
            "index": i, "E_min": est.e_min, "M_star": est.m_star, "iterations": est.iterations,
            "verdict": est.verdict, "complete": est.complete,
            "E_by_M": {str(m): e for m, e in est.e_by_m.items()},
        })
    csv_rows = [{k: v for k, v in r.items() if k != "E_by_M"} for r in records]
    doc = {"header": _header(args, {"walk": to_jsonable(params)}),
           "summary": {"states": len(records), "complete": not incomplete}, "records": records}
    write_json(doc, args.out)
    if args.out and args.out != "-" and csv_rows:
        write_csv(csv_rows, Path(args.out).with_suffix(".csv"))
    return EXIT_BUDGET if incomplete else EXIT_OK


def cmd_volume(args):
    res = run_volume_campaign(_config(args))
    _emit(args, _drop_records(res) | {"bins": None}, to_jsonable(res.bins))
    return EXIT_BUDGET if res.incomplete_estimates else EXIT_OK


def cmd_bound(args):
    res = run_bound_entanglement_campaign(_config(args))
    summary = to_jsonable(res)
    summary["campaign"] = _drop_records(res.campaign) | {"bins": None}
    _emit(args, summary, to_jsonable(res.campaign.bins))
    return EXIT_BUDGET if res.campaign.incomplete_estimates else EXIT_OK


def cmd_scan_r(args):
    bins = run_r_binned_scan(_config(args))
    _emit(args, {"bins": len(bins)}, to_jsonable(bins))
    return EXIT_OK


def cmd_scatter_ct(args):
    res = run_scatter_ct(_config(args))
    rec = res.records
    rows = [{"t": float(t), "C": float(c), "E": float(e), "R": float(r)}
            for t, c, e, r in zip(rec["t"], rec["C"], rec["E"], rec["R"])]
    summary = to_jsonable(res)
    summary.pop("records", None)
    _emit(args, summary, rows)
    return EXIT_OK


def cmd_fixed_spectrum(args):
    spectrum = [float(x) for x in args.spectrum.split(",")]
    split = _split(args)
    res = run_fixed_spectrum_study(spectrum, split, args.count, args.seed,
                                   walk=_walk_params(args, split.n), workers=args.workers)
    _emit(args, to_jsonable(res), [])
    return EXIT_OK


def cmd_pure_study(args):
    res = run_pure_state_study(_split(args), args.count, args.seed, args.bins, args.workers)
    rows = [{"lo": float(lo), "hi": float(hi), "count": int(c)}
            for lo, hi, c in zip(res.hist_edges[:-1], res.hist_edges[1:], res.hist_counts)]
    _emit(args, {"samples": res.samples, "mean_e": to_jsonable(res.mean_e),
                 "zero_mass": res.zero_mass}, rows)
    return EXIT_OK


def _points_from_files(paths):
    pts = []
    for p in paths:
        doc = json.loads(Path(p).read_text())
        try:
            cfg = doc["summary"]["config"]["split"]
            pts.append((cfg["n_a"] * cfg["n_b"], doc["summary"]["p_t"]["value"]))
        except (KeyError, TypeError):
            raise InvalidData(f"{p} is not a volume result file") from None
    return pts


def cmd_fit(args):
    pts = []
    if args.points:
        for item in args.points.split(","):
            n, _, p = item.partition(":")
            try:
                pts.append((float(n), float(p)))
            except ValueError:
                raise InvalidData(f"bad point {item!r}; expected N:P") from None
    if args.input:
        pts.extend(_points_from_files(args.input))
    res = fit_exponential(pts)
    _emit(args, to_jsonable(res), [{"N": n, "P": p} for n, p in pts])
    return EXIT_OK


# ---------------------------------------------------------------------- parser


def _add_split(p):
    p.add_argument("--na", type=int, required=True, help="dimension of subsystem A")
    p.add_argument("--nb", type=int, required=True, help="dimension of subsystem B")


def _add_walk(p):
    g = p.add_argument_group("random walk")
    g.add_argument("--chi0", type=float)
    g.add_argument("--chi-end", dest="chi_end", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--ichange", dest="i_change", type=int)
    g.add_argument("--lmat", dest="l_mat", type=int)
    g.add_argument("--mmin", dest="m_min", type=int)
    g.add_argument("--mmax", dest="m_max", type=int)
    g.add_argument("--imax", dest="i_max", type=int, help="iteration budget per state")
    g.add_argument("--q", type=float, help="entropy order (default 1)")


def _add_campaign(p, measure=True):
    _add_split(p)
    if measure:
        p.add_argument("--measure", default="unitary",
                       help="unitary | orthogonal | dirichlet:<lam> | pure | spectrum:<d1,...>")
    p.add_argument("--count", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--ec", type=float, default=3e-4, help="entanglement cut-off E_c")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="result JSON path; a .csv mirror is written next to it")
    _add_walk(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="entvol", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"entvol {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="draw random density matrices")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--measure", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    for name, func, helptext in (("analyze", cmd_analyze, "negativity, R, entropies per state"),
                                 ("eof", cmd_eof, "estimate entanglement of formation")):
        p = sub.add_parser(name, help=helptext)
        _add_split(p)
        p.add_argument("--in", dest="input")
        p.add_argument("--stdin", action="store_true")
        p.add_argument("--out")
        if name == "analyze":
            p.add_argument("--renyi", type=float, nargs="*", default=[2.0])
        else:
            p.add_argument("--seed", type=int, default=0)
            _add_walk(p)
        p.set_defaults(func=func)

    p = sub.add_parser("volume", help="P_T / P_S / P_B / P_F campaign")
    _add_campaign(p)
    p.add_argument("--full-scale", action="store_true", help=f"use >= {FULL_SCALE_SAMPLES} samples")
    p.add_argument("--no-eof", action="store_true", help="leave PPT states unresolved for N > 6")
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("bound", help="bound-entanglement campaign (N > 6)")
    _add_campaign(p)
    p.set_defaults(count=10_000)
    p.add_argument("--full-scale", action="store_true", help=f"use >= {FULL_SCALE_SAMPLES} samples")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("scan-r", help="statistics in bins of the participation ratio")
    _add_campaign(p)
    p.add_argument("--no-eof", action="store_true")
    p.set_defaults(func=cmd_scan_r)

    p = sub.add_parser("scatter-ct", help="negativity vs concurrence for 2x2 states")
    _add_campaign(p)
    p.set_defaults(func=cmd_scatter_ct)

    p = sub.add_parser("fixed-spectrum", help="Haar rotations of a fixed spectrum")
    _add_campaign(p, measure=False)
    p.add_argument("--spectrum", required=True, help="comma-separated eigenvalues")
    p.set_defaults(func=cmd_fixed_spectrum)

    p = sub.add_parser("pure-study", help="entanglement of random pure states")
    _add_split(p)
    p.add_argument("--count", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pure_study)

    p = sub.add_parser("fit", help="fit P(N) = A exp(-c N)")
    p.add_argument("--points", help="comma-separated N:P pairs")
    p.add_argument("--in", dest="input", nargs="*", help="volume result files")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except EntvolError as exc:
        print(f"entvol: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"entvol: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"entvol: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
