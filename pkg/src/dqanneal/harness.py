"""Command-line harness: configuration, persistence, and canned studies.

Subcommands: instance, spectrum, evolve, sweep, optimize-sqs, optimize-jxx,
fit, reproduce.  Options may come from a TOML config file (--config) with
command-line flags taking precedence.  Every CSV artifact carries a comment
header with the sha256 hash of the fully resolved configuration, so identical
configs are guaranteed to have produced identical files.

Exit codes: 0 success, 1 validation failure, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .dynamics import (
    DissipatorSpec,
    IntegrationError,
    IntegratorConfig,
    evolve_lindblad,
    evolve_unitary,
    gamma_rate,
)
from .hamiltonian import build_reduced
from .observables import FitError, fit_saturation, gap_trace, trajectory_fidelities
from .optimize import (
    NoAdmissibleCatalystError,
    grid_search_sqs,
    optimize_jxx,
    sweep_infidelity,
)
from .problem import MwisInstance, build_instance
from .protocols import NSDQA, QA, SQS

__all__ = ["main", "run", "config_hash"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2


def config_hash(resolved: dict) -> str:
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":"),
                      default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _write_csv(path, header, rows, resolved_config):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={config_hash(resolved_config)}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, float) or isinstance(v, np.floating):
        return repr(float(v))
    return v


def _load_instance(args) -> MwisInstance:
    if getattr(args, "instance_file", None):
        return MwisInstance.from_json(Path(args.instance_file).read_text())
    if args.N is None:
        raise ValueError("either --N or --instance-file is required")
    return build_instance(args.N)


def _protocol(args, j_xx: float = 0.0):
    kind = args.protocol
    if kind == "qa":
        return QA(T=args.T)
    if kind == "nsdqa":
        if j_xx == 0.0:
            raise ValueError("nsdqa needs a nonzero --j-xx")
        return NSDQA(T=args.T, j_xx=j_xx)
    if kind == "sqs":
        missing = [f for f in ("t_q", "dT_q", "B_q") if getattr(args, f) is None]
        if missing:
            raise ValueError(f"sqs protocol needs {', '.join(missing)}")
        return SQS(T=args.T, t_q=args.t_q, dT_q=args.dT_q, B_q=args.B_q)
    raise ValueError(f"unknown protocol {kind!r}")


def _dissipator(args) -> DissipatorSpec:
    kind = getattr(args, "dissipator", "none") or "none"
    if kind == "none":
        return DissipatorSpec.none()
    N = args.N
    gamma = args.gamma if args.gamma is not None else gamma_rate(N, args.t_ref)
    if kind == "dephasing":
        return DissipatorSpec.dephasing(gamma)
    if kind == "gainloss":
        return DissipatorSpec.gainloss(gamma, beta=args.beta)
    raise ValueError(f"unknown dissipator {kind!r}")


def _integrator(args) -> IntegratorConfig:
    kw = {}
    if getattr(args, "method", None):
        kw["method"] = args.method
    if getattr(args, "rtol", None) is not None:
        kw["rtol"] = args.rtol
        kw["atol"] = args.rtol * 1e-2
    if getattr(args, "grid_points", None) is not None:
        kw["grid_points"] = args.grid_points
    if getattr(args, "dissipator", "none") not in (None, "none"):
        kw.setdefault("rtol", 1e-8)
        kw.setdefault("atol", 1e-10)
    return IntegratorConfig(**kw)


def _resolved(args) -> dict:
    # output/input paths are excluded so the hash identifies the computation,
    # not where its artifacts happen to live
    skip = {"func", "config", "out", "outdir", "infile", "instance_file"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# -- subcommands ------------------------------------------------------------

def cmd_instance(args):
    inst = _load_instance(args)
    text = inst.to_json()
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_spectrum(args):
    inst = _load_instance(args)
    j_xx = args.j_xx or 0.0
    opset = build_reduced(inst, j_xx=j_xx)
    proto = _protocol(args, j_xx)
    gt = gap_trace(opset, proto, grid_points=args.grid_points or 201)
    if args.levels:
        from .hamiltonian import assemble
        rows = []
        for s in gt.s:
            A, B, C = proto.coefficients(s * proto.total_time)
            e = np.linalg.eigvalsh(assemble(opset, A, B, C))[:args.levels]
            rows.append([s] + list(e))
        header = ["s"] + [f"E{i}" for i in range(args.levels)]
    else:
        header = ["s", "gap"]
        rows = list(zip(gt.s, gt.gaps))
    _write_csv(args.out, header, rows, _resolved(args))
    print(f"min gap {gt.min_gap:.6e} at s={gt.argmin_s}")
    return EXIT_OK


def cmd_evolve(args):
    inst = _load_instance(args)
    j_xx = args.j_xx or 0.0
    opset = build_reduced(inst, j_xx=j_xx)
    proto = _protocol(args, j_xx)
    spec = _dissipator(args)
    config = _integrator(args)
    if spec.kind == "none":
        traj = evolve_unitary(opset, proto, config=config)
    else:
        traj = evolve_lindblad(opset, proto, spec, config=config)
    fids = trajectory_fidelities(traj)
    rows = []
    for i, t in enumerate(traj.times):
        A, B, C = proto.coefficients(min(t, proto.total_time))
        rows.append([t, A, B, C, fids[i, 0], fids[i, 1],
                     traj.norm_or_trace(i), traj.purity(i)])
    header = ["t", "A", "B", "C", "fid_gs", "fid_e1", "norm_or_trace", "purity"]
    _write_csv(args.out, header, rows, _resolved(args))
    print(f"final fid_gs {fids[-1, 0]:.6f}")
    return EXIT_OK


def _parse_grid(text):
    return [float(x) for x in text.split(",")] if text else None


def cmd_sweep(args):
    instances = [build_instance(n) for n in args.sizes]
    t_grid = _parse_grid(args.t_grid)
    if not t_grid:
        raise ValueError("--t-grid is required")
    spec = None
    if args.dissipator and args.dissipator != "none":
        spec_args = argparse.Namespace(dissipator=args.dissipator, N=None,
                                       gamma=args.gamma, t_ref=args.t_ref,
                                       beta=args.beta)
        # gamma scales with each instance's size unless given explicitly

        def make_spec(N):
            spec_args.N = N
            return _dissipator(spec_args)
    else:
        def make_spec(N):
            return None

    kind = args.protocol
    j_xx = args.j_xx or 0.0
    dT_q, B_q, tau_q = args.dT_q or 0.0, args.B_q or 0.0, args.tau_q or 0.9

    def factory(inst, T):
        if kind == "qa":
            return QA(T=T)
        if kind == "nsdqa":
            return NSDQA(T=T, j_xx=j_xx)
        if kind == "sqs":
            base = T - dT_q
            return SQS(T=base, t_q=tau_q * base, dT_q=dT_q, B_q=B_q)
        raise ValueError(f"unknown protocol {kind!r}")

    rows = []
    config = _integrator(args)
    for inst in instances:
        pts = sweep_infidelity([inst], factory, t_grid,
                               dissipator=make_spec(inst.N), config=config,
                               workers=args.workers)
        rows.extend([p.N, p.t_total, p.kind, p.bath, p.infidelity]
                    for p in pts)
    _write_csv(args.out, ["N", "T_total", "protocol", "bath", "infidelity"],
               rows, _resolved(args))
    return EXIT_OK


def cmd_optimize_sqs(args):
    inst = _load_instance(args)
    spec_ns = argparse.Namespace(dissipator=args.dissipator, N=inst.N,
                                 gamma=args.gamma, t_ref=args.t_ref,
                                 beta=args.beta)
    spec = _dissipator(spec_ns)
    grid = grid_search_sqs(
        inst, T=args.T,
        b_q_grid=_parse_grid(args.b_q_grid),
        tau_q_grid=_parse_grid(args.tau_q_grid),
        dt_q_grid=_parse_grid(args.dt_q_grid),
        dissipator=None if spec.kind == "none" else spec,
        workers=args.workers)
    rows = []
    for ib, b in enumerate(grid.b_q):
        for it, tau in enumerate(grid.tau_q):
            rows.append([b, tau, grid.best_dt_q[ib, it],
                         grid.best_fidelity[ib, it]])
    _write_csv(args.out, ["B_q", "tau_q", "best_dT_q", "best_fidelity"],
               rows, _resolved(args))
    best = {"T": grid.T, "B_q": grid.best_triple[0],
            "tau_q": grid.best_triple[1], "dT_q": grid.best_triple[2],
            "fidelity": grid.best_value}
    record = Path(args.out).with_suffix(".best.json")
    record.write_text(json.dumps(best, indent=2) + "\n")
    print(json.dumps(best))
    return EXIT_OK


def cmd_optimize_jxx(args):
    inst = _load_instance(args)
    res = optimize_jxx(inst, interval=(args.j_min, args.j_max),
                       resolution=args.resolution,
                       grid_points=args.grid_points or 801)
    rows = [[j, "" if d is None else d] for j, d in res.trace]
    _write_csv(args.out, ["j_xx", "delta_c"], rows, _resolved(args))
    record = {"j_xx": res.j_xx, "delta_c": res.delta_c, "s_c": res.s_c,
              "delta_min": res.delta_min, "s_min": res.s_min}
    Path(args.out).with_suffix(".best.json").write_text(
        json.dumps(record, indent=2) + "\n")
    print(json.dumps(record))
    return EXIT_OK


def cmd_fit(args):
    points = []
    with open(args.infile) as fh:
        for row in csv.DictReader(r for r in fh if not r.startswith("#")):
            points.append((float(row["T_total"]), float(row["infidelity"])))
    fr = fit_saturation(points, start=args.start)
    record = {"y0": fr.y0, "y_sat": fr.y_sat, "tau": fr.tau,
              "residual_norm": fr.residual_norm}
    if args.out:
        Path(args.out).write_text(json.dumps(record, indent=2) + "\n")
    print(json.dumps(record))
    return EXIT_OK


# -- reproduce: canned desk-scale studies -----------------------------------

def _reproduce_jobs(study, sizes, outdir, t_grid, grid_points):
    """Argument lists (argv-style) for each CSV of one canned study."""
    out = Path(outdir)
    jobs = []
    if study == "fig3":
        ts = t_grid or [10, 30, 100, 300, 1000, 2000, 3000]
        jobs.append(["sweep", "--protocol", "qa", "--sizes", "5",
                     "--t-grid", ",".join(str(t) for t in ts),
                     "--out", str(out / "fig3_qa_infidelity.csv")])
        jobs.append(["evolve", "--N", "5", "--protocol", "qa", "--T", "2000",
                     "--grid-points", str(grid_points or 201),
                     "--out", str(out / "fig3_qa_T2000_trajectory.csv")])
    elif study == "fig4":
        n = str(max(sizes or [9]))
        jobs.append(["optimize-jxx", "--N", n, "--j-min", "0.5", "--j-max",
                     "4.0", "--resolution", "16",
                     "--out", str(out / f"fig4_jxx_N{n}.csv")])
        # the evolve runs are appended by cmd_reproduce once j_xx is known
    elif study in ("fig5", "fig6", "fig7", "fig8"):
        ts = t_grid or [15, 30, 60, 100, 200, 400]
        diss = {"fig5": ["none"], "fig6": ["dephasing"], "fig7": ["dephasing"],
                "fig8": ["gainloss"]}[study]
        for n in (sizes or [5, 7, 9]):
            for d in diss:
                extra = []
                if d == "dephasing":
                    extra = ["--dissipator", "dephasing", "--t-ref", "1400"]
                elif d == "gainloss":
                    extra = ["--dissipator", "gainloss", "--t-ref", "1400",
                             "--beta", "1.0"]
                jobs.append(["sweep", "--protocol", "qa", "--sizes", str(n),
                             "--t-grid", ",".join(str(t) for t in ts),
                             *extra,
                             "--out", str(out / f"{study}_qa_N{n}_{d}.csv")])
    elif study == "appB":
        for tag, extra in (("unitary", []),
                           ("dephasing", ["--dissipator", "dephasing",
                                          "--t-ref", "50"])):
            for T in (15, 50, 100):
                jobs.append(["optimize-sqs", "--N", "5", "--T", str(T),
                             "--b-q-grid", "0.5,0.7,0.85,0.95",
                             "--tau-q-grid", "0.85,0.9,0.95",
                             "--dt-q-grid", "0,2,4,8", *extra,
                             "--out", str(out / f"appB_{tag}_T{T}.csv")])
    else:
        raise ValueError(f"unknown study {study!r}")
    return jobs


def cmd_reproduce(args):
    sizes = args.sizes or None
    jobs = _reproduce_jobs(args.study, sizes, args.outdir,
                           _parse_grid(args.t_grid), args.grid_points)
    for job in jobs:
        status = run(job)
        if status != EXIT_OK:
            return status
    if args.study == "fig4":
        n = str(max(sizes or [9]))
        best = json.loads(
            (Path(args.outdir) / f"fig4_jxx_N{n}.best.json").read_text())
        for proto_args in (
                ["--protocol", "nsdqa", "--j-xx", str(best["j_xx"])],
                ["--protocol", "sqs", "--t-q", "85", "--dt-q", "8",
                 "--b-q", "0.85", "--T", "92"]):
            name = "nsdqa" if "nsdqa" in proto_args else "sqs"
            argv = ["evolve", "--N", n, *proto_args,
                    "--grid-points", str(args.grid_points or 101),
                    "--out", str(Path(args.outdir) / f"fig4_{name}_N{n}.csv")]
            if name == "nsdqa":
                argv += ["--T", "100"]
            status = run(argv)
            if status != EXIT_OK:
                return status
    if args.study == "fig7":
        for n in (sizes or [5, 7, 9]):
            src = Path(args.outdir) / f"fig7_qa_N{n}_dephasing.csv"
            status = run(["fit", "--infile", str(src),
                          "--out", str(Path(args.outdir) / f"fig7_fit_N{n}.json")])
            if status != EXIT_OK:
                return status
    return EXIT_OK


# -- argument plumbing ------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="TOML config file; flags override it")
    p.add_argument("--workers", type=int, default=1,
                   help="max concurrent evaluations (sweeps and grids)")


def _add_instance_args(p):
    p.add_argument("--N", type=int)
    p.add_argument("--instance-file")


def _add_protocol_args(p):
    p.add_argument("--protocol", choices=["qa", "nsdqa", "sqs"], default="qa")
    p.add_argument("--T", type=float)
    p.add_argument("--j-xx", dest="j_xx", type=float)
    p.add_argument("--t-q", dest="t_q", type=float)
    p.add_argument("--dt-q", dest="dT_q", type=float)
    p.add_argument("--b-q", dest="B_q", type=float)
    p.add_argument("--tau-q", dest="tau_q", type=float)


def _add_dissipator_args(p):
    p.add_argument("--dissipator", choices=["none", "dephasing", "gainloss"],
                   default="none")
    p.add_argument("--gamma", type=float)
    p.add_argument("--t-ref", dest="t_ref", type=float, default=1400.0)
    p.add_argument("--beta", type=float)


def _add_integrator_args(p):
    p.add_argument("--method", choices=["rk", "magnus"])
    p.add_argument("--rtol", type=float)
    p.add_argument("--grid-points", dest="grid_points", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dqanneal",
        description="Diabatic quantum annealing benchmark harness")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("instance", help="build and serialize an instance")
    _add_common(p)
    _add_instance_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_instance)

    p = sub.add_parser("spectrum", help="gap or level trace along a schedule")
    _add_common(p)
    _add_instance_args(p)
    _add_protocol_args(p)
    p.add_argument("--levels", type=int)
    p.add_argument("--grid-points", dest="grid_points", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectrum, T=1.0)

    p = sub.add_parser("evolve", help="integrate one trajectory to CSV")
    _add_common(p)
    _add_instance_args(p)
    _add_protocol_args(p)
    _add_dissipator_args(p)
    _add_integrator_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("sweep", help="final infidelity vs total duration")
    _add_common(p)
    _add_protocol_args(p)
    _add_dissipator_args(p)
    _add_integrator_args(p)
    p.add_argument("--sizes", type=int, nargs="+", required=True)
    p.add_argument("--t-grid", dest="t_grid", required=True,
                   help="comma-separated total durations")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optimize-sqs", help="quench-parameter grid search")
    _add_common(p)
    _add_instance_args(p)
    _add_dissipator_args(p)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--b-q-grid", dest="b_q_grid")
    p.add_argument("--tau-q-grid", dest="tau_q_grid")
    p.add_argument("--dt-q-grid", dest="dt_q_grid")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_optimize_sqs)

    p = sub.add_parser("optimize-jxx", help="catalyst strength optimization")
    _add_common(p)
    _add_instance_args(p)
    p.add_argument("--j-min", dest="j_min", type=float, default=0.5)
    p.add_argument("--j-max", dest="j_max", type=float, default=4.0)
    p.add_argument("--resolution", type=int, default=32)
    p.add_argument("--grid-points", dest="grid_points", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_optimize_jxx)

    p = sub.add_parser("fit", help="saturation fit of a sweep CSV")
    _add_common(p)
    p.add_argument("--infile", required=True)
    p.add_argument("--start", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("reproduce", help="canned desk-scale study bundles")
    _add_common(p)
    p.add_argument("--study", required=True,
                   choices=["fig3", "fig4", "fig5", "fig6", "fig7", "fig8",
                            "appB"])
    p.add_argument("--sizes", type=int, nargs="+")
    p.add_argument("--t-grid", dest="t_grid")
    p.add_argument("--grid-points", dest="grid_points", type=int)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_reproduce)
    return ap


def _apply_config_file(ap_sub, args, argv):
    """Fill unset options from the TOML file; explicit flags win."""
    if not getattr(args, "config", None):
        return args
    with open(args.config, "rb") as fh:
        table = tomllib.load(fh)
    flat = {}
    for key, val in table.items():
        if isinstance(val, dict):
            flat.update(val)
        else:
            flat[key] = val
    given = {a.lstrip("-").replace("-", "_").split("=")[0] for a in argv
             if a.startswith("--")}
    for key, val in flat.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ValueError(f"unknown config key {key!r}")
        if attr not in given:
            setattr(args, attr, val)
    return args


def run(argv=None) -> int:
    ap = build_parser()
    try:
        try:
            args = ap.parse_args(argv)
        except SystemExit as exc:
            return EXIT_OK if exc.code in (0, None) else EXIT_VALIDATION
        args = _apply_config_file(ap, args, argv or sys.argv[1:])
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (IntegrationError, FitError, NoAdmissibleCatalystError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
