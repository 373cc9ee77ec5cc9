"""``densecode`` command line: run experiments, emit JSON reports or CSV sweeps.

Reports carry no timestamps or host data, so identical config and seed give
byte-identical output at any ``--jobs`` level.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict

import numpy as np

from . import __version__
from .bounds import (
    BoundInputs,
    rsp_cbit_lower_bound,
    rsp_cbit_lower_bound_sharp,
    rsp_ebit_lower_bound,
    sdc_qubit_lower_bound,
    sdc_sum_lower_bound,
)
from .concentration import ConcentrationConfig, cyclic_decomposition_check, sample_entropy_deficits
from .idcodes import (
    DC_FORMULA,
    NET_GRANULARITY,
    a_side_support_invariance,
    build_id_code,
    id_code_via_sdc,
    sample_id_errors,
)
from .memoryless import BlockProtocolConfig, SourceEnsemble, TypicalParams, run_block_protocol
from .protocol import (
    plan_resources,
    run_trials,
    search_coupling_unitary,
    summarize_trials,
    to_remote_state_preparation,
)
from .sampling import Seed, haar_isometry, haar_state
from .states import PureState, maximally_entangled

SCHEMA = "densecode.report/1"

BOUNDS_COLUMNS = ["d_S", "lambda_max", "F", "rsp_cbits", "rsp_cbits_sharp", "rsp_ebits",
                  "sdc_qubits", "sdc_qubits_plus_ebits", "sdc_qubits_vacuous",
                  "sdc_sum_vacuous", "error"]
PROTOCOL_SWEEP_COLUMNS = ["padding_bits", "d_A2", "d_B", "qubits", "ebits", "probe_min_entropy",
                          "mean_fidelity", "min_fidelity", "mean_fidelity_before_projection",
                          "error"]


class CliError(Exception):
    def __init__(self, message, code=1, kind="ValidationError"):
        super().__init__(message)
        self.code = code
        self.kind = kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message, code=2, kind="UsageError")


@contextmanager
def mapper(jobs: int):
    """Order-preserving map, in-process or over ``jobs`` worker processes."""
    if jobs <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        yield lambda fn, it: ex.map(fn, list(it), chunksize=1)


def _clean(x):
    """Make a value JSON-safe and deterministic."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    return x


def make_report(experiment: str, config: dict, records, summary: dict) -> dict:
    return {"schema": SCHEMA, "library_version": __version__, "experiment": experiment,
            "config": config, "records": records, "summary": summary}


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow({k: _clean(row.get(k, "")) for k in columns})
    return buf.getvalue()


def _floats(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in str(text).split(",") if x.strip()]


# -- experiments -------------------------------------------------------------

def run_concentration(args, jobs=1) -> dict:
    cfg = ConcentrationConfig(r=args.r, d_A=args.d_a, d_B=args.d_b, alpha=args.alpha,
                              trials=args.trials, seed=args.seed, bound_form=args.bound_form)
    with mapper(jobs) as m:
        rep = sample_entropy_deficits(cfg, map_fn=m)
    d = rep.to_dict()
    if args.cyclic:
        d["summary"]["cyclic_reconstruction_error"] = {
            str(r): cyclic_decomposition_check(r, (args.cyclic_dim, args.cyclic_dim),
                                               Seed(args.seed).child(9, r))
            for r in _ints(args.cyclic)}
    return make_report("concentration", d["config"], d["records"], d["summary"])


def _protocol_point(args, padding_bits, d_A2, d_B, jobs):
    plan = plan_resources(args.d_s, args.lambda_max, args.kappa, d_A2=d_A2, d_B=d_B,
                          padding_bits=padding_bits)
    root = Seed(args.seed)
    with mapper(jobs) as m:
        U = search_coupling_unitary(plan, args.candidates, args.probes, root, map_fn=m)
        transcripts = run_trials(plan, U, args.trials, root, map_fn=m)
    return plan, U, transcripts


def run_protocol_experiment(args, jobs=1) -> dict:
    plan, U, transcripts = _protocol_point(args, args.padding_bits, args.d_a2, args.d_b_fixed, jobs)
    records = []
    for i, t in enumerate(transcripts):
        rec = {"trial": i, **t.to_dict(), "bounds": t.bound_check()}
        if args.rsp:
            r = to_remote_state_preparation(t)
            rec["rsp_ledger"] = asdict(r.ledger)
            rec["rsp_bounds"] = r.bound_check()
        records.append(rec)
    summary = summarize_trials(transcripts)
    summary["coupling"] = U.meta()
    summary["search_guarantee"] = "statistical (Monte-Carlo probes), not a covering net"
    summary["input_sampler"] = "Haar state on (A1, S), Schmidt spectrum water-filled to lambda_max"
    config = {"d_S": args.d_s, "lambda_max": args.lambda_max, "kappa": args.kappa,
              "padding_bits": args.padding_bits, "d_A2": args.d_a2, "d_B": args.d_b_fixed,
              "candidates": args.candidates, "probes": args.probes, "trials": args.trials,
              "seed": args.seed, "rsp": args.rsp}
    return make_report("protocol", config, records, {"plan": plan.to_dict(), **summary})


def protocol_sweep_rows(args, paddings, jobs=1) -> list[dict]:
    rows = []
    for pad in paddings:
        row = {"padding_bits": pad}
        try:
            plan, U, tr = _protocol_point(args, pad, None, None, jobs)
            s = summarize_trials(tr)
            row.update(d_A2=plan.d_A2, d_B=plan.d_B, qubits=plan.qubits, ebits=plan.ebits,
                       probe_min_entropy=U.probe_min_entropy, mean_fidelity=s["mean_fidelity"],
                       min_fidelity=s["min_fidelity"],
                       mean_fidelity_before_projection=s["mean_fidelity_before_projection"])
        except (ValueError, ArithmeticError) as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def bounds_rows(d_S_values, lambda_values, F_values) -> list[dict]:
    rows = []
    for d_S in d_S_values:
        for lam in lambda_values:
            for F in F_values:
                row = {"d_S": d_S, "lambda_max": lam, "F": F}
                try:
                    inp = BoundInputs(int(d_S), lam, F)
                    q, s = sdc_qubit_lower_bound(inp), sdc_sum_lower_bound(inp)
                    row.update(rsp_cbits=rsp_cbit_lower_bound(inp).value,
                               rsp_cbits_sharp=rsp_cbit_lower_bound_sharp(inp).value,
                               rsp_ebits=rsp_ebit_lower_bound(inp).value,
                               sdc_qubits=q.value, sdc_qubits_plus_ebits=s.value,
                               sdc_qubits_vacuous=q.vacuous, sdc_sum_vacuous=s.vacuous)
                except ValueError as exc:
                    row["error"] = f"{type(exc).__name__}: {exc}"
                rows.append(row)
    return rows


def make_ensemble(kind: str, m: int, d_A1: int, d_S: int, probs, seed: Seed) -> SourceEnsemble:
    if kind == "classical":
        states = [PureState(np.kron([1, 0], np.eye(2)[i]), (2, 2)) for i in range(2)]
        return SourceEnsemble(states, [0.5, 0.5])
    if kind == "bell":
        return SourceEnsemble([maximally_entangled(2)], [1.0])
    if kind == "random":
        states = [haar_state((d_A1, d_S), seed.child(5, i)) for i in range(m)]
        p = np.asarray(probs if probs else [1.0 / m] * m, dtype=float)
        return SourceEnsemble(states, p / p.sum())
    raise CliError(f"unknown ensemble {kind!r}")


def run_memoryless(args, jobs=1) -> dict:
    root = Seed(args.seed)
    ens = make_ensemble(args.ensemble, args.m, args.d_a1, args.d_s, _floats(args.probs or ""), root)
    if args.delta is not None:
        params = TypicalParams(args.n, args.delta, args.epsilon)
    else:
        params = TypicalParams.from_epsilon(args.n, args.epsilon, ens.m, ens.d_S)
    blocks = "all" if args.blocks == "all" else int(args.blocks)
    cfg = BlockProtocolConfig(kappa=args.kappa, candidates=args.candidates, probes=args.probes,
                              padding_bits=args.padding_bits, blocks=blocks)
    with mapper(jobs) as m:
        rep = run_block_protocol(ens, params, cfg, root, map_fn=m)
    config = {**rep["config"], "ensemble": args.ensemble, "seed": args.seed}
    return make_report("memoryless", config, rep["records"], rep["summary"])


def _idcode_pair(args):
    code, k, seed, sdc = args
    phi = PureState(haar_isometry(code.d_C, 1, seed.child(6, k))[:, 0], (code.d_C,))
    psi = PureState(haar_isometry(code.d_C, 1, seed.child(7, k))[:, 0], (code.d_C,))
    if sdc is None:
        return {"pair": k, "direct_error": None}
    plan, U = sdc
    return {"pair": k, **id_code_via_sdc(code, phi, plan, U, psi)}


def run_idcode(args, jobs=1) -> dict:
    root = Seed(args.seed)
    code = build_id_code(args.d, args.a, args.d_c, root, net_size=args.net_size)
    errs = sample_id_errors(code, args.trials, root.child(8))
    records = [{"pair": i, "direct_error": e} for i, e in enumerate(errs["errors"])]
    ledger = plan_resources(args.d, 1.0 / args.a, args.kappa, padding_bits=args.padding_bits)
    summary = {"d": args.d, "a": args.a, "d_C": args.d_c, "seed": args.seed,
               "max_error": errs["max_error"], "mean_error": errs["mean_error"],
               "ledger": {"qubits_leading": ledger.qubits_leading,
                          "ebits_leading": ledger.ebits_leading,
                          "qubits": ledger.qubits, "ebits": ledger.ebits},
               "net": "exact" if code.net is None else f"{args.net_size} sampled points",
               "net_granularity_recorded": NET_GRANULARITY, "d_C_formula": DC_FORMULA}
    if args.lambda_target is not None:
        summary["lambda_target"] = args.lambda_target
        summary["within_half_lambda"] = errs["max_error"] <= args.lambda_target / 2
    if args.sdc:
        plan = ledger
        with mapper(jobs) as m:
            U = search_coupling_unitary(plan, args.candidates, args.probes, root, map_fn=m)
            sdc = list(m(_idcode_pair, [(code, k, root, (plan, U)) for k in range(args.sdc)]))
        summary["sdc"] = {
            "plan": plan.table_row(),
            "ledger": sdc[0]["ledger"] if sdc else None,
            "max_end_to_end_error": max((r["end_to_end_error"] for r in sdc), default=0.0),
            "allowance_ok": all(r["end_to_end_error"] <= r["error_allowance"] + 1e-9 for r in sdc),
            "records": sdc,
        }
    if args.a < args.d:
        summary["a_side_support_deviation"] = a_side_support_invariance(args.d, args.a, root.child(10))
    config = {"d": args.d, "a": args.a, "d_C": args.d_c, "seed": args.seed,
              "pairs": args.trials, "net_size": args.net_size, "sdc": args.sdc,
              "kappa": args.kappa, "lambda_target": args.lambda_target}
    return make_report("idcode", config, records, summary)


# -- argument parsing --------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=100)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--config", default=None, help="JSON file of option defaults")

    p = _Parser(prog="densecode", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("concentration", parents=[common], help="entropy deficits of rotated projector states")
    c.add_argument("--r", type=int, default=1)
    c.add_argument("--d-a", type=int, default=64)
    c.add_argument("--d-b", type=int, default=8)
    c.add_argument("--alpha", type=float, default=0.5)
    c.add_argument("--bound-form", choices=["statement", "proof"], default="statement")
    c.add_argument("--cyclic", default="", help="comma list of ranks for the cyclic-shift check")
    c.add_argument("--cyclic-dim", type=int, default=3)

    q = sub.add_parser("protocol", parents=[common], help="simulate the one-shot protocol")
    q.add_argument("--d-s", type=int, required=True)
    q.add_argument("--lambda-max", type=float, required=True)
    q.add_argument("--kappa", type=float, default=0.5)
    q.add_argument("--d-a2", type=int, default=None)
    q.add_argument("--d-b", dest="d_b_fixed", type=int, default=None)
    q.add_argument("--padding-bits", type=float, default=0.0)
    q.add_argument("--candidates", type=int, default=20)
    q.add_argument("--probes", type=int, default=100)
    q.add_argument("--rsp", action="store_true", help="also report the teleported (RSP) ledger")
    q.add_argument("--sweep-padding", default=None,
                   help="comma list of padding bits; emits a CSV sweep instead of a report")

    mm = sub.add_parser("memoryless", parents=[common], help="typical-subspace block protocol")
    mm.add_argument("--ensemble", choices=["random", "classical", "bell"], default="random")
    mm.add_argument("--m", type=int, default=2)
    mm.add_argument("--d-a1", type=int, default=2)
    mm.add_argument("--d-s", type=int, default=2)
    mm.add_argument("--probs", default=None)
    mm.add_argument("--n", type=int, default=4)
    mm.add_argument("--epsilon", type=float, default=0.1)
    mm.add_argument("--delta", type=float, default=None)
    mm.add_argument("--blocks", default="all")
    mm.add_argument("--kappa", type=float, default=0.5)
    mm.add_argument("--candidates", type=int, default=4)
    mm.add_argument("--probes", type=int, default=20)
    mm.add_argument("--padding-bits", type=float, default=0.0)

    i = sub.add_parser("idcode", parents=[common], help="quantum identification codes")
    i.add_argument("--d", type=int, default=16)
    i.add_argument("--a", type=int, default=2)
    i.add_argument("--d-c", type=int, default=3)
    i.add_argument("--net-size", type=int, default=0)
    i.add_argument("--lambda-target", type=float, default=None,
                   help="compare the max error against lambda/2")
    i.add_argument("--sdc", type=int, default=0, help="number of pairs to run through the protocol")
    i.add_argument("--kappa", type=float, default=0.5)
    i.add_argument("--candidates", type=int, default=10)
    i.add_argument("--probes", type=int, default=50)
    i.add_argument("--padding-bits", type=float, default=0.0)

    b = sub.add_parser("bounds", parents=[common], help="CSV sweep of the lower bounds")
    b.add_argument("--d-s", default="16", help="comma list")
    b.add_argument("--lambda-max", default="0.25", help="comma list")
    b.add_argument("--F", dest="fidelity", default="0.5,0.6,0.7,0.8,0.9,1.0", help="comma list")
    return p


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                defaults = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config {args.config}: {exc}")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(defaults) - known
        if unknown:
            raise CliError(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)  # explicit flags win over file defaults
    return args


def execute(args) -> str:
    jobs = max(1, args.jobs)
    if args.command == "concentration":
        return dumps(run_concentration(args, jobs))
    if args.command == "protocol":
        if args.sweep_padding is not None:
            return write_csv(protocol_sweep_rows(args, _floats(args.sweep_padding), jobs),
                             PROTOCOL_SWEEP_COLUMNS)
        return dumps(run_protocol_experiment(args, jobs))
    if args.command == "memoryless":
        return dumps(run_memoryless(args, jobs))
    if args.command == "idcode":
        return dumps(run_idcode(args, jobs))
    if args.command == "bounds":
        return write_csv(bounds_rows(_ints(args.d_s), _floats(args.lambda_max),
                                     _floats(args.fidelity)), BOUNDS_COLUMNS)
    raise CliError(f"unknown experiment {args.command!r}", code=2)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
        text = execute(args)
    except CliError as exc:
        sys.stderr.write(json.dumps({"error": exc.kind, "message": str(exc)}) + "\n")
        return exc.code
    except (ValueError, ArithmeticError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
