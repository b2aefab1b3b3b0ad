"""Command-line front end.

Exit status: 0 on success, 1 when a verification step fails, 2 for bad input.
Every subcommand builds its output with a pure function of the parsed
arguments (``*_payload`` / :func:`build_example`) and then writes it, so the
files match a direct library call byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io
from .applications import (
    SYNDROMES,
    BinomialCodeSpec,
    CatCodeSpec,
    appendix_c_circuit,
    binomial_recovery_circuit,
    cat_generator,
    cat_state,
    corner_transpose_channel,
    init_channel,
    rank_table_csv,
    rank_vs_time,
    steady_channel,
)
from .channel_repr import DEFAULT_THRESHOLD, ChannelError, ChannelSpec, kraus_rank, validate_cptp
from .cqed_decomp import decompose_circuit, max_reconstruction_error
from .simulator import (
    apply_channel_exact,
    fidelity_to_pure,
    monte_carlo,
    path_distribution,
    run_instrument,
    run_povm,
)
from .tree_synthesis import AdaptiveCircuit, synthesize, verify_circuit

EXIT_OK, EXIT_VERIFY, EXIT_INPUT = 0, 1, 2
EXAMPLES = ("cat2", "cat4", "binomial", "corner", "init")
DEFAULT_TIMES = (0.0, 0.01, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 1000.0)


def _positive(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def _times(text: str) -> list[float]:
    try:
        ts = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not ts or any(t < 0 for t in ts):
        raise argparse.ArgumentTypeError("need a comma-separated list of non-negative times")
    return ts


def _with_threshold(spec: ChannelSpec, threshold: float) -> ChannelSpec:
    return ChannelSpec(spec.data, spec.label, threshold, spec.meta)


def _require_cptp(spec: ChannelSpec, skip: bool) -> None:
    if skip:
        return
    report = validate_cptp(spec)
    if not report.passed:
        raise ChannelError(f"input is not CPTP: {report.to_dict()}")


def convert_payload(spec: ChannelSpec, to: str, threshold: float = DEFAULT_THRESHOLD) -> str:
    return io.dumps(io.channel_to_json(_with_threshold(spec, threshold), to))


def synthesize_payload(spec: ChannelSpec, threshold: float = DEFAULT_THRESHOLD) -> tuple[str, str, bool]:
    """Circuit JSON, report JSON, and whether verification passed."""
    kraus = _with_threshold(spec, threshold).kraus
    circuit = synthesize(kraus)
    report = verify_circuit(circuit, kraus)
    rep = report.to_dict()
    rep["target_choi_distance"] = verify_circuit(circuit, spec, exact_leaves=False).choi_distance
    rep["kraus_rank"] = len(kraus)
    rep["depth"] = circuit.depth
    return io.dumps(io.circuit_to_json(circuit)), io.dumps(rep), report.passed


def decompose_payload(circuit: AdaptiveCircuit) -> tuple[str, float]:
    q = decompose_circuit(circuit)
    return io.dumps(io.cqed_to_json(q)), max_reconstruction_error(circuit, q)


def simulate_payload(
    circuit: AdaptiveCircuit,
    rho: np.ndarray,
    mode: str,
    *,
    trajectories: int = 1000,
    seed: int = 0,
    keep_bits: int = 0,
) -> dict[str, str]:
    """Files produced by ``simulate``, keyed by suffix."""
    if mode == "exact":
        out = apply_channel_exact(circuit, rho)
        return {"json": io.dumps({**io.state_to_json(out), "paths": path_distribution(circuit, rho)})}
    if mode == "trajectory":
        ens = monte_carlo(circuit, rho, trajectories, seed)
        exact = apply_channel_exact(circuit, rho)
        summary = {"seed": seed, **ens.summary(exact), **io.state_to_json(ens.state)}
        return {"json": io.dumps(summary), "jsonl": io.jsonl(r.to_dict() for r in ens.records)}
    if mode == "instrument":
        res = run_instrument(circuit, rho, keep_bits)
        outcomes = {mu: {"p": p, "rho": io.encode_matrix(s)} for mu, (p, s) in res.outcomes.items()}
        return {"json": io.dumps({"keep_bits": keep_bits, "outcomes": outcomes})}
    if mode == "povm":
        return {"json": io.dumps({"keep_bits": keep_bits, "probabilities": run_povm(circuit, rho, keep_bits)})}
    raise ChannelError(f"unknown mode {mode!r}")


def _csv(rows: Sequence[Sequence[object]]) -> str:
    buf = _io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _bundle_circuit(files: dict[str, str], prefix: str, kraus, target=None, exact: bool = True) -> bool:
    circuit = kraus if isinstance(kraus, AdaptiveCircuit) else synthesize(kraus)
    rep = verify_circuit(circuit, target if target is not None else kraus, exact_leaves=exact)
    q = decompose_circuit(circuit)
    files[f"{prefix}circuit.json"] = io.dumps(io.circuit_to_json(circuit))
    files[f"{prefix}cqed.json"] = io.dumps(io.cqed_to_json(q))
    report = rep.to_dict()
    report["cqed_reconstruction_error"] = max_reconstruction_error(circuit, q)
    report["cqed_degenerate_rounds"] = q.degenerate_labels
    files[f"{prefix}report.json"] = io.dumps(report)
    return rep.passed


def _cat_bundle(spec: CatCodeSpec, start: np.ndarray, args: argparse.Namespace) -> tuple[dict[str, str], bool]:
    files: dict[str, str] = {}
    rows = rank_vs_time(spec, args.times, args.threshold)
    files["rank_vs_time.csv"] = rank_table_csv(rows)
    steady = _with_threshold(steady_channel(cat_generator(spec)), args.threshold)
    files["steady_channel.json"] = io.dumps(io.channel_to_json(steady, "kraus"))
    files["steady_meta.json"] = io.dumps({**steady.meta, "tail_contained": spec.tail_contained})
    ok = _bundle_circuit(files, "", steady.kraus)
    circuit = io.circuit_from_json(json.loads(files["circuit.json"]))
    ens = monte_carlo(circuit, start, args.trajectories, args.seed)
    target = cat_state(spec.alphas, spec.dim)
    files["trajectories.jsonl"] = io.jsonl(r.to_dict(target) for r in ens.records)
    pops = [["trajectory", "bits"] + [f"p{n}" for n in range(spec.dim)]]
    for i, r in enumerate(ens.records):
        pops.append([i, r.outcome_bits] + [repr(float(x)) for x in np.real(np.diag(r.final_state))])
    files["fock_populations.csv"] = _csv(pops)
    files["ensemble.json"] = io.dumps({"seed": args.seed, **ens.summary(apply_channel_exact(circuit, start))})
    return files, ok


def _binomial_bundle(args: argparse.Namespace) -> tuple[dict[str, str], bool]:
    spec = BinomialCodeSpec(args.nc if args.nc is not None else 12)
    circuit = binomial_recovery_circuit(spec)
    files: dict[str, str] = {}
    ch = _with_threshold(circuit.channel(), args.threshold)
    files["recovery_channel.json"] = io.dumps(io.channel_to_json(ch, "kraus"))
    ok = _bundle_circuit(files, "", circuit, ch, exact=False)
    rng = np.random.default_rng(args.seed)
    rows = [["error", "expected_syndrome", "observed_syndromes", "min_fidelity"]]
    for name, err in spec.errors().items():
        worst, seen = 1.0, set()
        for _ in range(20):
            psi = spec.logical_state(*(rng.normal(size=2) + 1j * rng.normal(size=2)))
            phi = err @ psi
            rho = np.outer(phi, phi.conj()) / np.vdot(phi, phi).real
            worst = min(worst, fidelity_to_pure(apply_channel_exact(circuit, rho), psi))
            seen |= {b[:2] for b, p in path_distribution(circuit, rho).items() if p > 1e-12}
        ok = ok and worst >= 1 - 1e-8
        rows.append([name, SYNDROMES[name], " ".join(sorted(seen)), repr(worst)])
    files["fidelity.csv"] = _csv(rows)
    files["kraus_rank.json"] = io.dumps({"kraus_rank": kraus_rank(ch, args.threshold)})
    return files, ok


def _corner_bundle(args: argparse.Namespace) -> tuple[dict[str, str], bool]:
    ch = _with_threshold(corner_transpose_channel(3), args.threshold)
    files = {"channel.json": io.dumps(io.channel_to_json(ch, "superop"))}
    ok = _bundle_circuit(files, "synthesized_", ch.kraus)
    ok = _bundle_circuit(files, "hand_built_", appendix_c_circuit(), ch, exact=False) and ok
    w = np.linalg.eigvals(ch.superop.matrix)
    files["spectrum.json"] = io.dumps(
        {
            "determinant": [float(np.real(np.linalg.det(ch.superop.matrix))), float(np.imag(np.linalg.det(ch.superop.matrix)))],
            "superop_eigenvalues": sorted(float(x) for x in np.real(w)),
            "choi_eigenvalues": sorted(float(x) for x in ch.choi.spectrum()),
            "kraus_rank": kraus_rank(ch, args.threshold),
        }
    )
    return files, ok


def _init_bundle(args: argparse.Namespace) -> tuple[dict[str, str], bool]:
    if args.state:
        sigma = io.state_from_json(io.read_json(args.state))
    else:
        rng = np.random.default_rng(args.seed)
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        sigma = g @ g.conj().T
        sigma /= np.trace(sigma).real
    kraus = init_channel(sigma)
    ch = _with_threshold(ChannelSpec(kraus, label="init"), args.threshold)
    files = {"target_state.json": io.dumps(io.state_to_json(sigma)), "channel.json": io.dumps(io.channel_to_json(ch, "kraus"))}
    ok = _bundle_circuit(files, "", ch.kraus)
    return files, ok


def build_example(name: str, args: argparse.Namespace) -> tuple[dict[str, str], bool]:
    """Files of an example bundle (name -> text) and whether all checks passed."""
    if name in ("cat2", "cat4"):
        comps = 2 if name == "cat2" else 4
        alpha = args.alpha if args.alpha is not None else (1.1 if comps == 2 else 2.5)
        nc = args.nc if args.nc is not None else (14 if comps == 2 else 20)
        spec = CatCodeSpec.symmetric(alpha, comps, n_c=nc)
        start = np.zeros((spec.dim, spec.dim), dtype=complex)
        if comps == 2:
            start[0, 0] = 1.0
        else:
            v = np.zeros(spec.dim, dtype=complex)
            v[0] = v[2] = 1 / np.sqrt(2)
            start = np.outer(v, v.conj())
        return _cat_bundle(spec, start, args)
    if name == "binomial":
        return _binomial_bundle(args)
    if name == "corner":
        return _corner_bundle(args)
    if name == "init":
        return _init_bundle(args)
    raise ChannelError(f"unknown example {name!r}")


def _write(path: str | Path | None, text: str) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _cmd_convert(args) -> int:
    spec = io.channel_from_json(io.read_json(args.input))
    _require_cptp(spec, args.no_validate)
    _write(args.output, convert_payload(spec, args.to, args.threshold))
    return EXIT_OK


def _cmd_validate(args) -> int:
    spec = io.channel_from_json(io.read_json(args.input))
    report = validate_cptp(spec, args.tol)
    out = report.to_dict()
    out["kraus_rank"] = kraus_rank(spec, args.threshold) if report.is_cp else None
    _write(args.output, io.dumps(out))
    return EXIT_OK if report.passed else EXIT_VERIFY


def _cmd_synthesize(args) -> int:
    spec = io.channel_from_json(io.read_json(args.input))
    _require_cptp(spec, args.no_validate)
    circuit, report, ok = synthesize_payload(spec, args.threshold)
    _write(args.output, circuit)
    if args.report:
        _write(args.report, report)
    else:
        sys.stderr.write(report)
    return EXIT_OK if ok else EXIT_VERIFY


def _cmd_decompose(args) -> int:
    circuit = io.circuit_from_json(io.read_json(args.input))
    text, err = decompose_payload(circuit)
    _write(args.output, text)
    return EXIT_OK if err < 1e-9 else EXIT_VERIFY


def _cmd_simulate(args) -> int:
    circuit = io.circuit_from_json(io.read_json(args.circuit))
    rho = io.state_from_json(io.read_json(args.state))
    files = simulate_payload(
        circuit, rho, args.mode, trajectories=args.trajectories, seed=args.seed, keep_bits=args.keep_bits
    )
    _write(args.output, files["json"])
    if "jsonl" in files:
        log = args.log or (str(Path(args.output).with_suffix(".jsonl")) if args.output not in (None, "-") else None)
        if log:
            _write(log, files["jsonl"])
    return EXIT_OK


def _cmd_example(args) -> int:
    outdir = Path(args.outdir or f"example_{args.name}")
    files, ok = build_example(args.name, args)
    outdir.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (outdir / name).write_text(text)
    sys.stderr.write(f"wrote {len(files)} files to {outdir}\n")
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="channel-forge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, output=True):
        sp.add_argument("--threshold", type=_positive, default=DEFAULT_THRESHOLD, help="Choi eigenvalue cutoff")
        if output:
            sp.add_argument("-o", "--output", default="-", help="output file (default stdout)")

    sp = sub.add_parser("convert", help="change channel representation")
    sp.add_argument("input")
    sp.add_argument("--to", choices=("kraus", "superop", "choi"), required=True)
    sp.add_argument("--no-validate", action="store_true")
    common(sp)
    sp.set_defaults(func=_cmd_convert)

    sp = sub.add_parser("validate", help="check complete positivity and trace preservation")
    sp.add_argument("input")
    sp.add_argument("--tol", type=_positive, default=1e-9)
    common(sp)
    sp.set_defaults(func=_cmd_validate)

    sp = sub.add_parser("synthesize", help="compile a channel into an adaptive circuit")
    sp.add_argument("input")
    sp.add_argument("--report", help="verification report path (default stderr)")
    sp.add_argument("--no-validate", action="store_true")
    common(sp)
    sp.set_defaults(func=_cmd_synthesize)

    sp = sub.add_parser("decompose", help="factor circuit rounds into cQED gates")
    sp.add_argument("input")
    common(sp)
    sp.set_defaults(func=_cmd_decompose)

    sp = sub.add_parser("simulate", help="run a circuit on a state")
    sp.add_argument("circuit")
    sp.add_argument("state")
    sp.add_argument("--mode", choices=("exact", "trajectory", "instrument", "povm"), default="exact")
    sp.add_argument("--trajectories", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--keep-bits", type=int, default=0)
    sp.add_argument("--log", help="trajectory log path (default: output with .jsonl suffix)")
    common(sp)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("example", help="write a worked-example bundle")
    sp.add_argument("name", choices=EXAMPLES)
    sp.add_argument("--outdir")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--nc", type=int)
    sp.add_argument("--times", type=_times, default=list(DEFAULT_TIMES))
    sp.add_argument("--trajectories", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--state", help="target state JSON for 'init'")
    common(sp, output=False)
    sp.set_defaults(func=_cmd_example)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "trajectories", 1) < 1:
        parser.error("--trajectories must be at least 1")
    try:
        return args.func(args)
    except (ChannelError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
