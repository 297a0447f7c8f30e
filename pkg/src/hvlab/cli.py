"""Reproducible command-line front end.

Subcommands:
  leggett-scan   inequality bound vs quantum value over an angle range (CSV/JSON)
  verify-lemmas  purity, HS-conformality, basis-image and constancy verifiers
  nogo           convex-split feasibility trend for entangled vs mixed targets
  model-check    run all condition checkers against a declarative model file

All randomness is seeded through the config; identical config produces
byte-identical output files.  Numbers are formatted with 12 significant
digits (scientific below 1e-4).  Exit codes: 0 pass, 1 config/parse error,
2 I/O error, 3 check failure (report still written).
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .hvmodels import (
    basis_context,
    planted_contextual_joint_model,
    planted_signalling_model,
    rotated_context,
    run_all_checks,
    trivial_quantum_model,
)
from .influence import ic_projectors, verify_lemma1, verify_lemma3
from .leggett import (
    DirectionTriple,
    LeggettLambda,
    direction_context,
    fibonacci_sphere,
    leggett_bound,
    leggett_context_pairs,
    leggett_hv_model,
    max_lhs_lp,
    product_correlation,
    quantum_lhs,
    quantum_singlet_correlation,
    zero_correlation,
)
from .nogo import (
    basis_image_conditioning,
    perturbation_ladder_certificates,
    verify_constancy_chain,
)
from .states import PureState, is_maximally_entangled, max_entangled, singlet

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_CHECK = 3


def fmt_float(x: float) -> str:
    """Pinned number format: 12 significant digits, scientific below 1e-4."""
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError("refusing to format non-finite number")
    if x == 0:
        return "0"
    if abs(x) < 1e-4:
        return f"{x:.11e}"
    return f"{x:.12g}"


def _jsonable(obj):
    """Normalize a report tree: pinned float precision, no NaN/Inf, stable types."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(fmt_float(float(obj)))
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise _IOFailure(str(exc)) from exc


class _IOFailure(Exception):
    pass


def _json_doc(doc: dict) -> str:
    return json.dumps(_jsonable(doc), indent=2) + "\n"


# ---------------------------------------------------------------------------
# leggett-scan


def _phi_values(phi_min: float, phi_max: float, phi_step: float) -> list[float]:
    if phi_step <= 0:
        raise ValueError("phi step must be > 0")
    values = []
    k = 0
    while True:
        phi = phi_min + k * phi_step
        if phi > phi_max + 1e-12:
            break
        values.append(phi)
        k += 1
    if not values:
        raise ValueError("empty phi range")
    return values


def cmd_leggett_scan(args) -> int:
    if args.lp and (args.grid < 2 or args.grid % 2 != 0):
        print("error: --grid must be an even count >= 2", file=sys.stderr)
        return EXIT_CONFIG
    if not (0 < args.eta <= 1):
        print("error: --eta must lie in (0, 1]", file=sys.stderr)
        return EXIT_CONFIG
    config = {
        "command": "leggett-scan",
        "phi_min": args.phi_min,
        "phi_max": args.phi_max,
        "phi_step": args.phi_step,
        "lp": bool(args.lp),
        "grid": args.grid,
        "eta": args.eta,
        "seed": args.seed,
        "format": args.format,
    }
    try:
        phis = _phi_values(args.phi_min, args.phi_max, args.phi_step)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    rows = []
    for phi in phis:
        d = DirectionTriple.canonical(phi)
        q = quantum_lhs(d)
        bound = leggett_bound(phi)
        row = {
            "phi": phi,
            "quantum_lhs": q,
            "leggett_bound": bound,
            "violation": int(q > bound),
        }
        if args.lp:
            grid = fibonacci_sphere(args.grid, seed=args.seed)
            res = max_lhs_lp(d, grid, eta=args.eta)
            row["lp_value"] = res.value
            row["grid_points"] = res.grid_points
            row["slack"] = bound - res.value
        rows.append(row)

    if args.format == "csv":
        header = ["phi", "quantum_lhs", "leggett_bound", "violation"]
        if args.lp:
            header += ["lp_value", "grid_points", "slack"]
        lines = [",".join(header)]
        for row in rows:
            cells = [fmt_float(row["phi"]), fmt_float(row["quantum_lhs"]),
                     fmt_float(row["leggett_bound"]), str(row["violation"])]
            if args.lp:
                cells += [fmt_float(row["lp_value"]), str(row["grid_points"]),
                          fmt_float(row["slack"])]
            lines.append(",".join(cells))
        text = "\n".join(lines) + "\n"
    else:
        text = _json_doc({"config": config, "rows": rows})
    _write_text(args.out, text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify-lemmas


def _load_state_file(path: str) -> PureState:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    amp = np.array([complex(re, im) for re, im in doc["amplitudes"]])
    return PureState(int(doc["dim_a"]), int(doc["dim_b"]), amp)


def cmd_verify_lemmas(args) -> int:
    if args.samples < 1 or args.pairs < 1:
        print("error: sample counts must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if min(args.tol_lemma1, args.tol_lemma3, args.tol_constancy) <= 0:
        print("error: tolerances must be > 0", file=sys.stderr)
        return EXIT_CONFIG
    config = {
        "command": "verify-lemmas",
        "n": args.n,
        "seed": args.seed,
        "samples": args.samples,
        "pairs": args.pairs,
        "state": args.state,
        "tol_lemma1": args.tol_lemma1,
        "tol_lemma3": args.tol_lemma3,
        "tol_constancy": args.tol_constancy,
    }
    if args.state is not None:
        try:
            psi = _load_state_file(args.state)
        except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
            print(f"error: cannot load state file: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if psi.dim_a != psi.dim_b:
            print("error: verify-lemmas needs equal factor dimensions", file=sys.stderr)
            return EXIT_CONFIG
        n = psi.dim_a
    else:
        if args.n not in (2, 3, 4):
            print("error: n must be one of 2, 3, 4", file=sys.stderr)
            return EXIT_CONFIG
        n = args.n
        psi = max_entangled(n)

    results: dict = {}
    verdicts: dict = {}

    lemma1 = verify_lemma1(psi, samples=args.samples, seed=args.seed)
    results["lemma1"] = {
        "samples": lemma1.samples,
        "skipped": lemma1.skipped,
        "max_second_eigenvalue_ratio": lemma1.max_second_eigenvalue_ratio,
    }
    verdicts["lemma1"] = lemma1.max_second_eigenvalue_ratio <= args.tol_lemma1

    lemma3 = verify_lemma3(psi, pairs=args.pairs, seed=args.seed, tol=args.tol_lemma3)
    results["lemma3"] = {
        "is_hs_conformal": lemma3.is_hs_conformal,
        "factor": lemma3.factor,
        "max_deviation": lemma3.max_deviation,
        "pairs": lemma3.pairs,
    }
    verdicts["lemma3"] = lemma3.is_hs_conformal

    basis = ic_projectors(n)
    cond, spans = basis_image_conditioning(psi, basis)
    results["basis_image"] = {"gram_condition": cond, "is_basis": spans}
    verdicts["basis_image"] = spans

    maximal = is_maximally_entangled(psi)
    if maximal:
        chain = verify_constancy_chain(psi, psi.density(), basis, samples=50, seed=args.seed)
        results["constancy"] = {
            "mean_c": chain.mean_c,
            "max_c_deviation": chain.max_c_deviation,
            "max_residual": chain.max_residual,
            "hs_distance_to_scaled_state": chain.hs_distance_to_scaled_state,
        }
        verdicts["constancy"] = (
            chain.max_c_deviation <= args.tol_constancy
            and abs(chain.mean_c - 1) <= args.tol_constancy
        )
    else:
        results["constancy"] = {"skipped": "state not maximally entangled"}

    all_pass = all(verdicts.values())
    doc = {"config": config, "results": results, "verdicts": verdicts, "pass": all_pass}
    _write_text(args.out, _json_doc(doc))
    return EXIT_OK if all_pass else EXIT_CHECK


# ---------------------------------------------------------------------------
# nogo


def cmd_nogo(args) -> int:
    if args.n < 2:
        print("error: n must be >= 2", file=sys.stderr)
        return EXIT_CONFIG
    try:
        ladder = sorted(int(s) for s in args.samples.split(","))
    except ValueError:
        print(f"error: bad samples ladder {args.samples!r}", file=sys.stderr)
        return EXIT_CONFIG
    if not ladder or min(ladder) < args.n**4:
        print(f"error: every ladder rung must be >= n^4 = {args.n ** 4}", file=sys.stderr)
        return EXIT_CONFIG
    if not (0 < args.eta < 1):
        print("error: eta must be strictly inside (0, 1)", file=sys.stderr)
        return EXIT_CONFIG
    if args.seeds < 1:
        print("error: --seeds must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    config = {
        "command": "nogo",
        "n": args.n,
        "eta": args.eta,
        "samples": ladder,
        "seeds": args.seeds,
        "seed": args.seed,
    }
    seeds = [args.seed + k for k in range(args.seeds)]
    targets = {
        "max_entangled": max_entangled(args.n).density(),
        "maximally_mixed": np.eye(args.n**2, dtype=np.complex128) / args.n**2,
    }
    table = []
    certificates = []
    for name, rho in targets.items():
        per_seed = perturbation_ladder_certificates(rho, args.n, args.eta, ladder, seeds)
        for rung in ladder:
            for record in per_seed[rung]:
                certificates.append(
                    {
                        "state": name,
                        "n": args.n,
                        "eta": args.eta,
                        "N": rung,
                        "seed": record["seed"],
                        "t_max": record["t_max"],
                        "min_residual": record["min_residual"],
                    }
                )
            ts = [record["t_max"] for record in per_seed[rung]]
            table.append(
                {
                    "state": name,
                    "N": rung,
                    "median_t_max": float(np.median(ts)),
                    "min_t_max": float(np.min(ts)),
                    "max_t_max": float(np.max(ts)),
                }
            )
    doc = {"config": config, "table": table, "certificates": certificates}
    _write_text(args.out, _json_doc(doc))
    return EXIT_OK


# ---------------------------------------------------------------------------
# model-check


_CORRELATIONS = {
    "product": product_correlation,
    "quantum": quantum_singlet_correlation,
    "zero": zero_correlation,
}


def _trivial_contexts(n: int, per_side: int, seed: int):
    rng = np.random.default_rng(seed)
    if n == 2:
        # antipodal pairs share projector sets, keeping CPI comparisons non-vacuous
        dirs = [
            np.array([0.0, 0.0, 1.0]),
            np.array([0.0, 0.0, -1.0]),
            np.array([1.0, 0.0, 0.0]),
            np.array([-1.0, 0.0, 0.0]),
        ]
        take = min(max(per_side, 2), 4)
        ctx_a = [direction_context(dirs[k], f"A{k}") for k in range(take)]
        ctx_b = [direction_context(dirs[k], f"B{k}") for k in range(take)]
    else:
        base_a = basis_context(n, "A0")
        base_b = basis_context(n, "B0")
        ctx_a = [base_a] + [
            rotated_context(base_a, 0, rng, f"A{k}") for k in range(1, per_side)
        ]
        ctx_b = [base_b] + [
            rotated_context(base_b, 0, rng, f"B{k}") for k in range(1, per_side)
        ]
    return [(a, b) for a in ctx_a for b in ctx_b]


def _build_model(cfg: configparser.ConfigParser):
    fam = cfg.get("model", "family")
    seed = cfg.getint("model", "seed", fallback=0)
    if fam == "trivial":
        kind = cfg.get("state", "kind", fallback="max_entangled")
        n = cfg.getint("state", "n", fallback=3)
        if kind == "singlet":
            psi, n = singlet(), 2
        elif kind == "max_entangled":
            psi = max_entangled(n)
        else:
            raise ValueError(f"unknown state kind {kind!r}")
        per_side = cfg.getint("model", "contexts", fallback=2)
        model = trivial_quantum_model(psi.density(), (n, n))
        return model, _trivial_contexts(n, per_side, seed)
    if fam in ("leggett", "eta-leggett"):
        grid_n = cfg.getint("model", "grid", fallback=64)
        eta = 1.0 if fam == "leggett" else cfg.getfloat("model", "eta", fallback=0.5)
        corr_name = cfg.get("model", "correlation", fallback="product")
        if corr_name not in _CORRELATIONS:
            raise ValueError(f"unknown correlation {corr_name!r}")
        phi = cfg.getfloat("model", "phi", fallback=0.8)
        grid = fibonacci_sphere(grid_n, seed=seed)
        lambdas = [LeggettLambda(mu=m, nu=-m, eta=eta) for m in grid]
        weights = np.full(len(lambdas), 1 / len(lambdas))
        model = leggett_hv_model(lambdas, weights, _CORRELATIONS[corr_name])
        d = DirectionTriple.canonical(phi)
        return model, leggett_context_pairs(d)
    if fam == "planted-signalling":
        eps = cfg.getfloat("model", "epsilon", fallback=0.05)
        dim = cfg.getint("model", "dim", fallback=3)
        return planted_signalling_model(dim=dim, epsilon=eps, seed=seed)
    if fam == "planted-contextual-joint":
        eps = cfg.getfloat("model", "epsilon", fallback=0.02)
        dim = cfg.getint("model", "dim", fallback=3)
        return planted_contextual_joint_model(dim=dim, epsilon=eps, seed=seed)
    raise ValueError(f"unknown model family {fam!r}")


def _witness_json(witness, model):
    if witness is None:
        return None
    out = []
    for item in witness:
        if isinstance(item, (str, int, float, np.integer, np.floating)):
            out.append(item)
            continue
        # identity scan: hidden-variable labels may be unhashable dataclasses
        for k, lam in enumerate(model.lambdas):
            if lam is item:
                out.append(f"lambda[{k}]")
                break
        else:
            out.append(str(item))
    return out


def cmd_model_check(args) -> int:
    if args.tol <= 0 or args.cond_floor <= 0:
        print("error: tolerances must be > 0", file=sys.stderr)
        return EXIT_CONFIG
    cfg = configparser.ConfigParser()
    try:
        with open(args.model_file, encoding="utf-8") as fh:
            cfg.read_file(fh)
        model, ctx_pairs = _build_model(cfg)
    except (OSError, ValueError, KeyError, configparser.Error) as exc:
        print(f"error: cannot build model: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    config = {
        "command": "model-check",
        "model_file": args.model_file,
        "tol": args.tol,
        "cond_floor": args.cond_floor,
        "context_pairs": len(ctx_pairs),
    }
    reports = run_all_checks(model, ctx_pairs, tol=args.tol, cond_floor=args.cond_floor)
    # OI and TRIVIALITY classify the model (quantum statistics themselves
    # violate OI; non-triviality is the interesting case, not an error), so
    # they do not drive the exit code.
    diagnostics = {"OI", "TRIVIALITY"}
    results = {}
    failed = False
    for name, rep in reports.items():
        if isinstance(rep, Exception):
            results[name] = {"inconclusive": True, "reason": str(rep)}
            continue
        results[name] = {
            "violation": rep.violation,
            "passed": rep.passed,
            "inconclusive": rep.inconclusive,
            "diagnostic": name in diagnostics,
            "witness": _witness_json(rep.witness, model),
            "skipped": rep.skipped,
            "comparisons": rep.comparisons,
        }
        if not rep.passed and not rep.inconclusive and name not in diagnostics:
            failed = True
    doc = {"config": config, "results": results, "pass": not failed}
    _write_text(args.out, _json_doc(doc))
    return EXIT_CHECK if failed else EXIT_OK


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hvlab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"hvlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("leggett-scan", help="inequality bound vs quantum value over phi")
    scan.add_argument("--phi-min", type=float, default=0.0)
    scan.add_argument("--phi-max", type=float, default=float(np.pi))
    scan.add_argument("--phi-step", type=float, default=0.05)
    scan.add_argument("--lp", action="store_true", help="add the LP maximization column")
    scan.add_argument("--grid", type=int, default=128, help="sphere grid points for --lp")
    scan.add_argument("--eta", type=float, default=1.0)
    scan.add_argument("--seed", type=int, default=0)
    scan.add_argument("--format", choices=("csv", "json"), default="csv")
    scan.add_argument("--out", default=None)
    scan.set_defaults(func=cmd_leggett_scan)

    lemmas = sub.add_parser("verify-lemmas", help="run the map verifiers on a state")
    lemmas.add_argument("--n", type=int, default=3)
    lemmas.add_argument("--seed", type=int, default=0)
    lemmas.add_argument("--samples", type=int, default=1000)
    lemmas.add_argument("--pairs", type=int, default=500)
    lemmas.add_argument("--state", default=None, help="JSON state file instead of max_entangled(n)")
    lemmas.add_argument("--tol-lemma1", type=float, default=1e-10)
    lemmas.add_argument("--tol-lemma3", type=float, default=1e-8)
    lemmas.add_argument("--tol-constancy", type=float, default=1e-8)
    lemmas.add_argument("--out", default=None)
    lemmas.set_defaults(func=cmd_verify_lemmas)

    nogo = sub.add_parser("nogo", help="convex-split feasibility trend")
    nogo.add_argument("--n", type=int, default=3)
    nogo.add_argument("--eta", type=float, default=0.5)
    nogo.add_argument("--samples", default="200,1000,5000,20000", help="comma-separated ladder")
    nogo.add_argument("--seeds", type=int, default=32, help="number of seeds")
    nogo.add_argument("--seed", type=int, default=0, help="first seed")
    nogo.add_argument("--out", default=None)
    nogo.set_defaults(func=cmd_nogo)

    check = sub.add_parser("model-check", help="run condition checkers on a model file")
    check.add_argument("model_file")
    check.add_argument("--tol", type=float, default=1e-10)
    check.add_argument("--cond-floor", type=float, default=1e-8)
    check.add_argument("--out", default=None)
    check.set_defaults(func=cmd_model_check)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    start = time.monotonic()
    try:
        code = args.func(args)
    except _IOFailure as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{args.command}: finished in {time.monotonic() - start:.2f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
