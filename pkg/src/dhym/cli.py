"""Command-line front end.

Exit-code contract: 0 success, 1 mathematical refusal or failure, 2 usage
error.  Numeric-heavy inputs ride in a single JSON config file; a few scalar
flags (--theta, --ell, --seed) override it.  All file outputs are UTF-8 text
with floats at 17 significant digits, so repeated runs are byte-identical.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import paths, pointwise, psatz, torus
from .errors import DomainError, MathFailure
from .phase import PhaseParams
from .symmetric import ConeSpec, upsilon_membership
from .util import fmt17


def _parse_vector(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok != ""]
    except ValueError:
        raise DomainError(f"malformed numeric vector: {text!r}")


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _load_config(path: str) -> dict:
    if not path:
        raise DomainError("a --config file is required")
    if not os.path.exists(path):
        raise DomainError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainError(f"config is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise DomainError("config must be a JSON object")
    return cfg


def _phase_from(cfg: dict, args) -> PhaseParams:
    theta = getattr(args, "theta", None)
    if theta is None:
        theta = cfg.get("theta_hat")
    n = cfg.get("dimension")
    if n is None or theta is None:
        raise DomainError("config needs 'dimension' and 'theta_hat'")
    return PhaseParams(n=int(n), theta_hat=float(theta))


def _torus_from(cfg: dict, phase: PhaseParams) -> torus.TorusProblem:
    tcfg = cfg.get("torus", {})
    if not isinstance(tcfg, dict):
        raise DomainError("'torus' must be a JSON object")
    modes = tuple((float(m[0]), tuple(int(k) for k in m[1]))
                  for m in tcfg.get("rho_modes", ()))
    return torus.TorusProblem(
        phase=phase,
        N=int(tcfg.get("N", 16)),
        base=tcfg.get("base"),
        rho_modes=modes,
        frozen=tcfg.get("frozen"),
        newton_tol=float(tcfg.get("newton_tol", 1e-9)),
        max_newton=int(tcfg.get("max_newton", 40)),
    )


def _omega_from(cfg: dict, phase: PhaseParams) -> paths.IntersectionNumbers:
    raw = cfg.get("intersection_numbers")
    if raw is not None:
        return paths.IntersectionNumbers(tuple(float(v) for v in raw))
    if "torus" in cfg:
        return torus.compute_intersection_numbers(_torus_from(cfg, phase))
    raise DomainError("config needs 'intersection_numbers' or a 'torus' block")


def _plan_from(cfg: dict, args, phase: PhaseParams):
    omega = _omega_from(cfg, phase)
    if phase.n == 3:
        return paths.plan_path_3(omega, phase), omega
    ell = getattr(args, "ell", None)
    if ell is None:
        ell = cfg.get("ell")
    if ell is None:
        ell = paths.ell_search(omega, phase).ell
    return paths.plan_path_4(omega, phase, float(ell)), omega


# ---------------------------------------------------------------------------
# Subcommand handlers.
# ---------------------------------------------------------------------------


def cmd_cone(args) -> int:
    lam = _parse_vector(args.lam)
    coeffs = _parse_vector(args.coeffs)
    if args.arity > len(lam):
        raise DomainError(f"arity {args.arity} exceeds tuple length {len(lam)}")
    cone = ConeSpec(arity=args.arity, coeffs=tuple(coeffs))
    res = upsilon_membership(lam, cone)
    _emit({"member": res.member, "margin": res.margin})
    return 0


def cmd_psatz(args) -> int:
    if args.psatz_cmd == "bound":
        _emit({"theta": psatz.theta_cd(args.c, args.d),
               "e_bound": psatz.e_lower_bound(args.c, args.d)})
        return 0
    if args.psatz_cmd == "roots":
        roots = psatz.cubic_roots(args.c, args.d)
        resid = [float(r**3 - 12 * args.c * r + 8 * args.d) for r in roots]
        _emit({"roots": [float(r) for r in roots], "residuals": resid})
        return 0
    res = psatz.containment_check(args.claim, args.c, args.d, e=args.e,
                                  n=args.n, samples=args.samples, seed=args.seed)
    _emit({
        "claim": res.claim,
        "passed": res.passed,
        "worst_margin": None if res.worst_margin != res.worst_margin else res.worst_margin,
        "witness": list(res.witness) if res.witness is not None else None,
        "accepted_samples": res.n_accepted,
    })
    return 0 if res.passed else 1


def _level_from_args(args, phase: PhaseParams) -> pointwise.LevelSpec:
    coeffs = tuple(_parse_vector(args.coeffs))
    want = 2 if phase.n == 3 else 3
    if len(coeffs) != want:
        raise DomainError(f"n={phase.n} takes {want} coefficients, got {len(coeffs)}")
    h = args.h if args.h is not None else phase.h_native
    return pointwise.LevelSpec(h=float(h), coeffs=coeffs)


def cmd_pointwise(args) -> int:
    phase = PhaseParams(n=args.n, theta_hat=args.theta)
    spec = _level_from_args(args, phase)
    if args.pointwise_cmd == "eval":
        lam = _parse_vector(args.lam)
        _emit({"value": pointwise.f_eval(lam, spec, phase), "h": spec.h})
        return 0
    if args.pointwise_cmd == "solve":
        rest = _parse_vector(args.rest)
        lam1 = pointwise.solve_lambda1(rest, spec, phase)
        _emit({"lambda1": lam1})
        return 0
    lam = _parse_vector(args.lam)
    report = pointwise.convexity_check(lam, spec, phase, n_tangents=args.tangents)
    _emit({
        "min_quadratic_form": report.min_quadratic_form,
        "discriminants": list(report.discriminants),
        "sign_consistent": report.sign_consistent,
    })
    return 0


def _write_plan_csv(path_spec, samples: int, out) -> None:
    t = np.linspace(0.0, 1.0, samples)
    c1 = np.broadcast_to(path_spec.c1(t), t.shape)
    c0 = np.broadcast_to(path_spec.c0(t), t.shape)
    c2 = (np.broadcast_to(path_spec.c2(t), t.shape)
          if path_spec.phase.n == 4 else None)
    topo = np.broadcast_to(path_spec.topological_residual(t), t.shape)
    ps = np.broadcast_to(path_spec.psatz_margin(t), t.shape)
    ups = np.min(np.vstack([np.broadcast_to(m, t.shape)
                            for m in path_spec.upsilon_margins(t)]), axis=0)
    out.write("t,c2,c1,c0,topological_residual,psatz_margin,upsilon_margins\n")
    for k in range(t.size):
        c2s = fmt17(c2[k]) if c2 is not None else ""
        out.write(",".join([fmt17(t[k]), c2s, fmt17(c1[k]), fmt17(c0[k]),
                            fmt17(topo[k]), fmt17(ps[k]), fmt17(ups[k])]) + "\n")


def cmd_path(args) -> int:
    cfg = _load_config(args.config)
    phase = _phase_from(cfg, args)
    if args.path_cmd == "ellsearch":
        if phase.n != 4:
            raise DomainError("ellsearch applies to dimension 4")
        omega = _omega_from(cfg, phase)
        cert = paths.ell_search(omega, phase)
        _emit({"ell": cert.ell, "min_margin": cert.min_margin,
               "c0_at_zero": cert.c0_at_zero, "schedule_index": cert.schedule_index})
        return 0
    if args.path_cmd == "region":
        omega = _omega_from(cfg, phase)
        if phase.n == 3:
            ok, margin = paths.region_test_3(omega, phase)
        else:
            plan, _ = _plan_from(cfg, args, phase)
            ok, margin = paths.region_test_4(omega, phase, plan.ell)
        _emit({"member": ok, "margin": margin})
        return 0 if ok else 1
    if args.path_cmd == "csubsweep":
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        if phase.n == 3:
            report = paths.csub_implies_region_3(phase, trials=args.trials, seed=seed)
            _emit({"total": report.total, "passed": report.passed,
                   "min_region_margin": report.min_region_margin})
            return 0 if report.all_pass else 1
        omegas = paths.sample_csub_omegas(phase, args.trials, seed=seed)
        passed = 0
        worst = float("inf")
        for om in omegas:
            cert = paths.ell_search(om, phase)
            ok, margin = paths.region_test_4(om, phase, cert.ell)
            rep = paths.check_constraints(paths.plan_path_4(om, phase, cert.ell))
            passed += bool(ok and rep.all_pass and cert.min_margin > 0)
            worst = min(worst, margin)
        _emit({"total": len(omegas), "passed": passed, "min_region_margin": worst})
        return 0 if passed == len(omegas) else 1
    # plan / check
    plan, omega = _plan_from(cfg, args, phase)
    if args.path_cmd == "plan":
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                _write_plan_csv(plan, args.samples, fh)
        else:
            _write_plan_csv(plan, args.samples, sys.stdout)
        return 0
    report = paths.check_constraints(plan, t_samples=args.samples)
    _emit({
        "topological_max": report.topological_max,
        "boundary_max_err": report.boundary_max_err,
        "psatz_min": report.psatz_min,
        "upsilon_mins": list(report.upsilon_mins),
        "all_pass": report.all_pass,
    })
    return 0 if report.all_pass else 1


def cmd_solve(args) -> int:
    cfg = _load_config(args.config)
    phase = _phase_from(cfg, args)
    problem = _torus_from(cfg, phase)
    plan, _ = _plan_from(cfg, args, phase)
    result = torus.continuity_solve(problem, plan, t_max=args.t_max)
    os.makedirs(args.out_dir, exist_ok=True)
    diag_path = os.path.join(args.out_dir, "diagnostics.csv")
    with open(diag_path, "w", encoding="utf-8") as fh:
        fh.write("t,newton_iters,final_residual,min_cone_margin,max_eigenvalue,osc_u\n")
        for row in result.rows:
            fh.write(",".join([fmt17(row.t), str(row.newton_iters),
                               fmt17(row.final_residual), fmt17(row.min_cone_margin),
                               fmt17(row.max_eigenvalue), fmt17(row.osc_u)]) + "\n")
    torus.save_field(os.path.join(args.out_dir, "field.txt"), result.field)
    payload = {"reached_t": result.reached_t, "completed": result.completed,
               "final_residual": result.rows[-1].final_residual if result.rows else None}
    if result.completed and args.t_max >= 1.0:
        payload["max_phase_error"] = torus.verify_phase(result.field, problem)
    _emit(payload)
    return 0 if result.completed else 1


# ---------------------------------------------------------------------------
# Parser wiring.
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dhym", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    cone = sub.add_parser("cone", help="Upsilon-cone membership of a tuple")
    cone.add_argument("--lambda", dest="lam", required=True,
                      help="comma-separated eigenvalues")
    cone.add_argument("--coeffs", required=True,
                      help="cone coefficients, highest order first")
    cone.add_argument("--arity", type=int, required=True)
    cone.set_defaults(func=cmd_cone)

    ps = sub.add_parser("psatz", help="sharp bounds and containment oracles")
    pssub = ps.add_subparsers(dest="psatz_cmd", required=True)
    for name in ("bound", "roots", "verify"):
        p = pssub.add_parser(name)
        p.add_argument("--c", type=float, required=True)
        p.add_argument("--d", type=float, default=0.0)
        if name == "verify":
            p.add_argument("--claim", required=True, choices=list("abcdef"))
            p.add_argument("--e", type=float, default=None)
            p.add_argument("--n", type=int, default=4, choices=(3, 4))
            p.add_argument("--samples", type=int, default=10000)
            p.add_argument("--seed", type=int, default=0)
        p.set_defaults(func=cmd_psatz)

    pw = sub.add_parser("pointwise", help="level-set evaluation and monitors")
    pwsub = pw.add_subparsers(dest="pointwise_cmd", required=True)
    for name in ("eval", "solve", "convexity"):
        p = pwsub.add_parser(name)
        p.add_argument("--n", type=int, required=True, choices=(3, 4))
        p.add_argument("--theta", type=float, required=True)
        p.add_argument("--coeffs", required=True,
                       help="path coefficients (c1,c0) or (c2,c1,c0)")
        p.add_argument("--h", type=float, default=None)
        if name == "solve":
            p.add_argument("--rest", required=True)
        else:
            p.add_argument("--lambda", dest="lam", required=True)
        if name == "convexity":
            p.add_argument("--tangents", type=int, default=16)
        p.set_defaults(func=cmd_pointwise)

    pa = sub.add_parser("path", help="continuity-path planning and regions")
    pasub = pa.add_subparsers(dest="path_cmd", required=True)
    for name in ("plan", "check", "region", "ellsearch", "csubsweep"):
        p = pasub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--theta", type=float, default=None)
        p.add_argument("--ell", type=float, default=None)
        if name in ("plan", "check"):
            p.add_argument("--samples", type=int, default=1000)
        if name == "plan":
            p.add_argument("--out", default=None)
        if name == "csubsweep":
            p.add_argument("--trials", type=int, default=1000)
            p.add_argument("--seed", type=int, default=None)
        p.set_defaults(func=cmd_path)

    so = sub.add_parser("solve", help="end-to-end continuity solve")
    sosub = so.add_subparsers(dest="solve_cmd", required=True)
    st = sosub.add_parser("torus")
    st.add_argument("--config", required=True)
    st.add_argument("--out-dir", required=True)
    st.add_argument("--theta", type=float, default=None)
    st.add_argument("--ell", type=float, default=None)
    st.add_argument("--t-max", dest="t_max", type=float, default=1.0)
    st.set_defaults(func=cmd_solve)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MathFailure as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
