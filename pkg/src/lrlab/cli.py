"""Command line front end.

Subcommands: check, constants, chains, bound, simulate, verify.  Each takes
--config (JSON, validated against the shipped schema), an optional --lambda
override for the decay rate, and --out for the artifact directory.  Exit
codes: 0 success, 1 a checked invariant or bound failed, 2 usage or config
errors.

Heavy imports are deferred until after LRLAB_THREADS has been translated
into the BLAS thread-count environment variables.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, parse_config
from .reporting import write_csv, write_json

_THREAD_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)


def _configure_threads() -> None:
    n = os.environ.get("LRLAB_THREADS")
    if not n:
        return
    for var in _THREAD_VARS:
        os.environ.setdefault(var, n)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lrlab",
        description="Lieb-Robinson bounds for commutator-bounded lattice models",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "check": "validate the model structure (intra-family commutation)",
        "constants": "extract bound constants (K, Q, nu, R, rates)",
        "chains": "count operator chains and write the coefficient table",
        "bound": "evaluate bound curves on the time grid",
        "simulate": "exact Heisenberg commutator norms on the time grid",
        "verify": "simulate, bound, and compare with margins",
    }
    for name, help_text in helps.items():
        s = sub.add_parser(name, help=help_text)
        s.add_argument("--config", required=True, type=Path, help="JSON run config")
        s.add_argument(
            "--lambda",
            dest="lam",
            type=float,
            default=None,
            help="override the decay rate lambda",
        )
        s.add_argument(
            "--out", type=Path, default=Path("out"), help="artifact directory"
        )
    return parser


def _build_model(cfg: RunConfig):
    from . import models

    m = cfg.model
    if m.name == "tfim":
        return models.build_tfim(m.length, j=m.j, g=m.g)
    if m.name == "commuting_ising":
        return models.build_commuting_ising(m.length, j=m.j)
    return models.build_dicke_chain(m.length, h=m.h, truncation=m.truncation)


def _pauli(name: str):
    from . import models

    return {"X": models.PAULI_X, "Y": models.PAULI_Y, "Z": models.PAULI_Z}[name]


def _observables(cfg: RunConfig, model):
    from .lattice import observable_from_sites

    o = cfg.observables

    def one(site: int, pauli: str, key: str):
        if site >= model.graph.site_count:
            raise ConfigError(
                f"config invalid at 'observables.{key}': site {site} outside "
                f"model with {model.graph.site_count} sites"
            )
        if model.site_dims[site] != 2:
            raise ConfigError(
                f"config invalid at 'observables.{key}': Pauli observables "
                f"need a 2-dimensional site, site {site} has dimension "
                f"{model.site_dims[site]}"
            )
        return observable_from_sites(
            model, (site,), _pauli(pauli), label=f"{pauli}@{site}"
        )

    op = one(o.op_site, o.op_pauli, "op_site")
    oq_sites = o.oq_sites or (model.graph.site_count - 1,)
    oqs = [one(s, o.oq_pauli, "oq_sites") for s in oq_sites]
    return op, oqs


def _matching_term_scale(model, obs):
    """Global id and scale for a term equal to `obs.payload` up to a factor.

    The series route bounds commutators of Hamiltonian terms, so the
    observable must coincide with one (up to scale) for it to apply.
    """
    import numpy as np

    for gid, term in enumerate(model.terms):
        if term.support.sites != obs.support.sites:
            continue
        t_scale = float(np.abs(term.payload).max())
        o_scale = float(np.abs(obs.payload).max())
        if t_scale == 0.0 or o_scale == 0.0:
            continue
        alpha = o_scale / t_scale
        if np.allclose(obs.payload, alpha * term.payload, atol=1e-12):
            return gid, alpha
    return None, None


def _fallback_start(model, obs):
    for gid, term in enumerate(model.terms):
        if set(obs.support.sites) <= set(term.support.sites):
            return gid
    raise ConfigError(
        f"config invalid at 'observables.op_site': no Hamiltonian term "
        f"touches sites {obs.support.sites}"
    )


def _effective_lambda(cfg: RunConfig, args) -> float | None:
    return args.lam if args.lam is not None else cfg.lam


def _cmd_check(cfg: RunConfig, args) -> int:
    from .lattice import validate_two_family

    model = _build_model(cfg)
    report = validate_two_family(model)
    print(
        f"{model.name}: {len(model.family0)} family-0 terms, "
        f"{len(model.family1)} family-1 terms, dim {model.hilbert_dim}"
    )
    if report.passed:
        print("structure OK")
        return 0
    for line in report.failures:
        print(f"FAIL {line}")
    return 1


def _cmd_constants(cfg: RunConfig, args) -> int:
    from .lattice import compute_bound_constants

    model = _build_model(cfg)
    consts = compute_bound_constants(
        model, lam=_effective_lambda(cfg, args), projected=cfg.projected
    )
    out = _ensure_out(args)
    write_json(out / "constants.json", consts.as_dict())
    for key, val in sorted(consts.as_dict().items()):
        print(f"{key} = {val}")
    return 0


def _chain_setup(cfg: RunConfig, args, model):
    from .lattice import compute_bound_constants, noncommuting_adjacency, region

    adj = noncommuting_adjacency(model, projected=cfg.projected)
    consts = compute_bound_constants(
        model,
        lam=_effective_lambda(cfg, args),
        projected=cfg.projected,
        adjacency=adj,
    )
    op, oqs = _observables(cfg, model)
    start, _ = _matching_term_scale(model, op)
    if start is None:
        start = _fallback_start(model, op)
    target = region(model.graph, [s for oq in oqs for s in oq.support.sites])
    return adj, consts, start, target


def _cmd_chains(cfg: RunConfig, args) -> int:
    from .chains import closed_form_chain_bound, count_chains_dp

    model = _build_model(cfg)
    adj, consts, start, target = _chain_setup(cfg, args, model)
    table = count_chains_dp(adj, start, target, cfg.chain_order)
    out = _ensure_out(args)
    d0 = _min_dist(model, adj, start, target)
    rows = [
        (n, table.counts[n], closed_form_chain_bound(consts, n, d0))
        for n in range(cfg.chain_order + 1)
    ]
    write_csv(out / "chains.csv", ("n", "c_n", "closed_form"), rows)
    write_json(
        out / "chains.json",
        {
            "start": start,
            "target_sites": list(target.sites),
            "n_max": cfg.chain_order,
            "counts": {str(n): table.counts[n] for n in table.counts},
            "collapsed": {str(n): table.collapsed[n] for n in table.collapsed},
        },
    )
    total = sum(table.counts.values())
    print(f"start term {start}, target sites {target.sites}")
    print(f"orders 0..{cfg.chain_order}: {total} chains")
    return 0


def _min_dist(model, adj, start, target) -> int:
    from .lattice import region_distance

    return region_distance(model.graph, adj.supports[start], target)


def _bound_functions(cfg: RunConfig, model, consts, op, oqs):
    """Per-method (t, d) -> bound callables for the configured observables."""
    from .bounds import (
        bounded_reference_bound,
        closed_form_bound,
        observable_bound,
        series_bound,
    )
    from .chains import count_chains_dp
    from .lattice import (
        noncommuting_adjacency,
        observable_conditions,
        region_distance,
    )
    from .operators import spectral_norm

    lam = consts.lam
    fns = {}
    seps = {
        region_distance(model.graph, op.support, oq.support): oq for oq in oqs
    }

    if "closed_form" in cfg.methods:
        fns["closed_form"] = lambda t, d: closed_form_bound(consts, t, d, lam=lam)

    if "series_exact_cn" in cfg.methods:
        start, alpha_p = _matching_term_scale(model, op)
        if start is None:
            raise ConfigError(
                "method 'series_exact_cn' needs O_P to match a Hamiltonian "
                "term up to scale"
            )
        from .bounds import series_terms_needed

        t_max = max(abs(t) for t in cfg.time_grid.times())
        n_max = max(cfg.chain_order, series_terms_needed(consts, t_max, cfg.series_tol))
        adj = noncommuting_adjacency(model, projected=cfg.projected)
        tables = {}
        scales = {}
        for d, oq in seps.items():
            tgt, alpha_q = _matching_term_scale(model, oq)
            if tgt is None:
                raise ConfigError(
                    "method 'series_exact_cn' needs O_Q to match a "
                    "Hamiltonian term up to scale"
                )
            tables[d] = count_chains_dp(adj, start, oq.support, n_max)
            scales[d] = abs(alpha_p) * abs(alpha_q)

        def series_fn(t, d):
            return scales[d] * series_bound(
                consts, tables[d], t, tol=cfg.series_tol
            )

        fns["series_exact_cn"] = series_fn

    if "observable" in cfg.methods or "bounded_reference" in cfg.methods:
        conds = {}
        for d, oq in seps.items():
            if d <= consts.R:
                continue
            conds[d] = observable_conditions(
                model, op, oq, consts=consts, projected=cfg.projected
            )
        if "observable" in cfg.methods:
            fns["observable"] = lambda t, d: observable_bound(
                consts, conds[d], t, lam=lam
            )
        if "bounded_reference" in cfg.methods:
            op_norm = spectral_norm(op.payload)
            oq_norms = {
                d: spectral_norm(oq.payload) for d, oq in seps.items()
            }
            fns["bounded_reference"] = lambda t, d: bounded_reference_bound(
                consts, op_norm, oq_norms[d], conds[d].n_P, t, d, lam=lam
            )
    return fns


def _cmd_bound(cfg: RunConfig, args) -> int:
    from .lattice import compute_bound_constants, region_distance

    model = _build_model(cfg)
    consts = compute_bound_constants(
        model, lam=_effective_lambda(cfg, args), projected=cfg.projected
    )
    op, oqs = _observables(cfg, model)
    fns = _bound_functions(cfg, model, consts, op, oqs)
    times = cfg.time_grid.times()
    rows = []
    for method in sorted(fns):
        fn = fns[method]
        for oq in oqs:
            d = region_distance(model.graph, op.support, oq.support)
            if method in ("observable", "bounded_reference") and d <= consts.R:
                continue
            for t in times:
                rows.append((method, d, float(t), float(fn(t, d))))
    out = _ensure_out(args)
    write_csv(out / "bounds.csv", ("method", "d", "t", "value"), rows)
    write_json(out / "constants.json", consts.as_dict())
    print(f"wrote {len(rows)} bound values for methods {sorted(fns)}")
    return 0


def _run_sweep(cfg: RunConfig, model, op, oqs):
    from .dynamics import commutator_norm_sweep
    from .models import occupation_projector_diagonal

    projector = None
    if cfg.occupation_cap is not None:
        projector = occupation_projector_diagonal(model, cfg.occupation_cap)
    return commutator_norm_sweep(
        model, op, oqs, cfg.time_grid.times(), projector_diag=projector
    )


def _cmd_simulate(cfg: RunConfig, args) -> int:
    model = _build_model(cfg)
    op, oqs = _observables(cfg, model)
    sweep = _run_sweep(cfg, model, op, oqs)
    out = _ensure_out(args)
    write_csv(
        out / "simulation.csv",
        ("d", "t", "measured"),
        [(p.d, p.t, p.value) for p in sweep.points],
    )
    write_json(
        out / "meta.json",
        {
            "model": model.name,
            "hilbert_dim": sweep.hilbert_dim,
            "op": sweep.op_label,
            "oq": list(sweep.oq_labels),
            "separations": list(sweep.separations),
            "time_points": len(sweep.times),
            "occupation_cap": cfg.occupation_cap,
        },
    )
    print(
        f"swept {len(sweep.times)} times x {len(oqs)} observables "
        f"on dim {sweep.hilbert_dim}"
    )
    return 0


def _cmd_verify(cfg: RunConfig, args) -> int:
    from .bounds import lr_velocity
    from .dynamics import extract_velocity, verify_bound
    from .lattice import compute_bound_constants

    model = _build_model(cfg)
    consts = compute_bound_constants(
        model, lam=_effective_lambda(cfg, args), projected=cfg.projected
    )
    op, oqs = _observables(cfg, model)
    fns = _bound_functions(cfg, model, consts, op, oqs)
    sweep = _run_sweep(cfg, model, op, oqs)
    report = verify_bound(
        sweep,
        fns,
        min_separation=consts.R,
        slack=cfg.slack,
        bound_scale=cfg.bound_scale,
    )

    try:
        vel = extract_velocity(sweep, threshold=cfg.threshold)
        velocity = {
            "v_emp": vel.v_emp,
            "v_lr": lr_velocity(consts),
            "intercept": vel.intercept,
            "residual": vel.residual,
            "threshold": vel.threshold,
            "crossings": [[d, t] for d, t in vel.crossings],
        }
    except ValueError as e:
        velocity = {"error": str(e), "v_lr": lr_velocity(consts)}

    out = _ensure_out(args)
    write_json(out / "constants.json", consts.as_dict())
    write_csv(
        out / "simulation.csv",
        ("d", "t", "measured"),
        [(p.d, p.t, p.value) for p in sweep.points],
    )
    write_csv(
        out / "verification.csv",
        ("method", "d", "t", "measured", "bound", "margin"),
        [(r.method, r.d, r.t, r.measured, r.bound, r.margin) for r in report.rows],
    )
    write_json(
        out / "verification.json",
        {
            "model": model.name,
            "passed": report.passed,
            "slack": report.slack,
            "bound_scale": cfg.bound_scale,
            "worst_margin": report.worst_margin(),
            "excluded_separations": list(report.excluded_separations),
            "methods": sorted(fns),
            "row_count": len(report.rows),
            "constants": consts.as_dict(),
            "velocity": velocity,
        },
    )
    for method in sorted(fns):
        margins = [r.margin for r in report.rows if r.method == method]
        worst = min(margins) if margins else float("inf")
        print(f"{method}: {len(margins)} points, worst margin {worst:.3e}")
    if report.excluded_separations:
        print(f"excluded separations d <= R: {list(report.excluded_separations)}")
    print("PASS" if report.passed else "FAIL")
    return 0 if report.passed else 1


def _ensure_out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


_COMMANDS = {
    "check": _cmd_check,
    "constants": _cmd_constants,
    "chains": _cmd_chains,
    "bound": _cmd_bound,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    _configure_threads()
    args = _build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
