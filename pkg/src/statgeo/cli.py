"""``statgeo`` command-line interface.

Exit status: 0 when every check passes, 1 when any check fails or its
hypotheses are not met, 2 for usage and model-construction errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import StatGeoError, StructureError, UsageError
from .immersion import (
    IMMERSIONS,
    build_immersion,
    check_equiaffine,
    codazzi_ricci_residuals,
    gauss_weingarten,
    immersion_hypotheses,
    immersion_samples,
    induce_structure,
    induced_definition_residual,
    lemma41_residuals,
    theorem42_check,
)
from .model_zoo import REGISTRY, build_model, parse_params, sample_points
from .report import Entry, ReportDocument, merge_rows, render_csv, render_table
from .statmanifold import (
    Tolerances,
    alpha_field,
    check_statistical,
    constant_curvature_fit,
    curvature,
    hessian_curvature_residual,
    interpolate_alpha_curvature,
    levi_civita_field,
)
from .tensor_core import frame_components, orthonormal_frame

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

DEFAULTS = {
    "model": None,
    "params": {},
    "alphas": None,
    "samples": 20,
    "seed": 0,
    "tol": {},
    "as_printed": False,
    "c": None,
    "format": "text",
    "output": None,
}
CURVATURE_ALPHAS = [0.0, 1.0, 2.0]
HESSIAN_ALPHAS = [-1.0, 0.0, 0.5, 2.0]
ANCHORS = (0.0, 1.0)


# ------------------------------------------------------------------ parsing


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _tol_arg(text: str) -> dict:
    try:
        return {k: float(v) for k, v in parse_params(text).items()}
    except (UsageError, TypeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _params_arg(text: str) -> dict:
    try:
        return parse_params(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="statgeo", description="Numeric checks for statistical-manifold geometry.")
    parser.add_argument("--version", action="version", version=f"statgeo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    lm = sub.add_parser("list-models", help="list built-in models and immersions")
    lm.add_argument("--json", action="store_true", help="machine-readable registry")

    def run_options(p, alphas=True):
        p.add_argument("--config", type=Path, help="TOML or JSON file with run settings")
        p.add_argument("--model", help="registry name")
        p.add_argument("--params", type=_params_arg, help="model parameters, k=v,...")
        if alphas:
            p.add_argument("--alphas", type=_float_list, help="comma-separated α values (use --alphas=-1,0 for negatives)")
        p.add_argument("--samples", type=int, help="random sample points in addition to the reference point")
        p.add_argument("--seed", type=int, help="RNG seed")
        p.add_argument("--tol", type=_tol_arg, help="tolerance overrides, e.g. curvature=1e-5,fd=1e-4")
        p.add_argument("--format", choices=("text", "json", "csv"), help="stdout format")
        p.add_argument("--output", type=Path, help="write the JSON report here")

    vc = sub.add_parser("verify-curvature", help="statistical check and constant-curvature fit per α")
    run_options(vc)
    vc.add_argument("--as-printed", action="store_true", default=None, help="use the uncorrected symbol tables (not statistical structures)")

    vh = sub.add_parser("verify-hessian", help="flatness, Hessian curvature and Levi-Civita curvature")
    run_options(vh)
    vh.add_argument("--c", type=float, help="Hessian curvature to test (default: the model's known value)")

    vi = sub.add_parser("verify-immersion", help="hypersurface decomposition and structure checks")
    run_options(vi, alphas=False)

    rp = sub.add_parser("report", help="merge report files into one table")
    rp.add_argument("paths", nargs="+", type=Path)
    rp.add_argument("--format", choices=("text", "csv"), default="text")
    return parser


def load_config(path: Path) -> dict:
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text) if path.suffix == ".json" else tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"cannot parse config {path}: {exc}") from exc
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config keys {sorted(unknown)}")
    return data


def resolve_config(args) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(load_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if not cfg["model"]:
        raise UsageError("--model is required")
    if not isinstance(cfg["samples"], int) or cfg["samples"] < 1:
        raise UsageError("--samples must be a positive integer")
    if not isinstance(cfg["params"], dict):
        cfg["params"] = parse_params(str(cfg["params"]))
    if cfg["alphas"] is not None:
        cfg["alphas"] = [float(a) for a in cfg["alphas"]]
    cfg["output"] = str(cfg["output"]) if cfg["output"] else None
    return cfg


# -------------------------------------------------------------- subcommands


def cmd_list_models(as_json: bool) -> str:
    models = {
        name: {"kind": "model", "params": dict(e.params), "description": e.description} for name, e in REGISTRY.items()
    }
    immersions = {
        name: {"kind": "immersion", "params": dict(defaults), "description": desc}
        for name, (_, defaults, desc) in IMMERSIONS.items()
    }
    if as_json:
        return json.dumps({"models": models, "immersions": immersions}, indent=2, ensure_ascii=False) + "\n"
    lines = ["models:"]
    for name, info in models.items():
        params = ", ".join(f"{k}={v}" for k, v in info["params"].items())
        lines.append(f"  {name} ({params}): {info['description']}")
    lines.append("immersions (verify-immersion --model):")
    for name, info in immersions.items():
        params = ", ".join(f"{k}={v}" for k, v in info["params"].items())
        lines.append(f"  {name} ({params}): {info['description']}")
    return "\n".join(lines) + "\n"


def _samples(model, cfg) -> list[np.ndarray]:
    pts = [] if model.reference_point is None else [np.asarray(model.reference_point, dtype=float)]
    return pts + sample_points(model.sample_box, cfg["samples"], cfg["seed"])


def _alpha_model(name, params, alpha, as_printed=False):
    """∇^(α) for a registry model: closed-form where the family provides it."""
    if "alpha" in REGISTRY[name].params:
        return build_model(name, as_printed=as_printed, **{**params, "alpha": alpha})
    base = build_model(name, as_printed=as_printed, **params)
    if alpha == 1:
        return base
    return base.with_connection(alpha_field(base, alpha), label=f"{base.label}:alpha={alpha:g}")


def _worst_point(check):
    row = max(check.per_point, key=lambda r: max(r["torsion"], r["codazzi"], r["cubic_asymmetry"]))
    return row


def _statistical_entry(name, model, samples, tol, alpha=None) -> Entry:
    chk = check_statistical(model, samples, tol.statistical)
    residual = max(chk.torsion, chk.codazzi, chk.cubic_asymmetry)
    first = chk.per_point[0]
    return Entry(
        check="statistical",
        model=name,
        alpha=alpha,
        residual=residual,
        tolerance=tol.statistical,
        verdict="pass" if chk.passed else "fail",
        details={
            "torsion": chk.torsion,
            "codazzi_symmetry": chk.codazzi,
            "cubic_asymmetry": chk.cubic_asymmetry,
            "first_point": first["point"],
            "first_point_codazzi_symmetry": first["codazzi"],
            "worst_point": _worst_point(chk)["point"],
        },
    )


def _fit_entry(check, name, fit, alpha=None, expected=None, exp_tol=None) -> Entry:
    ok = fit.verdict == "constant"
    details = {"max_curvature_component": fit.max_norm, "fit_verdict": fit.verdict}
    if expected is not None:
        details["expected"] = expected
        details["expected_error"] = abs(fit.k_hat - expected)
        ok = ok and abs(fit.k_hat - expected) <= exp_tol
    return Entry(
        check=check,
        model=name,
        alpha=alpha,
        k_hat=fit.k_hat,
        residual=fit.max_residual,
        tolerance=fit.tolerance,
        verdict="pass" if ok else "fail",
        details=details,
    )


def cmd_verify_curvature(cfg, tol: Tolerances) -> list[Entry]:
    name, params = cfg["model"], cfg["params"]
    alphas = cfg["alphas"] if cfg["alphas"] is not None else CURVATURE_ALPHAS
    base = build_model(name, as_printed=cfg["as_printed"], **params)
    samples = _samples(base, cfg)
    entries = []
    fits = {}
    for alpha in sorted(set(alphas) | set(ANCHORS)):
        model = _alpha_model(name, params, alpha, cfg["as_printed"])
        stat = _statistical_entry(name, model, samples, tol, alpha)
        if alpha in alphas:
            entries.append(stat)
        if base.dim >= 2 and stat.passed:
            fits[alpha] = constant_curvature_fit(model, None, samples, tol.curvature)
    for alpha in alphas:
        if alpha not in fits:
            continue
        entries.append(_fit_entry("constant_curvature", name, fits[alpha], alpha))
        if all(a in fits for a in ANCHORS) and alpha not in ANCHORS:
            k0, k1 = fits[0.0].k_hat, fits[1.0].k_hat
            predicted = interpolate_alpha_curvature(k0, k1, 0.0, 1.0, alpha)
            err = abs(fits[alpha].k_hat - predicted)
            entries.append(
                Entry(
                    check="alpha_interpolation",
                    model=name,
                    alpha=alpha,
                    k_hat=fits[alpha].k_hat,
                    residual=err,
                    tolerance=tol.fd,
                    verdict="pass" if err <= tol.fd else "fail",
                    details={"predicted": predicted, "anchor_k": [k0, k1]},
                )
            )
    return entries


def cmd_verify_hessian(cfg, tol: Tolerances) -> list[Entry]:
    name = cfg["model"]
    model = build_model(name, **cfg["params"])
    c = cfg["c"] if cfg["c"] is not None else model.known.get("hessian_curvature")
    if c is None:
        raise UsageError(f"{name} has no known Hessian curvature; pass --c")
    samples = _samples(model, cfg)
    alphas = cfg["alphas"] if cfg["alphas"] is not None else HESSIAN_ALPHAS
    flat = 0.0
    for p in samples:
        R = curvature(model.connection, p, model.scheme, model.domain)
        flat = max(flat, float(np.abs(frame_components(R, orthonormal_frame(model.g(p)), 1)).max()))
    entries = [
        Entry(
            check="flatness",
            model=name,
            residual=flat,
            tolerance=tol.flatness,
            verdict="pass" if flat <= tol.flatness else "fail",
            details={"max_curvature_component": flat},
        )
    ]
    if flat > tol.flatness:
        return entries
    try:
        res = hessian_curvature_residual(model, samples, c, tol)
        first = hessian_curvature_residual(model, samples[:1], c, tol)
    except StructureError as exc:
        raise UsageError(str(exc)) from exc
    entries.append(
        Entry(
            check="hessian_curvature",
            model=name,
            residual=res,
            tolerance=tol.hessian,
            verdict="pass" if res < tol.hessian else "fail",
            details={"c": c, "first_point": samples[0].tolist(), "first_point_residual": first},
        )
    )
    if model.dim >= 2:
        lc = constant_curvature_fit(model, levi_civita_field(model), samples, tol.curvature)
        entries.append(_fit_entry("levi_civita_curvature", name, lc, expected=-c / 4, exp_tol=tol.fd))
        for alpha in alphas:
            conn = alpha_field(model, alpha)
            fit = constant_curvature_fit(model, conn, samples, tol.curvature)
            entries.append(_fit_entry("constant_curvature", name, fit, alpha))
    return entries


def _theorem_entry(name, report) -> Entry:
    residual = max(report.residuals.values()) if report.residuals else None
    tolerance = min(report.tolerances.values()) if report.tolerances else None
    return Entry(
        check=report.name,
        model=name,
        residual=residual,
        tolerance=tolerance,
        verdict=report.verdict,
        details=report.as_dict(),
    )


def cmd_verify_immersion(cfg, tol: Tolerances) -> list[Entry]:
    name = cfg["model"]
    if name not in IMMERSIONS:
        raise UsageError(f"unknown immersion {name!r}; choose from {sorted(IMMERSIONS)}")
    f = build_immersion(name, **cfg["params"])
    samples = immersion_samples(f, cfg["samples"], cfg["seed"])
    entries = []

    induced = induce_structure(f)
    stat = _statistical_entry(name, induced, samples, tol)
    stat.check = "induced_statistical"
    entries.append(stat)
    definition = max(induced_definition_residual(f, p) for p in samples)
    entries.append(
        Entry(
            check="induced_definition",
            model=name,
            residual=definition,
            tolerance=tol.statistical,
            verdict="pass" if definition < tol.statistical else "fail",
        )
    )

    worst = {"reconstruction": 0.0, "conjugacy": 0.0, "normal_unit": 0.0, "normal_orthogonal": 0.0}
    for p in samples:
        d = gauss_weingarten(f, p)
        gt = f.ambient.g(f.image(p))
        J = f.jac(p)
        worst["reconstruction"] = max(worst["reconstruction"], d.reconstruction)
        worst["conjugacy"] = max(worst["conjugacy"], d.conjugacy_residual())
        worst["normal_unit"] = max(worst["normal_unit"], abs(d.xi @ gt @ d.xi - 1))
        worst["normal_orthogonal"] = max(worst["normal_orthogonal"], float(np.abs(J.T @ gt @ d.xi).max()))
    limits = {"reconstruction": tol.statistical, "conjugacy": tol.analytic, "normal_unit": 1e-10, "normal_orthogonal": 1e-10}
    d0 = gauss_weingarten(f, samples[0]).in_frame()
    entries.append(
        Entry(
            check="gauss_weingarten",
            model=name,
            residual=max(worst.values()),
            tolerance=min(limits.values()),
            verdict="pass" if all(worst[k] < limits[k] for k in worst) else "fail",
            details={"residuals": worst, "tolerances": limits, "first_point_frame": d0},
        )
    )

    c_tilde = f.known.get("c_tilde")
    hyp = immersion_hypotheses(f, samples, tol, c_tilde)
    entries.append(
        Entry(
            check="ambient_curvature",
            model=name,
            k_hat=hyp["ambient_k"],
            residual=hyp["ambient_k_residual"],
            tolerance=tol.curvature,
            verdict="pass" if hyp["ambient_k_residual"] <= tol.curvature else "fail",
            details={"levi_civita_k": hyp["ambient_k_lc"], "levi_civita_residual": hyp["ambient_k_lc_residual"]},
        )
    )
    entries.append(_theorem_entry(name, check_equiaffine(f, samples, tol)))
    entries.append(_theorem_entry(name, codazzi_ricci_residuals(f, samples, c_tilde, tol)))
    if c_tilde:
        k = hyp["induced_k"]
        if hyp["trivial_constant"] and hyp.get("ambient_hessian"):
            entries.append(_theorem_entry(name, lemma41_residuals(f, samples, k, c_tilde, tol)))
            entries.append(_theorem_entry(name, theorem42_check(f, samples, k, c_tilde, tol)))
        else:
            for check in ("shape_operators", "riemannian_shape_operator"):
                entries.append(Entry(check=check, model=name, verdict="hypotheses_not_met", details={"hypotheses": hyp}))
    return entries


COMMANDS = {
    "verify-curvature": cmd_verify_curvature,
    "verify-hessian": cmd_verify_hessian,
    "verify-immersion": cmd_verify_immersion,
}


def _emit(doc: ReportDocument, fmt: str) -> str:
    if fmt == "json":
        return doc.to_json() + "\n"
    rows = merge_rows([doc])
    if fmt == "csv":
        return render_csv(rows)
    text = render_table(rows, doc.verdict)
    notes = [
        f"{e.check}{'' if e.alpha is None else f' (alpha={e.alpha:g})'}: first point {e.details['first_point']} "
        f"symmetry residual {e.details['first_point_codazzi_symmetry']:.6g}"
        for e in doc.entries
        if e.check == "statistical" and not e.passed
    ]
    return text + "".join(n + "\n" for n in notes)


def cmd_report(paths, fmt: str) -> tuple[str, str]:
    docs = []
    for path in paths:
        try:
            docs.append(ReportDocument.from_json(Path(path).read_text()))
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc}") from exc
    rows = merge_rows(docs)
    verdict = "pass" if docs and all(d.verdict == "pass" for d in docs) else "fail"
    return (render_csv(rows) if fmt == "csv" else render_table(rows, verdict)), verdict


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list-models":
            sys.stdout.write(cmd_list_models(args.json))
            return 0
        if args.command == "report":
            text, verdict = cmd_report(args.paths, args.format)
            sys.stdout.write(text)
            return 0 if verdict == "pass" else 1
        cfg = resolve_config(args)
        tol = Tolerances().replace(**cfg["tol"])
        entries = COMMANDS[args.command](cfg, tol)
    except (StatGeoError, ValueError) as exc:
        print(f"statgeo: error: {exc}", file=sys.stderr)
        return 2
    doc = ReportDocument(
        version=__version__,
        command=args.command,
        config={k: cfg[k] for k in DEFAULTS if k not in ("format", "output")},
        tolerances=tol.as_dict(),
        seed=cfg["seed"],
        entries=entries,
    )
    if cfg["output"]:
        Path(cfg["output"]).write_text(doc.to_json() + "\n")
    sys.stdout.write(_emit(doc, cfg["format"]))
    return 0 if doc.verdict == "pass" else 1


if __name__ == "__main__":
    sys.exit(main())
