"""Command-line interface: sweep, certify, sdp, shrink, verify.

Every subcommand reads optional defaults from a flat ``key = value`` config
file (``--config``); explicit flags win over config values.  Exit codes:
0 verified / success, 2 certificate failure, 3 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Sequence

from .analytic import (
    DecompositionCertificate,
    small_angle_best,
    transport_certificate,
    verify_decomposition,
    werner_mix_certificate,
    werner_mix_max_alpha,
)
from .errors import CertificateError, SolverError, ValidationError
from .measurements import icosahedron_family, shrinking_factor_estimate, shrinking_profile, table_eta
from .sdp import LhsSdpCertificate, certify_lhs, verify_certificate
from .sweep import SweepConfig, SweepResult, _reverify, emit, sweep

EXIT_OK = 0
EXIT_CERTIFICATE = 2
EXIT_USAGE = 3


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with code 3, not 2."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_config(path: str) -> dict[str, str]:
    """Flat key = value file; '#' starts a comment; keys match flag names."""
    values: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValidationError(
                        f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}"
                    )
                key, value = line.split("=", 1)
                values[key.strip().replace("-", "_")] = value.strip().strip('"')
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}") from exc
    return values


def _merge(args: argparse.Namespace, config: dict[str, str],
           key: str, default: Any, cast) -> Any:
    """Flag value if given, else config-file value, else the default."""
    flag_value = getattr(args, key, None)
    if flag_value is not None:
        return flag_value
    if key in config:
        try:
            return cast(config[key])
        except (TypeError, ValueError) as exc:
            raise ValidationError(
                f"config value {key} = {config[key]!r} is invalid: {exc}"
            ) from exc
    return default


def _parse_grid(text: str) -> tuple[float, ...] | int | float | None:
    text = text.strip()
    if text in ("", "default"):
        return None
    if "," in text:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    if "." in text or "e" in text.lower():
        return float(text)
    return int(text)


def _parse_regimes(text: str) -> tuple[str, ...]:
    return tuple(tok.strip() for tok in text.split(",") if tok.strip())


def _load_certificate_file(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read certificate file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "format" not in data:
        raise ValidationError(f"{path} has no 'format' tag")
    return data


def _write_json(path: str, payload: dict[str, Any]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _read_config(args.config) if args.config else {}
    cfg = SweepConfig(
        theta_s=_merge(args, config, "theta_s", 0.1, float),
        theta_l=_merge(args, config, "theta_l", 0.7365, float),
        grid=_merge(args, config, "grid", None, _parse_grid),
        p=_merge(args, config, "p", None, float),
        eta_source=_merge(args, config, "eta_source", "table", str),
        regimes=_merge(args, config, "regimes",
                       ("small-angle", "sdp", "werner-mix"), _parse_regimes),
        sdp_tol=_merge(args, config, "tol", 1e-8, float),
        threads=_merge(args, config, "threads", None, int),
    )
    result = sweep(cfg)
    out_prefix = _merge(args, config, "out_prefix", None, str)
    line = (f"alpha_c = {result.alpha_c:.8f}  "
            f"(certified: {'yes' if result.certified else 'no'}, "
            f"records: {len(result.records)}, "
            f"config {result.metadata['config_hash']})")
    print(line)
    for tech, value in sorted(result.technique_minima.items()):
        print(f"  min over {tech}: {value:.8f}")
    if out_prefix:
        paths = emit(result, out_prefix)
        for fmt, path in sorted(paths.items()):
            print(f"wrote {fmt}: {path}")
    return EXIT_OK


def _auto_certificate(alpha: float, theta: float):
    """Try the closed-form constructions from strongest to most specialized."""
    if theta > 0.0 and alpha <= werner_mix_max_alpha(theta):
        return werner_mix_certificate(alpha, theta)
    cert = small_angle_best(theta, alpha=alpha)
    if cert is not None:
        return cert
    raise CertificateError(
        f"no closed-form certificate found at alpha={alpha:g}, theta={theta:g}; "
        "supply --from-cert for a transport source or use the sdp subcommand"
    )


def _transport_source(path: str) -> tuple[float, float]:
    data = _load_certificate_file(path)
    fmt = data["format"]
    if fmt == "decomposition-certificate/1":
        cert = DecompositionCertificate.from_json(data)
        verify_decomposition(cert)
        return cert.target.alpha, cert.target.theta
    if fmt == "lhs-sdp-certificate/1":
        cert = LhsSdpCertificate.from_json(data)
        verify_certificate(
            cert, shrink_value=cert.metadata.get("shrink_value_configured"))
        return cert.q_star, cert.theta_f
    raise ValidationError(
        f"{path}: format {fmt!r} cannot serve as a transport source"
    )


def _cmd_certify(args: argparse.Namespace) -> int:
    config = _read_config(args.config) if args.config else {}
    alpha = _merge(args, config, "alpha", None, float)
    theta = _merge(args, config, "theta", None, float)
    if alpha is None or theta is None:
        raise ValidationError("certify requires --alpha and --theta")
    technique = _merge(args, config, "technique", "auto", str)
    from_cert = _merge(args, config, "from_cert", None, str)

    if technique == "auto":
        if from_cert:
            src_alpha, src_theta = _transport_source(from_cert)
            cert = transport_certificate(src_alpha, src_theta, alpha, theta)
        else:
            cert = _auto_certificate(alpha, theta)
    elif technique == "werner-mix":
        cert = werner_mix_certificate(alpha, theta)
    elif technique == "small-angle":
        cert = small_angle_best(theta, alpha=alpha)
        if cert is None:
            raise CertificateError(
                f"small-angle construction infeasible at alpha={alpha:g}, "
                f"theta={theta:g}"
            )
    elif technique == "transport":
        if not from_cert:
            raise ValidationError("--technique transport requires --from-cert")
        src_alpha, src_theta = _transport_source(from_cert)
        cert = transport_certificate(src_alpha, src_theta, alpha, theta)
    else:
        raise ValidationError(
            f"unknown technique {technique!r}: expected auto, small-angle, "
            "werner-mix, or transport"
        )

    verify_decomposition(cert)
    print(f"certified alpha={alpha:g} at theta={theta:g} "
          f"via {cert.technique} (q = {cert.q:.8f})")
    for name, value in sorted(cert.margins.items()):
        print(f"  margin {name}: {value:.3e}")
    out = _merge(args, config, "out", None, str)
    if out:
        _write_json(out, cert.to_json())
        print(f"wrote certificate: {out}")
    return EXIT_OK


def _cmd_sdp(args: argparse.Namespace) -> int:
    config = _read_config(args.config) if args.config else {}
    theta = _merge(args, config, "theta", None, float)
    if theta is None:
        raise ValidationError("sdp requires --theta")
    p = _merge(args, config, "p", 0.0, float)
    eta = _merge(args, config, "eta", None, float)
    tol = _merge(args, config, "tol", 1e-8, float)
    strict = bool(_merge(args, config, "strict_chi", False,
                         lambda s: s.lower() in ("1", "true", "yes")))
    cert = certify_lhs(theta, p=p, eta=eta, tol=tol, strict_chi=strict)
    print(f"q* = {cert.q_star:.8f} at theta={theta:g} "
          f"(eta = {cert.eta:g} [{cert.metadata['eta_source']}], p = {p:g}, "
          f"{cert.metadata['strategy_count']} strategies)")
    psd_names = ("sigma_psd", "remainder_psd", "remainder_pt_psd")
    worst = min((chk["value"], chk["name"]) for chk in
                cert.verification_report["checks"]
                if chk["name"] in psd_names)
    print(f"  worst PSD eigenvalue: {worst[0]:.3e} ({worst[1]})")
    out = _merge(args, config, "out", None, str)
    if out:
        _write_json(out, cert.to_json())
        print(f"wrote certificate: {out}")
    return EXIT_OK


def _cmd_shrink(args: argparse.Namespace) -> int:
    config = _read_config(args.config) if args.config else {}
    p_text = _merge(args, config, "p", "0.0", str)
    resolution = _merge(args, config, "resolution", 0.2, float)
    p_values = [float(tok) for tok in str(p_text).split(",") if tok.strip()]
    family = icosahedron_family()
    print(f"{'p':>5}  {'eta_lower':>10}  {'eta_upper':>10}  {'table':>6}")
    if len(p_values) == 1:
        lower, upper = shrinking_factor_estimate(
            family, p_values[0], net_resolution=resolution)
        rows = [{"p": p_values[0], "eta_lower_estimate": lower,
                 "eta_upper_bound": upper}]
    else:
        rows = shrinking_profile(family, p_values, net_resolution=resolution)
    for row in rows:
        ref = table_eta(row["p"]) if row["p"] <= 0.9 else float("nan")
        print(f"{row['p']:>5.2f}  {row['eta_lower_estimate']:>10.4f}  "
              f"{row['eta_upper_bound']:>10.4f}  {ref:>6.2f}")
    return EXIT_OK


def _verify_one(path: str) -> None:
    data = _load_certificate_file(path)
    fmt = data["format"]
    if fmt == "decomposition-certificate/1":
        verify_decomposition(DecompositionCertificate.from_json(data))
    elif fmt == "lhs-sdp-certificate/1":
        cert = LhsSdpCertificate.from_json(data)
        verify_certificate(
            cert, shrink_value=cert.metadata.get("shrink_value_configured"))
    elif fmt == "sweep-result/1":
        result = SweepResult.from_json(data)
        for rec in result.records:
            for cert in (rec.certificate, rec.gap_certificate):
                if cert is not None:
                    _reverify(cert)
        floors = [r.alpha_certified for r in result.records]
        if floors and abs(result.alpha_c - min(floors)) > 1e-12:
            raise CertificateError(
                f"alpha_c {result.alpha_c!r} does not equal the minimum "
                f"record floor {min(floors)!r}"
            )
    else:
        raise ValidationError(f"{path}: unknown format tag {fmt!r}")


def _cmd_verify(args: argparse.Namespace) -> int:
    failures = 0
    for path in args.files:
        try:
            _verify_one(path)
        except CertificateError as exc:
            failures += 1
            print(f"FAIL {path}: {exc}")
        else:
            print(f"PASS {path}")
    return EXIT_CERTIFICATE if failures else EXIT_OK


# ---------------------------------------------------------------------------
# parser wiring


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="lhscert",
        description=("Certified local-hidden-state models for filtered "
                     "two-qubit states"),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run the full certification sweep")
    p_sweep.add_argument("--config", help="key = value defaults file")
    p_sweep.add_argument("--grid",
                         type=_parse_grid,
                         help="'default', a point count, a max spacing, or a "
                              "comma-separated angle list")
    p_sweep.add_argument("--theta-s", dest="theta_s", type=float)
    p_sweep.add_argument("--theta-l", dest="theta_l", type=float)
    p_sweep.add_argument("--p", type=float,
                         help="fix the reference bias instead of searching")
    p_sweep.add_argument("--eta-source", dest="eta_source",
                         choices=("table", "computed"))
    p_sweep.add_argument("--regimes", type=_parse_regimes,
                         help="comma-separated subset of "
                              "small-angle,sdp,werner-mix")
    p_sweep.add_argument("--tol", type=float, help="SDP solver tolerance")
    p_sweep.add_argument("--threads", type=int)
    p_sweep.add_argument("--out-prefix", dest="out_prefix",
                         help="write <prefix>.csv and <prefix>.json")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_cert = sub.add_parser("certify",
                            help="closed-form certificate at (alpha, theta)")
    p_cert.add_argument("--config")
    p_cert.add_argument("--alpha", type=float)
    p_cert.add_argument("--theta", type=float)
    p_cert.add_argument("--technique",
                        choices=("auto", "small-angle", "werner-mix",
                                 "transport"))
    p_cert.add_argument("--from-cert", dest="from_cert",
                        help="certificate file used as a transport source")
    p_cert.add_argument("--out", help="write the certificate JSON here")
    p_cert.set_defaults(func=_cmd_certify)

    p_sdp = sub.add_parser("sdp", help="solve one steering SDP certificate")
    p_sdp.add_argument("--config")
    p_sdp.add_argument("--theta", type=float)
    p_sdp.add_argument("--eta", type=float,
                       help="override the shrinking value")
    p_sdp.add_argument("--p", type=float, help="reference-state bias")
    p_sdp.add_argument("--tol", type=float)
    p_sdp.add_argument("--strict-chi", dest="strict_chi", action="store_const",
                       const=True, help="require chi to be a density matrix")
    p_sdp.add_argument("--out", help="write the certificate JSON here")
    p_sdp.set_defaults(func=_cmd_sdp)

    p_shrink = sub.add_parser(
        "shrink", help="net-based shrinking-factor estimate vs the table")
    p_shrink.add_argument("--config")
    p_shrink.add_argument("--p", help="bias value or comma-separated list")
    p_shrink.add_argument("--resolution", type=float,
                          help="net resolution (default 0.2)")
    p_shrink.set_defaults(func=_cmd_shrink)

    p_verify = sub.add_parser(
        "verify", help="re-verify certificate or sweep-result files")
    p_verify.add_argument("files", nargs="+")
    p_verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CertificateError as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
