"""Command-line entry point: ``radial-barcodes {spectrum,certificate,bottleneck}``.

Exit codes: 0 success, 2 invalid input, 3 unresolved event (rule conflict),
4 internal invariant breach.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .barcodes import Bar, Barcode, DegreeMismatch, barcode_from_json_text, barcode_svg, bottleneck_distance
from .core import (INF, ManifoldParams, ParamsError, PLProfile, ProfileError, decimal_string, format_fraction,
                   to_fraction)
from .embedding import ParameterError, ScenarioError, Scenario, build_generators, parse_scenario
from .homotopy import CaseDataError, CaseMismatch
from .spectrum import spectrum_range, spectrum_to_json
from .tracker import AllZero, RuleConflict, boundary_depth_lower_bound

EXIT_OK, EXIT_INPUT, EXIT_RULE, EXIT_INTERNAL = 0, 2, 3, 4
INPUT_ERRORS = (ProfileError, ParamsError, ParameterError, ScenarioError, CaseMismatch, CaseDataError,
                DegreeMismatch, AllZero, ValueError, OSError, json.JSONDecodeError)


class InputError(Exception):
    pass


def load_schema(name: str) -> dict:
    """JSON Schema shipped for one output: ``spectrum``, ``certificate``, ``bottleneck`` or ``barcode``."""
    return json.loads(resources.files(__package__).joinpath("schemas", f"{name}.schema.json").read_text())


def parse_degrees(text: str) -> range:
    """``a..b`` (inclusive) or a single integer; ``a > b`` is an empty range."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            return range(int(a), int(b) + 1)
        d = int(text)
        return range(d, d + 1)
    except ValueError:
        raise InputError(f"bad degree range {text!r}; expected a..b") from None


def _params_from_flags(args, R: Fraction) -> ManifoldParams:
    if args.n is None or args.N is None:
        raise InputError("--n and --N are required")
    if args.R is not None and to_fraction(args.R) != R:
        raise InputError(f"--R {args.R} does not match the profile domain R = {format_fraction(R)}")
    gamma = to_fraction(args.gamma2pi)
    sign = args.lambda_sign if args.lambda_sign is not None else (1 if gamma else 0)
    ext = tuple(int(x) for x in args.exterior.split(","))
    return ManifoldParams(args.n, args.N, gamma, sign, R, ext)


def cmd_spectrum(args) -> int:
    prof = PLProfile.from_text(Path(args.profile).read_text())
    p = _params_from_flags(args, prof.R)
    actions = spectrum_range(prof, p, parse_degrees(args.degrees))
    print(spectrum_to_json(actions))
    return EXIT_OK


def _certify(scenario: Scenario, seed: Optional[int]) -> dict:
    fam = build_generators(scenario.params, scenario.epsilon, max(scenario.m, len(scenario.a)))
    res = boundary_depth_lower_bound(scenario.a, fam, scenario.params, scenario.epsilon,
                                     scenario.seed if seed is None else seed)
    cert = res.certificate
    out = cert.to_json()
    out["scenario"] = scenario.to_json()
    out["boundaryDepthBound"] = res.to_json()["bound"]
    out["generator"] = res.index + 1
    out["coefficient"] = format_fraction(res.coefficient)
    out["continuityCorrection"] = format_fraction(res.correction)
    out["frames"] = [{"leg": leg, "t": format_fraction(t), "left": format_fraction(lft), "right": format_fraction(rgt)}
                     for leg, t, lft, rgt in cert.frames]
    return out


def _certify_file(path: str, seed: Optional[int]) -> tuple[int, dict | str]:
    try:
        return EXIT_OK, _certify(parse_scenario(Path(path).read_text()), seed)
    except RuleConflict as exc:
        return EXIT_RULE, f"{path}: unresolved event: {exc.describe()}"
    except INPUT_ERRORS as exc:
        return EXIT_INPUT, f"{path}: invalid input: {exc}"
    except AssertionError as exc:
        return EXIT_INTERNAL, f"{path}: invariant breach: {exc}"


def _write_frames(result: dict, folder: Path, stem: str) -> None:
    folder.mkdir(parents=True, exist_ok=True)
    deg = result["trackedDegree"]
    for i, fr in enumerate(result["frames"]):
        left, right = to_fraction(fr["left"]), to_fraction(fr["right"])
        if left >= right:
            continue  # the bar is born with zero length
        bar = Bar(left, right)
        svg = barcode_svg(Barcode(deg, (bar,)), title=f"{fr['leg']} t={fr['t']}", highlight=bar)
        (folder / f"{stem}-{i:04d}.svg").write_text(svg)


def cmd_certificate(args) -> int:
    files = args.scenario
    if args.jobs > 1 and len(files) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_certify_file, files, [args.seed] * len(files)))
    else:
        results = [_certify_file(f, args.seed) for f in files]
    code = EXIT_OK
    payload = []
    for path, (rc, res) in zip(files, results):
        if rc != EXIT_OK:
            print(res, file=sys.stderr)
            code = max(code, rc)
            continue
        b = res["boundaryDepthBound"]
        print(f"{path}: case {res['case']}, branch {res['branch']}, boundary depth >= {b['symbolic']}"
              f" ~ {b['decimal']}", file=sys.stderr)
        if args.frames:
            _write_frames(res, Path(args.frames), Path(path).stem)
        payload.append(res)
    if payload:
        print(json.dumps(payload[0] if len(payload) == 1 else payload, indent=2))
    return code


def cmd_bottleneck(args) -> int:
    B = barcode_from_json_text(Path(args.a).read_text())
    C = barcode_from_json_text(Path(args.b).read_text())
    d = bottleneck_distance(B, C)
    if d == INF:
        print(json.dumps({"distance": "inf", "decimal": "inf"}))
    else:
        print(json.dumps({"distance": format_fraction(d), "decimal": decimal_string(d)}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="radial-barcodes", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="indexed action spectrum of a profile file")
    sp.add_argument("profile", help="profile text file: header R=p/q then 'r v' lines")
    sp.add_argument("--n", type=int)
    sp.add_argument("--N", type=int)
    sp.add_argument("--gamma2pi", default="0", help="rationality constant divided by 2*pi")
    sp.add_argument("--lambda-sign", type=int, choices=(-1, 0, 1))
    sp.add_argument("--R", help="optional check against the profile domain")
    sp.add_argument("--exterior", default="0", help="comma-separated exterior Morse indices")
    sp.add_argument("--degrees", default="-2..2", help="inclusive range a..b")
    sp.set_defaults(func=cmd_spectrum)

    cp = sub.add_parser("certificate", help="certify a bar and a boundary-depth bound for scenarios")
    cp.add_argument("scenario", nargs="+", help="key=value scenario files")
    cp.add_argument("--frames", help="directory for per-event SVG snapshots")
    cp.add_argument("--jobs", type=int, default=1)
    cp.add_argument("--seed", type=int, help="override the scenario's perturbation seed")
    cp.set_defaults(func=cmd_certificate)

    bp = sub.add_parser("bottleneck", help="exact bottleneck distance between two barcode files")
    bp.add_argument("a")
    bp.add_argument("b")
    bp.set_defaults(func=cmd_bottleneck)
    return ap


def _glue_negative_values(argv: list[str]) -> list[str]:
    # let "--degrees -2..2" through: argparse would read -2..2 as an option
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in ("--degrees", "--gamma2pi", "--R"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_glue_negative_values(argv))
    try:
        return args.func(args)
    except InputError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RuleConflict as exc:
        print(f"unresolved event: {exc.describe()}", file=sys.stderr)
        return EXIT_RULE
    except INPUT_ERRORS as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AssertionError as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
