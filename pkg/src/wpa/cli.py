"""Command-line front end.

Subcommands: report, region, criterion, fit, construct, verify.  Reports are
JSON, grids CSV, plots SVG; every number is printed with 12 significant
digits.  Exit codes: 0 pass, 1 fail, 2 invalid input.
"""
import argparse
import io
import json
import math
import sys
import warnings

import numpy as np

from . import acceptance
from .conformal import DiscMoebius, exterior_map
from .construction import lemma_construct
from .errors import ConfigurationError, DegeneracyError, DomainError, InfeasibleError, ScaleError
from .geometry import Arc, DomainSpec, RationalExponent, Segment, TangentDisc, k_alpha_mask, r_k_alpha
from .potential import alpha_k, alpha_threshold, m_k, pv_criterion, solynin_bound
from .weighted_approx import ComplexPolynomial, weighted_fit

DIGITS = 12
MAX_GRID = 2000

# documented defaults; a --config file overrides these, flags override the file
DEFAULTS = {
    "family": "segment",
    "x0": 3.0,
    "theta0": math.pi,
    "rho": None,
    "eps": 0.1,
    "alpha": None,
    "sigma": 1,
    "tau": 2,
    "grid": 200,
    "samples": None,
    "n": 8,
    "target": "1",
    "level": 0.85,
    "B": 10.0,
    "N": 5,
    "r": None,
    "out": None,
    "svg": None,
    "json": None,
    "only": None,
}


class InvalidConfig(Exception):
    pass


def _num(x):
    """Round floats to 12 significant digits; recurse through containers."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_num(float(x.real)), _num(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.{DIGITS}g}")
    if isinstance(x, dict):
        return {k: _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_num(v) for v in x]
    return x


def _fmt(x):
    return f"{float(x):.{DIGITS}g}"


def _dump(doc, path=None):
    text = json.dumps(_num(doc), indent=2) + "\n"
    _emit(text, path)


def _emit(text, path=None):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise InvalidConfig(f"cannot write {path}: {exc}") from exc


# -- configuration ----------------------------------------------------------

def _load_config(args):
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            raise InvalidConfig(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidConfig("config file must hold a JSON object")
        unknown = sorted(set(data) - set(DEFAULTS))
        if unknown:
            raise InvalidConfig(f"unknown config keys: {', '.join(unknown)}")
        cfg.update(data)
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


def _family(cfg):
    fam = cfg["family"]
    try:
        if fam == "disc":
            return TangentDisc(float(cfg["x0"]))
        if fam == "segment":
            return Segment(float(cfg["x0"]))
        if fam == "arc":
            return Arc(float(cfg["theta0"]))
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(str(exc)) from exc
    raise InvalidConfig(f"unknown family {fam!r}")


def _exponent(cfg):
    try:
        return RationalExponent(int(cfg["sigma"]), int(cfg["tau"]))
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(str(exc)) from exc


def _closed_or_numeric_m(family):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return m_k(family)


def _target(cfg):
    """Polynomial target from comma-separated ascending coefficients, e.g. '2,-1' for 2 - z."""
    text = str(cfg["target"])
    try:
        coeffs = [complex(c.strip().replace(" ", "")) for c in text.split(",")]
    except ValueError as exc:
        raise InvalidConfig(f"bad target {text!r}") from exc
    return ComplexPolynomial(np.array(coeffs))


# -- subcommands --------------------------------------------------------------

def cmd_report(cfg):
    family = _family(cfg)
    doc = {"family": family.kind}
    doc.update({k: cfg[k] for k in (("theta0",) if family.kind == "arc" else ("x0",))})
    doc["alpha_k_closed_form"] = alpha_k(family, "closed_form")
    doc["alpha_k_limit"] = alpha_k(family, "limit")
    if isinstance(family, TangentDisc):
        # the published disc value and the limit of the threshold disagree; show both
        doc["alpha_k_criterion_limit_exact"] = 1.0 / (2 * (family.x0 - 1))
    doc["m_k_closed_form"] = None if isinstance(family, Arc) else m_k(family, "closed_form")
    doc["m_k_numeric"] = m_k(family, "numeric")
    doc["solynin_bound_at_minus1"] = solynin_bound(family, -1.0)
    if isinstance(family, Arc):
        doc["dist_minus1_paper_formula"] = math.sqrt(max(1 + 2 * math.cos(family.theta0 / 2), 0.0))
    doc["dist_minus1_numeric"] = family.distance(-1.0)
    _dump(doc, cfg["out"])
    return 0


def region_grid(family, exp, grid):
    """Cell centres and K(alpha) membership on a grid x grid partition of the bounding box.

    A cell is a member when it contains a point of K(alpha): its centre, or a
    sample of K, or the point 1.  Sets without interior need the samples.
    """
    x0, x1, y0, y1 = family.bbox()
    dx, dy = (x1 - x0) / grid, (y1 - y0) / grid
    xs = x0 + dx * (np.arange(grid) + 0.5)
    ys = y0 + dy * (np.arange(grid) + 0.5)
    M = _closed_or_numeric_m(family)
    centres = xs[None, :] + 1j * ys[:, None]
    member = k_alpha_mask(family, exp, M, centres)
    wit = np.concatenate([family.samples(8 * grid), [1.0 + 0j]])
    wit = wit[k_alpha_mask(family, exp, M, wit)]
    # cells are closed: a witness on a shared edge marks both neighbours
    fx, fy = (wit.real - x0) / dx, (wit.imag - y0) / dy
    for sx in (-1e-9, 1e-9):
        for sy in (-1e-9, 1e-9):
            ix = np.clip(np.floor(fx + sx).astype(int), 0, grid - 1)
            iy = np.clip(np.floor(fy + sy).astype(int), 0, grid - 1)
            member[iy, ix] = True
    return xs, ys, member, (x0, x1, y0, y1)


def region_csv(xs, ys, member):
    buf = io.StringIO()
    buf.write("x,y,member\n")
    for j, y in enumerate(ys):
        fy = _fmt(y)
        row = member[j]
        for i, x in enumerate(xs):
            buf.write(f"{_fmt(x)},{fy},{int(row[i])}\n")
    return buf.getvalue()


def region_svg(xs, ys, member, box, size=600):
    x0, x1, y0, y1 = box
    scale = size / max(x1 - x0, y1 - y0)
    w, h = (x1 - x0) * scale, (y1 - y0) * scale
    cw, ch = (xs[1] - xs[0] if xs.size > 1 else x1 - x0) * scale, (ys[1] - ys[0] if ys.size > 1 else y1 - y0) * scale
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.3f}" height="{h:.3f}" '
           f'viewBox="0 0 {w:.3f} {h:.3f}">',
           f'<rect x="0" y="0" width="{w:.3f}" height="{h:.3f}" fill="white" stroke="black"/>']
    # one rectangle per horizontal run of member cells
    for j in range(ys.size):
        row = member[j]
        i = 0
        while i < xs.size:
            if not row[i]:
                i += 1
                continue
            k = i
            while k < xs.size and row[k]:
                k += 1
            top = h - (j + 1) * ch
            out.append(f'<rect x="{i * cw:.3f}" y="{top:.3f}" width="{(k - i) * cw:.3f}" '
                       f'height="{ch:.3f}" fill="steelblue"/>')
            i = k
    px, py = (1.0 - x0) * scale, h - (0.0 - y0) * scale
    out.append(f'<circle cx="{px:.3f}" cy="{py:.3f}" r="3" fill="red"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_region(cfg):
    family = _family(cfg)
    exp = _exponent(cfg)
    grid = int(cfg["grid"])
    if not 1 <= grid <= MAX_GRID:
        raise InvalidConfig(f"grid must be in [1, {MAX_GRID}]")
    xs, ys, member, box = region_grid(family, exp, grid)
    _emit(region_csv(xs, ys, member), cfg["out"])
    if cfg["svg"]:
        _emit(region_svg(xs, ys, member, box), cfg["svg"])
    return 0


def cmd_criterion(cfg):
    family = _family(cfg)
    if cfg["alpha"] is None:
        raise InvalidConfig("criterion needs --alpha")
    alpha = float(cfg["alpha"])
    m = int(cfg["samples"] or 256)
    if isinstance(family, TangentDisc):
        rho = cfg["rho"]
        if rho is None:
            raise InvalidConfig("disc criterion needs --rho")
        rho = float(rho)
        if not 0 < rho < family.x0:
            raise InvalidConfig("need 0 < rho < x0 so that 0 stays outside the disc")
        emap = DiscMoebius(family.x0, rho)
    else:
        emap = exterior_map(DomainSpec(family, float(cfg["eps"])))
    rep = pv_criterion(emap, alpha, m)
    doc = {"family": family.kind, "alpha": rep.alpha, "min_density": rep.min_density,
           "argmin_zeta": rep.argmin_zeta, "sample_count": rep.sample_count,
           "threshold": alpha_threshold(emap, m), "passed": rep.passed}
    _dump(doc, cfg["out"])
    return 0 if rep.passed else 1


def cmd_fit(cfg):
    family = _family(cfg)
    exp = _exponent(cfg)
    n = int(cfg["n"])
    m = int(cfg["samples"] or max(512, 4 * (n * exp.tau + 1)))
    fit = weighted_fit(family.samples(m), exp, n, _target(cfg))
    tol = float(cfg["eps"])
    doc = {"family": family.kind, "tolerance": tol}
    doc.update(fit.to_json())
    doc["passed"] = fit.sup_residual <= tol
    _dump(doc, cfg["out"])
    return 0 if doc["passed"] else 1


def cmd_construct(cfg):
    family = _family(cfg)
    exp = _exponent(cfg)
    M = _closed_or_numeric_m(family)
    rstar = r_k_alpha(family, exp, M)
    r = 0.9 * rstar if cfg["r"] is None else float(cfg["r"])
    level = float(cfg["level"])
    if not 0 < level < 1:
        raise InvalidConfig("level must lie in (0, 1)")
    L = family.sublevel_samples(exp, level * M ** (-exp.tau), int(cfg["samples"] or 64))
    doc = {"family": family.kind, "sigma": exp.sigma, "tau": exp.tau, "epsilon": float(cfg["eps"]),
           "B": float(cfg["B"]), "N": int(cfg["N"]), "r": r, "r_k_alpha": rstar, "M_K": M,
           "L_extent": float(np.max(np.abs(L - 1)))}
    try:
        P, cert = lemma_construct(family, exp, float(cfg["eps"]), _target(cfg), int(cfg["N"]),
                                  float(cfg["B"]), r, L, M=M)
    except ScaleError as exc:
        doc["error"] = str(exc)
        doc["certificate"] = None if exc.shortfall is None else exc.shortfall.to_json()
        doc["passed"] = False
        _dump(doc, cfg["out"])
        return 1
    doc["certificate"] = cert.to_json()
    doc["polynomial"] = P.to_json()
    doc["passed"] = bool(cert.passed and cert.reverified)
    _dump(doc, cfg["out"])
    return 0 if doc["passed"] else 1


def cmd_verify(cfg):
    only = cfg["only"]
    if isinstance(only, str):
        only = [k.strip() for k in only.split(",") if k.strip()]
    try:
        results = acceptance.run_acceptance(only, echo=lambda s: print(s, flush=True))
    except KeyError as exc:
        raise InvalidConfig(str(exc)) from exc
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed", flush=True)
    if cfg["json"]:
        _emit(json.dumps({"passed": ok, "criteria": [r.to_json() for r in results]}, indent=2) + "\n",
              cfg["json"])
    return 0 if ok else 1


COMMANDS = {
    "report": cmd_report,
    "region": cmd_region,
    "criterion": cmd_criterion,
    "fit": cmd_fit,
    "construct": cmd_construct,
    "verify": cmd_verify,
}


def build_parser():
    p = argparse.ArgumentParser(prog="wpa", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON file with flag values; flags override it")
    p.add_argument("--family", choices=["disc", "segment", "arc"], help="compact set family (segment)")
    p.add_argument("--x0", type=float, help="disc centre / segment end (3)")
    p.add_argument("--theta0", type=float, help="arc opening angle (pi)")
    p.add_argument("--rho", type=float, help="radius of the disc domain (criterion, disc)")
    p.add_argument("--eps", type=float,
                   help="domain inflation for criterion; approximation tolerance for fit/construct (0.1)")
    p.add_argument("--alpha", type=float, help="exponent tested by criterion")
    p.add_argument("--sigma", type=int, help="exponent numerator (1)")
    p.add_argument("--tau", type=int, help="exponent denominator (2)")
    p.add_argument("--grid", type=int, help=f"region cells per side, at most {MAX_GRID} (200)")
    p.add_argument("--samples", type=int, help="sample count (criterion 256, fit auto, construct 64)")
    p.add_argument("--n", type=int, help="fit degree parameter (8)")
    p.add_argument("--target", help="target polynomial, ascending coefficients '2,-1' (1)")
    p.add_argument("--level", type=float, help="construct: L is the sub-level set at level * M^-tau (0.85)")
    p.add_argument("--B", type=float, help="construct: bound on the partial sums at 1 (10)")
    p.add_argument("--N", type=int, help="construct: minimum valuation (5)")
    p.add_argument("--r", type=float, help="construct: disc radius (0.9 r(K, alpha))")
    p.add_argument("--out", help="output path (stdout)")
    p.add_argument("--svg", help="region: also write an SVG plot here")
    p.add_argument("--json", help="verify: write machine-readable results here")
    p.add_argument("--only", help="verify: comma-separated criterion keys")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        return COMMANDS[args.command](cfg)
    except (InvalidConfig, ConfigurationError, DomainError, InfeasibleError, DegeneracyError,
            TypeError, ValueError) as exc:
        print(f"wpa {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
