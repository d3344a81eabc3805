"""Command-line front end.

Every command writes JSON lines to stdout (or ``--output``); ``--pretty``
switches to human-readable tables.  Exit codes: 0 ok, 2 a verification
failed, 3 a numeric failure (landing, undecided cap), 4 bad configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import kernels, plane, symbolic, tree
from .angles import Angle, golden_mean_cf, siegel_angle, siegel_orbit_in_window
from .plane import Parameter

EXIT_OK, EXIT_VERIFY, EXIT_NUMERIC, EXIT_CONFIG = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


# -- argument helpers -------------------------------------------------------------


def parse_complex(text: str) -> complex:
    """Accept ``-1``, ``0.25``, ``i``, ``-0.12+0.74i`` or Python's ``j`` form."""
    s = text.strip().replace(" ", "").replace("i", "j")
    if s in ("j", "+j"):
        return 1j
    if s == "-j":
        return -1j
    try:
        return complex(s)
    except ValueError:
        raise ConfigError(f"cannot read {text!r} as a complex number") from None


def parse_angle(text: str) -> Angle:
    try:
        return Angle(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not an exact angle: {text!r}") from None


def resolve_parameter(args, required: bool = True) -> Parameter | None:
    theta = parse_angle(args.theta) if args.theta else None
    if args.fixture and args.c is not None:
        raise ConfigError("give either --fixture or --c, not both")
    if args.fixture:
        try:
            p = plane.fixture(args.fixture)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if theta is not None and theta != p.theta:
            raise ConfigError(f"fixture {args.fixture} has theta {p.theta}")
        return p
    if args.c is not None:
        c = parse_complex(args.c)
        # a literal that is a fixture's c picks up the fixture's angle
        for fx in plane.FIXTURES.values():
            if abs(fx.c - c) < 1e-12 and (theta is None or theta == fx.theta):
                return fx
        try:
            return Parameter.from_c(c, theta) if c != -2 else Parameter.from_c(c)
        except ValueError as e:
            raise ConfigError(str(e)) from None
    if required:
        raise ConfigError("a parameter is needed: --fixture or --c")
    return None


def resolve_theta(args, param: Parameter | None) -> Angle:
    if args.theta:
        return parse_angle(args.theta)
    if param is not None and param.theta is not None:
        return param.theta
    raise ConfigError("this command needs --theta (or a fixture that fixes it)")


class Out:
    """Line sink for stdout or a file."""

    def __init__(self, path: str | None):
        self.fh = open(path, "w", encoding="utf-8") if path else sys.stdout

    def record(self, obj) -> None:
        self.fh.write(json.dumps(obj, sort_keys=True) + "\n")

    def text(self, s: str) -> None:
        self.fh.write(s.rstrip("\n") + "\n")

    def close(self):
        if self.fh is not sys.stdout:
            self.fh.close()
        else:
            self.fh.flush()


def _estimate(e: symbolic.MeasureEstimate) -> dict:
    return json.loads(e.to_json())


# -- commands -----------------------------------------------------------------------


def cmd_land(args, out: Out) -> int:
    if not args.angle:
        raise ConfigError("land needs --angle")
    p = resolve_parameter(args)
    rec = plane.landing_record(parse_angle(args.angle), p, args.eps, args.max_depth)
    obj = json.loads(rec.to_json()) | {"parameter": p.to_json()}
    if args.pretty:
        z = "-" if rec.z is None else f"{rec.z.real:.12g} {rec.z.imag:+.12g}i"
        out.text(f"angle {rec.angle}  status {rec.status.value}  z = {z}")
    else:
        out.record(obj)
    return EXIT_OK if rec.status is plane.RayStatus.LANDED else EXIT_NUMERIC


def cmd_biaccess(args, out: Out) -> int:
    p = resolve_parameter(args, required=False)
    portrait = symbolic.CriticalPortrait(resolve_theta(args, p))
    code = EXIT_OK
    try:
        est = symbolic.measure_estimate(symbolic.Biaccessible(portrait), args.samples, args.depth, args.seed)
    except symbolic.UndecidedCapExceeded as e:
        est, code = e.estimate, EXIT_NUMERIC
    obj = _estimate(est) | {"theta": str(portrait.theta), "backend": kernels.BACKEND}
    if args.pretty:
        out.text(f"theta {portrait.theta}  biaccessible {est.value:.6f} +- {est.std_error:.6f}  undecided {est.undecided}")
    else:
        out.record(obj)
    return code


def _spine_estimate(args, p, portrait, depth):
    if portrait is not None and portrait.real_symmetric:
        return symbolic.measure_estimate(symbolic.OnSpine(portrait), args.samples, depth, args.seed), "symbolic"
    t = tree.build_tree(p)
    return tree.arc_measures(t, args.samples, depth, args.seed).entries["spine"], "tree"


def cmd_spine(args, out: Out) -> int:
    p = resolve_parameter(args, required=False)
    theta = None
    if args.theta or (p is not None and p.theta is not None):
        theta = resolve_theta(args, p)
    if p is None and theta is None:
        raise ConfigError("spine needs --theta, --c or --fixture")
    if p is not None and theta is not None and p.theta is None:
        p = Parameter(p.c, p.kind, theta, p.name)
    portrait = symbolic.CriticalPortrait(theta) if theta is not None else None
    if portrait is not None and not portrait.real_symmetric and p is None:
        raise ConfigError("a non-real portrait needs a parameter for the tree estimate")
    depths = [int(d) for d in args.depths.split(",")]
    rows = []
    code = EXIT_OK
    for d in depths:
        try:
            est, how = _spine_estimate(args, p, portrait, d)
        except symbolic.UndecidedCapExceeded as e:
            est, how, code = e.estimate, "symbolic", EXIT_NUMERIC
        except tree.TreeError as e:
            raise ConfigError(str(e)) from None
        rows.append(est)
        if not args.pretty:
            out.record(_estimate(est) | {"method": how})
        else:
            out.text(f"depth {d:>3}  spine {est.value:.6f} +- {est.std_error:.6f}  ({how})")
    monotone = all(
        b.value <= a.value + 2 * np.hypot(a.std_error, b.std_error) for a, b in zip(rows, rows[1:])
    )
    if args.pretty:
        out.text(f"non-increasing within 2 se: {'yes' if monotone else 'no'}")
    else:
        out.record({"monotone": monotone, "final": rows[-1].value})
    return code


def cmd_tree_verify(args, out: Out) -> int:
    p = resolve_parameter(args)
    if args.theta and p.theta is None:
        p = Parameter(p.c, p.kind, parse_angle(args.theta), p.name)
    try:
        rep, table = tree.verify_tree(p, args.samples, args.depth, args.seed, landing=not args.no_landing)
    except tree.TreeError as e:
        raise ConfigError(str(e)) from None
    if args.pretty:
        out.text(rep.to_text())
        out.text(table.to_text())
    else:
        for ch in rep.checks:
            out.record({"check": ch.name, "passed": ch.passed, "detail": ch.detail})
        out.record({"arc_measures": table.to_json()})
        out.record({"title": rep.title, "passed": rep.passed})
    return EXIT_OK if rep.passed else EXIT_VERIFY


# -- render -------------------------------------------------------------------------


def _frame(c: complex, width: int, height: int) -> tuple[float, float, float, float]:
    beta = plane.fixed_points(c).beta
    r = max(abs(beta), 1.0) * 1.1
    aspect = height / width
    return -r, r, -r * aspect, r * aspect


def _to_pixels(zs, frame, width, height):
    xmin, xmax, ymin, ymax = frame
    i = (np.real(zs) - xmin) / (xmax - xmin) * width
    j = (ymax - np.imag(zs)) / (ymax - ymin) * height
    return i, j


def _draw_polyline(img, zs, frame, color):
    h, w = img.shape[:2]
    if len(zs) == 0:
        return
    i, j = _to_pixels(np.asarray(zs), frame, w, h)
    for k in range(len(zs) - 1):
        n = int(max(abs(i[k + 1] - i[k]), abs(j[k + 1] - j[k]))) + 1
        xs = np.linspace(i[k], i[k + 1], n + 1).astype(int)
        ys = np.linspace(j[k], j[k + 1], n + 1).astype(int)
        ok = (xs >= 0) & (xs < w) & (ys >= 0) & (ys < h)
        img[ys[ok], xs[ok]] = color


def render_image(p: Parameter, angles, width: int, height: int, max_iter: int, depth: int):
    frame = _frame(p.c, width, height)
    counts = kernels.escape_raster(p.c, *frame, width, height, max_iter)
    img = np.zeros((height, width, 3), dtype=np.uint8)
    esc = counts >= 0
    # log-scaled grey outside, black on the filled Julia set
    shade = np.log1p(counts.clip(0)) / np.log1p(max_iter)
    img[esc] = (255 * (1 - shade[esc]))[:, None].astype(np.uint8)
    try:
        t = tree.build_tree(p)
        spine = [t.point(s).position for s in t.spine_order]
        _draw_polyline(img, spine, frame, (40, 160, 255))
    except tree.TreeError:
        pass
    rays = []
    for a in angles:
        ray = plane.land_ray(a, p, max_depth=depth)
        zs = list(ray.positions)
        if ray.landed is not None:
            zs.append(ray.landed)
        _draw_polyline(img, zs, frame, (230, 40, 40))
        rays.append(ray)
    return img, rays


def write_ppm(path: str, img: np.ndarray) -> None:
    h, w = img.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img, dtype=np.uint8).tobytes())


def cmd_render(args, out: Out) -> int:
    p = resolve_parameter(args)
    angles = [parse_angle(a) for a in args.rays.split(",")] if args.rays else []
    if args.width < 8 or args.height < 8:
        raise ConfigError("resolution must be at least 8x8")
    img, rays = render_image(p, angles, args.width, args.height, args.max_iter, args.ray_depth)
    write_ppm(args.image, img)
    csv_path = args.csv or str(Path(args.image).with_suffix(".csv"))
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("angle,level,re,im,potential\n")
        for r in rays:
            for k, (z, g) in enumerate(r.points):
                fh.write(f"{r.angle},{k},{z.real!r},{z.imag!r},{g!r}\n")
    for r in rays:
        z = r.landed
        out.record(
            {
                "angle": str(r.angle),
                "status": r.status.value,
                "re": None if z is None else z.real,
                "im": None if z is None else z.imag,
            }
        )
    out.record({"image": args.image, "csv": csv_path, "width": args.width, "height": args.height})
    return EXIT_OK


# -- siegel and fatou ----------------------------------------------------------------


def _parse_cf(text: str | None) -> list[int]:
    if not text:
        return golden_mean_cf()
    try:
        head, _, tail = text.partition(";")
        terms = [int(head)] + [int(x) for x in tail.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"continued fraction must look like '0;1,1,1', got {text!r}") from None
    return terms


def cmd_siegel(args, out: Out) -> int:
    cf = _parse_cf(args.cf)
    try:
        s = siegel_angle(cf, args.q_max, lowest_terms=args.lowest_terms)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    # the orbit check needs about 2 bits of s per step; refine until it decides
    q, inside = max(args.q_max, 2 * args.steps), None
    while inside is None and q <= 16 * max(args.steps, 25):
        try:
            inside = siegel_orbit_in_window(siegel_angle(cf, q, lowest_terms=args.lowest_terms), args.steps)
        except ValueError:
            q *= 2
    obj = {
        "value": float(s.value),
        "exact": str(s.value),
        "tail_bound": float(s.tail_bound),
        "q_max": s.q_max,
        "lowest_terms": s.lowest_terms,
        "orbit_in_window": inside,
        "orbit_q_max": q,
        "steps": args.steps,
    }
    if args.pretty:
        out.text(f"s = {float(s.value):.12f} (q <= {s.q_max}, tail <= {float(s.tail_bound):.3g})")
        verdict = {True: "yes", False: "no", None: "undecided"}[inside]
        out.text(f"orbit stays in [s, s + 1/2] for {args.steps} steps: {verdict} (q <= {q})")
    else:
        out.record(obj)
    return EXIT_OK


def cmd_fatou(args, out: Out) -> int:
    p = resolve_parameter(args)
    code = EXIT_OK
    try:
        est = tree.fatou_boundary_measure(p, args.samples, args.depth, args.seed)
    except symbolic.UndecidedCapExceeded as e:
        est, code = e.estimate, EXIT_NUMERIC
    except ValueError as e:
        raise ConfigError(str(e)) from None
    if args.pretty:
        out.text(f"Fatou boundary {est.value:.6f} +- {est.std_error:.6f}  undecided {est.undecided}")
    else:
        out.record(_estimate(est) | {"parameter": p.to_json()})
    return code


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--fixture", choices=sorted(plane.FIXTURES))
    common.add_argument("--c", help="parameter, e.g. -1 or -0.12+0.74i")
    common.add_argument("--theta", help="critical value angle as an exact fraction")
    common.add_argument("--depth", type=int, default=40)
    common.add_argument("--samples", type=int, default=10000)
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--eps", type=float, default=1e-9)
    common.add_argument("--output", help="write records here instead of stdout")
    common.add_argument("--pretty", action="store_true", help="human-readable tables")

    ap = argparse.ArgumentParser(prog="biaccess", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("land", parents=[common], help="landing point of one external ray")
    p.add_argument("--angle")
    p.add_argument("--max-depth", type=int, default=60)
    p.set_defaults(func=cmd_land)

    p = sub.add_parser("biaccess", parents=[common], help="measure of biaccessible angles")
    p.set_defaults(func=cmd_biaccess)

    p = sub.add_parser("spine", parents=[common], help="spine measure per depth")
    p.add_argument("--depths", default="10,20,30,40")
    p.set_defaults(func=cmd_spine)

    p = sub.add_parser("tree-verify", parents=[common], help="run every tree verifier")
    p.add_argument("--no-landing", action="store_true", help="skip the ray landing checks")
    p.set_defaults(func=cmd_tree_verify)

    p = sub.add_parser("render", parents=[common], help="PPM of J with rays, plus ray CSV")
    p.add_argument("--rays", default="", help="comma separated angles")
    p.add_argument("--width", type=int, default=600)
    p.add_argument("--height", type=int, default=600)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--ray-depth", type=int, default=40)
    p.add_argument("--image", default="julia.ppm")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("siegel", parents=[common], help="rotation angle of the invariant Cantor set")
    p.add_argument("--cf", help="continued fraction 'a0;a1,a2,...' (default golden mean)")
    p.add_argument("--q-max", type=int, default=40)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--lowest-terms", action="store_true")
    p.set_defaults(func=cmd_siegel)

    p = sub.add_parser("fatou", parents=[common], help="measure of bounded Fatou component boundaries")
    p.set_defaults(func=cmd_fatou)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    if args.samples < 100 or args.depth < 1:
        print("error: need --samples >= 100 and --depth >= 1", file=sys.stderr)
        return EXIT_CONFIG
    out = Out(args.output)
    try:
        return args.func(args, out)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (plane.LandingError, tree.AmbiguityCapExceeded, symbolic.UndecidedCapExceeded) as e:
        hint = "; a known --theta switches real parameters to the symbolic test" if args.command == "spine" else ""
        print(f"error: {e}{hint}", file=sys.stderr)
        return EXIT_NUMERIC
    finally:
        out.close()


if __name__ == "__main__":
    sys.exit(main())
