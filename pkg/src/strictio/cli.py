"""Command-line runs: ``strictio <mode> --config run.toml [--out DIR] [--jet-order N] [--tol X]``.

Exit status: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, catalog, export
from .curve import CurvatureCurve, CurveModel, FrameDegenerate
from .expr import ExprEvalError, ParseError
from .framefield import GaugeViolated, InvariantData, integrate_frame
from .hypersurface import TwoRuled, classify_family, is_frontal
from .jets import JetError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib
import tomli_w

log = logging.getLogger("strictio")

MODES = ("frame", "build", "striction", "classify", "scan", "heights")
CURVATURE_KEYS = ("l", "kappa1", "kappa4", "kappa6")
INVARIANT_KEYS = ("a", "delta", "b1", "b2", "b3", "b4")
HYPERSURFACES = {"paper_example"}


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field = field_name


@dataclass
class RunConfig:
    mode: str
    source: dict
    grid: dict
    jet_order: int = 6
    tolerances: dict = field(default_factory=lambda: {"tau": 1e-9})
    output: dict = field(default_factory=lambda: {"dir": "strictio_out"})
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    def digest(self) -> str:
        return hashlib.sha256(self.to_toml().encode()).hexdigest()

    @property
    def tau(self) -> float:
        return float(self.tolerances.get("tau", 1e-9))

    def t_grid(self) -> np.ndarray:
        return np.linspace(self.grid["t_min"], self.grid["t_max"], self.grid["nodes"])


def _num(d: dict, key: str, name: str, kind=float):
    try:
        v = d[key]
    except KeyError:
        raise ConfigError(name, "missing") from None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(name, f"expected a number, got {v!r}")
    return kind(v)


def config_from_dict(d: dict) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError("<root>", "expected a table")
    mode = d.get("mode")
    if mode not in MODES:
        raise ConfigError("mode", f"must be one of {', '.join(MODES)}; got {mode!r}")
    source = d.get("source")
    if not isinstance(source, dict) or not source:
        raise ConfigError("source", "missing or empty table")
    kinds = [k for k in ("catalog", "curve", "curvatures", "hypersurface", "invariants") if k in source]
    if len(kinds) != 1:
        raise ConfigError("source", "give exactly one of catalog, curve, curvatures, hypersurface, invariants")
    if "domain" in source:
        dom = source["domain"]
        if not (isinstance(dom, list) and len(dom) == 2 and dom[0] < dom[1]):
            raise ConfigError("source.domain", "expected [lo, hi] with lo < hi")
    g = d.get("grid")
    if not isinstance(g, dict):
        raise ConfigError("grid", "missing table")
    grid = {
        "t_min": _num(g, "t_min", "grid.t_min"),
        "t_max": _num(g, "t_max", "grid.t_max"),
        "nodes": _num(g, "nodes", "grid.nodes", int),
    }
    extra = set(g) - set(grid)
    if extra:
        raise ConfigError(f"grid.{sorted(extra)[0]}", "unknown field")
    if not grid["t_min"] < grid["t_max"]:
        raise ConfigError("grid.t_min", "must be smaller than grid.t_max")
    if grid["nodes"] < 2:
        raise ConfigError("grid.nodes", "must be at least 2")
    jo = d.get("jet_order", 6)
    if isinstance(jo, bool) or not isinstance(jo, int) or not 3 <= jo <= 12:
        raise ConfigError("jet_order", f"must be an integer in [3, 12]; got {jo!r}")
    tol = dict(d.get("tolerances", {"tau": 1e-9}))
    for k, v in tol.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            raise ConfigError(f"tolerances.{k}", "must be a positive number")
        tol[k] = float(v)
    tol.setdefault("tau", 1e-9)
    out = dict(d.get("output", {"dir": "strictio_out"}))
    out.setdefault("dir", "strictio_out")
    opts = dict(d.get("options", {}))
    unknown = set(d) - {"mode", "source", "grid", "jet_order", "tolerances", "output", "options"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")
    return RunConfig(mode, dict(source), grid, jo, tol, out, opts)


def parse_config(text: str) -> RunConfig:
    try:
        d = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<file>", f"not valid TOML: {exc}") from None
    return config_from_dict(d)


def _load_dict(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<file>", f"not valid TOML: {exc}") from None


def load_config(path) -> RunConfig:
    return config_from_dict(_load_dict(path))


# ---------------------------------------------------------------------------
# sources
# ---------------------------------------------------------------------------


def _domain(cfg: RunConfig, default=None):
    dom = cfg.source.get("domain")
    if dom is not None:
        return (float(dom[0]), float(dom[1]))
    if default is not None:
        return default
    return (cfg.grid["t_min"], cfg.grid["t_max"])


def _exprs(value, name: str, n: int = 4):
    if not (isinstance(value, list) and len(value) == n and all(isinstance(x, (str, int, float)) for x in value)):
        raise ConfigError(name, f"expected a list of {n} expression strings")
    return [str(x) for x in value]


def build_curve(cfg: RunConfig):
    src = cfg.source
    try:
        if "catalog" in src:
            name = src["catalog"]
            if name not in catalog.CURVES:
                raise ConfigError("source.catalog", f"unknown curve {name!r}; known: {sorted(catalog.CURVES)}")
            c = catalog.curve(name)
            if "domain" in src:
                c.domain = _domain(cfg)
            return c
        if "curve" in src:
            return CurveModel(_exprs(src["curve"], "source.curve"), _domain(cfg), name="curve")
        if "curvatures" in src:
            k = src["curvatures"]
            if not isinstance(k, dict) or set(k) != set(CURVATURE_KEYS):
                raise ConfigError("source.curvatures", f"expected keys {', '.join(CURVATURE_KEYS)}")
            return CurvatureCurve(*(str(k[x]) for x in CURVATURE_KEYS), domain=_domain(cfg), name="curvatures")
    except (ParseError, ExprEvalError) as exc:
        raise ConfigError("source", f"bad expression: {exc}") from None
    raise ConfigError("source", "this mode needs a curve (catalog curve, curve or curvatures)")


def invariant_data(cfg: RunConfig) -> InvariantData:
    k = cfg.source.get("invariants")
    if not isinstance(k, dict) or not set(k) <= set(INVARIANT_KEYS) or not set(INVARIANT_KEYS[:5]) <= set(k):
        raise ConfigError("source.invariants", "expected keys a, delta, b1, b2, b3 and optional b4")
    try:
        return InvariantData(*(str(k.get(x, "0")) for x in INVARIANT_KEYS), domain=_domain(cfg))
    except (ParseError, ExprEvalError) as exc:
        raise ConfigError("source.invariants", f"bad expression: {exc}") from None


def build_hypersurface(cfg: RunConfig) -> TwoRuled:
    src = cfg.source
    try:
        if "catalog" in src:
            name = src["catalog"]
            if name not in HYPERSURFACES:
                raise ConfigError("source.catalog", f"unknown hypersurface {name!r}; known: {sorted(HYPERSURFACES)}")
            g, X, Y, dom = catalog.paper_example()
            return TwoRuled(g, X, Y, _domain(cfg, dom), name=name)
        if "hypersurface" in src:
            h = src["hypersurface"]
            if not isinstance(h, dict) or not {"gamma", "X", "Y"} <= set(h):
                raise ConfigError("source.hypersurface", "expected keys gamma, X, Y")
            dom = _domain(cfg)
            comps = [CurveModel(_exprs(h[k], f"source.hypersurface.{k}"), dom, name=k) for k in ("gamma", "X", "Y")]
            return TwoRuled(*comps, dom, name="hypersurface")
        if "invariants" in src:
            data = invariant_data(cfg)
            nodes = int(cfg.options.get("frame_nodes", 201))
            return TwoRuled.from_invariants(data, nodes=nodes, name="invariants")
    except (ParseError, ExprEvalError) as exc:
        raise ConfigError("source", f"bad expression: {exc}") from None
    raise ConfigError("source", "this mode needs a hypersurface (catalog, hypersurface or invariants)")


# ---------------------------------------------------------------------------
# runs
# ---------------------------------------------------------------------------


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("STRICTIO_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn, items) -> list:
    """Ordered map over grid points, parallel up to STRICTIO_THREADS workers."""
    items = list(items)
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _header(cfg: RunConfig) -> dict:
    return {
        "tool": "strictio",
        "version": __version__,
        "config_sha256": cfg.digest(),
        "mode": cfg.mode,
        "tolerances": cfg.tolerances,
        "jet_order": cfg.jet_order,
    }


def run_frame(cfg: RunConfig, out: Path) -> list:
    c = build_curve(cfg)

    def row(t):
        fj = c.frame_jets(float(t), 0)
        vals = [fj.l.d(0), fj.kappa1.d(0), fj.kappa4.d(0), fj.kappa6.d(0)]
        return [float(t), *map(float, vals), *(float(x) for e in fj.e for x in e.value)]

    rows = pmap(row, cfg.t_grid())
    header = ["t", "l", "kappa1", "kappa4", "kappa6"] + [f"e{i}_{j}" for i in range(1, 5) for j in range(1, 5)]
    return [export.write_csv(out / "frame.csv", header, rows)]


def run_build(cfg: RunConfig, out: Path) -> list:
    data = invariant_data(cfg)
    lo, hi = data.domain
    grid = np.unique(np.concatenate([cfg.t_grid(), [lo, hi]]))
    grid = grid[(grid >= lo) & (grid <= hi)]
    t0 = float(cfg.options.get("t0", 0.0 if lo <= 0.0 <= hi else lo))
    ff = integrate_frame(data, t0, grid=grid, step=float(cfg.options.get("step", 1e-3)))
    rows = []
    for k, t in enumerate(ff.t):
        rows.append([float(t), *map(float, ff.gamma[k]), *map(float, ff.X[k]), *map(float, ff.Y[k]),
                     *map(float, ff.Xp[k]), *map(float, ff.Z[k])])
    header = ["t"] + [f"{n}{j}" for n in ("gamma", "X", "Y", "Xp", "Z") for j in range(1, 5)]
    F = ff.frames
    defect = float(np.max(np.abs(np.einsum("nij,nkj->nik", F, F) - np.eye(4))))
    summary = {**_header(cfg), "nodes": len(ff.t), "orthonormality_defect": defect, "t0": t0,
               "invariants": data.sources()}
    return [export.write_csv(out / "build.csv", header, rows), export.write_json(out / "build.json", summary)]


def run_striction(cfg: RunConfig, out: Path) -> list:
    from .striction import second_striction, striction_surface, surface_type, CylindricalLocus

    f = build_hypersurface(cfg)
    fu = f.unit_speed()
    tt = _unit_grid(f, fu, cfg.t_grid())
    ss = striction_surface(fu, tt)
    rw = cfg.options.get("r_window", [-1.0, 1.0])
    rn = int(cfg.options.get("r_nodes", 11))
    rv = np.linspace(rw[0], rw[1], rn)
    P = ss.grid_points(rv)
    rows = [[float(ss.t[i]), float(rv[j]), *map(float, P[i, j])] for i in range(len(ss.t)) for j in range(rn)]
    tname = "t" if fu is f else "t_tilde"
    files = [export.write_csv(out / "striction_surface.csv", [tname, "r", "x1", "x2", "x3", "x4"], rows)]
    verts, faces = export.grid_mesh(P[:, :, :3])
    files.append(_write_obj(out / "striction_surface.obj", verts, faces))
    st = surface_type(fu, tt, float(cfg.tolerances.get("type", 1e-8)))
    summary = {**_header(cfg), "surface_type": st.label, "residuals": st.residuals, "zero_locations": st.zero_locations}
    try:
        sc = second_striction(fu, tt)
        rows2 = [[float(sc.t[k]), *map(float, sc.sigma2[k]), float(sc.omega[k]), float(sc.r_closed[k]),
                  float(sc.r_direct[k])] for k in range(len(sc.t))]
        files.append(export.write_csv(out / "second_striction.csv",
                                      [tname, "x1", "x2", "x3", "x4", "omega", "r_closed", "r_direct"], rows2))
        files.append(export.write_polyline_obj(out / "second_striction.obj", sc.sigma2))
        summary["second_striction_cross_check"] = sc.cross_check
    except CylindricalLocus as exc:
        summary["second_striction"] = str(exc)
    files.append(export.write_json(out / "striction.json", summary))
    return files


def _write_obj(path: Path, verts, faces) -> Path:
    lines = ["v " + " ".join(export.fmt(x) for x in v) + "\n" for v in verts]
    lines += [f"f {a + 1} {b + 1} {c + 1}\n" for a, b, c in faces]
    path.write_text("".join(lines))
    return path


def _unit_grid(f: TwoRuled, fu: TwoRuled, grid) -> np.ndarray:
    """Raw grid values mapped into the unit-speed parameter."""
    if fu is f:
        return np.asarray(grid, dtype=float)
    tau = fu.parent.gauge().adapted.tau
    return np.array([tau(float(t)) for t in grid])


def _family_block(f: TwoRuled, cfg: RunConfig) -> dict:
    grid = cfg.t_grid()
    fam = classify_family(f, grid)
    block = {"family": fam.label, "transitions": fam.transitions}
    try:
        fr = is_frontal(f, grid, float(cfg.tolerances.get("frontal", 1e-9)))
        block.update({"frontal": fr.label, "max_abs_b4": fr.max_abs_b4})
    except ValueError as exc:
        block["frontal"] = f"undecided: {exc}"
    return block


def run_classify(cfg: RunConfig, out: Path) -> list:
    from .singular import classify_point

    f = build_hypersurface(cfg)
    pts = cfg.options.get("points")
    if pts is None:
        pts = [[float(t), 0.0, 0.0] for t in cfg.t_grid()]
    if not isinstance(pts, list) or not all(isinstance(p, list) and len(p) == 3 for p in pts):
        raise ConfigError("options.points", "expected a list of [t, s, r] triples")
    reps = pmap(lambda p: classify_point(f, p, cfg.tau, cfg.jet_order).as_dict(), pts)
    if f.parent is None and f.state != "unit_speed":
        gauge = {"theta0": f.gauge().theta0, "t_ref": f.gauge().adapted.t_ref}
    else:
        gauge = {"state": f.state}
    doc = {**_header(cfg), **_family_block(f, cfg), "gauge": gauge, "reports": reps}
    return [export.write_json(out / "classify.json", doc)]


def _intervals(ts, labels) -> list:
    out = []
    for t, lab in zip(ts, labels):
        if out and out[-1]["labels"] == lab:
            out[-1]["t_end"] = t
        else:
            out.append({"t_start": t, "t_end": t, "labels": lab})
    return out


def scan_hypersurface(f: TwoRuled, grid, r_window, samples: int, tau: float, order: int) -> list:
    """Classify points of the singular set {lambda = 0} of f along ``grid``."""
    from .singular import classify_adapted

    fu = f.unit_speed()

    def one(t):
        lg = f.local(float(t), order)
        inv = lg.inv
        a, b3 = inv.a.d(0), inv.b3.d(0)
        rs = list(np.linspace(r_window[0], r_window[1], samples))
        ap = inv.a.d(1)
        if abs(ap) > tau:
            r2 = (a * inv.b2.d(0) + inv.b1.d(0) - inv.b3.d(1)) / ap
            if r_window[0] <= r2 <= r_window[1]:
                rs.append(r2)
        reps = []
        for rh in rs:
            sh = -b3 - a * rh
            s, r = lg.from_adapted(sh, rh) if fu is not f else (sh, rh)
            reps.append(classify_adapted(inv, sh, rh, tau, point=(float(t), s, r), gauge=lg).as_dict())
        return reps

    return pmap(one, grid)


def run_scan(cfg: RunConfig, out: Path) -> list:
    f = build_hypersurface(cfg)
    rw = cfg.options.get("r_window", [-1.0, 1.0])
    samples = int(cfg.options.get("samples", 3))
    grid = [float(t) for t in cfg.t_grid()]
    per_t = scan_hypersurface(f, grid, rw, samples, cfg.tau, cfg.jet_order)
    labels = [sorted({r["label"] for r in reps}) for reps in per_t]
    doc = {**_header(cfg), **_family_block(f, cfg), "intervals": _intervals(grid, labels),
           "points": [r for reps in per_t for r in reps]}
    return [export.write_json(out / "scan.json", doc)]


def run_heights(cfg: RunConfig, out: Path) -> list:
    from . import heights

    c = build_curve(cfg)
    grid = cfg.t_grid()
    idx = cfg.options.get("indices", [1, 2, 3, 4])
    mesh_nodes = int(cfg.options.get("mesh_nodes", 20))
    window = cfg.options.get("window", [-1.0, 1.0])
    files, doc = [], {**_header(cfg), "surfaces": {}}
    for i in idx:
        entry: dict = {}
        try:
            Si = heights.build_Si(c, int(i), grid)
        except (heights.ApplicabilityError, GaugeViolated) as exc:
            doc["surfaces"][f"S{i}"] = {"applicable": False, "reason": str(exc)}
            continue
        data = heights.si_invariant_data(Si, grid[:: max(1, len(grid) // 5)])
        entry.update({"applicable": True, "flags": Si.flags, "theta0": Si.theta0, "t_ref": Si.t_ref,
                      "invariant_cross_check": data.cross_check,
                      "applicability_interval": [float(grid[0]), float(grid[-1])]})
        reps = heights.si_singularity_scan(Si, grid, window, int(cfg.options.get("samples", 3)), cfg.tau, data)
        entry["reports"] = [r.as_dict() for r in reps]
        labels = [[] for _ in grid]
        for r in reps:
            k = int(np.argmin(np.abs(grid - r.point[0])))
            labels[k] = sorted(set(labels[k]) | {r.label})
        entry["intervals"] = _intervals([float(t) for t in grid], labels)
        if int(i) == 1:
            cone = heights.s1_cone_test(Si, grid)
            entry["s1_type"] = {"label": cone.label, "residuals": cone.residuals}
        export.export_mesh(Si.surface.evaluate, (grid[0], grid[-1]), window, (mesh_nodes, mesh_nodes),
                           fix="r", value=0.0, drop=4, path=out / f"S{i}.obj")
        files.append(out / f"S{i}.obj")
        doc["surfaces"][f"S{i}"] = entry
    files.append(export.write_json(out / "heights.json", doc))
    return files


RUNNERS = {
    "frame": run_frame,
    "build": run_build,
    "striction": run_striction,
    "classify": run_classify,
    "scan": run_scan,
    "heights": run_heights,
}

NUMERICAL_ERRORS = (FrameDegenerate, GaugeViolated, JetError, FloatingPointError, ArithmeticError)


def run(cfg: RunConfig, out_dir=None) -> list:
    out = Path(out_dir or cfg.output.get("dir", "strictio_out"))
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError("output.dir", f"cannot create {out}: {exc.strerror}") from None
    return RUNNERS[cfg.mode](cfg, out)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="strictio", description=__doc__.splitlines()[0])
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--jet-order", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("-v", "--verbose", action="store_true")
    args = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    from .singular import CriterionError
    from .striction import CylindricalLocus
    from .heights import ApplicabilityError

    try:
        d = _load_dict(args.config)
        d["mode"] = args.mode
        if args.jet_order is not None:
            d["jet_order"] = args.jet_order
        if args.tol is not None:
            d.setdefault("tolerances", {})["tau"] = args.tol
        cfg = config_from_dict(d)
        files = run(cfg, args.out)
    except ConfigError as exc:
        print(f"strictio: {exc}", file=sys.stderr)
        return 1
    except (CriterionError, CylindricalLocus, ApplicabilityError, *NUMERICAL_ERRORS) as exc:
        print(f"strictio: numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"strictio: numerical failure: {exc}", file=sys.stderr)
        return 2
    for f in files:
        log.info("wrote %s", f)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
