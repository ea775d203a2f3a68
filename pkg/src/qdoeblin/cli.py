"""Command-line front end.

Four commands: ``coeff`` prints one coefficient row for a single channel,
``sweep`` scans a family parameter and writes CSV (plus an optional SVG line
plot), ``figures`` regenerates the canned figure grids, and ``check`` runs
the seeded property suites.  Exit codes: 0 ok, 1 usage, 2 solver failure,
3 I/O, 4 check failure.
"""

from __future__ import annotations

import argparse
import inspect
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import channel as ch
from . import doeblin as db
from . import hermlin, oracles, sdpcore

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_IO = 3
EXIT_CHECK = 4

NAN_LITERAL = "nan_not_ppt"

KIND_FUNCS = {
    "alpha": db.alpha,
    "alphaT": db.alpha_transpose,
    "alphaH": db.alpha_hermitian,
    "alphaTH": db.alpha_transpose_hermitian,
    "p1": db.p1_eb_ppt,
    "rev": db.reverse_alpha,
    "revT": db.reverse_alpha_transpose,
    "revH": db.reverse_alpha_hermitian,
}
# alphaTH stays behind --combine-th; the default surface omits it.
BASE_KINDS = ("alpha", "alphaT", "alphaH", "p1", "rev", "revT", "revH")

PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#7f7f7f",
)


class UsageError(Exception):
    pass


class SolverFailure(Exception):
    pass


# --------------------------------------------------------------- channels


_PARAM_FLAGS = ("d", "p", "q", "eta", "eps", "b")


def _build_channel(name: str, params: dict) -> ch.QuantumChannel:
    if name not in ch.FAMILIES:
        raise UsageError(
            f"unknown channel {name!r}; admissible: {', '.join(sorted(ch.FAMILIES))}"
        )
    ctor = ch.FAMILIES[name]
    accepted = set(inspect.signature(ctor).parameters)
    extra = sorted(set(params) - accepted)
    if extra:
        raise UsageError(
            f"channel {name!r} does not take {extra}; its parameters are"
            f" {sorted(accepted)} (use --file for matrix-valued families)"
        )
    try:
        return ctor(**params)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"cannot build channel {name!r}: {exc}") from exc


def _channel_from_args(args) -> ch.QuantumChannel:
    if getattr(args, "file", None):
        try:
            return ch.channel_from_file(args.file)
        except (ValueError, KeyError) as exc:
            raise UsageError(f"bad channel file {args.file!r}: {exc}") from exc
    if not args.channel:
        raise UsageError("need --channel NAME or --file PATH")
    params = {
        flag: getattr(args, flag)
        for flag in _PARAM_FLAGS
        if getattr(args, flag, None) is not None
    }
    if "d" in params:
        params["d"] = int(params["d"])
    return _build_channel(args.channel, params)


def _check_kinds(kinds: list[str], combine_th: bool) -> list[str]:
    admissible = BASE_KINDS + (("alphaTH",) if combine_th else ())
    for kind in kinds:
        if kind not in admissible:
            hint = (
                " (enable with --combine-th)"
                if kind == "alphaTH" and not combine_th
                else ""
            )
            raise UsageError(
                f"unknown kind {kind!r}{hint}; admissible: {', '.join(admissible)}"
            )
    return kinds


# -------------------------------------------------------------- computing


# Figure-only helper columns; they carry no solver status column.
_NO_STATUS_KINDS = frozenset({"eta_tr", "dp_lower", "dp_upper", "abs12p"})


def _kind_cells(channel, kinds, tol: float, params=None) -> list[tuple]:
    """(value, status, not_applicable) per requested column.

    Besides the SDP kinds this understands the oracle column ``eta_tr``, the
    closed form ``abs12p`` = |1-2p|, and the paired ``dp_lower``/``dp_upper``
    columns which share one solve.
    """
    cells = []
    dp = None
    for kind in kinds:
        if kind == "eta_tr":
            cells.append((oracles.eta_tr_qubit(channel), "oracle", False))
        elif kind == "abs12p":
            cells.append((abs(1.0 - 2.0 * params["p"]), "exact", False))
        elif kind in ("dp_lower", "dp_upper"):
            if dp is None:
                dp = db.dp_range(channel, tol=tol)
            value = dp.lower if kind == "dp_lower" else dp.upper
            cells.append((value, "derived", False))
        else:
            res = KIND_FUNCS[kind](channel, tol=tol)
            cells.append((float(res.value), res.status, res.not_applicable))
    return cells


def _point_task(task):
    family, params, kinds, tol = task
    return _kind_cells(ch.FAMILIES[family](**params), kinds, tol, params)


def _run_tasks(tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [_point_task(t) for t in tasks]
    chunk = max(1, len(tasks) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_point_task, tasks, chunksize=chunk))


def _cell_failed(cell) -> bool:
    _, status, not_applicable = cell
    return not not_applicable and status not in (
        sdpcore.STATUS_OPTIMAL,
        "oracle",
        "derived",
        "exact",
    )


# ------------------------------------------------------------- CSV output


def _num(x: float) -> str:
    if not math.isfinite(x):
        return NAN_LITERAL
    return "%.9g" % x


def _cell_text(cell) -> tuple[str, str]:
    value, status, not_applicable = cell
    return (NAN_LITERAL if not_applicable else _num(value)), status


def _write_lines(path: str | None, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# ------------------------------------------------------------- SVG output


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = mag
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * mag
        if span / step <= target:
            break
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * span:
        ticks.append(round(t, 10))
        t += step
    return ticks


def _svg_open(width: int, height: int, title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}"'
        f' height="{height}" viewBox="0 0 {width} {height}"'
        ' font-family="sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="20" text-anchor="middle"'
        f' font-size="14">{title}</text>',
    ]


def _svg_axes(parts, box, x_lo, x_hi, y_lo, y_hi, x_label, y_label):
    x0, y0, x1, y1 = box

    def px(v):
        return x0 + (v - x_lo) / (x_hi - x_lo) * (x1 - x0)

    def py(v):
        return y1 - (v - y_lo) / (y_hi - y_lo) * (y1 - y0)

    for t in _nice_ticks(x_lo, x_hi):
        x = px(t)
        parts.append(
            f'<line x1="{x:.1f}" y1="{y0}" x2="{x:.1f}" y2="{y1}"'
            ' stroke="#dddddd" stroke-width="0.6"/>'
        )
        parts.append(
            f'<text x="{x:.1f}" y="{y1 + 16}" text-anchor="middle"'
            f' font-size="11">{t:g}</text>'
        )
    for t in _nice_ticks(y_lo, y_hi):
        y = py(t)
        parts.append(
            f'<line x1="{x0}" y1="{y:.1f}" x2="{x1}" y2="{y:.1f}"'
            ' stroke="#dddddd" stroke-width="0.6"/>'
        )
        parts.append(
            f'<text x="{x0 - 6}" y="{y + 4:.1f}" text-anchor="end"'
            f' font-size="11">{t:g}</text>'
        )
    parts.append(
        f'<rect x="{x0}" y="{y0}" width="{x1 - x0}" height="{y1 - y0}"'
        ' fill="none" stroke="#333333"/>'
    )
    parts.append(
        f'<text x="{(x0 + x1) / 2:.0f}" y="{y1 + 34}" text-anchor="middle"'
        f' font-size="12">{x_label}</text>'
    )
    parts.append(
        f'<text x="16" y="{(y0 + y1) / 2:.0f}" text-anchor="middle"'
        f' font-size="12" transform="rotate(-90 16 {(y0 + y1) / 2:.0f})">'
        f"{y_label}</text>"
    )
    return px, py


def _svg_line_plot(path, x, series, x_label, y_label, title):
    """Polyline plot; ``series`` is a list of (label, y-array) pairs."""
    width, height = 640, 440
    box = (64, 36, 616, 392)
    x = np.asarray(x, dtype=float)
    finite = [y[np.isfinite(y)] for _, y in series if np.any(np.isfinite(y))]
    if finite:
        y_lo = min(float(v.min()) for v in finite)
        y_hi = max(float(v.max()) for v in finite)
    else:
        y_lo, y_hi = 0.0, 1.0
    pad = 0.05 * (y_hi - y_lo) or 0.05
    y_lo, y_hi = y_lo - pad, y_hi + pad
    x_lo, x_hi = float(x.min()), float(x.max())
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5

    parts = _svg_open(width, height, title)
    px, py = _svg_axes(parts, box, x_lo, x_hi, y_lo, y_hi, x_label, y_label)
    for i, (label, y) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        run = []
        y = np.asarray(y, dtype=float)
        for xi, yi in zip(x, y):
            if math.isfinite(yi):
                run.append(f"{px(xi):.2f},{py(yi):.2f}")
            elif run:
                parts.append(
                    f'<polyline points="{" ".join(run)}" fill="none"'
                    f' stroke="{color}" stroke-width="1.6"/>'
                )
                run = []
        if run:
            parts.append(
                f'<polyline points="{" ".join(run)}" fill="none"'
                f' stroke="{color}" stroke-width="1.6"/>'
            )
        ly = box[1] + 16 + 15 * i
        lx = box[2] - 150
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}"'
            f' stroke="{color}" stroke-width="1.6"/>'
        )
        parts.append(
            f'<text x="{lx + 28}" y="{ly}" font-size="11">{label}</text>'
        )
    parts.append("</svg>")
    _write_lines(path, parts)


_CMAP_STOPS = (
    (0.267, 0.005, 0.329),
    (0.128, 0.567, 0.551),
    (0.993, 0.906, 0.144),
)


def _cmap(t: float) -> str:
    t = min(1.0, max(0.0, t))
    if t < 0.5:
        a, b, u = _CMAP_STOPS[0], _CMAP_STOPS[1], 2.0 * t
    else:
        a, b, u = _CMAP_STOPS[1], _CMAP_STOPS[2], 2.0 * t - 1.0
    return "#%02x%02x%02x" % tuple(
        int(round(255.0 * ((1.0 - u) * ai + u * bi))) for ai, bi in zip(a, b)
    )


def _svg_heatmap(path, xs, ys, grid, x_label, y_label, title):
    """Cell heatmap; ``grid[i, j]`` is the value at (xs[i], ys[j])."""
    width, height = 700, 470
    box = (64, 36, 560, 412)
    x0, y0, x1, y1 = box
    grid = np.asarray(grid, dtype=float)
    finite = grid[np.isfinite(grid)]
    v_lo = float(finite.min()) if finite.size else 0.0
    v_hi = float(finite.max()) if finite.size else 1.0
    span = (v_hi - v_lo) or 1.0
    nx, ny = len(xs), len(ys)
    cw = (x1 - x0) / nx
    chh = (y1 - y0) / ny

    parts = _svg_open(width, height, title)
    for i in range(nx):
        rx = x0 + i * cw
        for j in range(ny):
            v = grid[i, j]
            if not math.isfinite(v):
                continue
            ry = y1 - (j + 1) * chh
            parts.append(
                f'<rect x="{rx:.1f}" y="{ry:.1f}" width="{cw + 0.1:.1f}"'
                f' height="{chh + 0.1:.1f}" fill="{_cmap((v - v_lo) / span)}"/>'
            )
    px, py = _svg_axes(
        parts, box, float(xs[0]), float(xs[-1]), float(ys[0]), float(ys[-1]),
        x_label, y_label,
    )
    bar_x, bar_w, steps = 596, 18, 32
    for k in range(steps):
        t0 = k / steps
        by = y1 - (y1 - y0) * (k + 1) / steps
        parts.append(
            f'<rect x="{bar_x}" y="{by:.1f}" width="{bar_w}"'
            f' height="{(y1 - y0) / steps + 0.1:.1f}" fill="{_cmap(t0)}"/>'
        )
    parts.append(
        f'<rect x="{bar_x}" y="{y0}" width="{bar_w}" height="{y1 - y0}"'
        ' fill="none" stroke="#333333"/>'
    )
    parts.append(
        f'<text x="{bar_x + bar_w + 6}" y="{y1 + 4}" font-size="11">{v_lo:.3g}</text>'
    )
    parts.append(
        f'<text x="{bar_x + bar_w + 6}" y="{y0 + 10}" font-size="11">{v_hi:.3g}</text>'
    )
    parts.append("</svg>")
    _write_lines(path, parts)


# ----------------------------------------------------------- coeff, sweep


def _emit_rows(kinds, param_names, param_rows, cells_rows, path):
    header = list(param_names)
    for kind in kinds:
        header.append(kind)
        header.append(f"{kind}_status")
    lines = [",".join(header)]
    failed = False
    for params, cells in zip(param_rows, cells_rows):
        row = [_num(v) for v in params]
        for cell in cells:
            value, status = _cell_text(cell)
            row.extend((value, status))
            failed = failed or _cell_failed(cell)
        lines.append(",".join(row))
    _write_lines(path, lines)
    return failed


def _cmd_coeff(args) -> int:
    kinds = _check_kinds(args.kind, args.combine_th)
    channel = _channel_from_args(args)
    cells = _kind_cells(channel, kinds, args.tol)
    failed = _emit_rows(kinds, [], [[]], [cells], None)
    return EXIT_SOLVER if failed else EXIT_OK


def _cmd_sweep(args) -> int:
    kinds = _check_kinds(args.kind, args.combine_th)
    if args.step <= 0:
        raise UsageError("--step must be positive")
    if args.start > args.stop:
        raise UsageError("--start must not exceed --stop")
    if not args.channel:
        raise UsageError("sweep needs --channel (file channels have no knob)")
    fixed = {
        flag: getattr(args, flag)
        for flag in _PARAM_FLAGS
        if getattr(args, flag, None) is not None and flag != args.sweep
    }
    if "d" in fixed:
        fixed["d"] = int(fixed["d"])
    count = int(math.floor((args.stop - args.start) / args.step + 1e-9))
    grid = [args.start + i * args.step for i in range(count + 1)]
    tasks = []
    for value in grid:
        params = dict(fixed)
        params[args.sweep] = value
        _build_channel(args.channel, params)  # fail fast on a bad point
        tasks.append((args.channel, params, tuple(kinds), args.tol))
    results = _run_tasks(tasks, args.jobs)
    failed = _emit_rows(
        kinds, [args.sweep], [[v] for v in grid], results, args.out
    )
    if args.svg:
        series = []
        for k, kind in enumerate(kinds):
            ys = np.array(
                [
                    math.nan if cells[k][2] else cells[k][0]
                    for cells in results
                ]
            )
            series.append((kind, ys))
        _svg_line_plot(
            args.svg, grid, series, args.sweep, "coefficient",
            f"{args.channel}: {', '.join(kinds)}",
        )
    return EXIT_SOLVER if failed else EXIT_OK


# ----------------------------------------------------------------- figures


def _affine_grid(start: float, stop: float, n: int) -> list[float]:
    return [start + (stop - start) * i / (n - 1) for i in range(n)]


def _fig_line(outdir, name, family, fixed, sweep_name, grid, cols, jobs, tol,
              title):
    """One-parameter figure; ``cols`` are (column, kind, one_minus) triples."""
    kinds = tuple(kind for _, kind, _ in cols)
    tasks = []
    for value in grid:
        params = dict(fixed)
        params[sweep_name] = value
        tasks.append((family, params, kinds, tol))
    results = _run_tasks(tasks, jobs)

    header = [sweep_name]
    for col, kind, _ in cols:
        header.append(col)
        if kind not in _NO_STATUS_KINDS:
            header.append(f"{col}_status")
    lines = [",".join(header)]
    for value, cells in zip(grid, results):
        row = [_num(value)]
        for (col, kind, one_minus), cell in zip(cols, cells):
            v, status, not_applicable = cell
            out_v = math.nan if not_applicable else (1.0 - v if one_minus else v)
            row.append(NAN_LITERAL if not_applicable else _num(out_v))
            if kind not in _NO_STATUS_KINDS:
                row.append(status)
        lines.append(",".join(row))
    csv_path = os.path.join(outdir, f"{name}.csv")
    _write_lines(csv_path, lines)

    series = []
    for k, (col, _, one_minus) in enumerate(cols):
        ys = np.array(
            [
                math.nan
                if cells[k][2]
                else (1.0 - cells[k][0] if one_minus else cells[k][0])
                for cells in results
            ]
        )
        series.append((col, ys))
    svg_path = os.path.join(outdir, f"{name}.svg")
    _svg_line_plot(svg_path, grid, series, sweep_name, "value", title)
    return [csv_path, svg_path]


def _fig_surface(outdir, name, kinds_cols, jobs, tol, title, n=51):
    """GAD surface over (p, eta); ``kinds_cols`` are (column, kind) pairs."""
    axis = _affine_grid(0.0, 1.0, n)
    kinds = tuple(kind for _, kind in kinds_cols)
    tasks = []
    for p in axis:
        for eta in axis:
            tasks.append(("gad", {"p": p, "eta": eta}, kinds, tol))
    results = _run_tasks(tasks, jobs)

    header = ["p", "eta"] + [col for col, _ in kinds_cols]
    lines = [",".join(header)]
    grids = [np.empty((n, n)) for _ in kinds_cols]
    idx = 0
    for i, p in enumerate(axis):
        for j, eta in enumerate(axis):
            cells = results[idx]
            idx += 1
            row = [_num(p), _num(eta)]
            for k in range(len(kinds_cols)):
                v = math.nan if cells[k][2] else cells[k][0]
                grids[k][i, j] = v
                row.append(_num(v))
            lines.append(",".join(row))
    csv_path = os.path.join(outdir, f"{name}.csv")
    _write_lines(csv_path, lines)

    paths = [csv_path]
    many = len(kinds_cols) > 1
    for k, (col, _) in enumerate(kinds_cols):
        svg_path = os.path.join(
            outdir, f"{name}_{col}.svg" if many else f"{name}.svg"
        )
        _svg_heatmap(svg_path, axis, axis, grids[k], "p", "eta",
                     f"{title}: {col}" if many else title)
        paths.append(svg_path)
    return paths


def _make_figure(which, outdir, jobs, tol):
    dep_grid = _affine_grid(0.0, 4.0 / 3.0, 101)
    if which == "fig1":
        return _fig_surface(outdir, "fig1", [("alpha", "alpha")], jobs, tol,
                            "alpha of generalized amplitude damping")
    if which == "fig2":
        return _fig_line(
            outdir, "fig2", "depolarizing", {}, "p", dep_grid,
            [("alpha", "alpha", False), ("alphaT", "alphaT", False)],
            jobs, tol, "depolarizing: alpha and alphaT",
        )
    if which == "fig3":
        paths = []
        for eta in (0.5, 0.6, 0.7, 0.8):
            paths.extend(
                _fig_line(
                    outdir, f"fig3_eta{eta:g}", "gad", {"eta": eta}, "p",
                    _affine_grid(0.0, 1.0, 76),
                    [
                        ("one_minus_alpha", "alpha", True),
                        ("one_minus_alphaH", "alphaH", True),
                    ],
                    jobs, tol,
                    f"amplitude damping eta={eta:g}: contraction bounds",
                )
            )
        return paths
    if which == "fig4":
        return _fig_line(
            outdir, "fig4", "depolarizing", {}, "p", dep_grid,
            [("rev", "rev", False), ("revT", "revT", False)],
            jobs, tol, "depolarizing: reverse coefficients",
        )
    if which == "fig5":
        return _fig_surface(outdir, "fig5", [("rev", "rev")], jobs, tol,
                            "reverse alpha of generalized amplitude damping")
    if which == "fig6":
        return _fig_surface(
            outdir, "fig6",
            [("lower", "dp_lower"), ("upper", "dp_upper")],
            jobs, tol, "data-processing range",
        )
    if which == "fig7":
        return _fig_line(
            outdir, "fig7", "bitflip", {}, "p", _affine_grid(0.0, 1.0, 51),
            [
                ("one_minus_rev", "rev", True),
                ("abs_one_minus_two_p", "abs12p", False),
                ("eta_tr", "eta_tr", False),
            ],
            jobs, tol, "bit flip: expansion bounds",
        )
    if which == "fig8":
        return _fig_line(
            outdir, "fig8", "gad", {"p": 1.0}, "eta",
            _affine_grid(0.0, 1.0, 51),
            [
                ("one_minus_alpha", "alpha", True),
                ("one_minus_alphaH", "alphaH", True),
                ("one_minus_revH", "revH", True),
                ("one_minus_rev", "rev", True),
            ],
            jobs, tol, "amplitude damping p=1: range bounds",
        )
    raise UsageError(f"unknown figure {which!r}")


FIGURES = tuple(f"fig{i}" for i in range(1, 9))


def _cmd_figures(args) -> int:
    which = list(args.which)
    if "all" in which:
        which = list(FIGURES)
    for name in which:
        if name not in FIGURES:
            raise UsageError(
                f"unknown figure {name!r}; admissible: {', '.join(FIGURES)}, all"
            )
    os.makedirs(args.outdir, exist_ok=True)
    for name in which:
        for path in _make_figure(name, args.outdir, args.jobs, args.tol):
            print(f"wrote {path}")
    return EXIT_OK


# ------------------------------------------------------------------ check


class _Recorder:
    def __init__(self, suite: str):
        self.suite = suite
        self.passed = 0
        self.failed = 0
        self.first = None

    def __call__(self, check: str, ok: bool, **detail):
        if ok:
            self.passed += 1
            return
        self.failed += 1
        if self.first is None:
            self.first = {"suite": self.suite, "check": check}
            self.first.update({k: _jsonable(v) for k, v in detail.items()})


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, np.ndarray):
        return np.round(v, 9).tolist()
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _rand_herm(rng, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (g + g.conj().T)


def _rand_state(rng, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def _suite_linalg(rng, tol, rec):
    for _ in range(10):
        dim = int(rng.integers(2, 9))
        h = _rand_herm(rng, dim)
        lam, vec = hermlin.eig_hermitian(h)
        recon_err = float(np.max(np.abs(vec @ np.diag(lam) @ vec.conj().T - h)))
        rec("eig_reconstruction", recon_err <= 1e-9 * dim, dim=dim, err=recon_err)
        ortho = float(np.max(np.abs(vec.conj().T @ vec - np.eye(dim))))
        rec("eig_orthonormal", ortho <= 1e-9, dim=dim, err=ortho)
        tn = hermlin.trace_norm(h)
        tn_ref = float(np.sum(np.abs(np.linalg.eigvalsh(h))))
        rec("trace_norm", abs(tn - tn_ref) <= 1e-9, dim=dim, err=abs(tn - tn_ref))
    for _ in range(10):
        a, b_m, c, d_m = (_rand_herm(rng, 2) for _ in range(4))
        err = float(
            np.max(
                np.abs(
                    hermlin.kron(a, b_m) @ hermlin.kron(c, d_m)
                    - hermlin.kron(a @ c, b_m @ d_m)
                )
            )
        )
        rec("kron_mixed_product", err <= 1e-11, err=err)
        ab = hermlin.kron(a, b_m)
        pt_err = float(
            np.max(np.abs(hermlin.partial_trace(ab, (2, 2), 0) - np.trace(b_m) * a))
        )
        rec("partial_trace_product", pt_err <= 1e-11, err=pt_err)
        twice = hermlin.partial_transpose(
            hermlin.partial_transpose(ab, (2, 2), 1), (2, 2), 1
        )
        rec("partial_transpose_involution", np.array_equal(twice, ab))
    for dim in (2, 3, 4):
        basis = hermlin.hermitian_basis(dim)
        gram = np.array(
            [[np.trace(x @ y).real for y in basis] for x in basis]
        )
        g_err = float(np.max(np.abs(gram - np.eye(dim * dim))))
        rec("basis_orthonormal", g_err <= 1e-12, dim=dim, err=g_err)
        h = _rand_herm(rng, dim)
        back = hermlin.hermitian_from_coords(hermlin.hermitian_coords(h), dim)
        rec("coords_roundtrip", float(np.max(np.abs(back - h))) <= 1e-11, dim=dim)
        emb = hermlin.real_embed(h)
        doubled = np.sort(np.concatenate([np.linalg.eigvalsh(h)] * 2))
        e_err = float(np.max(np.abs(np.linalg.eigvalsh(emb) - doubled)))
        rec("real_embed_spectrum", e_err <= 1e-10, dim=dim, err=e_err)


def _suite_channel(rng, tol, rec):
    for _ in range(8):
        d_in = int(rng.integers(2, 4))
        d_out = int(rng.integers(2, 4))
        n = ch.random_channel(d_in, d_out, seed=int(rng.integers(1 << 31)))
        j = n.choi.matrix
        rec("choi_psd", bool(np.linalg.eigvalsh(j)[0] >= -hermlin.PSD_TOL))
        marg = hermlin.partial_trace(j, (d_out, d_in), 1)
        m_err = float(np.max(np.abs(marg - np.eye(d_in) / d_in)))
        rec("choi_marginal", m_err <= 1e-9, err=m_err)
        rho = _rand_state(rng, d_in)
        back = ch.channel_from_choi(n.choi)
        rt_err = float(np.max(np.abs(back(rho) - n(rho))))
        rec("kraus_choi_roundtrip", rt_err <= 1e-9, err=rt_err)
    for _ in range(5):
        n = ch.random_channel(2, 2, seed=int(rng.integers(1 << 31)))
        m = ch.random_channel(2, 2, seed=int(rng.integers(1 << 31)))
        composed = ch.compose(m, n).choi.matrix
        linked = ch.link_product(m.choi, n.choi).matrix
        c_err = float(np.max(np.abs(composed - linked)))
        rec("compose_matches_link", c_err <= 1e-9, err=c_err)
        rho, sigma = _rand_state(rng, 2), _rand_state(rng, 2)
        t_err = float(
            np.max(
                np.abs(
                    ch.tensor(m, n)(np.kron(rho, sigma))
                    - np.kron(m(rho), n(sigma))
                )
            )
        )
        rec("tensor_on_products", t_err <= 1e-9, err=t_err)
    dep0 = ch.depolarizing(0.0).choi.matrix
    ident = ch.identity_channel(2).choi.matrix
    rec("depolarizing_zero_is_identity",
        float(np.max(np.abs(dep0 - ident))) <= 1e-12)
    flags = ch.validate(ch.depolarizing(0.5))
    rec("validate_cptp", flags.is_cp and flags.is_tp)
    rec("validate_ppt_depolarizing", ch.validate(ch.depolarizing(1.0)).is_ppt)
    rec("validate_not_ppt_identity", not ch.validate(ch.identity_channel(2)).is_ppt)


def _suite_sdp(rng, tol, rec):
    for _ in range(8):
        dim = int(rng.integers(2, 7))
        c = _rand_herm(rng, dim).real
        c = 0.5 * (c + c.T)
        problem = sdpcore.SdpProblem(
            num_vars=1,
            objective=np.array([1.0]),
            blocks=[sdpcore.SdpBlock(c=c, coeffs=[(0, np.eye(dim))])],
        )
        sol = sdpcore.solve(problem, tol=tol)
        target = float(np.linalg.eigvalsh(c)[0])
        rec("lambda_min_value", abs(sol.objective_value - target) <= 1e-6,
            dim=dim, got=sol.objective_value, want=target)
        rec("lambda_min_status", sol.status == sdpcore.STATUS_OPTIMAL,
            status=sol.status)
        rec("lambda_min_gap", sol.gap <= 10.0 * tol, gap=sol.gap)
    for _ in range(5):
        n = int(rng.integers(2, 6))
        cvec = rng.normal(size=n)
        problem = sdpcore.SdpProblem(
            num_vars=n,
            objective=cvec,
            blocks=[],
            lower=np.zeros(n),
            upper=np.ones(n),
        )
        sol = sdpcore.solve(problem, tol=tol)
        want = float(np.sum(np.clip(cvec, 0.0, None)))
        rec("box_lp_value", abs(sol.objective_value - want) <= 1e-6,
            got=sol.objective_value, want=want)
    problem = sdpcore.SdpProblem(
        num_vars=2,
        objective=np.array([1.0, 0.0]),
        blocks=[],
        eq_matrix=np.array([[1.0, 1.0], [2.0, 2.0]]),
        eq_rhs=np.array([1.0, 2.0]),
        lower=np.zeros(2),
        upper=np.ones(2),
    )
    sol = sdpcore.solve(problem, tol=tol)
    rec("redundant_equalities", abs(sol.objective_value - 1.0) <= 1e-6,
        got=sol.objective_value)


def _suite_doeblin(rng, tol, rec):
    for p in (0.0, 0.3, 0.7, 1.0):
        got = db.alpha(ch.depolarizing(p), tol).value
        rec("alpha_depolarizing", abs(got - p) <= 1e-6, p=p, got=got)
    got = db.alpha_transpose(ch.depolarizing(1.2), tol).value
    rec("alpha_transpose_depolarizing", abs(got - 0.8) <= 1e-5, got=got)
    rec("alpha_transpose_identity_flag",
        db.alpha_transpose(ch.identity_channel(2), tol).not_applicable)
    for p in (0.2, 0.9):
        got = db.reverse_alpha(ch.depolarizing(p), tol).value
        rec("reverse_alpha_depolarizing", abs(got - p) <= 1e-5, p=p, got=got)
    got = db.reverse_alpha_transpose(ch.identity_channel(2), tol).value
    rec("reverse_transpose_identity", abs(got - 2.0 / 3.0) <= 1e-5, got=got)
    for p, eta in ((0.3, 0.4), (0.8, 0.75)):
        got = db.reverse_alpha_hermitian(ch.gad(p, eta), tol).value
        rec("reverse_hermitian_gad", abs(got - (1.0 - eta)) <= 1e-4,
            p=p, eta=eta, got=got)

    def rand_qubit():
        return ch.random_channel(2, 2, seed=int(rng.integers(1 << 31)))

    for _ in range(6):
        n, m = rand_qubit(), rand_qubit()
        lam = float(rng.uniform(0.2, 0.8))
        mixed = ch.channel_from_choi(
            ch.ChoiMatrix(
                lam * n.choi.matrix + (1.0 - lam) * m.choi.matrix, 2, 2
            )
        )
        a_mix = db.alpha(mixed, tol).value
        a_sep = lam * db.alpha(n, tol).value + (1.0 - lam) * db.alpha(m, tol).value
        rec("alpha_concave", a_mix >= a_sep - 1e-6, lam=lam,
            mixed=a_mix, split=a_sep)
        a_cat = db.alpha(ch.compose(m, n), tol).value
        a_n, a_m = db.alpha(n, tol).value, db.alpha(m, tol).value
        bound = a_n + a_m - a_n * a_m
        rec("alpha_concatenation", a_cat >= a_n + a_m - a_n * a_m - 1e-6,
            got=a_cat, bound=bound)
    for _ in range(3):
        n, m = rand_qubit(), rand_qubit()
        a_t = db.alpha(ch.tensor(n, m), tol).value
        prod = db.alpha(n, tol).value * db.alpha(m, tol).value
        rec("alpha_supermultiplicative", a_t >= prod - 1e-6, got=a_t, bound=prod)
    for _ in range(6):
        n = rand_qubit()
        a = db.alpha(n, tol).value
        a_h = db.alpha_hermitian(n, tol).value
        rec("alpha_below_hermitian", a <= a_h + 1e-6, a=a, aH=a_h)
        eta_hi = oracles.eta_tr_qubit(n)
        rec("contraction_bound_vs_oracle", eta_hi <= 1.0 - a + 1e-3,
            eta=eta_hi, a=a)
        rev = db.reverse_alpha(n, tol).value
        eta_lo = oracles.eta_tr_expansion_qubit(n)
        rec("expansion_bound_vs_oracle", 1.0 - rev <= eta_lo + 1e-3,
            rev=rev, eta=eta_lo)


def _suite_classical(rng, tol, rec):
    for _ in range(15):
        c = oracles.random_biso(rng)
        a = oracles.classical_doeblin(c)
        g = oracles.classical_gamma(c)
        ra = oracles.classical_reverse_alpha(c)
        rec("classical_chain_lower", a <= g + 1e-9, alpha=a, gamma=g,
            matrix=c.matrix)
        rec("classical_chain_upper", g <= ra + 1e-5, gamma=g, rev=ra,
            matrix=c.matrix)
    for p in (0.11, 0.3):
        got = oracles.classical_reverse_alpha(oracles.bsc(p))
        want = oracles.binary_entropy(p)
        rec("bsc_reverse_alpha", abs(got - want) <= 1e-4, p=p, got=got,
            want=want)
    rec("bec_capacity",
        abs(oracles.classical_capacity_biso(oracles.bec(0.3)) - 0.7) <= 1e-9)
    rec("bec_doeblin",
        abs(oracles.classical_doeblin(oracles.bec(0.25)) - 0.25) <= 1e-12)
    for _ in range(8):
        size = int(rng.integers(2, 4))
        raw = rng.uniform(size=(size, size))
        p_mat = raw / raw.sum(axis=0, keepdims=True)
        quantum = db.alpha(ch.classical_embed(p_mat), tol).value
        classical = float(p_mat.min(axis=1).sum())
        rec("classical_embedding_alpha", abs(quantum - classical) <= 1e-5,
            got=quantum, want=classical, matrix=p_mat)


SUITES = {
    "linalg": _suite_linalg,
    "channel": _suite_channel,
    "sdp": _suite_sdp,
    "doeblin": _suite_doeblin,
    "classical": _suite_classical,
}


def _cmd_check(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    print(f"seed: {args.seed}")
    first = None
    for name in names:
        rng = np.random.default_rng(args.seed)
        rec = _Recorder(name)
        SUITES[name](rng, args.tol, rec)
        print(f"suite {name}: {rec.passed} passed, {rec.failed} failed")
        if first is None and rec.first is not None:
            first = rec.first
    if first is not None:
        print(f"first counterexample: {json.dumps(first)}")
        return EXIT_CHECK
    return EXIT_OK


# ------------------------------------------------------------------- main


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=sdpcore.DEFAULT_TOL)

    chan = argparse.ArgumentParser(add_help=False)
    chan.add_argument("--channel")
    chan.add_argument("--file")
    chan.add_argument("--combine-th", action="store_true", dest="combine_th")
    for flag in _PARAM_FLAGS:
        chan.add_argument(f"--{flag}", type=float)

    parser = argparse.ArgumentParser(prog="qdoeblin")
    sub = parser.add_subparsers(dest="command", required=True)

    p_coeff = sub.add_parser("coeff", parents=[common, chan])
    p_coeff.add_argument("--kind", action="append", required=True)
    p_coeff.set_defaults(func=_cmd_coeff)

    p_sweep = sub.add_parser("sweep", parents=[common, chan])
    p_sweep.add_argument("--kind", action="append", required=True)
    p_sweep.add_argument("--sweep", required=True)
    p_sweep.add_argument("--start", type=float, required=True)
    p_sweep.add_argument("--stop", type=float, required=True)
    p_sweep.add_argument("--step", type=float, required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--svg")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_fig = sub.add_parser("figures", parents=[common])
    p_fig.add_argument("--which", action="append", required=True)
    p_fig.add_argument("--outdir", required=True)
    p_fig.set_defaults(func=_cmd_figures)

    p_check = sub.add_parser("check", parents=[common])
    p_check.add_argument(
        "--suite", default="all", choices=list(SUITES) + ["all"]
    )
    p_check.set_defaults(func=_cmd_check)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
