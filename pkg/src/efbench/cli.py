"""``efbench`` command-line front end.

Exit codes: 0 success, 1 tolerance exceeded (``compare --tol``), 2 usage or
validation error, 3 numerical failure. Every failure prints one line
``efbench: error: <kind>: <message>`` on stderr.

Tables go to stdout unless ``--out`` is given; then the CSV is written
(relative paths under ``$EFBENCH_OUTPUT_DIR`` when set) together with a
``<out>.manifest.json`` sidecar describing the run.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import analytic, compare as cmp, dispersion, excitation, specfun, tdfd
from .errors import NumericalError, ValidationError
from .fieldio import fmt, output_dir, write_field_csv, write_manifest, write_table_csv
from .material import (
    BUILTIN_MATERIALS,
    evaluate_frf,
    get_builtin,
    load_material,
    lossless_limit,
    serialize_material,
)

PROG = "efbench"
EXIT_OK, EXIT_TOLERANCE, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3
VISIBLE_COMMANDS = ("material", "dispersion", "excitation", "solve", "tdfd", "compare")

log = logging.getLogger(PROG)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# shared helpers


def _material(args):
    if getattr(args, "file", None):
        mat = load_material(args.file)
    else:
        mat = get_builtin(args.material)
    return lossless_limit(mat) if args.lossless else mat


def material_identity(mat) -> dict:
    text = serialize_material(mat)
    return {
        "name": mat.name,
        "sha256": hashlib.sha256(text.encode()).hexdigest(),
        "c_inf": mat.c_inf,
    }


def _resolve(path) -> Path:
    p = Path(path)
    return p if p.is_absolute() else output_dir() / p


def _params(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _emit_table(args, header, rows, command, mat=None, extra=None):
    if args.out is None:
        out = sys.stdout
        out.write(",".join(header) + "\n")
        for row in rows:
            out.write(",".join(fmt(v) for v in row) + "\n")
        return
    path = _resolve(args.out)
    write_table_csv(path, header, rows)
    write_manifest(path, command, _params(args),
                   material_identity(mat) if mat is not None else None, [path], extra)
    print(f"wrote {path}", file=sys.stderr)


def _grid(lo, hi, n, log_spacing=False):
    n = int(n)
    if n < 1:
        raise ValidationError("grid needs at least one point")
    if log_spacing:
        if not (lo > 0 and hi > 0):
            raise ValidationError("logarithmic spacing needs positive bounds")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


PLOT_TEMPLATE = '''\
"""Plot {csv_name}; generated by {prog} {version}."""
import csv
import matplotlib.pyplot as plt

with open({csv_path!r}, newline="") as fh:
    rows = list(csv.reader(fh))
header, data = rows[0], [[float(v) for v in r] for r in rows[1:]]
t = [r[0] for r in data]
for j, label in enumerate(header[1:], start=1):
    plt.plot(t, [r[j] for r in data], label={label_prefix!r} + label)
plt.xlabel({xlabel!r})
plt.ylabel({ylabel!r})
plt.title({title!r})
plt.legend()
plt.show()
'''


def _write_plot_script(path, csv_path, title, xlabel="t (s)", ylabel="p (Pa)",
                       label_prefix="x = ") -> Path:
    path = _resolve(path)
    path.write_text(PLOT_TEMPLATE.format(
        csv_name=Path(csv_path).name, prog=PROG, version=__version__, csv_path=str(csv_path),
        label_prefix=label_prefix, xlabel=xlabel, ylabel=ylabel, title=title))
    return path


def _write_field(args, result, command, mat, extra=None):
    if args.out is None:
        if args.plot_script:
            raise UsageError("--plot-script needs --out")
        sys.stdout.write("t," + ",".join(fmt(r) for r in result.receivers) + "\n")
        for row in np.column_stack([result.times, result.matrix()]):
            sys.stdout.write(",".join(fmt(v) for v in row) + "\n")
        return
    path = _resolve(args.out)
    write_field_csv(result, path)
    outputs = [path]
    if args.plot_script:
        outputs.append(_write_plot_script(args.plot_script, path,
                                          f"{command}: {mat.name}"))
    meta = {"diagnostics": result.diagnostics}
    meta.update(extra or {})
    write_manifest(path, command, _params(args), material_identity(mat), outputs, meta)
    print(f"wrote {path}", file=sys.stderr)


def _excitation(args):
    return excitation.ExcitationSpec(args.fc)


# ---------------------------------------------------------------------------
# commands


def cmd_material(args) -> int:
    mat = _material(args)
    if args.dump:
        sys.stdout.write(serialize_material(mat))
        return EXIT_OK
    w = _grid(*args.table)
    c = np.atleast_1d(evaluate_frf(mat.compressibility, w))
    v = np.atleast_1d(evaluate_frf(mat.specific_volume, w))
    rows = np.column_stack([w, c.real, c.imag, v.real, v.imag])
    _emit_table(args, ["omega", "C_re", "C_im", "v_re", "v_im"], rows, "material", mat)
    return EXIT_OK


def cmd_dispersion(args) -> int:
    mat = _material(args)
    w = _grid(*args.omega, log_spacing=args.log)
    table = dispersion.dispersion_table(mat, w)
    rows = [(s.omega, s.k.real, s.k.imag, s.phase_velocity, s.group_velocity, s.attenuation)
            for s in table]
    header = ["omega", "k_re", "k_im", "v_phase", "v_group", "attenuation"]
    _emit_table(args, header, rows, "dispersion", mat)
    return EXIT_OK


def cmd_excitation(args) -> int:
    spec = _excitation(args)
    if args.sums:
        for n, s in excitation.endpoint_derivative_sums(spec).items():
            print(f"order {n}: {s}")
        return EXIT_OK
    fs = args.fs or 64 * args.fc
    sig = excitation.sample(spec, fs, args.duration or spec.support)
    _emit_table(args, ["t", "p0"], np.column_stack([sig.times, sig.samples]), "excitation")
    return EXIT_OK


def default_duration(mat, fc, distance) -> float:
    """Pulse length plus twice the travel time at the centre-frequency phase speed."""
    vp = float(dispersion.phase_velocity(mat, 2 * math.pi * fc))
    return 1.0 / fc + 2.0 * distance / vp


def cmd_solve(args) -> int:
    mat = _material(args)
    r0 = args.r0 if args.dim != 1 else 0.0
    if args.dim != 1 and args.r0 is None:
        raise UsageError("--r0 is required for --dim 2 and 3")
    geom = analytic.Geometry(args.dim, args.receivers, r0 or 0.0)
    spec = _excitation(args)
    fs = args.fs or 64 * args.fc
    distance = max(geom.receivers) - geom.r0
    duration = args.duration or default_duration(mat, args.fc, distance)
    sig = excitation.sample(spec, fs, duration)
    result = analytic.solve(mat, geom, sig, pad_factor=args.pad)
    _write_field(args, result, "solve", mat)
    return EXIT_OK


def cmd_tdfd(args) -> int:
    mat = _material(args)
    dx = args.dx or mat.c_inf / (40 * args.fc)
    duration = args.duration or default_duration(mat, args.fc, max(args.receivers))
    cfg = tdfd.SimConfig.for_duration(mat, dx, duration, args.receivers, cfl=args.cfl,
                                      dt=args.dt, order=args.order)
    spec = _excitation(args)
    sig = excitation.sample(spec, 1.0 / cfg.dt, max(duration, spec.support))
    result = tdfd.run(cfg, sig)
    config = {"L": cfg.L, "nx": cfg.nx, "dt": cfg.dt, "nt": cfg.nt, "cfl": cfg.cfl,
              "order": cfg.order, "receivers": list(cfg.receivers)}
    _write_field(args, result, "tdfd", mat, {"sim_config": config})
    return EXIT_OK


def cmd_compare(args) -> int:
    report = cmp.compare(args.reference, args.other,
                         labels=(str(args.reference), str(args.other)))
    text = report.to_text()
    if args.tol is not None:
        verdict = "PASS" if report.passes(args.tol) else "FAIL"
        text += f"tolerance {args.tol:g} on rel_L2: {verdict}\n"
    sys.stdout.write(text)
    outputs = []
    if args.report:
        path = _resolve(args.report)
        path.write_text(text)
        outputs.append(path)
    if args.csv:
        path = _resolve(args.csv)
        path.write_text(report.to_csv())
        outputs.append(path)
    if outputs:
        write_manifest(outputs[0], "compare", _params(args), None, outputs)
    if args.tol is not None and not report.passes(args.tol):
        return EXIT_TOLERANCE
    return EXIT_OK


_SPECFUN = {
    "h1": lambda nu, z, m: specfun.hankel1(nu, z, m),
    "h2": lambda nu, z, m: specfun.hankel2(nu, z, m),
    "h1s": lambda nu, z, m: specfun.hankel_scaled(1, nu, z, m),
    "h2s": lambda nu, z, m: specfun.hankel_scaled(2, nu, z, m),
    "j": lambda nu, z, m: (specfun.j0 if nu == 0 else specfun.j1)(z, m),
    "y": lambda nu, z, m: (specfun.y0 if nu == 0 else specfun.y1)(z, m),
    "wronskian": lambda nu, z, m: specfun.wronskian_jy(z),
}


def cmd_specfun(args) -> int:
    mod = _grid(*args.modulus, log_spacing=True)
    arg = _grid(*args.arg)
    z = (mod[:, None] * np.exp(1j * arg[None, :])).ravel()
    f = np.atleast_1d(_SPECFUN[args.function](args.order, z, args.method))
    rows = np.column_stack([z.real, z.imag, f.real, f.imag])
    _emit_table(args, ["z_re", "z_im", "f_re", "f_im"], rows, "specfun")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_material_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--material", "--name", dest="material", default="mat1",
                   help=f"built-in material ({', '.join(BUILTIN_MATERIALS)})")
    g.add_argument("--file", help="material file (.matl)")
    p.add_argument("--lossless", action="store_true",
                   help="drop all poles (nondispersive limit)")


def _add_output_args(p, plot=False):
    p.add_argument("--out", help="output CSV (stdout when omitted)")
    if plot:
        p.add_argument("--plot-script", help="also write a matplotlib script plotting --out")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=PROG, description="Reference solutions for dispersive absorbers.")
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(VISIBLE_COMMANDS) + "}",
                                parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("material", help="tabulate compressibility and specific volume")
    _add_material_args(p)
    p.add_argument("--table", nargs=3, type=float, metavar=("OMEGA_MIN", "OMEGA_MAX", "N"),
                   default=[0.0, 2 * math.pi * 1e4, 11], help="angular-frequency grid (rad/s)")
    p.add_argument("--dump", action="store_true", help="print the material file instead")
    _add_output_args(p)
    p.set_defaults(func=cmd_material)

    p = sub.add_parser("dispersion", help="wavenumber, velocities and attenuation")
    _add_material_args(p)
    p.add_argument("--omega", nargs=3, type=float, metavar=("OMEGA_MIN", "OMEGA_MAX", "N"),
                   default=[0.0, 2 * math.pi * 1e4, 101], help="angular-frequency grid (rad/s)")
    p.add_argument("--log", action="store_true", help="logarithmic spacing")
    _add_output_args(p)
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("excitation", help="sample the boundary pulse")
    p.add_argument("--fc", type=float, default=700.0, help="centre frequency (Hz)")
    p.add_argument("--fs", type=float, help="sample rate (Hz), default 64 fc")
    p.add_argument("--duration", type=float, help="record length (s), default 1/fc")
    p.add_argument("--sums", action="store_true", help="print exact endpoint-derivative sums")
    _add_output_args(p)
    p.set_defaults(func=cmd_excitation)

    p = sub.add_parser("solve", help="semi-analytic solution in 1D, 2D or 3D")
    p.add_argument("--dim", type=int, choices=(1, 2, 3), default=1)
    _add_material_args(p)
    p.add_argument("--fc", type=float, default=700.0, help="centre frequency (Hz)")
    p.add_argument("--receivers", type=float, nargs="+", required=True,
                   help="receiver distances (1D) or radii (m)")
    p.add_argument("--r0", type=float, help="hole radius (m), 2D/3D only")
    p.add_argument("--fs", type=float, help="sample rate (Hz), default 64 fc")
    p.add_argument("--duration", type=float,
                   help="record length (s); default covers twice the travel time")
    p.add_argument("--pad", type=int, default=analytic.DEFAULT_PAD_FACTOR,
                   help="zero-padding factor")
    _add_output_args(p, plot=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("tdfd", help="1D time-domain finite-difference run")
    _add_material_args(p)
    p.add_argument("--fc", type=float, default=700.0, help="centre frequency (Hz)")
    p.add_argument("--receivers", type=float, nargs="+", required=True, help="positions (m)")
    p.add_argument("--dx", type=float, help="cell size (m), default c_inf / (40 fc)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--cfl", type=float, default=0.5, help="Courant number")
    g.add_argument("--dt", type=float, help="time step (s), overrides --cfl")
    p.add_argument("--order", type=int, choices=(2, 4), default=4, help="spatial order")
    p.add_argument("--duration", type=float,
                   help="simulated time (s); default covers twice the travel time")
    _add_output_args(p, plot=True)
    p.set_defaults(func=cmd_tdfd)

    p = sub.add_parser("compare", help="error metrics between two field CSVs")
    p.add_argument("reference", help="reference CSV (normalises the errors)")
    p.add_argument("other", help="CSV to check")
    p.add_argument("--tol", type=float, help="exit 1 if any relative L2 error exceeds this")
    p.add_argument("--report", help="write the text report here")
    p.add_argument("--csv", help="write per-receiver metrics as CSV here")
    p.set_defaults(func=cmd_compare)

    # not listed in --help: raw special-function tables for testing
    p = sub.add_parser("specfun")
    p.add_argument("--function", choices=sorted(_SPECFUN), default="h2")
    p.add_argument("--order", type=int, choices=(0, 1), default=0)
    p.add_argument("--modulus", nargs=3, type=float, default=[0.1, 50.0, 20],
                   metavar=("MIN", "MAX", "N"))
    p.add_argument("--arg", nargs=3, type=float, default=[-math.pi / 2, 0.0, 9],
                   metavar=("MIN", "MAX", "N"))
    p.add_argument("--method", choices=("auto", "series", "asymptotic", "quadrature"),
                   default="auto")
    _add_output_args(p)
    p.set_defaults(func=cmd_specfun)
    return parser


def _fail(kind: str, message) -> None:
    text = " ".join(str(message).split())
    print(f"{PROG}: error: {kind}: {text}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        _fail("usage", exc)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format=f"{PROG}: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        _fail("usage", exc)
        return EXIT_USAGE
    except ValidationError as exc:
        _fail("validation", exc)
        return EXIT_USAGE
    except NumericalError as exc:
        _fail("numerical", exc)
        return EXIT_NUMERICAL
    except OSError as exc:
        _fail("io", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
