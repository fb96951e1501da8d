"""Command-line front end.

Subcommands: ``spectrum`` (rapidities and the decay ladder), ``ness``
(sector steady state), ``evolve`` (observable time series by any method),
``dump`` (quadratic-form data per sector), and ``reproduce fig1|fig2|fig3``
(figure datasets).  Exit codes: 0 success, 1 model error, 2 numerical
failure, 64 usage error.  Outputs are deterministic: fixed orderings, no
timestamps.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import ivp, observables, oracle
from .errors import ModelError, NumericalFailure
from .fockspace import build_sector_bases
from .model import (
    ModelSpec,
    Sector,
    build_structure_matrices,
    enumerate_sectors,
    load_model,
    single_spin_boson,
)
from .spectral import build_spectral_data, mode_eigenvalue
from .superop import build_quadratic_form, sector_shift
from .util import complex_to_pairs, format_float, unvec

USAGE_EXIT = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"{value} is not positive")
    return value


def _positive_float(raw: str) -> float:
    value = float(raw)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"{value} is not positive")
    return value


def _build_parser() -> _Parser:
    p = _Parser(prog="thirdq", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True):
        if model:
            sp.add_argument("--model", required=True, help="model JSON file")
        sp.add_argument("--cutoff", type=_positive_int,
                        default=ivp.DEFAULT_CUTOFF,
                        help="Fock truncation (default 30)")
        sp.add_argument("--trunc", type=_positive_int,
                        default=ivp.DEFAULT_TRUNC,
                        help="per-index mode truncation (default 18)")
        sp.add_argument("--tmax", type=_positive_float, default=10.0)
        sp.add_argument("--npoints", type=_positive_int, default=200)
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default=None,
                        help="output format (default by command)")

    sp = sub.add_parser("spectrum", help="rapidities and decay-ladder values")
    common(sp)
    sp.add_argument("--max-total", type=_positive_int, default=3,
                    help="ladder depth |m| (default 3)")

    sp = sub.add_parser("ness", help="sector steady state as a dense matrix")
    common(sp)
    sp.add_argument("--sector", required=True,
                    help='comma-separated eigenvalues, left then right, '
                         'e.g. "+1,-1"')

    sp = sub.add_parser("evolve", help="observable expectation time series")
    common(sp)
    sp.add_argument("--initial", default="fock:0",
                    help='boson part: "fock:K" or "coherent:RE[,IM]"')
    sp.add_argument("--spin", default="plus_x",
                    choices=("plus_x", "up", "down", "mixed"))
    sp.add_argument("--observable", default="sx",
                    choices=sorted(observables.NAMED))
    sp.add_argument("--method", default="spectral",
                    choices=("spectral", "oracle", "closed_form", "small_z",
                             "all"))

    sp = sub.add_parser("dump", help="quadratic form and per-sector shifts")
    common(sp)

    sp = sub.add_parser("reproduce", help="figure-reproduction datasets")
    sp.add_argument("figure", choices=("fig1", "fig2", "fig3"))
    common(sp, model=False)
    sp.add_argument("--trunc0", type=_positive_int, default=30,
                    help="reference truncation for fig1 (default 30)")
    return p


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def _json_dumps(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _parse_sector(raw: str, spec: ModelSpec) -> Sector:
    parts = raw.split(",")
    if len(parts) != 2 * spec.n:
        raise ModelError(
            f"sector needs {2 * spec.n} comma-separated values, got {len(parts)}"
        )
    try:
        vals = [float(x) for x in parts]
    except ValueError as exc:
        raise ModelError(f"cannot parse sector {raw!r}") from exc
    want = Sector(sL=tuple(vals[: spec.n]), sR=tuple(vals[spec.n:]))
    for sector in enumerate_sectors(spec):
        if np.allclose(sector.sL, want.sL, atol=1e-9) and \
                np.allclose(sector.sR, want.sR, atol=1e-9):
            return sector
    raise ModelError(f"sector {raw!r} not in the model's spectrum")


def _parse_initial(raw: str, spin_name: str) -> ivp.InitialState:
    spin = {
        "plus_x": ivp.spin_plus_x,
        "up": ivp.spin_up,
        "down": ivp.spin_down,
        "mixed": ivp.spin_mixed,
    }[spin_name]()
    kind, _, arg = raw.partition(":")
    if kind == "fock":
        return ivp.InitialState.fock(int(arg or 0), spin=spin)
    if kind == "coherent":
        bits = [float(x) for x in arg.split(",")] if arg else [0.0]
        alpha = bits[0] + 1j * (bits[1] if len(bits) > 1 else 0.0)
        return ivp.InitialState.coherent(alpha, spin=spin)
    raise ModelError(f'cannot parse initial state {raw!r}; use "fock:K" or '
                     f'"coherent:RE[,IM]"')


def _time_grid(args) -> np.ndarray:
    return ivp.default_time_grid(args.tmax, args.npoints)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_spectrum(args) -> None:
    spec = load_model(args.model)
    sm = build_structure_matrices(spec)
    qf = build_quadratic_form(sm, spec)
    sd = build_spectral_data(qf)
    ladder = []
    from itertools import product
    for m in sorted(product(range(args.max_total + 1), repeat=2 * spec.n),
                    key=lambda m: (sum(m), m)):
        if sum(m) > args.max_total:
            continue
        lam = mode_eigenvalue(sd.betas, np.array(m))
        ladder.append({"m": list(m), "value": [lam.real, lam.imag]})
    payload = {
        "betas": complex_to_pairs(sd.betas),
        "stable": sd.stable,
        "lambda_ladder": ladder,
    }
    _emit(_json_dumps(payload), args.out)


def _cmd_ness(args) -> None:
    spec = load_model(args.model)
    sector = _parse_sector(args.sector, spec)
    _rep, _sd, bases = build_sector_bases(spec, args.cutoff)
    basis = bases[sector]
    mat = unvec(basis.ness_vec, basis.dim_b)
    payload = {
        "cutoff": args.cutoff,
        "sector": sector.label(),
        "matrix": complex_to_pairs(mat),
    }
    _emit(_json_dumps(payload), args.out)


def _cmd_dump(args) -> None:
    spec = load_model(args.model)
    sm = build_structure_matrices(spec)
    qf = build_quadratic_form(sm, spec)
    shifts = []
    for sector in enumerate_sectors(spec):
        sh = sector_shift(qf, sector)
        shifts.append({
            "sector": sector.label(),
            "d": complex_to_pairs(sh.d),
            "S0": [sh.S0.real, sh.S0.imag],
        })
    payload = {
        "X": complex_to_pairs(qf.X),
        "Y": complex_to_pairs(qf.Y),
        "S": complex_to_pairs(qf.S),
        "G": complex_to_pairs(qf.G),
        "sectors": shifts,
    }
    _emit(_json_dumps(payload), args.out)


def _check_reference_scenario(args) -> None:
    # the closed-form curves hold for the vacuum x (I + sigma_x)/2 state
    # and the sigma_x observable only
    if not _reference_scenario(args):
        raise ModelError(
            "closed-form and slow-mode curves are defined for the default "
            "scenario only (--initial fock:0 --spin plus_x --observable sx)"
        )


def _reference_scenario(args) -> bool:
    return (args.initial == "fock:0" and args.spin == "plus_x"
            and args.observable == "sx")


def _evolution_results(spec, rho0, args, times):
    if args.method == "all":
        # reference curves only apply to the default scenario; drop them
        # silently in "all" mode rather than failing the whole run
        methods = ["spectral", "oracle"]
        if _reference_scenario(args):
            methods += ["closed_form", "small_z"]
    else:
        methods = [args.method]
    results = []
    for method in methods:
        if method == "spectral":
            res, _ = ivp.evolve_spectral(
                spec, rho0, observables.by_name(args.observable), times,
                cutoff=args.cutoff, trunc=args.trunc)
            results.append(res)
        elif method == "oracle":
            cfg = oracle.IntegratorConfig(cutoff=args.cutoff)
            results.append(oracle.evolve_observable_oracle(
                spec, rho0, observables.by_name(args.observable), times, cfg))
        elif method == "closed_form":
            _check_reference_scenario(args)
            results.append(ivp.closed_form_curve(spec, times))
        elif method == "small_z":
            _check_reference_scenario(args)
            results.append(ivp.small_z_curve(spec, times))
    return results


def _cmd_evolve(args) -> None:
    spec = load_model(args.model)
    rho0 = _parse_initial(args.initial, args.spin)
    times = _time_grid(args)
    results = _evolution_results(spec, rho0, args, times)
    if (args.format or "csv") == "json":
        payload = [
            {"method": r.method, "t": list(map(float, r.times)),
             "value": list(map(float, r.real_values()))}
            for r in results
        ]
        _emit(_json_dumps(payload), args.out)
        return
    lines = ["t,value,method"]
    for r in results:
        for t, v in zip(r.times, r.real_values()):
            lines.append(f"{format_float(t)},{format_float(v)},{r.method}")
    _emit("\n".join(lines) + "\n", args.out)


# ---------------------------------------------------------------------------
# figure datasets
# ---------------------------------------------------------------------------

FIG2_PANEL_TIMES = (0.1, 1.0, 10.0)
FIG3_Z2_SWEEP = (0.0, 0.1, 0.2, 0.4)
FIG_Z1 = 0.2


def _paper_initial() -> ivp.InitialState:
    return ivp.InitialState.fock(0, spin=ivp.spin_plus_x())


def _fig1_rows(args):
    truncs = [t for t in range(2, args.trunc0, 2)]
    rows = []
    for z1 in (0.2, 1.0):
        spec = single_spin_boson(z1)
        _rep, _sd, bases = build_sector_bases(spec, args.cutoff)
        blocks = ivp.project_initial_state(_paper_initial(), spec, args.cutoff)
        ref = ivp.solve_coefficients(blocks, bases, args.trunc0)
        for trunc in truncs:
            fit = ivp.refit(ref, blocks, trunc)
            for sector in enumerate_sectors(spec):
                diff = max(
                    abs(fit.coefficients[sector][m]
                        - ref.coefficients[sector][m])
                    for m in fit.indices
                )
                rows.append((z1, sector.label(sep=";"), trunc, diff))
    return rows


def _cmd_reproduce_fig1(args) -> None:
    rows = _fig1_rows(args)
    lines = ["z1,sector,trunc,diff"]
    for z1, sector, trunc, diff in rows:
        lines.append(f"{format_float(z1)},{sector},{trunc},{format_float(diff)}")
    _emit("\n".join(lines) + "\n", args.out)


def _cmd_reproduce_fig2(args) -> None:
    spec = single_spin_boson(FIG_Z1)
    rho0 = _paper_initial()
    times = _time_grid(args)
    results = [
        ivp.closed_form_curve(spec, times),
        ivp.small_z_curve(spec, times),
        oracle.evolve_observable_oracle(
            spec, rho0, observables.sigma_x, times,
            oracle.IntegratorConfig(cutoff=args.cutoff)),
    ]

    _rep, _sd, bases = build_sector_bases(spec, args.cutoff)
    blocks = ivp.project_initial_state(rho0, spec, args.cutoff)
    panel_truncs = [t for t in range(4, 26, 2)]
    top = max(args.trunc, panel_truncs[-1])
    ref = ivp.solve_coefficients(blocks, bases, top)
    rep = _rep
    sx = observables.sigma_x(rep)

    fit = ivp.refit(ref, blocks, args.trunc) if args.trunc < top else ref
    results.append(ivp.evolve_observable(fit, sx, times))

    panel = []
    for trunc in panel_truncs:
        sub = ivp.refit(ref, blocks, trunc)
        res = ivp.evolve_observable(sub, sx, np.array(FIG2_PANEL_TIMES))
        panel.append((trunc, res))

    lines = ["t,value,method"]
    for r in results:
        for t, v in zip(r.times, r.real_values()):
            lines.append(f"{format_float(t)},{format_float(v)},{r.method}")
    for trunc, r in panel:
        for t, v in zip(r.times, r.real_values()):
            lines.append(
                f"{format_float(t)},{format_float(v)},spectral_trunc{trunc:02d}"
            )
    _emit("\n".join(lines) + "\n", args.out)


def _cmd_reproduce_fig3(args) -> None:
    times = _time_grid(args)
    lines = ["t,z2,value,method"]
    for z2 in FIG3_Z2_SWEEP:
        spec = single_spin_boson(FIG_Z1, z2)
        closed = ivp.closed_form_curve(spec, times)
        orc = oracle.evolve_observable_oracle(
            spec, _paper_initial(), observables.sigma_x, times,
            oracle.IntegratorConfig(cutoff=args.cutoff))
        for r in (closed, orc):
            for t, v in zip(r.times, r.real_values()):
                lines.append(
                    f"{format_float(t)},{format_float(z2)},"
                    f"{format_float(v)},{r.method}"
                )
    _emit("\n".join(lines) + "\n", args.out)


def _cmd_reproduce(args) -> None:
    if args.figure == "fig1":
        _cmd_reproduce_fig1(args)
    elif args.figure == "fig2":
        _cmd_reproduce_fig2(args)
    else:
        _cmd_reproduce_fig3(args)


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "ness": _cmd_ness,
    "evolve": _cmd_evolve,
    "dump": _cmd_dump,
    "reproduce": _cmd_reproduce,
}


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        _COMMANDS[args.command](args)
    except ModelError as exc:
        print(f"thirdq: model error: {exc}", file=sys.stderr)
        return 1
    except NumericalFailure as exc:
        print(f"thirdq: numerical failure: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"thirdq: {exc}", file=sys.stderr)
        return 1
    except (json.JSONDecodeError, ValueError) as exc:
        print(f"thirdq: model error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
