"""Command-line front end: construct | thresholds | spectra | simulate.

Bulk numeric output is CSV with a ``#schema=`` header comment and the
effective defaults echoed as ``# key=value`` lines; configs and sidecars are
JSON.  Output files are written atomically (temp file + rename).  Exit
codes: 0 success, 2 usage/validation, 3 numerical failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .codes import lift, read_alist, run_monte_carlo, LiftedCode
from .enumerators import (
    SPECTRA_CSV_HEADER,
    contour_csv_rows,
    shape_csv_row,
    zero_contour,
    _ShapeEvaluator,
)
from .protograph import (
    BaseMatrix,
    ProtographError,
    design_rate,
    degree_profile,
    regular_ensemble,
    tarja_ensemble,
    terminate,
    write_base_matrix_text,
)
from .thresholds import (
    Awgn,
    BracketError,
    bec_threshold,
    rca_threshold,
    sigma_from_ebno_db,
)

log = logging.getLogger("scldpc")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


class UsageError(ValueError):
    pass


def _atomic_write(path: str, data: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".scldpc-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_int_list(text: str) -> list[int]:
    """Accepts '3,5,10' and ranges '5..8' (inclusive), possibly mixed."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            a, b = part.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise UsageError(f"empty range '{part}'")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    if not out:
        raise UsageError("empty integer list")
    return out


def _parse_float_list(text: str) -> list[float]:
    out = [float(p) for p in text.split(",") if p.strip()]
    if not out:
        raise UsageError("empty list")
    return out


def _family_base(family: str, J: int | None, L: int) -> BaseMatrix:
    if family == "regular":
        if J is None:
            raise UsageError("--J is required for the regular family")
        if J < 2:
            raise UsageError("J must be >= 2")
        return terminate(regular_ensemble(J, L))
    if family == "tarja":
        if J is not None:
            raise UsageError("the tarja family takes no --J")
        return terminate(tarja_ensemble(L))
    raise UsageError(f"unknown family '{family}'")


def _header(schema: str, params: dict) -> list[str]:
    lines = [f"#schema={schema}", f"# scldpc={__version__}"]
    for k in sorted(params):
        lines.append(f"# {k}={params[k]}")
    return lines


# --- subcommands ----------------------------------------------------------------


def cmd_construct(args) -> int:
    base = _family_base(args.family, args.J, args.L)
    rate = design_rate(base)
    prof = degree_profile(base)
    _atomic_write(args.out, write_base_matrix_text(base))
    sidecar = {
        "family": args.family,
        "J": args.J,
        "L": args.L,
        "m_s": (args.J - 1) if args.family == "regular" else 1,
        "n_c": base.n_c,
        "n_v": base.n_v,
        "punctured": sorted(base.punctured),
        "rate": [rate.rate.numerator, rate.rate.denominator],
        "rate_float": float(rate.rate),
        "nonpositive_rate": rate.nonpositive,
        "assumed_full_rank": rate.assumed_full_rank,
        "variable_degrees": prof.variable_degrees.tolist(),
        "check_degrees": prof.check_degrees.tolist(),
    }
    _atomic_write(args.out + ".json", json.dumps(sidecar, indent=2) + "\n")
    log.info("wrote %s and %s.json", args.out, args.out)
    return EXIT_OK


def cmd_thresholds(args) -> int:
    Ls = _parse_int_list(args.L)
    params = {
        "family": args.family,
        "J": args.J,
        "channel": args.channel,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "sigma_lo": args.sigma_lo,
        "sigma_hi": args.sigma_hi,
        "target_mean": args.target_mean,
        "residual": args.residual,
    }
    rows = []
    failed = 0
    for L in sorted(Ls):
        base = _family_base(args.family, args.J, L)
        rate = float(design_rate(base).rate)
        try:
            if args.channel == "bec":
                res = bec_threshold(
                    base, tol=args.tol, max_iter=args.max_iter, residual=args.residual
                )
                rows.append(
                    f"{args.family},{args.J or ''},{L},{rate:.10g},"
                    f"{res.param_star:.10g},,"
                )
            else:
                res = rca_threshold(
                    base,
                    tol=args.tol,
                    sigma_lo=args.sigma_lo,
                    sigma_hi=args.sigma_hi,
                    max_iter=args.max_iter,
                    target_mean=args.target_mean,
                )
                rows.append(
                    f"{args.family},{args.J or ''},{L},{rate:.10g},"
                    f"{res.param_star:.10g},{res.ebno_db:.10g},{res.gap_db:.10g}"
                )
        except (BracketError, ValueError) as e:
            log.error("L=%d failed: %s", L, e)
            failed += 1
    out = _header(f"scldpc.thresholds.{args.channel}/1", params)
    out.append("family,J,L,rate,param_star,ebno_db,gap_db")
    out.extend(rows)
    _atomic_write(args.out, "\n".join(out) + "\n")
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_spectra(args) -> int:
    Ls = _parse_int_list(args.L)
    deltas = _parse_float_list(args.delta_grid)
    params = {
        "family": args.family,
        "J": args.J,
        "mode": args.mode,
        "delta_grid": args.delta_grid,
        "alpha_max": args.alpha_max,
        "n_grid": args.n_grid,
        "bisect_tol": args.bisect_tol,
        "restarts": args.restarts,
        "seed": args.seed,
    }
    rows = []
    for L in sorted(Ls):
        base = _family_base(args.family, args.J, L)
        if args.mode == "contour":
            contour = zero_contour(
                base,
                deltas,
                label=L,
                alpha_max=args.alpha_max,
                n_grid=args.n_grid,
                bisect_tol=args.bisect_tol,
                restarts=args.restarts,
                seed=args.seed,
            )
            rows.extend(contour_csv_rows(contour))
        else:  # shape samples r(alpha, delta*alpha)
            alphas = np.linspace(
                args.alpha_max / args.n_grid, args.alpha_max, args.n_grid
            )
            for ratio in deltas:
                ev = _ShapeEvaluator(
                    base,
                    two_part=ratio > 0,
                    restarts=args.restarts,
                    seed=args.seed,
                )
                for a in alphas:
                    r = ev.r(float(a), float(ratio * a))
                    rows.append(shape_csv_row(L, ratio, float(a), r))
    out = _header("scldpc.spectra/1", params)
    out.append(SPECTRA_CSV_HEADER)
    out.extend(rows)
    _atomic_write(args.out, "\n".join(out) + "\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.preset == "fig1-desk":
        args.family = args.family or "regular"
        args.J = args.J if args.J is not None else 3
        args.L = args.L if args.L is not None else 50
        args.N = args.N if args.N is not None else 500
    ebnos = _parse_float_list(args.ebno)
    if args.load_alist:
        H = read_alist(open(args.load_alist).read())
        n_v = H.shape[1]
        base = None
        code = LiftedCode(
            H=H,
            N=1,
            puncture_mask=np.zeros(n_v, dtype=bool),
            origin=BaseMatrix(np.asarray(H.todense())),
            seed=args.seed,
        )
        rate = float(design_rate(code.origin).rate)
    else:
        if args.L is None or args.N is None:
            raise UsageError("--L and --N are required unless --load-alist is given")
        base = _family_base(args.family or "regular", args.J, args.L)
        rate = float(design_rate(base).rate)
        code = lift(base, args.N, seed=args.seed)
    if rate <= 0:
        raise UsageError("nonpositive design rate: E_b/N_0 sweep undefined")
    params = {
        "family": args.family,
        "J": args.J,
        "L": args.L,
        "N": args.N,
        "seed": args.seed,
        "rate": rate,
        "max_frames": args.max_frames,
        "min_frame_errors": args.min_frame_errors,
        "max_iter": args.max_iter,
        "preset": args.preset,
    }
    log.info("simulate: master seed = %d", args.seed)
    rows = []
    for ebno in ebnos:
        sigma = sigma_from_ebno_db(ebno, rate)
        stats = run_monte_carlo(
            code,
            Awgn(sigma),
            max_frames=args.max_frames,
            min_frame_errors=args.min_frame_errors,
            max_iter=args.max_iter,
            master_seed=args.seed,
        )
        rows.append((ebno, stats))
    rows.sort(key=lambda t: t[0])
    out = _header("scldpc.sim.awgn/1", params)
    out.append("ebno_db,frames,bit_errors,frame_errors,ber,fer,avg_iters")
    for ebno, st in rows:
        out.append(
            f"{ebno:.6g},{st.frames},{st.bit_errors},{st.frame_errors},"
            f"{st.ber:.6g},{st.fer:.6g},{st.avg_iterations:.6g}"
        )
    _atomic_write(args.out, "\n".join(out) + "\n")
    return EXIT_OK


# --- argument parsing -------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="scldpc",
        description="Terminated protograph LDPC ensembles: construction, "
        "thresholds, weight/trapping-set spectra, BP simulation.",
    )
    p.add_argument("--verbose", action="store_true", help="log INFO to stderr")
    sub = p.add_subparsers(dest="cmd", required=True)

    def add_family(q, require_L=True):
        q.add_argument("--family", choices=["regular", "tarja"], default="regular")
        q.add_argument("--J", type=int, default=None, help="variable degree J (regular family)")
        if require_L:
            q.add_argument("--L", type=int, required=True, help="termination factor")

    q = sub.add_parser("construct", help="write a terminated base matrix + JSON sidecar")
    add_family(q)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_construct)

    q = sub.add_parser("thresholds", help="BEC or RCA-AWGN threshold sweep over L")
    q.add_argument("--family", choices=["regular", "tarja"], default="regular")
    q.add_argument("--J", type=int, default=None)
    q.add_argument("--L", required=True, help="L list: '3,5,10' or range '5..8'")
    q.add_argument("--channel", choices=["bec", "awgn"], default="awgn")
    q.add_argument("--tol", type=float, default=1e-4, help="bisection width (default 1e-4)")
    q.add_argument("--max-iter", type=int, default=20000, help="DE/RCA iteration cap (default 20000)")
    q.add_argument("--residual", type=float, default=1e-6, help="BEC convergence residual (default 1e-6)")
    q.add_argument("--sigma-lo", type=float, default=0.01, help="RCA bracket low (default 0.01)")
    q.add_argument("--sigma-hi", type=float, default=1.2, help="RCA bracket high (default 1.2)")
    q.add_argument("--target-mean", type=float, default=100.0, help="RCA convergence mean (default 100)")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_thresholds)

    q = sub.add_parser("spectra", help="zero contours or spectral shape samples")
    q.add_argument("--family", choices=["regular", "tarja"], default="regular")
    q.add_argument("--J", type=int, default=None)
    q.add_argument("--L", required=True, help="L list: '3..12' or '3,6'")
    q.add_argument(
        "--delta-grid",
        default="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0,1.1,1.2,1.3,1.4,1.5,1.6,1.7,1.8,1.9,2.0",
        help="ratio grid b/a (default 0,0.1,...,2.0)",
    )
    q.add_argument("--mode", choices=["contour", "shape"], default="contour")
    q.add_argument("--alpha-max", type=float, default=0.2, help="coarse-grid upper alpha (default 0.2)")
    q.add_argument("--n-grid", type=int, default=200, help="coarse-grid points (default 200)")
    q.add_argument("--bisect-tol", type=float, default=1e-6, help="crossing bisection tol (default 1e-6)")
    q.add_argument("--restarts", type=int, default=20, help="random restarts (default 20)")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_spectra)

    q = sub.add_parser("simulate", help="lift and sweep E_b/N_0 under BP decoding")
    q.add_argument("--family", choices=["regular", "tarja"], default=None)
    q.add_argument("--J", type=int, default=None)
    q.add_argument("--L", type=int, default=None)
    q.add_argument("--N", type=int, default=None, help="lifting factor")
    q.add_argument("--seed", type=int, default=0, help="master seed (echoed to the log)")
    q.add_argument("--ebno", default="1.0,2.0,3.0", help="E_b/N_0 sweep in dB (default 1.0,2.0,3.0)")
    q.add_argument("--max-frames", type=int, default=1000, help="frame cap per point (default 1000)")
    q.add_argument("--min-frame-errors", type=int, default=100, help="frame-error stop (default 100)")
    q.add_argument("--max-iter", type=int, default=100, help="BP iteration cap (default 100)")
    q.add_argument("--load-alist", default=None, help="decode this alist instead of lifting")
    q.add_argument(
        "--preset",
        choices=["fig1-desk"],
        default=None,
        help="fig1-desk: N=500, L=50 desk-scale run (not a reproduction of the N=6000 setting)",
    )
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (UsageError, ProtographError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except BracketError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as e:
        print(f"i/o failure: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
