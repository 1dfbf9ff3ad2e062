"""Command-line harness.

Exit codes: 0 when every check passes, 1 for usage, configuration or
hypothesis errors, 2 when a guarantee that should hold was violated.
"""
from __future__ import annotations

import argparse
import csv
import io as _stdio
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from kreinpert import io
from kreinpert.decomp import block_diagonalize, commutation_identities
from kreinpert.errors import AssertionFailure, ConfigInvalid, KreinPertError, MismatchWithClosedForm
from kreinpert.krein import reality_and_diagonalizability, verify_tpi
from kreinpert.linalg import spectral_norm
from kreinpert.oscillator import PTPotential, build_model, potential_matrix, run_case, xgauss
from kreinpert.riccati import (
    BlockOperator,
    norm_bound,
    scalar_closed_form,
    solve_dual,
    solve_fixed_point,
)
from kreinpert.sylvester import (
    ANNULAR_GAP,
    GENERIC,
    SUBORDINATED,
    SylvesterProblem,
    guarantee,
    solve_contour,
    solve_kron,
    solve_semigroup,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ASSERTION = 2

DISPOSITIONS = (GENERIC, SUBORDINATED, ANNULAR_GAP)
GUARANTEED = "guaranteed"
REALITY_ONLY = "reality_only"
BEYOND = "beyond"


# ---------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep description; ``v_norm_grid`` holds ratios ``||V|| / delta``.

    Instances are reproducible: trial ``t`` draws from a PCG64 stream
    seeded by ``SeedSequence([seed, t])``.
    """

    seed: int
    disposition: str
    sizes: tuple
    d: float = 1.0
    v_norm_grid: tuple = (0.45,)
    trials: int = 1
    tolerances: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    j_mode: bool = True

    def __post_init__(self):
        if self.disposition not in DISPOSITIONS:
            raise ConfigInvalid(f"disposition must be one of {DISPOSITIONS}")
        if len(self.sizes) != 2 or min(self.sizes) < 1:
            raise ConfigInvalid("sizes must be two positive integers")
        n0, n1 = self.sizes
        if self.disposition == ANNULAR_GAP and n1 < 2:
            raise ConfigInvalid("a gap disposition needs n1 >= 2")
        if self.disposition == GENERIC and min(n0, n1) < 2:
            raise ConfigInvalid("a generic disposition needs n0, n1 >= 2")
        if not self.d > 0.0:
            raise ConfigInvalid("d must be positive")
        if self.trials < 1:
            raise ConfigInvalid("trials must be at least 1")
        if not self.v_norm_grid or any(v < 0.0 for v in self.v_norm_grid):
            raise ConfigInvalid("v_norm_grid must be a non-empty list of non-negative ratios")
        unknown = set(self.tolerances) - {"angle_slack", "riccati_tol"}
        if unknown:
            raise ConfigInvalid(f"unknown tolerance keys {sorted(unknown)}")
        fmt = self.output.get("format", "csv")
        if fmt not in ("csv", "report"):
            raise ConfigInvalid("output.format must be 'csv' or 'report'")

    @property
    def delta(self) -> float:
        return 2.0 * self.d / math.pi if self.disposition == GENERIC else self.d

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(doc) - known
        if extra:
            raise ConfigInvalid(f"unknown config keys {sorted(extra)}")
        try:
            return cls(
                seed=int(doc["seed"]),
                disposition=str(doc["disposition"]),
                sizes=tuple(int(s) for s in doc["sizes"]),
                d=float(doc.get("d", 1.0)),
                v_norm_grid=tuple(float(v) for v in doc.get("v_norm_grid", (0.45,))),
                trials=int(doc.get("trials", 1)),
                tolerances=dict(doc.get("tolerances", {})),
                output=dict(doc.get("output", {})),
                j_mode=bool(doc.get("j_mode", True)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigInvalid):
                raise
            raise ConfigInvalid(f"bad config: {exc}") from None


@dataclass(frozen=True)
class SweepRow:
    seed: int
    trial: int
    disposition: str
    regime: str
    ratio: float
    v_norm: float
    delta: float
    max_imag: float
    theta_max: float
    bound: float
    enclosure_margin: float
    spectrum_real: bool
    enclosure_ok: str
    angle_ok: str
    passed: bool
    error: str


SWEEP_COLUMNS = tuple(f.name for f in fields(SweepRow))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, trial])))


def _spread(rng, count, d):
    return np.sort(rng.uniform(0.0, 2.0 * d, count))


def _sample_spectra(kind, n0, n1, d, rng):
    if kind == SUBORDINATED:
        s0 = -0.5 * d - np.concatenate([[0.0], _spread(rng, n0 - 1, d)])
        s1 = 0.5 * d + np.concatenate([[0.0], _spread(rng, n1 - 1, d)])
        return np.sort(s0), np.sort(s1)
    if kind == ANNULAR_GAP:
        w = rng.uniform(0.0, d)
        s0 = np.sort(np.concatenate([[0.0], rng.uniform(-w, w, n0 - 1)]))
        lo, hi = s0[0] - d, s0[-1] + d
        m = max(1, n1 // 2)
        lower = lo - np.concatenate([[0.0], _spread(rng, m - 1, d)])
        upper = hi + np.concatenate([[0.0], _spread(rng, n1 - m - 1, d)])
        return s0, np.sort(np.concatenate([lower, upper]))
    # generic: interleaved labels, neighbouring points of different parts
    # at least d apart, one pair at exactly d
    labels = np.array([0] * n0 + [1] * n1)
    while True:
        rng.shuffle(labels)
        jumps = np.flatnonzero(labels[1:] != labels[:-1])
        if len(jumps) >= 3:  # at least four runs, so each hull meets the other set
            break
    gaps = np.where(labels[1:] != labels[:-1],
                    d + rng.uniform(0.0, d, len(labels) - 1),
                    rng.uniform(0.05 * d, d, len(labels) - 1))
    anchor = int(rng.choice(jumps))
    pos = np.empty(len(labels))
    pos[anchor], pos[anchor + 1] = 0.0, d
    for k in range(anchor - 1, -1, -1):
        pos[k] = pos[k + 1] - gaps[k]
    for k in range(anchor + 2, len(labels)):
        pos[k] = pos[k - 1] + gaps[k - 1]
    return np.sort(pos[labels == 0]), np.sort(pos[labels == 1])


def _gaussian(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def generate_instance(config: ExperimentConfig, trial: int, ratio: float | None = None) -> BlockOperator:
    """Seeded instance with ``dist(spec A0, spec A1) = d`` and ``||V|| = ratio * delta``.

    The direction of ``B`` depends only on ``(seed, trial)``, so the grid
    points of one trial differ only by scale.
    """
    if ratio is None:
        ratio = config.v_norm_grid[0]
    if ratio < 0.0:
        raise ConfigInvalid("ratio must be non-negative")
    n0, n1 = config.sizes
    rng = trial_rng(config.seed, trial)
    s0, s1 = _sample_spectra(config.disposition, n0, n1, config.d, rng)
    target = ratio * config.delta
    b = _gaussian(rng, (n0, n1))
    b *= target / spectral_norm(b)
    if config.j_mode:
        c = -b.conj().T
    else:
        c = _gaussian(rng, (n1, n0))
        c *= target / spectral_norm(c)
    return BlockOperator(np.diag(s0), np.diag(s1), b, c)


def regime_of(config: ExperimentConfig, ratio: float) -> str:
    if ratio < 0.5:
        return GUARANTEED
    if config.disposition == GENERIC and ratio <= math.pi / 4.0:
        return REALITY_ONLY
    return BEYOND


def _flag(checked, failed):
    if not checked:
        return "na"
    return "false" if failed else "true"


def run_sweep(config: ExperimentConfig) -> list[SweepRow]:
    """One row per (trial, grid ratio), in deterministic order."""
    slack = float(config.tolerances.get("angle_slack", 1e-8))
    ric_tol = config.tolerances.get("riccati_tol")
    rows = []
    for trial in range(config.trials):
        for ratio in config.v_norm_grid:
            regime = regime_of(config, ratio)
            op = generate_instance(config, trial, ratio)
            try:
                if not config.j_mode:
                    raise ConfigInvalid("the reality pipeline needs j_mode = true")
                rep = verify_tpi(op, delta=config.delta, angle_slack=slack,
                                 tol=ric_tol, raise_on_failure=False)
            except KreinPertError as exc:
                rows.append(SweepRow(
                    config.seed, trial, config.disposition, regime, ratio,
                    spectral_norm(op.B), config.delta, math.nan, math.nan, math.nan,
                    math.nan, False, "na", "na", regime != GUARANTEED,
                    f"{type(exc).__name__}: {exc}",
                ))
                continue
            checked = regime == GUARANTEED
            fails = set(rep.failures)
            angle_failed = bool(fails & {"theta0", "theta1"})
            encl_failed = bool(fails & {"enclosure", "ambiguous_component", "component_count"})
            theta = max(rep.theta0_max, rep.theta1_max) if checked else math.nan
            rows.append(SweepRow(
                config.seed, trial, config.disposition, regime, ratio, rep.v_norm,
                rep.delta, rep.max_imag, theta, rep.theta_bound,
                -rep.enclosure_excess if checked else math.nan,
                rep.spectrum_real, _flag(checked, encl_failed), _flag(checked, angle_failed),
                (not fails) if checked else True, "",
            ))
    return rows


def _csv_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def rows_to_csv(rows) -> str:
    buf = _stdio.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([_csv_value(getattr(row, c)) for c in SWEEP_COLUMNS])
    return buf.getvalue()


def sweep_failures(rows) -> int:
    return sum(1 for r in rows if r.regime == GUARANTEED and not r.passed)


# ---------------------------------------------------------- reproduction

def _check(checks, name, value, expected, tol):
    err = float(np.max(np.abs(np.asarray(value) - np.asarray(expected)), initial=0.0))
    checks[name] = {"value": value, "expected": expected, "error": err, "tol": tol, "ok": bool(err <= tol)}


def _flag_check(checks, name, value, expected):
    checks[name] = {"value": bool(value), "expected": bool(expected), "ok": bool(value) == bool(expected)}


def reproduce(example: str, d: float | None = None, b: float | None = None,
              c: float | None = None) -> dict:
    """Rebuild a worked example, run the pipeline and compare with closed forms.

    Raises :class:`MismatchWithClosedForm` when a comparison fails; the
    returned document lists every comparison.
    """
    checks: dict = {}
    doc: dict = {"example": example}
    if example == "ex1":
        d, b = (1.0 if d is None else d), (0.4 if b is None else b)
        c = b if c is None else c
        op = BlockOperator([[-0.5 * d]], [[0.5 * d]], [[b]], [[-c]])
        sol = solve_fixed_point(op, d)
        roots = scalar_closed_form(d, b, c)
        lam = math.sqrt(0.25 * d * d - b * c)
        rv = reality_and_diagonalizability(op.L)
        _check(checks, "K", sol.K[0, 0], roots.k1, 1e-10)
        _check(checks, "norm_K", sol.norm, roots.k1, 1e-10)
        _check(checks, "eigenvalues", np.sort(rv.eigenvalues.real), [-lam, lam], 1e-10)
        _check(checks, "Z0", op.A0[0, 0] + b * sol.K[0, 0], -lam, 1e-10)
        if b == c:
            rep = verify_tpi(op)
            _check(checks, "angle_sharpness", math.tan(rep.theta0_max), rep.theta_bound, 1e-10)
            doc["report"] = rep
        doc.update(parameters={"d": d, "b": b, "c": c}, K=sol.K, eigenvalues=rv.eigenvalues,
                   closed_form={"K1": roots.k1, "K2": roots.k2})
    elif example == "ex2":
        d, b = (2.0 if d is None else d), (0.9 if b is None else b)
        c = b if c is None else c
        op = BlockOperator([[0.0]], np.diag([-d, d]), [[0.0, b]], [[0.0], [-c]])
        sol = solve_fixed_point(op, d)
        kplus = c / (0.5 * d + math.sqrt(0.25 * d * d - b * c))
        _check(checks, "k_minus", sol.K[0, 0], 0.0, 1e-10)
        _check(checks, "k_plus", sol.K[1, 0], kplus, 1e-10)
        _check(checks, "norm_K", sol.norm, norm_bound(b, c, d), 1e-10)
        doc.update(parameters={"d": d, "b": b, "c": c}, K=sol.K, closed_form={"k_plus": kplus})
    elif example == "exns":
        d, b = (2.0 if d is None else d), (2.0 if b is None else b)
        op = BlockOperator.j_selfadjoint([[-0.5 * d]], [[0.5 * d]], [[b]])
        rv = reality_and_diagonalizability(op.L)
        disc = b * b - 0.25 * d * d
        lam = rv.eigenvalues[np.argsort(rv.eigenvalues.imag)]
        if disc > 0.0:
            root = math.sqrt(disc)
            _check(checks, "eigenvalues", lam, [-1j * root, 1j * root], 1e-9)
            _flag_check(checks, "spectrum_real", rv.spectrum_real, False)
            x = complex(d / (2.0 * b), math.sqrt(1.0 - d * d / (4.0 * b * b)))
            doc["closed_form"] = {"X1": x, "X2": x.conjugate(), "abs_X": abs(x)}
        elif disc == 0.0:
            _check(checks, "eigenvalues", lam, [0.0, 0.0], 1e-7)
            _flag_check(checks, "spectrum_real", rv.spectrum_real, True)
            _flag_check(checks, "diagonalizable", rv.diagonalizable, False)
        else:
            root = math.sqrt(-disc)
            _check(checks, "eigenvalues", np.sort(rv.eigenvalues.real), [-root, root], 1e-9)
            _flag_check(checks, "spectrum_real", rv.spectrum_real, True)
            _flag_check(checks, "diagonalizable", rv.diagonalizable, True)
        doc.update(parameters={"d": d, "b": b}, eigenvalues=rv.eigenvalues, verdict=rv)
    else:
        raise ValueError(f"unknown example {example!r}")
    doc["checks"] = checks
    bad = [name for name, ch in checks.items() if not ch["ok"]]
    if bad:
        raise MismatchWithClosedForm(
            bad[0], f"{example}: {', '.join(bad)} disagree with the closed form", {"document": doc},
        )
    return doc


# ------------------------------------------------------------ front end

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _read_block(path) -> BlockOperator:
    doc = io.read_json(path)
    try:
        return BlockOperator(*(io.matrix_from_doc(doc[k]) for k in ("A0", "A1", "B", "C")))
    except KeyError as exc:
        raise ConfigInvalid(f"block document lacks field {exc}") from None


def _emit(obj, out):
    text = io.dumps(obj)
    if out in (None, "-"):
        sys.stdout.write(text + "\n")
    else:
        Path(out).write_text(text + "\n")


def _load_potential(spec: str, beta: float) -> PTPotential:
    if spec == "builtin:xgauss":
        return xgauss(beta)
    if spec.startswith("file:"):
        doc = io.read_json(spec[5:])
        coeffs = np.asarray(doc.get("b_coeffs", []), dtype=float)
        alpha = float(doc.get("gauss", 0.5))
        if coeffs.size == 0:
            raise ConfigInvalid("potential file needs non-empty 'b_coeffs'")

        def b(x):
            return np.polynomial.polynomial.polyval(x, coeffs) * np.exp(-alpha * x * x)

        try:
            return PTPotential(None, b, beta)
        except ValueError as exc:
            raise ConfigInvalid(str(exc)) from None
    raise ConfigInvalid(f"unknown potential {spec!r}")


def cmd_solve_sylvester(args):
    p = SylvesterProblem(io.read_matrix(args.a0), io.read_matrix(args.a1), io.read_matrix(args.y))
    if args.method == "kron":
        sol = solve_kron(p)
    elif args.method == "contour":
        sol = solve_contour(p)
    else:
        delta = args.delta if args.delta is not None else guarantee(p.A0, p.A1).delta
        sol = solve_semigroup(p, delta)
    _emit(sol, args.out)
    return EXIT_OK


def cmd_solve_riccati(args):
    op = _read_block(args.block)
    sol = (solve_dual if args.dual else solve_fixed_point)(op, args.delta)
    _emit(sol, args.out)
    return EXIT_OK


def cmd_diagonalize(args):
    op = _read_block(args.block)
    diag = block_diagonalize(op, args.delta)
    r0, r1 = commutation_identities(op, diag.K, diag.Kp)
    _emit({"diagonalization": diag, "identity_residuals": [r0, r1]}, args.out)
    return EXIT_OK


def cmd_verify_tpi(args):
    op = _read_block(args.block)
    rep = verify_tpi(op, delta=args.delta, disposition=args.disposition, raise_on_failure=False)
    _emit(rep, args.out)
    return EXIT_ASSERTION if rep.failures else EXIT_OK


def cmd_oscillator(args):
    model = build_model(args.n)
    pot = _load_potential(args.potential, args.beta)
    rep = run_case(model, pot)
    body = {"N": args.n, "beta": args.beta, "report": rep}
    if args.matrices:
        body["A"] = model.A
        body["V"] = potential_matrix(model, pot)
    _emit(body, args.out)
    return EXIT_OK


def cmd_sweep(args):
    config = ExperimentConfig.from_dict(io.read_json(args.config))
    rows = run_sweep(config)
    fails = sweep_failures(rows)
    out = args.out or config.output.get("path")
    if config.output.get("format", "csv") == "csv":
        text = rows_to_csv(rows)
        if out in (None, "-"):
            sys.stdout.write(text)
        else:
            Path(out).write_text(text)
    else:
        _emit({"config": config, "rows": rows, "guaranteed_failures": fails}, out)
    print(f"{len(rows)} rows, {fails} guaranteed-regime failures", file=sys.stderr)
    return EXIT_ASSERTION if fails else EXIT_OK


def cmd_reproduce(args):
    try:
        doc = reproduce(args.example, args.d, args.b, args.c)
    except MismatchWithClosedForm as exc:
        _emit(exc.details.get("document", {}), args.out)
        raise
    _emit(doc, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kreinpert", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.set_defaults(func=func)
        return p

    p = add("solve-sylvester", cmd_solve_sylvester, "solve X A0 - A1 X = Y")
    p.add_argument("--a0", required=True)
    p.add_argument("--a1", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--method", choices=("kron", "contour", "semigroup"), default="kron")
    p.add_argument("--delta", type=float, default=None)

    p = add("solve-riccati", cmd_solve_riccati, "solve K A0 - A1 K + K B K = C")
    p.add_argument("--block", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--dual", action="store_true", help="solve the dual equation instead")

    p = add("diagonalize", cmd_diagonalize, "block diagonalize L along the graph subspaces")
    p.add_argument("--block", required=True)
    p.add_argument("--delta", type=float, required=True)

    p = add("verify-tpi", cmd_verify_tpi, "reality, enclosure and angle checks for a J-self-adjoint L")
    p.add_argument("--block", required=True)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--disposition", choices=DISPOSITIONS, default=None)

    p = add("oscillator", cmd_oscillator, "truncated oscillator with an odd imaginary potential")
    p.add_argument("--n", type=int, default=40)
    p.add_argument("--beta", type=float, default=0.4)
    p.add_argument("--potential", default="builtin:xgauss",
                   help="builtin:xgauss or file:<json with b_coeffs and gauss>")
    p.add_argument("--matrices", action="store_true", help="include A and V in the output")

    p = add("sweep", cmd_sweep, "run a configured Monte-Carlo sweep")
    p.add_argument("--config", required=True)

    p = add("reproduce", cmd_reproduce, "rebuild a worked example and check closed forms")
    p.add_argument("example", choices=("ex1", "ex2", "exns"))
    p.add_argument("--d", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--c", type=float, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AssertionFailure as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return EXIT_ASSERTION
    except (KreinPertError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
