"""JSON documents for states and setups, CSV/JSON output, and the CLI.

State document::

    {"n": 4, "N": 2, "statistics": "fermion",
     "amplitudes": [{"indices": [0, 2], "re": 1.0, "im": 0.0}],
     "normalize": true, "symmetrize": true}

A mixture carries ``"components": [{"p": 0.5, "amplitudes": [...]}, ...]``
instead of ``"amplitudes"``. Setup document::

    {"partition": [[0], [1]],
     "subspaces": [[[{"re": 1, "im": 0}, {"re": 0, "im": 0}, ...], ...], ...],
     "statistics": "fermion"}

``statistics`` is optional in a setup document; when absent it is taken
from the state being analysed. All particle and basis indices are 0-based.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import experiments
from .config import DEFAULT_TOL, TOL_ENV_VAR, default_tol
from .entanglement import mixed_report, separability_verdict
from .errors import SetupError, ValidationError
from .permutation import ProvisionalState, Statistics, project_sector
from .setup import validate_orthogonal_structure, validate_partition, validate_setup

__all__ = [
    "DocumentError",
    "parse_state",
    "parse_mixture",
    "parse_setup",
    "load_state",
    "load_mixture",
    "load_setup",
    "state_document",
    "setup_document",
    "write_state",
    "write_csv",
    "sweep_csv",
    "cloud_csv",
    "analyze",
    "run_cli",
    "main",
]

SWEEP_HEADER = ("theta", "weight", "concurrence", "closed_form", "residual")
CLOUD_HEADER = ("sample_id", "lambda1", "lambda2", "lambda3", "weight", "tag")


class DocumentError(ValidationError):
    """A JSON document is malformed; ``path`` locates the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _field(doc, key, path, kind=None, default=...):
    if not isinstance(doc, dict):
        raise DocumentError(path, "expected an object")
    if key not in doc:
        if default is ...:
            raise DocumentError(f"{path}.{key}", "missing field")
        return default
    value = doc[key]
    bad_type = kind is not None and not isinstance(value, kind)
    if kind is int and isinstance(value, bool):
        bad_type = True
    if bad_type:
        raise DocumentError(f"{path}.{key}", f"expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}")
    return value


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise DocumentError(path, f"expected a finite number, got {value!r}")
    return float(value)


def _complex(rec, path):
    if not isinstance(rec, dict):
        raise DocumentError(path, "expected a {re, im} record")
    return complex(_number(rec.get("re", 0.0), f"{path}.re"), _number(rec.get("im", 0.0), f"{path}.im"))


def _amplitude_vector(records, n, N, path):
    if not isinstance(records, list) or not records:
        raise DocumentError(path, "amplitude list must be a non-empty array")
    amps = np.zeros(n ** N, dtype=complex)
    for j, rec in enumerate(records):
        rp = f"{path}[{j}]"
        idx = _field(rec, "indices", rp, list)
        if len(idx) != N:
            raise DocumentError(f"{rp}.indices", f"expected {N} indices, got {len(idx)}")
        for q, i in enumerate(idx):
            if isinstance(i, bool) or not isinstance(i, int) or not 0 <= i < n:
                raise DocumentError(f"{rp}.indices[{q}]", f"index {i!r} not an integer in 0..{n - 1}")
        amps[np.ravel_multi_index(tuple(idx), (n,) * N)] += _complex(rec, rp)
    return amps


def _header(doc, path="$"):
    n = _field(doc, "n", path, int)
    N = _field(doc, "N", path, int)
    if n < 2:
        raise DocumentError(f"{path}.n", "local dimension must be >= 2")
    if N < 1:
        raise DocumentError(f"{path}.N", "particle number must be >= 1")
    try:
        stat = Statistics.parse(_field(doc, "statistics", path, str))
    except ValidationError as exc:
        raise DocumentError(f"{path}.statistics", str(exc)) from None
    return n, N, stat


def _prepare(amps, n, N, stat, symmetrize, normalize, path, tol):
    projected = project_sector(amps, n, N, stat)
    if symmetrize:
        amps = projected
    elif np.linalg.norm(projected - amps) > tol * max(1.0, np.linalg.norm(amps)):
        raise DocumentError(path, f"state is not {stat.value}ic; set \"symmetrize\": true to project it")
    nrm = np.linalg.norm(amps)
    if nrm <= tol:
        raise DocumentError(path, "state vanishes (after symmetrization)")
    if normalize:
        amps = amps / nrm
    return ProvisionalState(n, N, amps, stat)


def parse_state(doc, tol=DEFAULT_TOL):
    """Build a :class:`ProvisionalState` from a state document.

    ``symmetrize`` (default false) projects onto the declared sector;
    otherwise a state outside the sector is rejected. ``normalize``
    (default true) rescales to unit norm afterwards.
    """
    if isinstance(doc, dict) and "components" in doc:
        raise DocumentError("$", "document describes a mixture; use the mixed analysis")
    n, N, stat = _header(doc)
    amps = _amplitude_vector(_field(doc, "amplitudes", "$"), n, N, "$.amplitudes")
    sym = _field(doc, "symmetrize", "$", bool, False)
    norm = _field(doc, "normalize", "$", bool, True)
    return _prepare(amps, n, N, stat, sym, norm, "$.amplitudes", tol)


def parse_mixture(doc, tol=DEFAULT_TOL):
    """``(rho, statistics)`` from a mixture (or a pure state) document.

    Each component is prepared like a pure state and normalized; the
    weights ``p`` must be non-negative and are rescaled to sum to one.
    """
    if isinstance(doc, dict) and "components" not in doc:
        psi = parse_state(doc, tol)
        return np.outer(psi.amplitudes, psi.amplitudes.conj()), psi.statistics
    n, N, stat = _header(doc)
    comps = _field(doc, "components", "$", list)
    if not comps:
        raise DocumentError("$.components", "mixture needs at least one component")
    sym = _field(doc, "symmetrize", "$", bool, False)
    rho = np.zeros((n ** N, n ** N), dtype=complex)
    total = 0.0
    for j, comp in enumerate(comps):
        cp = f"$.components[{j}]"
        p = _number(_field(comp, "p", cp), f"{cp}.p")
        if p < 0:
            raise DocumentError(f"{cp}.p", "weights must be non-negative")
        amps = _amplitude_vector(_field(comp, "amplitudes", cp), n, N, f"{cp}.amplitudes")
        psi = _prepare(amps, n, N, stat, sym, True, f"{cp}.amplitudes", tol)
        rho += p * np.outer(psi.amplitudes, psi.amplitudes.conj())
        total += p
    if total <= 0:
        raise DocumentError("$.components", "weights sum to zero")
    return rho / total, stat


def parse_setup(doc, statistics=None, tol=DEFAULT_TOL):
    """Validate a setup document.

    ``n`` is the length of the supplied vectors and ``N`` the number of
    labels in the partition. ``statistics`` overrides the document's
    optional field.
    """
    blocks = _field(doc, "partition", "$", list)
    for i, b in enumerate(blocks):
        if not isinstance(b, list):
            raise DocumentError(f"$.partition[{i}]", "expected an array of labels")
        for q, k in enumerate(b):
            if isinstance(k, bool) or not isinstance(k, int):
                raise DocumentError(f"$.partition[{i}][{q}]", f"label {k!r} is not an integer")
    raw = _field(doc, "subspaces", "$", list)
    if not raw:
        raise DocumentError("$.subspaces", "needs at least one subspace")
    subspaces = []
    n = None
    for i, sub in enumerate(raw):
        sp = f"$.subspaces[{i}]"
        if not isinstance(sub, list) or not sub:
            raise DocumentError(sp, "expected a non-empty array of vectors")
        vecs = []
        for j, vec in enumerate(sub):
            vp = f"{sp}[{j}]"
            if not isinstance(vec, list) or not vec:
                raise DocumentError(vp, "expected a non-empty array of {re, im} records")
            if n is None:
                n = len(vec)
            if len(vec) != n:
                raise DocumentError(vp, f"vector has length {len(vec)}, expected {n}")
            vecs.append(np.array([_complex(c, f"{vp}[{q}]") for q, c in enumerate(vec)]))
        subspaces.append(vecs)
    raw_stat = _field(doc, "statistics", "$", str, None)
    if statistics is None and raw_stat is None:
        raise DocumentError("$.statistics", "statistics not given in the document or by the state")
    try:
        stat = Statistics.parse(statistics if statistics is not None else raw_stat)
        if raw_stat is not None and Statistics.parse(raw_stat) is not stat:
            raise DocumentError("$.statistics", f"setup declares {raw_stat!r} but the state is {stat.value}")
    except DocumentError:
        raise
    except ValidationError as exc:
        raise DocumentError("$.statistics", str(exc)) from None
    N = sum(len(b) for b in blocks)
    try:
        partition = validate_partition(blocks, N)
    except SetupError as exc:
        raise DocumentError("$.partition", str(exc)) from None
    try:
        structure = validate_orthogonal_structure(subspaces, n, tol)
    except SetupError as exc:
        raise DocumentError("$.subspaces", str(exc)) from None
    return validate_setup(partition, structure, stat)


def load_state(path, tol=DEFAULT_TOL):
    return parse_state(_read_json(path), tol)


def load_mixture(path, tol=DEFAULT_TOL):
    return parse_mixture(_read_json(path), tol)


def load_setup(path, statistics=None, tol=DEFAULT_TOL):
    return parse_setup(_read_json(path), statistics, tol)


def _c(z):
    return {"re": float(z.real), "im": float(z.imag)}


def state_document(psi, statistics=None):
    stat = Statistics.parse(statistics or psi.statistics or "boson")
    records = []
    for flat in np.flatnonzero(psi.amplitudes):
        idx = np.unravel_index(flat, (psi.n,) * psi.N)
        rec = {"indices": [int(i) for i in idx]}
        rec.update(_c(psi.amplitudes[flat]))
        records.append(rec)
    return {"n": psi.n, "N": psi.N, "statistics": stat.value, "amplitudes": records,
            "normalize": False, "symmetrize": False}


def setup_document(setup):
    return {
        "partition": [list(b) for b in setup.partition.blocks],
        "subspaces": [[[_c(z) for z in vec] for vec in basis] for basis in setup.structure.subspaces],
        "statistics": setup.statistics.value,
    }


def write_state(psi, path, statistics=None):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(state_document(psi, statistics), fh, indent=1)
        fh.write("\n")


def _fmt(value):
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def write_csv(header, rows, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def sweep_csv(rows):
    buf = io.StringIO()
    write_csv(SWEEP_HEADER, [(r.theta, r.weight, r.concurrence, r.closed_form, r.residual)
                             for r in rows], buf)
    return buf.getvalue()


def cloud_csv(rows):
    buf = io.StringIO()
    write_csv(CLOUD_HEADER, [(r.sample_id, r.lambda1, r.lambda2, r.lambda3, r.weight, r.tag)
                             for r in rows], buf)
    return buf.getvalue()


def analyze(state_path, setup_path, mixed=False, tol=DEFAULT_TOL):
    """Report dictionary for the ``analyze`` command."""
    if mixed:
        rho, stat = load_mixture(state_path, tol)
        setup = load_setup(setup_path, stat, tol)
        out = mixed_report(rho, setup, tol).to_dict()
    else:
        psi = load_state(state_path, tol)
        setup = load_setup(setup_path, psi.statistics, tol)
        out = separability_verdict(psi, setup, validation_tol=tol).to_dict()
    out["setup_summary"] = setup.summary()
    return out


class _UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _int_at_least(low):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
        if value < low:
            raise argparse.ArgumentTypeError(f"must be >= {low}, got {value}")
        return value
    return parse


_positive_int = _int_at_least(1)


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _build_parser():
    parser = _Parser(prog="indistent", description="Entanglement of indistinguishable particles "
                     "relative to a measurement setup.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="separability verdict for a state under a setup")
    p.add_argument("--state", required=True)
    p.add_argument("--setup", required=True)
    p.add_argument("--mixed", action="store_true", help="density-matrix (PPT) analysis")
    p.add_argument("--tol", type=_positive_float, default=None,
                   help=f"validation tolerance (default 1e-10, or ${TOL_ENV_VAR})")
    p.add_argument("--out")

    p = sub.add_parser("fermion-sweep", help="squared concurrence over the rotated fermion setups")
    p.add_argument("--grid", type=_int_at_least(2), default=experiments.DEFAULT_GRID_POINTS)
    p.add_argument("--out")

    p = sub.add_parser("boson-cloud", help="Schmidt coefficients under Haar-random setups")
    p.add_argument("--samples", type=_positive_int, default=experiments.DEFAULT_CLOUD_SAMPLES)
    p.add_argument("--full", action="store_true",
                   help=f"use {experiments.FULL_CLOUD_SAMPLES} samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("iid-scan", help="check i.i.d. bosonic states under random setups")
    p.add_argument("--N", type=_positive_int, required=True)
    p.add_argument("--dim", type=_positive_int, required=True)
    p.add_argument("--trials", type=_positive_int, default=200)
    p.add_argument("--setups", type=_positive_int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("converse-scan", help="search setups under which a state is entangled")
    p.add_argument("--state", required=True)
    p.add_argument("--trials", type=_positive_int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    return parser


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def run_cli(argv=None):
    """Run the command line; returns 0 on success, 1 on validation or
    usage errors and 2 on internal errors."""
    try:
        args = _build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        if args.command == "analyze":
            tol = args.tol if args.tol is not None else default_tol()
            _emit(_dump(analyze(args.state, args.setup, args.mixed, tol)), args.out)
        elif args.command == "fermion-sweep":
            rows = experiments.fermion_sweep(experiments.default_theta_grid(args.grid))
            _emit(sweep_csv(rows), args.out)
        elif args.command == "boson-cloud":
            samples = experiments.FULL_CLOUD_SAMPLES if args.full else args.samples
            result = experiments.boson_cloud(samples, args.seed)
            _emit(cloud_csv(result.rows), args.out)
            if result.skipped:
                print(f"skipped {len(result.skipped)} zero-weight draws", file=sys.stderr)
        elif args.command == "iid-scan":
            report = experiments.iid_scan(args.N, args.dim, args.trials, args.setups, args.seed)
            _emit(_dump(report.to_dict()), args.out)
        elif args.command == "converse-scan":
            psi = load_state(args.state)
            report = experiments.converse_scan(psi, args.trials, args.seed)
            out = report.to_dict()
            if report.witness_found:
                out["witness_setup"] = setup_document(report.witness_setup)
            _emit(_dump(out), args.out)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run_cli())
