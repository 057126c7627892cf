"""Command-line interface: exact homology computations and certificates.

A *job* is a JSON document describing the input algebra.  Two shapes are
accepted:

* an algebra with a distinguished ideal::

      {"name": "...", "basis": ["1", "x", ...],
       "mult": [[[entries]]], "unit": 0, "ideal": [2, 3]}

  ``mult[i][j][k]`` is the coefficient of basis element ``k`` in the
  product of basis elements ``i`` and ``j``; entries are integers or
  rational strings ``"p/q"`` (floats are rejected: all arithmetic is
  exact).  ``ideal`` lists the basis indices spanning the ideal.

* a square-zero extension given directly as (base algebra, bimodule,
  2-cocycle)::

      {"basis": [...], "mult": [[[...]]], "unit": 0,
       "bimodule": {"basis": [...], "left": [[[...]]], "right": [[[...]]]},
       "cocycle": [[[...]]]}

  ``left[i]`` / ``right[i]`` are the matrices of the two actions of the
  i-th algebra basis element on the module (rows index the output
  coordinate), and ``cocycle[i][j]`` is the module coordinate vector of
  f(e_i, e_j); a missing ``cocycle`` means f = 0.

Every command emits a JSON report whose bytes are identical across runs
for the same input (bases are deterministic and no wall-clock data is
recorded), plus an optional aligned text table (``--table``).  The exit
status is 0 exactly when every certificate in the report passed; parse
and validation failures exit 2, resource-cap refusals exit 3.  The
environment variable ``RELCYC_MEMORY_BUDGET_MB`` (default 4096) bounds
the estimated dense-matrix footprint a command may attempt.
"""

import json
import os
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import click

from . import bar, complexes, harmonic, perturbation
from .algebras import (
    AlgebraPresentation,
    BimodulePresentation,
    IdealNotSquareZero,
    InvalidInput,
    NormalCocycle,
    NotAnIdeal,
    build_extension,
    multigrading,
    split_ideal,
    validate_algebra,
    validate_bimodule,
    validate_cocycle,
)
from .linalg import rank


class ParseError(Exception):
    """The job document is not well-formed (shape, types, exactness)."""


class ValidationError(Exception):
    """The job violates an input axiom; the message names the axiom."""


class CapExceeded(Exception):
    """The requested computation exceeds the configured memory budget."""


# ---------------------------------------------------------------------------
# exact rational parsing / serialization


def _rat(value, where):
    if isinstance(value, bool):
        raise ParseError("%s: booleans are not numbers" % where)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise ParseError(
            "%s: floats are not exact; write the value as an integer or a "
            "rational string \"p/q\"" % where)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError("%s: bad rational %r (%s)" % (where, value, exc))
    raise ParseError("%s: expected a number, got %r" % (where, type(value).__name__))


def _rat_out(value):
    """JSON form of an exact value: int when integral, else "p/q"."""
    frac = Fraction(value)
    if frac.denominator == 1:
        return int(frac)
    return "%d/%d" % (frac.numerator, frac.denominator)


def _cube(doc, key, shape, where):
    """Parse a nested list of rationals with the given dimensions."""
    try:
        d0, d1, d2 = shape
        out = []
        for i in range(d0):
            plane = []
            for j in range(d1):
                row = doc[i][j]
                if len(row) != d2:
                    raise ParseError(
                        "%s[%d][%d]: expected %d entries, got %d"
                        % (where, i, j, d2, len(row)))
                plane.append([_rat(row[k], "%s[%d][%d][%d]" % (where, i, j, k))
                              for k in range(d2)])
            out.append(plane)
        return out
    except (TypeError, IndexError, KeyError):
        raise ParseError("%s: expected a %dx%dx%d nested array"
                         % (where, shape[0], shape[1], shape[2]))


# ---------------------------------------------------------------------------
# job documents


class Job:
    """A parsed input: either (algebra, ideal) or (algebra, bimodule, cocycle)."""

    def __init__(self, doc):
        if not isinstance(doc, dict):
            raise ParseError("the job document must be a JSON object")
        self.name = str(doc.get("name", "algebra"))
        labels = doc.get("basis")
        if not isinstance(labels, list) or not labels:
            raise ParseError("\"basis\" must be a non-empty list of labels")
        labels = [str(x) for x in labels]
        dim = len(labels)
        if "mult" not in doc:
            raise ParseError("missing \"mult\" (structure constants)")
        mult = _cube(doc["mult"], "mult", (dim, dim, dim), "mult")
        unit = doc.get("unit", 0)
        if not isinstance(unit, int) or not 0 <= unit < dim:
            raise ParseError("\"unit\" must be a basis index")
        has_ideal = "ideal" in doc
        has_bimodule = "bimodule" in doc
        if has_ideal and has_bimodule:
            raise ParseError("give either \"ideal\" or \"bimodule\", not both")

        # the engine's convention puts the unit at basis index 0
        order = [unit] + [i for i in range(dim) if i != unit]
        pos = {orig: new for new, orig in enumerate(order)}
        labels = [labels[i] for i in order]
        mult = [[[mult[order[i]][order[j]][order[k]] for k in range(dim)]
                 for j in range(dim)] for i in range(dim)]

        if has_bimodule:
            self.mode = "extension"
            bim = doc["bimodule"]
            if not isinstance(bim, dict):
                raise ParseError("\"bimodule\" must be an object")
            mlabels = bim.get("basis")
            if not isinstance(mlabels, list) or not mlabels:
                raise ParseError("bimodule \"basis\" must be a non-empty list")
            mlabels = [str(x) for x in mlabels]
            dm = len(mlabels)
            left = _cube(bim.get("left"), "left", (dim, dm, dm), "bimodule.left")
            right = _cube(bim.get("right"), "right", (dim, dm, dm), "bimodule.right")
            # actions are indexed by the algebra basis: apply the unit reorder
            left = [left[order[i]] for i in range(dim)]
            right = [right[order[i]] for i in range(dim)]
            if "cocycle" in doc:
                coc = _cube(doc["cocycle"], "cocycle", (dim, dim, dm), "cocycle")
                coc = [[coc[order[i]][order[j]] for j in range(dim)]
                       for i in range(dim)]
            else:
                coc = [[[Fraction(0)] * dm for _ in range(dim)] for _ in range(dim)]
            self.algebra = AlgebraPresentation(labels, mult)
            self.bimodule = BimodulePresentation(mlabels, left, right)
            self.cocycle = NormalCocycle(coc)
            self.ideal = None
        else:
            self.mode = "ideal"
            ideal = doc.get("ideal", [])
            if not isinstance(ideal, list) or \
                    not all(isinstance(i, int) and 0 <= i < dim for i in ideal):
                raise ParseError("\"ideal\" must be a list of basis indices")
            self.algebra = AlgebraPresentation(labels, mult)
            self.ideal = sorted(pos[i] for i in ideal)
            self.bimodule = None
            self.cocycle = None
        self._extension = None

    def extension(self):
        """The validated square-zero extension this job describes."""
        if self._extension is not None:
            return self._extension
        try:
            if self.mode == "ideal":
                if not self.ideal:
                    raise ValidationError(
                        "this command needs an \"ideal\" (or a \"bimodule\" "
                        "block) to form the square-zero extension")
                a, m, f = split_ideal(self.algebra, self.ideal)
                self._extension = build_extension(a, m, f)
            else:
                self._extension = build_extension(
                    self.algebra, self.bimodule, self.cocycle)
        except (NotAnIdeal, IdealNotSquareZero, InvalidInput) as exc:
            raise ValidationError(str(exc))
        return self._extension


def _load_job(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError("cannot read %s: %s" % (path, exc))
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("invalid JSON in %s: %s" % (path, exc))
    return Job(doc)


# ---------------------------------------------------------------------------
# memory budget


def _budget_mb():
    raw = os.environ.get("RELCYC_MEMORY_BUDGET_MB", "4096")
    try:
        value = int(raw)
    except ValueError:
        raise ParseError("RELCYC_MEMORY_BUDGET_MB must be an integer, got %r" % raw)
    if value <= 0:
        raise ParseError("RELCYC_MEMORY_BUDGET_MB must be positive")
    return value


def _word_count(dim_total, dim_sub, n):
    """Normalized bar words of length n+1, relative to the subalgebra."""
    total = dim_total * max(dim_total - 1, 0) ** n
    sub = dim_sub * max(dim_sub - 1, 0) ** n
    return total - sub


def _tot_count(dim_total, dim_sub, m):
    return sum(_word_count(dim_total, dim_sub, q) for q in range(m % 2, m + 1, 2))


def _check_oracle_budget(dim_total, dim_sub, top, graded_escape=False):
    """Refuse up front when the word-level complexes cannot fit.

    The dominant object is the total differential out of degree `top`
    (a dense rational matrix); ~32 bytes per entry is assumed.  When the
    algebra is non-negatively multigraded the computation prunes words by
    weight, so the uncapped estimate does not apply and the command
    proceeds.
    """
    if graded_escape:
        return
    cells = _tot_count(dim_total, dim_sub, top) * \
        max(_tot_count(dim_total, dim_sub, top - 1), 1)
    est_mb = cells * 32 // 1_000_000
    budget = _budget_mb()
    if est_mb > budget:
        raise CapExceeded(
            "word-level complex at degree %d needs an estimated %d MB but "
            "RELCYC_MEMORY_BUDGET_MB=%d; lower --nmax or raise the budget"
            % (top, est_mb, budget))


def _has_nonneg_grading(dim, table):
    weights = multigrading(dim, table)
    return bool(weights[0]) and all(wt[0] >= 0 for wt in weights)


# ---------------------------------------------------------------------------
# report plumbing


def _json_safe(obj):
    if isinstance(obj, Fraction):
        return _rat_out(obj)
    if isinstance(obj, dict):
        return {
            (k if isinstance(k, str) else ",".join(map(str, k))
             if isinstance(k, tuple) else str(k)): _json_safe(v)
            for k, v in obj.items()
        }
    if isinstance(obj, (list, tuple)):
        return [_json_safe(x) for x in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_json_safe(x) for x in obj)
    return obj


def _emit(report, out, table_lines):
    payload = json.dumps(_json_safe(report), indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(payload)
    else:
        click.echo(payload, nl=False)
    for line in table_lines:
        click.echo(line)


def _finish(report, out, table_lines=()):
    _emit(report, out, table_lines)
    raise SystemExit(0 if report["ok"] else 1)


def _cert_table(certs):
    width = max((len(c["name"]) for c in certs), default=4)
    lines = ["%-*s  result" % (width, "certificate"),
             "%s  ------" % ("-" * width)]
    for c in certs:
        verdict = "pass" if c["pass"] else "FAIL"
        lines.append("%-*s  %s" % (width, c["name"], verdict))
    return lines


def _dims_table(heading_rows):
    """Aligned text for degree-indexed dimension rows."""
    head = heading_rows[0]
    widths = [max(len(str(row[i])) for row in heading_rows)
              for i in range(len(head))]
    lines = []
    for row in heading_rows:
        cells = [str(row[0]).ljust(widths[0])]
        cells += [str(row[i]).rjust(widths[i]) for i in range(1, len(row))]
        lines.append("  ".join(cells).rstrip())
    return lines


def _exc_text(exc):
    return "%s: %s" % (type(exc).__name__, exc)


# ---------------------------------------------------------------------------
# certificate units (top-level functions so a worker pool can run them)

_CHECK_ERRORS = (
    complexes.IdentityViolation,
    complexes.NotWellDefined,
    harmonic.Mismatch,
    harmonic.NotBijective,
    harmonic.NilpotenceMismatch,
    perturbation.NotSmall,
    InvalidInput,
    AssertionError,
)


def _cert(name, thunk, detail=""):
    try:
        result = thunk()
    except _CHECK_ERRORS as exc:
        return {"name": name, "pass": False, "detail": _exc_text(exc)}
    if result is None or result is True:
        return {"name": name, "pass": True, "detail": detail}
    return {"name": name, "pass": False, "detail": str(result)}


_LAW_NAMES = (
    ("b.b = 0", "b_squared"),
    ("d.d = 0", "d_squared"),
    ("d'.d' = 0", "d_prime_squared"),
    ("d.b = -b.d", "db_anticommute"),
    ("d'.b = -b.d'", "d_prime_b_anticommute"),
    ("d'.N = -N.d", "d_prime_norm"),
    ("d.(1-t) = -(1-t).d'", "d_rotation_intertwine"),
    ("b.N = N.b", "norm_b_commute"),
    ("t.b = b.t", "rotation_b_commute"),
    ("t^(w+1) = id", "rotation_power_identity"),
    ("rank N + rank (1-t) = dim", "rotation_orbit_exactness"),
)

_CONTRACTION_NAMES = (
    ("sigma.N = N.sigma = N/(w+1)", "section_norm_identity"),
    ("(1-t).sigma' = sigma'.(1-t) = id - N/(w+1)", "section_rotation_identity"),
    ("b.sigma' = sigma'.b", "sigma_prime_chain_map"),
)


def _failure_certs(failures, name_pairs, v_max):
    by_law = {}
    for law, v, w in failures:
        by_law.setdefault(law, []).append((v, w))
    certs = []
    for law, cert_name in name_pairs:
        bad = by_law.get(law, [])
        certs.append({
            "name": cert_name,
            "pass": not bad,
            "detail": ("all blocks v <= %d" % v_max) if not bad
            else "fails on blocks %s" % bad[:4],
        })
    return certs


def _u_small_laws(e, p):
    failures = complexes.differential_law_failures(e, p["vmax"])
    return _failure_certs(failures, _LAW_NAMES, p["vmax"])


def _u_contraction(e, p):
    failures = complexes.contraction_law_failures(e, p["vmax"])
    return _failure_certs(failures, _CONTRACTION_NAMES, p["vmax"])


def _u_hat(e, p):
    return [_cert("hat_double_mixed",
                  lambda: (complexes.hat_complex(e, p["vmax"]), True)[1],
                  "all blocks v <= %d" % p["vmax"])]


def _u_ddot(e, p):
    vmax = p["vmax"]
    kmax = min(6, vmax)
    try:
        harmonic.ddot_structure(e, vmax, kappa_v_max=kmax)
    except _CHECK_ERRORS as exc:
        detail = _exc_text(exc)
        return [{"name": "ddot_double_mixed", "pass": False, "detail": detail},
                {"name": "insertion_contracts_columns", "pass": False,
                 "detail": detail}]
    detail = "all blocks v <= %d; operator suite on v <= %d" % (vmax, kmax)
    return [{"name": "ddot_double_mixed", "pass": True, "detail": detail},
            {"name": "insertion_contracts_columns", "pass": True,
             "detail": detail}]


def _harmonic_blocks(vmax):
    return [(v, w) for v in range(vmax + 1) for w in range(-1, v // 2 + 1)]


def _blockwise(name, blocks, fn, vmax):
    for v, w in blocks:
        try:
            fn(v, w)
        except _CHECK_ERRORS as exc:
            return {"name": name, "pass": False, "detail": _exc_text(exc)}
    return {"name": name, "pass": True, "detail": "all blocks v <= %d" % vmax}


def _u_karoubi(e, p):
    blocks = _harmonic_blocks(p["vmax"])
    return [_blockwise("karoubi_operator_identities", blocks,
                       lambda v, w: harmonic.karoubi(e, v, w), p["vmax"])]


def _u_harmonic_split(e, p):
    blocks = _harmonic_blocks(p["vmax"])
    return [
        _blockwise("projector_idempotent_and_green", blocks,
                   lambda v, w: harmonic.harmonic_split(e, v, w), p["vmax"]),
        _blockwise("connes_b_harmonic_identities", blocks,
                   lambda v, w: harmonic.projector_identities(e, v, w),
                   p["vmax"]),
        _blockwise("explicit_projector_match", blocks,
                   lambda v, w: harmonic.explicit_P(e, v, w), p["vmax"]),
    ]


def _u_rows_acyclic(e, p):
    return [_blockwise("complement_acyclic",
                       [(v, None) for v in range(p["vmax"] + 1)],
                       lambda v, _w: harmonic.harmonic_rows_acyclic(e, v),
                       p["vmax"])]


def _u_reduced_cyclic(e, p):
    return [_cert("reduced_cyclic_dims",
                  lambda: harmonic.reduced_cyclic_quotient(e, p["vmax"])["ok"],
                  "all blocks v <= %d" % p["vmax"])]


def _u_comparison(e, p):
    blocks = _harmonic_blocks(p["vmax"])
    certs = [_blockwise("comparison_bijective", blocks,
                        lambda v, w: harmonic.psi_lambda(e, v, w), p["vmax"])]
    certs.append(_cert("compressed_double_mixed",
                       lambda: (harmonic.tilde_complexes(e, p["vmax"]), True)[1],
                       "all blocks v <= %d" % p["vmax"]))
    return certs


def _u_coefficients(e, p):
    blocks = [(v, w) for v in range(p["vmax"] + 1) for w in range(v // 2 + 1)]
    return [
        _blockwise("coefficient_closed_form_lambda", blocks,
                   lambda v, w: harmonic.lambda_form(e, v, w), p["vmax"]),
        _blockwise("coefficient_closed_form_dalpha", blocks,
                   lambda v, w: harmonic.d_alpha_form(e, v, w), p["vmax"]),
    ]


def _u_retract(e, p):
    vmax = p["vmax"]
    certs = [_blockwise("retract_identities",
                        [(w, None) for w in range(vmax // 2 + 1)],
                        lambda w, _x: perturbation.appendix_a_retract(e, w, vmax),
                        vmax)]

    def transfer():
        report = perturbation.transfer_report(e, p["mtop"])
        if not report["ok"]:
            bad = [k for k in ("differential_matches_total_complex",
                               "projection_matches_corrected_form",
                               "section_unchanged", "homotopy_unchanged")
                   if not report[k]]
            return "mismatches: %s" % bad
        return True

    certs.append(_cert("perturbation_transfer_match", transfer,
                       "window 0..%d" % p["mtop"]))
    return certs


def _u_oracle(e, p):
    vmax = p.get("oracle_vmax", min(p["vmax"], 6))
    report = perturbation.verify_theorem_3_2(e, v_max=vmax)
    return [
        {"name": "transferred_retract_identity", "pass": report["ok"],
         "detail": "v <= %d" % vmax if report["ok"]
         else "violations: %s" % report["violations"][:4]},
        {"name": "bar_oracle_dimensions",
         "pass": bool(report["relative_dimensions_match"]),
         "detail": "degrees %s" % report["oracle_degrees"]},
    ]


def _u_goodwillie(e, p):
    try:
        report = complexes.goodwillie_certificate(e, p["nmax"], p["vmax"])
    except _CHECK_ERRORS as exc:
        detail = _exc_text(exc)
        return [{"name": "periodic_vanishing", "pass": False, "detail": detail},
                {"name": "s_nilpotence_cross_check", "pass": False,
                 "detail": detail}]
    return [
        {"name": "periodic_vanishing",
         "pass": report["row_contraction_identities"] == "verified",
         "detail": "%d blocks; HP_n = 0 for n <= %d"
         % (len(report["blocks_checked"]), p["nmax"])},
        {"name": "s_nilpotence_cross_check",
         "pass": bool(report["s_nilpotence_cross_check"]),
         "detail": "chain-level S composite vanishes"},
    ]


def _u_connection(e, p):
    nmax = p["nmax"]
    certs = []

    def breve_chain_map():
        for n in range(1, nmax + 1):
            complexes.delta_breve_matrix(e, n, check=True)
        return True

    def cyclic_chain_map():
        for n in range(1, nmax + 1):
            complexes.delta_bar_hc_matrix(e, n, check=True)
        return True

    certs.append(_cert("connection_chain_map", breve_chain_map,
                       "anticommutes with the boundaries up to n = %d" % nmax))
    certs.append(_cert(
        "connection_cyclic_chain_map", cyclic_chain_map,
        "anticommutes with the total differentials up to n = %d" % nmax))

    def retract_route():
        for n in range(1, nmax + 1):
            if complexes.delta_maps(e, n) != perturbation.transferred_connection(e, n):
                return "closed forms differ from the retract route at n = %d" % n
        return True

    certs.append(_cert("connection_matches_retract_route", retract_route,
                       "n <= %d" % nmax))

    def ranks_hh():
        side_a = bar.side_for(e.a)
        for n in range(1, nmax + 1):
            cx_a = side_a.hochschild_complex(n + 1)
            cx_small = complexes.breve_complex(e, n)
            mine = cx_a.induced_map(
                cx_small, n, n - 1, complexes.delta_breve_matrix(e, n, check=False))
            oracle = bar.snake_connection_hh(e, n)
            if rank(mine) != rank(oracle):
                return "induced rank differs from the boundary oracle at n = %d" % n
        return True

    certs.append(_cert("connection_rank_matches_oracle_hh", ranks_hh,
                       "n <= %d" % nmax))

    def ranks_hc():
        side_a = bar.side_for(e.a)
        for n in range(1, nmax + 1):
            cx_a = side_a.cyclic_total_complex(n + 1)
            cx_small = complexes.xbar_complex(e, n)
            mine = cx_a.induced_map(
                cx_small, n, n - 1, complexes.delta_bar_hc_matrix(e, n, check=False))
            oracle = bar.snake_connection_hc(e, n)
            if rank(mine) != rank(oracle):
                return "induced rank differs from the boundary oracle at n = %d" % n
        return True

    certs.append(_cert("connection_rank_matches_oracle_hc", ranks_hc,
                       "n <= %d" % nmax))

    def square():
        for n in range(1, nmax + 1):
            lhs, rhs = bar.connection_compatibility_hh_hc(e, n)
            if lhs != rhs:
                return "naturality square fails at n = %d" % n
        return True

    certs.append(_cert("connection_square_commutes", square, "n <= %d" % nmax))

    def revised():
        for n in range(2, nmax + 1):
            harmonic.revised_delta3(e, n)
        return True

    certs.append(_cert("revised_connection_forms", revised,
                       "2 <= n <= %d" % nmax))
    return certs


_UNITS = {
    "small_laws": _u_small_laws,
    "contraction": _u_contraction,
    "hat": _u_hat,
    "ddot": _u_ddot,
    "karoubi": _u_karoubi,
    "harmonic_split": _u_harmonic_split,
    "rows_acyclic": _u_rows_acyclic,
    "reduced_cyclic": _u_reduced_cyclic,
    "comparison": _u_comparison,
    "coefficients": _u_coefficients,
    "retract": _u_retract,
    "oracle": _u_oracle,
    "goodwillie": _u_goodwillie,
    "connection": _u_connection,
}

_SUITES = {
    "identities": ("small_laws", "contraction", "hat", "ddot"),
    "contraction": ("contraction",),
    "harmonic": ("karoubi", "harmonic_split", "rows_acyclic", "reduced_cyclic"),
    "comparison": ("comparison", "coefficients"),
    "connection": ("connection",),
    "retract": ("retract",),
    "oracle": ("oracle",),
    "all": ("small_laws", "contraction", "hat", "ddot", "karoubi",
            "harmonic_split", "rows_acyclic", "reduced_cyclic", "comparison",
            "coefficients", "retract", "oracle", "connection"),
}


def _unit_task(task):
    key, e, params = task
    return _UNITS[key](e, params)


def _run_units(keys, e, params, jobs):
    tasks = [(key, e, params) for key in keys]
    if jobs <= 1 or len(tasks) <= 1:
        results = [_unit_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            results = list(pool.map(_unit_task, tasks))
    certs = []
    for chunk in results:
        certs.extend(chunk)
    return certs


# ---------------------------------------------------------------------------
# the command group


def _guarded(fn):
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ParseError as exc:
            click.echo("parse error: %s" % exc, err=True)
            raise SystemExit(2)
        except ValidationError as exc:
            click.echo("validation error: %s" % exc, err=True)
            raise SystemExit(2)
        except CapExceeded as exc:
            click.echo("cap exceeded: %s" % exc, err=True)
            raise SystemExit(3)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@click.group()
def main():
    """Exact relative homology of square-zero extensions, with certificates."""


_job_argument = click.argument("job_path", metavar="JOB",
                               type=click.Path(exists=True, dir_okay=False))
_out_option = click.option("--out", type=click.Path(dir_okay=False),
                           help="write the JSON report here instead of stdout")
_table_option = click.option("--table", is_flag=True,
                             help="also print an aligned text table")


@main.command()
@_job_argument
@_out_option
@_table_option
@_guarded
def validate(job_path, out, table):
    """Check every input axiom of a job and report each as a certificate."""
    job = _load_job(job_path)
    certs = []
    rep = validate_algebra(job.algebra)
    certs.append({"name": "algebra_axioms", "pass": rep.ok,
                  "detail": "; ".join(rep.failures) or
                  "unital and associative on all basis triples"})
    info = {"dim": job.algebra.dim, "mode": job.mode}
    if job.mode == "ideal":
        info["ideal"] = list(job.ideal)

        def two_sided():
            from .algebras import ideal_pair
            ideal_pair(job.algebra, job.ideal)
            return True

        if job.ideal:
            try:
                two_sided()
                certs.append({"name": "ideal_two_sided", "pass": True,
                              "detail": "products stay in the span"})
            except (NotAnIdeal, AssertionError) as exc:
                certs.append({"name": "ideal_two_sided", "pass": False,
                              "detail": str(exc)})
            square_zero = all(
                not any(job.algebra.mult[i][j])
                for i in job.ideal for j in job.ideal)
            info["ideal_square_zero"] = square_zero
    else:
        repm = validate_bimodule(job.algebra, job.bimodule)
        certs.append({"name": "bimodule_axioms", "pass": repm.ok,
                      "detail": "; ".join(repm.failures) or
                      "unital, associative and commuting actions"})
        repf = validate_cocycle(job.algebra, job.bimodule, job.cocycle)
        certs.append({"name": "cocycle_axioms", "pass": repf.ok,
                      "detail": "; ".join(repf.failures) or
                      "normal and closed under the Hochschild differential"})
        if rep.ok and repm.ok and repf.ok:
            certs.append(_cert(
                "assembled_extension_axioms",
                lambda: (build_extension(job.algebra, job.bimodule,
                                         job.cocycle), True)[1],
                "assembled product is unital and associative"))
        info["dim_module"] = job.bimodule.dim
    report = {
        "command": "validate",
        "algebra": job.name,
        "input": info,
        "certificates": certs,
        "ok": all(c["pass"] for c in certs),
    }
    _finish(report, out, _cert_table(certs) if table else ())


@main.command()
@_job_argument
@click.option("--hh", "want_hh", is_flag=True, help="Hochschild table")
@click.option("--hc", "want_hc", is_flag=True, help="cyclic table")
@click.option("--hp", "want_hp", is_flag=True,
              help="periodic vanishing certificate")
@click.option("--nmax", default=5, show_default=True,
              help="top homological degree")
@click.option("--vmax", default=8, show_default=True,
              help="block range for the --hp identity suite")
@click.option("--oracle/--no-oracle", default=True, show_default=True,
              help="cross-check against the word-level complexes")
@_out_option
@_table_option
@_guarded
def compute(job_path, want_hh, want_hc, want_hp, nmax, vmax, oracle, out, table):
    """Homology tables of the extension relative to its ideal."""
    job = _load_job(job_path)
    e = job.extension()
    if not (want_hh or want_hc or want_hp):
        want_hh = want_hc = True
    if oracle:
        _check_oracle_budget(
            e.dim_e, e.dim_a, nmax + 1,
            graded_escape=_has_nonneg_grading(e.dim_e, e.emult))
    tables = {}
    certs = []
    table_rows = [["degree"] + [str(n) for n in range(nmax + 1)]]
    if want_hh:
        small = complexes.relative_hh_dims_small(e, nmax)
        tables["hh"] = {"small_complex": small}
        table_rows.append(["HH"] + [str(d) for d in small])
        if oracle:
            ora = bar.relative_hh_dims(e, nmax)
            tables["hh"]["word_complex"] = ora
            table_rows.append(["HH (words)"] + [str(d) for d in ora])
            certs.append({"name": "hh_small_matches_words",
                          "pass": small == ora,
                          "detail": "n <= %d" % nmax})
    if want_hc:
        small = complexes.relative_hc_dims_small(e, nmax)
        tables["hc"] = {"small_complex": small}
        table_rows.append(["HC"] + [str(d) for d in small])
        if oracle:
            ora = bar.relative_hc_dims(e, nmax)
            tables["hc"]["word_complex"] = ora
            table_rows.append(["HC (words)"] + [str(d) for d in ora])
            certs.append({"name": "hc_small_matches_words",
                          "pass": small == ora,
                          "detail": "n <= %d" % nmax})
    if want_hp:
        certs.extend(_u_goodwillie(e, {"nmax": nmax, "vmax": vmax}))
        tables["hp"] = {"dims": [0] * (nmax + 1)}
        table_rows.append(["HP"] + ["0"] * (nmax + 1))
    report = {
        "command": "compute",
        "algebra": job.name,
        "parameters": {"nmax": nmax, "oracle": oracle},
        "tables": tables,
        "certificates": certs,
        "ok": all(c["pass"] for c in certs),
    }
    _finish(report, out, _dims_table(table_rows) if table else ())


@main.command()
@_job_argument
@click.option("--suite", default="identities", show_default=True,
              type=click.Choice(sorted(_SUITES)), help="which certificate suite")
@click.option("--vmax", default=6, show_default=True,
              help="top column degree for blockwise checks")
@click.option("--nmax", default=3, show_default=True,
              help="top homological degree for connection checks")
@click.option("--jobs", default=1, show_default=True,
              help="worker processes for independent units")
@_out_option
@_table_option
@_guarded
def verify(job_path, suite, vmax, nmax, jobs, out, table):
    """Run a certificate suite of exact structural identities."""
    job = _load_job(job_path)
    e = job.extension()
    params = {
        "vmax": vmax,
        "nmax": nmax,
        "mtop": min(4, max(2, vmax // 2)),
        "oracle_vmax": min(vmax, 6),
    }
    if suite in ("oracle", "all"):
        _check_oracle_budget(
            e.dim_e, e.dim_a, params["oracle_vmax"],
            graded_escape=_has_nonneg_grading(e.dim_e, e.emult))
    certs = _run_units(_SUITES[suite], e, params, jobs)
    report = {
        "command": "verify",
        "algebra": job.name,
        "parameters": {"suite": suite, "vmax": vmax, "nmax": nmax},
        "certificates": certs,
        "ok": all(c["pass"] for c in certs),
    }
    _finish(report, out, _cert_table(certs) if table else ())


@main.command()
@_job_argument
@click.option("--nmax", default=3, show_default=True,
              help="top homological degree")
@_out_option
@_table_option
@_guarded
def connection(job_path, nmax, out, table):
    """Certify the connecting maps of the relative homology sequences."""
    job = _load_job(job_path)
    e = job.extension()
    _check_oracle_budget(
        e.dim_e, e.dim_a, nmax + 1,
        graded_escape=_has_nonneg_grading(e.dim_e, e.emult))
    certs = _u_connection(e, {"nmax": nmax})
    report = {
        "command": "connection",
        "algebra": job.name,
        "parameters": {"nmax": nmax},
        "certificates": certs,
        "ok": all(c["pass"] for c in certs),
    }
    _finish(report, out, _cert_table(certs) if table else ())


@main.command("harmonic")
@_job_argument
@click.option("--vmax", default=5, show_default=True,
              help="top column degree for blockwise checks")
@click.option("--jobs", default=1, show_default=True,
              help="worker processes for independent units")
@_out_option
@_table_option
@_guarded
def harmonic_cmd(job_path, vmax, jobs, out, table):
    """Certify the spectral projector suite and the compressed models."""
    job = _load_job(job_path)
    e = job.extension()
    params = {"vmax": vmax}
    keys = _SUITES["harmonic"] + _SUITES["comparison"]
    certs = _run_units(keys, e, params, jobs)
    report = {
        "command": "harmonic",
        "algebra": job.name,
        "parameters": {"vmax": vmax},
        "certificates": certs,
        "ok": all(c["pass"] for c in certs),
    }
    _finish(report, out, _cert_table(certs) if table else ())


@main.command("split-ideal")
@_job_argument
@_out_option
@_guarded
def split_ideal_cmd(job_path, out):
    """Extract (algebra, bimodule, cocycle) from an algebra-with-ideal job."""
    job = _load_job(job_path)
    if job.mode != "ideal" or not job.ideal:
        raise ValidationError("split-ideal needs a job with an \"ideal\" list")
    try:
        a, m, f = split_ideal(job.algebra, job.ideal)
        e = build_extension(a, m, f)
    except (NotAnIdeal, IdealNotSquareZero, InvalidInput) as exc:
        raise ValidationError(str(exc))
    doc = {
        "name": job.name,
        "basis": list(a.basis_labels),
        "mult": [[[_rat_out(x) for x in vec] for vec in row] for row in a.mult],
        "unit": 0,
        "bimodule": {
            "basis": list(m.basis_labels),
            "left": [[[_rat_out(x) for x in row] for row in mat]
                     for mat in m.left_action],
            "right": [[[_rat_out(x) for x in row] for row in mat]
                      for mat in m.right_action],
        },
        "cocycle": [[[_rat_out(x) for x in vec] for vec in row]
                    for row in f.values],
    }
    # round trip: the emitted job must rebuild the same extension table
    rebuilt = Job(doc).extension()
    if rebuilt.emult != e.emult or rebuilt.basis_labels != e.basis_labels:
        raise ValidationError("emitted spec does not round-trip")
    payload = json.dumps(_json_safe(doc), indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(payload)
    else:
        click.echo(payload, nl=False)
    raise SystemExit(0)


@main.command()
@_job_argument
@click.option("--nmax", default=5, show_default=True,
              help="top degree for the vanishing table")
@click.option("--vmax", default=8, show_default=True,
              help="block range for the contraction identity suite")
@_out_option
@_table_option
@_guarded
def goodwillie(job_path, nmax, vmax, out, table):
    """Certify that the relative periodic homology vanishes."""
    job = _load_job(job_path)
    e = job.extension()
    certs = _u_goodwillie(e, {"nmax": nmax, "vmax": vmax})
    report = {
        "command": "goodwillie",
        "algebra": job.name,
        "parameters": {"nmax": nmax, "vmax": vmax},
        "tables": {"hp": {"dims": [0] * (nmax + 1)}},
        "certificates": certs,
        "ok": all(c["pass"] for c in certs),
    }
    _finish(report, out, _cert_table(certs) if table else ())


def _minimal_m(c, ideal):
    power = sorted(set(ideal))
    for m in range(1, 9):
        power = harmonic._power_indices(c, power)
        if not power:
            return m
    raise ValidationError(
        "the ideal is not nilpotent of exponent 2^m for any m <= 8")


@main.command()
@_job_argument
@click.option("--m", "m_exp", default=None, type=int,
              help="nilpotency exponent: the (2^m)-th ideal power vanishes "
                   "(default: smallest such m)")
@click.option("--nmax", default=1, show_default=True,
              help="top cyclic degree for the vanishing certificates")
@_out_option
@_table_option
@_guarded
def thm46(job_path, m_exp, nmax, out, table):
    """Certify the nilpotence bound for the periodicity operator.

    If the (2^m)-th power of the ideal vanishes, the m.([n/2]+1)-fold
    composite of the periodicity operator into cyclic degree n is zero.
    """
    job = _load_job(job_path)
    if job.mode != "ideal" or not job.ideal:
        raise ValidationError("thm46 needs a job with an \"ideal\" list")
    c, ideal = job.algebra, job.ideal
    if m_exp is None:
        m_exp = _minimal_m(c, ideal)
    top = nmax + 2 * m_exp * (nmax // 2 + 1)
    _check_oracle_budget(
        c.dim, c.dim - len(ideal), top + 1,
        graded_escape=_has_nonneg_grading(c.dim, c.mult))
    try:
        result = harmonic.thm46_check(c, ideal, m_exp, nmax)
    except harmonic.NilpotenceMismatch as exc:
        raise ValidationError(str(exc))
    except InvalidInput as exc:
        raise ValidationError(str(exc))
    certs = [{
        "name": "s_power_vanishing",
        "pass": bool(result["ok"]),
        "detail": "m = %d, n <= %d" % (m_exp, nmax),
    }]
    report = {
        "command": "thm46",
        "algebra": job.name,
        "parameters": {"m": m_exp, "nmax": nmax},
        "result": result,
        "certificates": certs,
        "ok": all(c2["pass"] for c2 in certs),
    }
    lines = []
    if table:
        lines = _cert_table(certs)
        for entry in result["per_n"]:
            lines.append("n = %d: %s" % (
                entry["n"],
                ", ".join("%s=%s" % (k, v) for k, v in sorted(entry.items())
                          if k not in ("n", "l"))))
    _finish(report, out, lines)


if __name__ == "__main__":
    main()
