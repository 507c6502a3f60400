"""Command-line interface.

Exit codes: 0 success, 1 negative verdict or failed experiment, 2 input
error, 3 numerical failure.
"""
from __future__ import annotations

import functools
import sys

import click

from . import io
from .decoder import Classification, decode, simulate_instance
from .errors import InputError, NumericalError
from .experiments import (
    FAMILY_HELP,
    KINDS,
    ExperimentConfig,
    parse_family,
    resolve_transform,
    run_experiment,
)
from .identifiability import Category, certify_set, converse_witness
from .linalg import Tolerance, random_gaussian_matrix
from .spectral import Permutation, dominant_eigenvalue, eigenstructure, permutation_cycles

EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (InputError, ValueError, FileNotFoundError, IsADirectoryError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INPUT)
        except NumericalError as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(EXIT_NUMERICAL)

    return wrapper


def _cjson(c) -> dict:
    c = complex(c)
    return {"re": c.real, "im": c.imag}


@click.group()
@click.option("--rank-tol", type=float, default=1e-10, show_default=True,
              help="Singular-value threshold relative to the largest.")
@click.option("--residual-tol", type=float, default=1e-8, show_default=True,
              help="Relative residual threshold for range membership.")
@click.option("--seed", type=int, default=0, show_default=True, help="Default random seed.")
@click.pass_context
def main(ctx, rank_tol, residual_tol, seed):
    """Identifiability and recovery for y = T A x with T from a finite set."""
    try:
        tol = Tolerance(rank_tol, residual_tol)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from None
    ctx.obj = {"tol": tol, "seed": seed}


@main.command()
@click.argument("transform_file", type=click.Path(dir_okay=False))
@click.pass_obj
@_guarded
def spectrum(obj, transform_file):
    """Eigenvalue clusters and dominant eigenvalue of each transform."""
    out = []
    for k, T in enumerate(io.load_transforms(transform_file)):
        E = eigenstructure(T, obj["tol"])
        lam, p = dominant_eigenvalue(E)
        entry = {
            "index": k,
            "kind": type(T).__name__,
            "size": T.size,
            "clusters": [{"lambda": _cjson(l), "multiplicity": mult} for l, mult in E.clusters],
            "dominant": {"lambda": _cjson(lam), "p": p},
        }
        if isinstance(T, Permutation):
            entry["cycles"] = [list(c) for c in permutation_cycles(T).cycles]
        out.append(entry)
    click.echo(io.to_json(out), nl=False)


@main.command()
@click.option("--n", "n", type=int, required=True, help="Signal dimension.")
@click.argument("transforms_file", type=click.Path(dir_okay=False))
@click.pass_obj
@_guarded
def certify(obj, n, transforms_file):
    """Certify a finite transform set for signals of dimension n."""
    verdict = certify_set(io.load_transforms(transforms_file), n, obj["tol"])
    click.echo(io.to_json(verdict.to_dict()), nl=False)
    if verdict.category is Category.MIXED_OR_NOT_IDENTIFIABLE:
        sys.exit(EXIT_NEGATIVE)


@main.command("decode")
@click.argument("instance_dir", type=click.Path(file_okay=False))
@click.option("--tol", type=float, default=None, help="Override the residual tolerance.")
@click.pass_obj
@_guarded
def decode_cmd(obj, instance_dir, tol):
    """Recover x from an instance directory (A, y, transforms[, truth])."""
    tolerance = obj["tol"]
    if tol is not None:
        try:
            tolerance = Tolerance(tolerance.rank_tol, tol)
        except ValueError as exc:
            raise click.BadParameter(str(exc), param_hint="--tol") from None
    result = decode(io.load_instance(instance_dir), tolerance)
    click.echo(io.to_json(result.to_dict()), nl=False)
    if result.classification in (Classification.AMBIGUOUS, Classification.INFEASIBLE):
        sys.exit(EXIT_NEGATIVE)


@main.command()
@click.option("--m", "m", type=int, required=True)
@click.option("--n", "n", type=int, required=True)
@click.option("--t1", default="identity", show_default=True, help="Transform name or file.")
@click.option("--t2", required=True, help=f"Transform name or file ({FAMILY_HELP}).")
@click.option("--seed", type=int, default=None, help="Seed for A (defaults to the global seed).")
@click.option("--field", type=click.Choice(["complex", "real"]), default="complex", show_default=True)
@click.pass_obj
@_guarded
def witness(obj, m, n, t1, t2, seed, field):
    """Build x != z with T1 A x = T2 A z for a random A (needs m < 2n)."""
    seed = obj["seed"] if seed is None else seed
    A = random_gaussian_matrix(m, n, field, seed)
    w = converse_witness(A, resolve_transform(t1, m), resolve_transform(t2, m), obj["tol"])
    click.echo(io.to_json(w.to_dict()), nl=False)


@main.command()
@click.option("--m", "m", type=int, required=True)
@click.option("--n", "n", type=int, required=True)
@click.option("--family", required=True, help=FAMILY_HELP)
@click.option("--which", type=int, required=True, help="Index of the true transform.")
@click.option("--seed", type=int, default=None)
@click.option("--field", type=click.Choice(["complex", "real"]), default="complex", show_default=True)
@click.option("--out", "out", type=click.Path(file_okay=False), required=True)
@click.pass_obj
@_guarded
def simulate(obj, m, n, family, which, seed, field, out):
    """Write a simulated instance directory."""
    seed = obj["seed"] if seed is None else seed
    if seed < 0 or not 1 <= n <= m:
        raise click.BadParameter("need seed >= 0 and m >= n >= 1")
    transforms = parse_family(family, m)
    A = random_gaussian_matrix(m, n, field, [seed, 0])
    x = random_gaussian_matrix(n, 1, field, [seed, 1])[:, 0]
    io.save_instance(out, simulate_instance(A, transforms, x, which, seed))
    click.echo(f"wrote {out}")


@main.command()
@click.option("--kind", type=click.Choice(KINDS), required=True)
@click.option("--m", "m", type=int, required=True)
@click.option("--n", "n", type=int, required=True)
@click.option("--family", required=True, help=FAMILY_HELP)
@click.option("--trials", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--field", type=click.Choice(["complex", "real"]), default="complex", show_default=True)
@click.option("--out", "out", type=click.Path(dir_okay=False), required=True)
@click.pass_obj
@_guarded
def experiment(obj, kind, m, n, family, trials, seed, field, out):
    """Run a seeded Monte Carlo experiment and write a JSON report."""
    seed = obj["seed"] if seed is None else seed
    config = ExperimentConfig(kind, m, n, family, trials, seed, field, obj["tol"])
    report = run_experiment(config)
    io.save_report(out, report)
    click.echo(f"{kind}: {'PASS' if report.passed else 'FAIL'} -> {out}")
    if not report.passed:
        sys.exit(EXIT_NEGATIVE)


if __name__ == "__main__":
    main()
