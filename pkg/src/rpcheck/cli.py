"""Command-line interface: model configs in, verdict/coupling/Hilbert reports out.

Exit codes for `verify`: 0 reflection positive, 2 not reflection positive,
3 inconclusive scan, 1 configuration or runtime error.
"""
from __future__ import annotations

import json
import os

# honor the thread cap before numpy spins up its BLAS pools
_threads = os.environ.get("RPCHECK_THREADS")
if _threads:
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, _threads)

import click
import numpy as np

from . import report
from .couplings import build_adapted_basis, extract_couplings
from .doubles import cyclic_group, mirror_chain
from .errors import InvalidModelError, RPCheckError
from .functionals import background, boltzmann
from .models import (
    fermion_hamiltonian,
    heisenberg_model,
    long_range_pair_model,
    nearest_neighbor_classical,
    parafermion_chain,
    wilson_action,
)
from .props import run_props
from .verify import gram_matrix, os_hilbert_space, verify_rp


def _cnum(x, field):
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(x[0], x[1])
    raise InvalidModelError(f"field '{field}': expected a number or [re, im] pair, got {x!r}")


def _cmat(rows, field):
    return np.array([[_cnum(x, field) for x in row] for row in rows], dtype=complex)


def _site(x):
    return tuple(x) if isinstance(x, list) else x


class ModelRun:
    def __init__(self, name, double, hamiltonian, betas, basis=None):
        self.name = name
        self.double = double
        self.hamiltonian = hamiltonian
        self.betas = betas
        self.basis = basis


def build_model(config: dict, zeta=None) -> ModelRun:
    """Instantiate a model from its JSON configuration."""
    if "family" not in config:
        raise InvalidModelError("field 'family': missing")
    family = config["family"]
    name = config.get("name", family)
    betas = config.get("beta", [0.0, 0.5, 1.0])
    if isinstance(betas, (int, float)):
        betas = [betas]
    if any((not isinstance(b, (int, float))) or b < 0 for b in betas):
        raise InvalidModelError("field 'beta': values must be nonnegative numbers")
    if zeta is None and "zeta" in config:
        zeta = _cnum(config["zeta"], "zeta")
    if zeta is not None and family in ("heisenberg", "wilson", "long_range_pair",
                                       "nearest_neighbor"):
        # bosonic families admit only the trivial twist root
        if abs(zeta - 1.0) > 1e-12:
            raise InvalidModelError(
                f"field 'zeta': family {family!r} is bosonic; only zeta = 1 is valid")

    if family == "heisenberg":
        double, h = heisenberg_model(
            int(config.get("sites_per_side", 2)), float(config.get("spin", 0.5)),
            float(config.get("J", -1.0)), float(config.get("v", 1.0)))
        return ModelRun(name, double, h, betas)

    if family == "parafermion_chain":
        p = int(config.get("p", 3))
        m = int(config.get("sites_per_side", 2))
        from .couplings import build_adapted_basis as _bab
        from .doubles import build_parafermion_double
        probe = _bab(build_parafermion_double(p, mirror_chain(m), zeta=zeta))
        n = len(probe)
        mat = np.zeros((n, n), dtype=complex)
        preset = config.get("preset")
        if preset:
            if preset.get("kind") != "degree_identity":
                raise InvalidModelError(f"field 'preset.kind': unknown preset {preset.get('kind')!r}")
            k = int(preset.get("degree", 1))
            scale = _cnum(preset.get("scale", 1.0), "preset.scale")
            for i in range(n):
                if i != probe.i0 and probe.degrees[i] == k:
                    mat[i, i] = scale
        for entry in config.get("coupling_entries", []):
            i, j = int(entry["row"]), int(entry["col"])
            mat[i, j] = _cnum(entry.get("value", [entry.get("re", 0.0), entry.get("im", 0.0)]),
                              "coupling_entries.value")
        double, h, basis = parafermion_chain(p, m, mat, zeta=zeta)
        return ModelRun(name, double, h, betas, basis)

    if family == "wilson":
        group_cfg = config.get("group", "Z2")
        if isinstance(group_cfg, str) and group_cfg.upper().startswith("Z"):
            group = cyclic_group(int(group_cfg[1:]))
        elif isinstance(group_cfg, dict) and "cyclic" in group_cfg:
            group = cyclic_group(int(group_cfg["cyclic"]))
        else:
            raise InvalidModelError("field 'group': expected 'Zn' or {'cyclic': n}")
        double, h = wilson_action(
            group, extents=tuple(config.get("extents", [2, 3])),
            irrep_index=int(config.get("irrep_index", 1)),
            g0=float(config.get("g0", 1.0)),
            periodic_rows=bool(config.get("periodic_rows", False)))
        return ModelRun(name, double, h, betas)

    if family == "long_range_pair":
        lat_cfg = config.get("lattice", {})
        lattice = mirror_chain(int(lat_cfg.get("sites_per_side", 1)),
                               include_origin=bool(lat_cfg.get("include_origin", False)))
        points = config.get("points", [1, -1])
        weights = config.get("weights", [1.0 / len(points)] * len(points))
        fields = _cmat(config.get("fields", [[1.0, -1.0]]), "fields")
        couplings = {}
        for entry in config.get("couplings", []):
            pair = tuple(_site(x) for x in entry["pair"])
            couplings[pair] = _cmat(entry["matrix"], "couplings.matrix")
        potentials = {_site(k): np.array([_cnum(x, "potentials") for x in v])
                      for k, v in (config.get("potentials") or {}).items()} or None
        rho_perm = config.get("rho_perm")
        signs = config.get("signs")
        double, h = long_range_pair_model(lattice, points, weights, fields, couplings,
                                          signs=signs, potentials=potentials,
                                          rho_perm=rho_perm)
        return ModelRun(name, double, h, betas)

    if family == "nearest_neighbor":
        lat_cfg = config.get("lattice", {})
        lattice = mirror_chain(int(lat_cfg.get("sites_per_side", 1)),
                               include_origin=bool(lat_cfg.get("include_origin", True)))
        points = config.get("points", [1, -1])
        weights = config.get("weights", [1.0 / len(points)] * len(points))
        bonds = {}
        for entry in config.get("bonds", []):
            pair = tuple(_site(x) for x in entry["pair"])
            bonds[pair] = _cmat(entry["values"], "bonds.values")
        pots = {_site(k): np.array([_cnum(x, "potentials") for x in v])
                for k, v in (config.get("potentials") or {}).items()}
        double, h, _split = nearest_neighbor_classical(lattice, points, weights, bonds, pots)
        return ModelRun(name, double, h, betas)

    if family == "fermion":
        lat_cfg = config.get("lattice", {})
        lattice = mirror_chain(int(lat_cfg.get("sites_per_side", 1)),
                               include_origin=bool(lat_cfg.get("include_origin", False)))

        def table(entries, arity):
            out = {}
            for entry in entries or []:
                gens = tuple(tuple(g) if isinstance(g, list) else g
                             for g in entry["generators"])
                if len(gens) != arity:
                    raise InvalidModelError(
                        f"field 'generators': expected {arity} entries, got {len(gens)}")
                out[gens] = _cnum(entry.get("value", [entry.get("re", 0.0),
                                                      entry.get("im", 0.0)]), "value")
            return out

        double, h = fermion_hamiltonian(
            lattice, quadratic=table(config.get("quadratic"), 2),
            quartic=table(config.get("quartic"), 4),
            family=config.get("kind", "clifford"), dim_w=int(config.get("dim_w", 1)),
            zeta=zeta)
        return ModelRun(name, double, h, betas)

    raise InvalidModelError(f"field 'family': unknown family {family!r}")


def _load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidModelError(f"field 'model': cannot read config {path}: {exc}") from exc


def _parse_zeta(text):
    if text is None:
        return None
    try:
        re_s, im_s = text.split(",")
        return complex(float(re_s), float(im_s))
    except ValueError as exc:
        raise InvalidModelError(f"field 'zeta': expected \"re,im\", got {text!r}") from exc


def _betas_option(text, default):
    if text is None:
        return default
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise InvalidModelError(f"field 'beta': expected a comma list, got {text!r}") from exc


_common = [
    click.option("--model", "model_path", required=True, type=click.Path(exists=False),
                 help="JSON model configuration"),
    click.option("--beta", "beta_text", default=None, help="comma list of beta values"),
    click.option("--tol", default=1e-9, show_default=True, help="PSD tolerance"),
    click.option("--zeta", "zeta_text", default=None, help='twist root override as "re,im"'),
    click.option("--out", "out_dir", default="rpcheck-out", show_default=True),
    click.option("--format", "fmt", type=click.Choice(["json", "csv", "text"]),
                 default="json", show_default=True),
]


def _with_common(fn):
    for opt in reversed(_common):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Reflection-positivity checker for finite graded lattice algebras."""


@main.command("verify")
@_with_common
@click.pass_context
def cmd_verify(ctx, model_path, beta_text, tol, zeta_text, out_dir, fmt):
    """Decide reflection positivity of the model's Boltzmann functionals."""
    try:
        config = _load_config(model_path)
        run = build_model(config, zeta=_parse_zeta(zeta_text))
        betas = _betas_option(beta_text, run.betas)
        if any(b < 0 for b in betas):
            raise InvalidModelError("field 'beta': values must be nonnegative")
        verdict = verify_rp(run.double, run.hamiltonian, betas=betas, tol=tol,
                            basis=run.basis, model=run.name)
    except RPCheckError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(1)
        return
    report.ensure_dir(out_dir)
    payload = report.verdict_payload(verdict, run.name)
    report.write_json(os.path.join(out_dir, "verdict.json"), payload)
    if fmt == "csv":
        report.write_verdict_csv(os.path.join(out_dir, "verdict.csv"), verdict)
    if fmt == "text":
        with open(os.path.join(out_dir, "verdict.txt"), "w", encoding="utf-8") as fh:
            fh.write(report.verdict_text(verdict, run.name))
    report.plot_verdict(os.path.join(out_dir, "verdict_min_eigs.png"), verdict)
    click.echo(report.verdict_text(verdict, run.name).rstrip())
    ctx.exit(verdict.exit_code)


@main.command("couplings")
@_with_common
@click.pass_context
def cmd_couplings(ctx, model_path, beta_text, tol, zeta_text, out_dir, fmt):
    """Extract the coupling matrix and the cross-plane spectrum."""
    try:
        config = _load_config(model_path)
        run = build_model(config, zeta=_parse_zeta(zeta_text))
        basis = run.basis or build_adapted_basis(run.double)
        couplings = extract_couplings(run.hamiltonian, basis)
    except RPCheckError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(1)
        return
    report.ensure_dir(out_dir)
    payload = report.coupling_payload(couplings, run.name)
    report.write_json(os.path.join(out_dir, "couplings.json"), payload)
    report.write_coupling_csv(os.path.join(out_dir, "couplings.csv"), couplings)
    report.plot_coupling_spectrum(os.path.join(out_dir, "coupling_spectrum.png"), couplings)
    spec = payload["cross_plane_spectrum"]
    lo = min(spec) if spec else 0.0
    click.echo(f"couplings written; cross-plane min eigenvalue {lo:.3e}")
    ctx.exit(0)


@main.command("hilbert")
@_with_common
@click.pass_context
def cmd_hilbert(ctx, model_path, beta_text, tol, zeta_text, out_dir, fmt):
    """Dimensions of the quantum Hilbert space at the requested betas."""
    try:
        config = _load_config(model_path)
        run = build_model(config, zeta=_parse_zeta(zeta_text))
        betas = _betas_option(beta_text, run.betas)
        basis = run.basis or build_adapted_basis(run.double)
        verdict = verify_rp(run.double, run.hamiltonian, betas=betas, tol=tol,
                            basis=basis, model=run.name, scan_witness=False)
        if not verdict.rp_all_beta:
            click.echo("error: model is not reflection positive at the requested beta values",
                       err=True)
            ctx.exit(2)
            return
        tau = background(run.double)
        spaces = []
        for beta in betas:
            f = boltzmann(tau, run.hamiltonian, beta)
            spaces.append((beta, os_hilbert_space(gram_matrix(f, basis), tol=tol)))
    except RPCheckError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(1)
        return
    report.ensure_dir(out_dir)
    payload = report.hilbert_payload(spaces, run.name)
    report.write_json(os.path.join(out_dir, "hilbert.json"), payload)
    report.plot_hilbert_dims(os.path.join(out_dir, "hilbert_dims.png"), spaces)
    for beta, space in spaces:
        click.echo(f"beta={beta:g}: total dim {space.total_dim}, null dim {space.null_dim}, "
                   f"per degree {space.dims}")
    ctx.exit(0)


@main.command("props")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--trials", default=20, show_default=True, type=int)
@click.option("--out", "out_dir", default="rpcheck-out", show_default=True)
@click.pass_context
def cmd_props(ctx, seed, trials, out_dir):
    """Run the seeded property battery across all built-in families."""
    results, summary = run_props(seed=seed, trials=trials)
    report.ensure_dir(out_dir)
    report.write_json(os.path.join(out_dir, "props.json"), summary)
    for r in results:
        click.echo(r.row())
    click.echo(f"all_pass: {summary['all_pass']}")
    ctx.exit(0 if summary["all_pass"] else 1)


if __name__ == "__main__":
    main()
