"""Command-line interface.

Every subcommand writes delimited CSV series (17 significant digits), a JSON
sidecar with full provenance (config echo, package version, wall time,
per-sector errors), and a rendered figure of the same data.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .basis import OBC, SectorSpec, build_sym_basis, momentum_sector_indices
from .cache import get_or_compute
from .config import ConfigError, RunConfig, load_config
from .hamiltonian import ModelParams, build_observable
from .spectra import Spectrum

FMT = "%.17g"


def _fmt(v) -> str:
    if v is None:
        return ""
    return FMT % float(v)


def write_csv(path: Path, header: list[str], rows) -> Path:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_sidecar(csv_path: Path, cfg: RunConfig, payload: dict,
                  t0: float, errors: list | None = None,
                  cache_hits: list | None = None) -> Path:
    side = csv_path.with_suffix(".json")
    doc = {
        "config": cfg.as_dict(),
        "version": __version__,
        "wall_time_s": time.time() - t0,
        "errors": errors or [],
        "cache_hits": cache_hits or [],
    }
    doc.update(payload)
    side.write_text(json.dumps(doc, indent=2, default=_json_default) + "\n")
    return side


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "as_dict"):
        return obj.as_dict()
    if hasattr(obj, "parameters"):
        return vars(obj)
    return str(obj)


def _model_params(cfg: RunConfig) -> ModelParams:
    return ModelParams(delta=cfg.delta, lam=cfg.lam, bc=cfg.bc, hz1=cfg.hz1)


def _default_sector_specs(cfg: RunConfig, pooled_chaos: bool = False) -> list[SectorSpec]:
    """Momentum sectors of (L, M); for level statistics, the fully resolved
    set {M=0, spin inversion +-1, k != 0, pi} using positive momenta."""
    L, M = cfg.L, cfg.M
    if pooled_chaos:
        out = []
        for eta in range(1, (L + 1) // 2 if L % 2 else L // 2):
            for z in (1, -1):
                out.append(SectorSpec(L=L, M=0, eta=eta, spin_flip=z))
        return out
    return [SectorSpec(L=L, M=M, eta=eta) for eta in momentum_sector_indices(L)]


def _diagonalize_family(cfg: RunConfig, specs: list[SectorSpec],
                        vectors: bool = True):
    """[(Spectrum, SymBasis)] with per-sector failure isolation."""
    params = _model_params(cfg)
    out, errors, hits = [], [], []
    # the cache format stores eigenvectors; keep them whenever caching so a
    # second run is a pure load
    vectors = vectors or cfg.cache_dir is not None
    for spec in specs:
        try:
            basis = build_sym_basis(spec)
            if basis.dim == 0:
                continue
            spectrum, hit = get_or_compute(cfg.cache_dir, params, basis,
                                           vectors=vectors)
            out.append((spectrum, basis))
            hits.append({"sector": spec.as_dict(), "cache_hit": hit})
        except Exception as exc:  # noqa: BLE001 - isolate sector failures
            errors.append({"sector": spec.as_dict(), "error": str(exc)})
    if not out:
        raise RuntimeError(f"every sector failed: {errors}")
    return out, errors, hits


def _load_cfg(config, **overrides) -> RunConfig:
    try:
        return load_config(config, overrides)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)


def common_options(f):
    for opt in (
        click.option("--config", type=click.Path(), default=None,
                     help="JSON config file; flags override"),
        click.option("--out-dir", "output_dir", default=None),
        click.option("--cache-dir", default=None, envvar="ETH_LAB_CACHE_DIR"),
        click.option("--delta", type=float, default=None),
        click.option("--lambda", "lam", type=float, default=None),
        click.option("-L", "--length", "L", type=int, default=None),
        click.option("-M", "--magnetization", "M", type=int, default=None),
        click.option("--seed", type=int, default=None),
    ):
        f = opt(f)
    return f


def numeric_guard(f):
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except (ConfigError,) as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(2)
        except Exception as exc:  # noqa: BLE001
            click.echo(f"numeric failure: {exc}", err=True)
            sys.exit(3)
    wrapper.__name__ = f.__name__
    wrapper.__doc__ = f.__doc__
    return wrapper


@click.group()
@click.version_option(__version__)
def main():
    """Exact-diagonalization laboratory for quantum chaos and eigenstate
    thermalization in spin-1 chains."""


# ---------------------------------------------------------------------------


@main.command()
@common_options
@click.option("--central-fraction", type=float, default=None)
@numeric_guard
def levels(config, **overrides):
    """Level spacing and spacing-ratio statistics of pooled sectors."""
    cfg = _load_cfg(config, **overrides)
    t0 = time.time()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    from .plotting import save_histogram_figure
    from .rmt import analytic_cdf, analytic_distributions
    from .spectra import ks_distance, level_spacing_stats, ratio_stats

    family, errors, hits = _diagonalize_family(
        cfg, _default_sector_specs(cfg, pooled_chaos=True), vectors=False)
    spectra = [sp for sp, _ in family]
    s_hist, s_mean = level_spacing_stats(spectra, cfg.central_fraction)
    r_hist, mean_r = ratio_stats(spectra)
    pooled_s = np.concatenate([
        np.diff(sp.eigenvalues) / np.diff(sp.eigenvalues).mean()
        for sp in spectra])
    ks_w = ks_distance(pooled_s, lambda x: analytic_cdf("wigner_s_goe", x))
    ks_p = ks_distance(pooled_s, lambda x: analytic_cdf("poisson_s", x))
    csv1 = write_csv(out / "levels_spacing.csv", ["bin_center", "density"],
                     zip(s_hist.centers, s_hist.densities))
    write_csv(out / "levels_ratio.csv", ["bin_center", "density"],
              zip(r_hist.centers, r_hist.densities))
    write_sidecar(csv1, cfg, {"mean_r": mean_r, "mean_spacing": s_mean,
                              "ks_wigner": ks_w, "ks_poisson": ks_p},
                  t0, errors, hits)
    xs = np.linspace(0, s_hist.bin_edges[-1], 200)
    save_histogram_figure(out / "levels_spacing.png", s_hist,
                          {"Wigner": (xs, analytic_distributions("wigner_s_goe", xs)),
                           "Poisson": (xs, analytic_distributions("poisson_s", xs))},
                          xlabel="s")
    xr = np.linspace(0, 1, 200)
    save_histogram_figure(out / "levels_ratio.png", r_hist,
                          {"GOE": (xr, analytic_distributions("ratio_goe", xr)),
                           "Poisson": (xr, analytic_distributions("ratio_poisson", xr))},
                          xlabel="r")
    click.echo(f"mean_r = {mean_r:.4f}")


@main.command()
@common_options
@click.option("--bins", type=int, default=None)
@numeric_guard
def dos(config, **overrides):
    """Density of states in energy density with a Gaussian fit."""
    cfg = _load_cfg(config, **overrides)
    t0 = time.time()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    from .plotting import save_histogram_figure
    from .spectra import dos as dos_op

    family, errors, hits = _diagonalize_family(
        cfg, _default_sector_specs(cfg), vectors=False)
    hist, fit, sigma = dos_op([sp for sp, _ in family], cfg.bins)
    csv = write_csv(out / "dos.csv", ["bin_center", "density"],
                    zip(hist.centers, hist.densities))
    write_sidecar(csv, cfg, {"fit": {"model": fit.model, **fit.parameters,
                                     "residual": fit.residual},
                             "sigma_e_per_l": sigma}, t0, errors, hits)
    xs = np.linspace(hist.bin_edges[0], hist.bin_edges[-1], 300)
    g = np.exp(-((xs - fit.parameters["mu"]) ** 2)
               / (2 * fit.parameters["sigma"] ** 2)) / np.sqrt(
        2 * np.pi * fit.parameters["sigma"] ** 2)
    save_histogram_figure(out / "dos.png", hist, {"Gaussian fit": (xs, g)},
                          xlabel="E/L")
    click.echo(f"sigma(E/L) = {sigma:.5f}")


@main.command()
@common_options
@click.option("--n-states", type=int, default=None)
@numeric_guard
def page(config, **overrides):
    """Eigenstate entanglement entropy versus subsystem fraction."""
    cfg = _load_cfg(config, **overrides)
    t0 = time.time()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    from .entanglement import eigenstate_page_curve
    from .plotting import save_series_figure

    family, errors, hits = _diagonalize_family(cfg, _default_sector_specs(cfg))
    curve = eigenstate_page_curve(family, cfg.n_states)
    csv = write_csv(out / "page.csv",
                    ["f", "S_mean", "S_std", "S_exact_sum", "S_asymptotic"],
                    zip(curve.f, curve.s_mean, curve.s_std, curve.s_exact,
                        curve.s_asymptotic))
    write_sidecar(csv, cfg, {"page": curve.as_dict(),
                             "state_pooling": "pooled-over-sectors"},
                  t0, errors, hits)
    save_series_figure(out / "page.png",
                       {"eigenstates": (curve.f, curve.s_mean, curve.s_std),
                        "random-state exact sum": (curve.f, curve.s_exact),
                        "asymptotic": (curve.f, curve.s_asymptotic)},
                       xlabel="f = L_A/L", ylabel="S_A")
    click.echo(f"S(f=max) = {curve.s_mean[-1]:.4f}")


@main.command("eth-diag")
@common_options
@click.option("--obs", "observable", default=None,
              type=click.Choice(["zn", "znn", "jn"]))
@click.option("--sizes", default=None, help="comma-separated system sizes")
@numeric_guard
def eth_diag(config, sizes, **overrides):
    """Diagonal matrix-element fluctuations and their size scaling."""
    cfg = _load_cfg(config, **overrides)
    if sizes:
        cfg.sizes = [int(s) for s in sizes.split(",")]
    if not cfg.sizes:
        cfg.sizes = [8]
    t0 = time.time()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    from .eth import (diag_distribution, diag_fluctuations, diag_scaling_fits,
                      matrix_elements)
    from .plotting import save_histogram_figure, save_series_figure

    per_l, errors, hits = [], [], []
    last_sets = None
    for L in cfg.sizes:
        sub = RunConfig(**{**cfg.as_dict(), "L": L})
        family, errs, hh = _diagonalize_family(sub, _default_sector_specs(sub))
        errors += errs
        hits += hh
        sets = [matrix_elements(build_observable(cfg.observable, b), sp)
                for sp, b in family]
        per_l.append(diag_fluctuations(sets))
        last_sets = sets
    csv = write_csv(out / "eth_diag.csv", ["L", "omega", "delta_o"],
                    [(d["L"], d["omega"], d["delta_o"]) for d in per_l])
    payload = {"per_L": per_l}
    if len(per_l) >= 3:
        fits = diag_scaling_fits(per_l)
        payload["fits"] = {k: {"model": v.model, **v.parameters,
                               "residual": v.residual}
                           for k, v in fits.items()}
    hist, fit, skw, kur = diag_distribution(last_sets)
    payload["distribution"] = {"skewness": skw, "excess_kurtosis": kur,
                               "gaussian": fit.parameters}
    write_sidecar(csv, cfg, payload, t0, errors, hits)
    save_series_figure(out / "eth_diag.png",
                       {"delta O": ([d["L"] * d["omega"] for d in per_l],
                                    [d["delta_o"] for d in per_l])},
                       xlabel="L*Omega", ylabel="delta O", logx=True, logy=True)
    save_histogram_figure(out / "eth_diag_dist.png", hist, xlabel="O_mm")
    click.echo(f"delta_o = {[round(d['delta_o'], 6) for d in per_l]}")


@main.command("eth-offdiag")
@common_options
@click.option("--obs", "observable", default=None,
              type=click.Choice(["zn", "znn", "jn"]))
@click.option("--omega-max", type=float, default=None)
@numeric_guard
def eth_offdiag(config, **overrides):
    """Off-diagonal matrix-element distributions and fits."""
    cfg = _load_cfg(config, **overrides)
    t0 = time.time()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    from .eth import matrix_elements, offdiag_distribution
    from .plotting import save_histogram_figure

    family, errors, hits = _diagonalize_family(cfg, _default_sector_specs(cfg))
    sets = [matrix_elements(build_observable(cfg.observable, b), sp)
            for sp, b in family]
    omega_max = cfg.omega_max if cfg.omega_max is not None else (
        0.01 if cfg.lam == 0.0 else None)
    rep = offdiag_distribution(sets, omega_max=omega_max)
    csv = write_csv(out / "eth_offdiag_raw.csv", ["bin_center", "density"],
                    zip(rep["raw"]["hist"].centers, rep["raw"]["hist"].densities))
    write_csv(out / "eth_offdiag_logabs.csv", ["bin_center", "density"],
              zip(rep["logabs"]["hist"].centers, rep["logabs"]["hist"].densities))
    payload = {"variance": rep["variance"], "n_elements": rep["n_elements"],
               "widened": rep["widened"], "omega_max": rep["omega_max"]}
    for key in ("raw", "logabs"):
        payload[key] = {m: {"params": rep[key][m].parameters,
                            "rms_residual": rep[key][m].residual}
                        for m in ("gaussian", "gumbel")}
    write_sidecar(csv, cfg, payload, t0, errors, hits)
    save_histogram_figure(out / "eth_offdiag_raw.png", rep["raw"]["hist"],
                          xlabel="O_mn")
    save_histogram_figure(out / "eth_offdiag_logabs.png", rep["logabs"]["hist"],
                          xlabel="|ln |O_mn|^2|")
    click.echo(f"n_elements = {rep['n_elements']}")


@main.command()
@common_options
@click.option("--obs", "observable", default=None,
              type=click.Choice(["zn", "znn", "jn"]))
@click.option("--omega-max", type=float, default=None)
@numeric_guard
def spectral(config, **overrides):
    """Variance and autocorrelation spectral functions."""
    cfg = _load_cfg(config, **overrides)
    t0 = time.time()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    from .eth import (matrix_elements, omega_bin_edges, spectral_function_corr,
                      spectral_function_var, sum_rule_check)
    from .plotting import save_series_figure

    family, errors, hits = _diagonalize_family(cfg, _default_sector_specs(cfg))
    sets = [matrix_elements(build_observable(cfg.observable, b), sp)
            for sp, b in family]
    wmax = cfg.omega_max or 4.0 * cfg.L
    edges = omega_bin_edges(wmax)
    var = spectral_function_var(sets, edges)
    grid = var.omega
    corr, resc = spectral_function_corr(sets, grid, sigma=cfg.sigma)
    csv = write_csv(out / "spectral.csv",
                    ["omega", "f2_var", "f2_corr", "f2_resc"],
                    zip(grid, var.values, corr.values, resc.values))
    write_sidecar(csv, cfg, {"var_meta": var.metadata,
                             "corr_meta": corr.metadata,
                             "sum_rule_max_dev": max(sum_rule_check(s)
                                                     for s in sets)},
                  t0, errors, hits)
    ok = np.isfinite(var.values)
    save_series_figure(out / "spectral.png",
                       {"var": (grid[ok], var.values[ok]),
                        "resc": (grid, resc.values)},
                       xlabel="omega", ylabel="|f|^2", logx=True, logy=True)
    click.echo(f"bins populated: {int(ok.sum())}/{len(ok)}")


@main.command("momentum-sf")
@common_options
@click.option("--site", type=int, default=None)
@click.option("--omega-max", type=float, default=None)
@numeric_guard
def momentum_sf(config, **overrides):
    """Quasimomentum-difference decomposition of a local operator."""
    cfg = _load_cfg(config, **overrides)
    t0 = time.time()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    from .plotting import save_series_figure
    from .symmetry_eth import momentum_resolved_sf

    family, errors, hits = _diagonalize_family(cfg, _default_sector_specs(cfg))
    site = cfg.site if cfg.site is not None else cfg.L // 2 - 1
    grid = np.geomspace(0.05, cfg.omega_max or 2.0 * cfg.L, 80)
    msf = momentum_resolved_sf(family, site, grid, sigma=cfg.sigma)
    header = ["omega"] + [f"class_{int(c)}" for c in msf.class_labels] + [
        "total_local", "total_invariant"]
    rows = [tuple([w] + list(msf.class_values[:, i])
                  + [msf.total_local[i], msf.total_invariant[i]])
            for i, w in enumerate(grid)]
    csv = write_csv(out / "momentum_sf.csv", header, rows)
    L = cfg.L
    mult = {int(c): (L if (c == 0 or 2 * c == L) else 2 * L)
            for c in msf.class_labels}
    write_sidecar(csv, cfg, {"class_multiplicities": mult,
                             "metadata": msf.metadata}, t0, errors, hits)
    series = {f"class {int(c)}": (grid, msf.class_values[i])
              for i, c in enumerate(msf.class_labels)}
    series["total local"] = (grid, msf.total_local)
    save_series_figure(out / "momentum_sf.png", series, xlabel="omega",
                       ylabel="|f|^2 contribution", logx=True, logy=True)
    click.echo(f"classes: {list(mult)}")


@main.command("obc-sf")
@common_options
@click.option("--omega-max", type=float, default=None)
@numeric_guard
def obc_sf(config, **overrides):
    """Distance-resolved decomposition on the open chain."""
    overrides["bc"] = "OBC"
    cfg = _load_cfg(config, **overrides)
    cfg.bc = "OBC"
    t0 = time.time()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    from .plotting import save_series_figure
    from .symmetry_eth import obc_distance_decomposition

    params = _model_params(cfg)
    basis = build_sym_basis(SectorSpec(L=cfg.L, M=cfg.M, bc=OBC))
    spectrum, hit = get_or_compute(cfg.cache_dir, params, basis)
    grid = np.geomspace(0.05, cfg.omega_max or 2.0 * cfg.L, 80)
    dsf = obc_distance_decomposition(spectrum, basis, grid, sigma=cfg.sigma)
    header = (["omega"] + [f"d_{int(d)}" for d in dsf.distances]
              + ["total_average", "total_local_bulk", "resc_factor"])
    rows = [tuple([w] + list(dsf.contributions[:, i])
                  + [dsf.total_average[i], dsf.total_local_bulk[i],
                     dsf.resc_factor[i]])
            for i, w in enumerate(grid)]
    csv = write_csv(out / "obc_sf.csv", header, rows)
    write_sidecar(csv, cfg, {"metadata": dsf.metadata}, t0, [],
                  [{"cache_hit": hit}])
    save_series_figure(out / "obc_sf.png",
                       {"average op": (grid, dsf.total_average * dsf.resc_factor),
                        "bulk local op": (grid, dsf.total_local_bulk * dsf.resc_factor)},
                       xlabel="omega", ylabel="|f_resc|^2", logx=True, logy=True)
    click.echo(f"distances: 0..{int(dsf.distances[-1])}")


@main.command()
@common_options
@click.option("--init", "init", default=None,
              help="neel | zeros | eig:<lam>,<delta>")
@click.option("--obs", "observable", default=None,
              type=click.Choice(["zn", "znn", "jn"]))
@click.option("--tmax", "t_max", type=float, default=None)
@click.option("--nt", "n_times", type=int, default=None)
@numeric_guard
def quench(config, **overrides):
    """Unitary evolution after a quench; diagonal vs microcanonical ensembles."""
    cfg = _load_cfg(config, **overrides)
    t0 = time.time()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    from .plotting import save_series_figure
    from .quench import (diagonal_ensemble, evolve_expectation,
                         eigenstate_setup, microcanonical_average, neel_code,
                         product_state_setup, temporal_fluctuations,
                         zeros_code)
    from .eth import matrix_elements
    from .spectra import diagonalize
    from .hamiltonian import build_hamiltonian

    params = _model_params(cfg)
    basis = build_sym_basis(SectorSpec(L=cfg.L, M=cfg.M))
    spectrum, _ = get_or_compute(cfg.cache_dir, params, basis)
    if cfg.init == "neel":
        setup = product_state_setup(neel_code(cfg.L), spectrum, basis)
    elif cfg.init == "zeros":
        setup = product_state_setup(zeros_code(cfg.L), spectrum, basis)
    elif cfg.init.startswith("eig:"):
        lam2, delta2 = (float(x) for x in cfg.init[4:].split(","))
        src_block = build_hamiltonian(ModelParams(delta=delta2, lam=lam2), basis)
        src = diagonalize(src_block)
        setup = eigenstate_setup(src, src.dim // 2, spectrum)
    else:
        raise ConfigError(f"unknown init {cfg.init!r}")
    mset = matrix_elements(build_observable(cfg.observable, basis), spectrum)
    times = np.linspace(0.0, cfg.t_max, cfg.n_times)
    series = evolve_expectation(setup, mset, times)
    de = diagonal_ensemble(setup, mset)
    me = microcanonical_average(spectrum, mset.diagonal(), setup.e_bar)
    fl = temporal_fluctuations(setup, mset, cfg.t_max, cfg.n_times)
    csv = write_csv(out / "quench.csv", ["t", "O_t"], zip(times, series))
    write_sidecar(csv, cfg, {"diagonal_ensemble": de, "microcanonical": me,
                             "fluctuations": fl, "e_bar": setup.e_bar,
                             "delta_e0": setup.delta_e0}, t0)
    save_series_figure(out / "quench.png",
                       {"O(t)": (times, series),
                        "DE": (times, np.full_like(times, de)),
                        "ME": (times, np.full_like(times, me["value"]))},
                       xlabel="t", ylabel="O(t)")
    click.echo(f"DE = {de:.6f}, ME = {me['value']:.6f}")


@main.command()
@common_options
@click.option("--check", default=None,
              type=click.Choice(["semicircle", "surmise", "porter-thomas",
                                 "weingarten", "moments"]))
@click.option("--dim", type=int, default=None)
@click.option("--n-samples", type=int, default=None)
@numeric_guard
def rmt(config, **overrides):
    """Random-matrix ensemble self-checks."""
    cfg = _load_cfg(config, **overrides)
    t0 = time.time()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    from .plotting import save_histogram_figure
    from .rmt import (EnsembleSpec, analytic_cdf, analytic_distributions,
                      porter_thomas_test, rmt_matrix_element_moments,
                      sample_gaussian_ensemble, weingarten_4point_check)
    from .spectra import (ks_distance, make_histogram, ratio_stats,
                          level_spacing_stats)

    report: dict = {"check": cfg.check}
    fig_hist = None
    refs = {}
    if cfg.check == "semicircle":
        spec = EnsembleSpec(kind="GOE", dim=cfg.dim, seed=cfg.seed)
        h = sample_gaussian_ensemble(spec)
        w = np.linalg.eigvalsh(h) / np.sqrt(cfg.dim * spec.sigma**2)
        ks = ks_distance(w, lambda x: analytic_cdf("semicircle", x))
        report.update({"statistic": "ks", "empirical": ks, "analytic": 0.0,
                       "z": None})
        fig_hist = make_histogram(w)
        xs = np.linspace(-1.5, 1.5, 300)
        refs = {"semicircle": (xs, analytic_distributions("semicircle", xs))}
    elif cfg.check == "surmise":
        spec = EnsembleSpec(kind="GOE", dim=cfg.dim, seed=cfg.seed)
        h = sample_gaussian_ensemble(spec)
        sp = Spectrum(spec=None, eigenvalues=np.sort(np.linalg.eigvalsh(h)))
        hist, _ = level_spacing_stats([sp], 0.5)
        s = np.diff(sp.eigenvalues[len(sp.eigenvalues) // 4:
                                   3 * len(sp.eigenvalues) // 4])
        s = s / s.mean()
        ks = ks_distance(s, lambda x: analytic_cdf("wigner_s_goe", x))
        _, mean_r = ratio_stats([sp])
        report.update({"statistic": "ks_wigner", "empirical": ks,
                       "mean_r": mean_r, "analytic": 0.5359, "z": None})
        fig_hist = hist
        xs = np.linspace(0, 4, 200)
        refs = {"Wigner": (xs, analytic_distributions("wigner_s_goe", xs))}
    elif cfg.check == "porter-thomas":
        spec = EnsembleSpec(kind="HaarU", dim=max(cfg.dim, 64), seed=cfg.seed)
        ks = porter_thomas_test(spec, cfg.n_samples)
        report.update({"statistic": "ks", "empirical": ks, "analytic": 0.0,
                       "z": None})
    elif cfg.check == "weingarten":
        results = []
        for kind in ("U", "O"):
            for idx in ((0, 1, 0, 1, 2, 3, 2, 3), (0, 0, 0, 0, 1, 1, 1, 1)):
                results.append(weingarten_4point_check(
                    kind, max(cfg.dim, 3) if cfg.dim < 16 else 5,
                    cfg.n_samples, idx, seed=cfg.seed))
        report["results"] = results
        report["max_abs_z"] = max(abs(r["z"]) for r in results)
    elif cfg.check == "moments":
        spec = EnsembleSpec(kind="HaarO", dim=min(cfg.dim, 64), seed=cfg.seed)
        m = rmt_matrix_element_moments(spec, np.arange(spec.dim, dtype=float),
                                       cfg.n_samples)
        m["mean_offdiag"] = abs(m["mean_offdiag"])
        report.update(m)
    path = out / f"rmt_{cfg.check}.json"
    doc = {"config": cfg.as_dict(), "version": __version__,
           "wall_time_s": time.time() - t0}
    doc.update(report)
    path.write_text(json.dumps(doc, indent=2, default=_json_default) + "\n")
    if fig_hist is not None:
        save_histogram_figure(out / f"rmt_{cfg.check}.png", fig_hist, refs)
    click.echo(json.dumps(report, default=_json_default))


if __name__ == "__main__":
    main()
