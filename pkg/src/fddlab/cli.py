"""Batch pipeline driver.

Subcommands: otf, fisher, budget, simulate, reconstruct, snr, validate.
Every run reads one JSON config (defaults fill any omitted field), writes
fixed-name artifacts under --out, and finishes with a manifest.json holding
the fully resolved config, the effective seed/trial counts, and a sha256
digest of every artifact, so a run can be reproduced bit-identically.

Exit codes: 0 success, 2 config error, 3 numerical-invariant failure.
All field names carry their unit (wavelength_nm, dx_nm, lines_per_mm);
dimensionless ratios say what they are relative to (k_a_ratio_kc is a
fraction of the cutoff, amp_cos_rel_a0 a multiple of the background).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from .budget import BudgetParams, budget_curves, n_min_di, n_min_fdd
from .estimation import crb, fi_di_analytic, fi_fdd_raw, fi_hybrid, fi_pupil_analytic, qfi_analytic
from .fieldio import partition_description, save_field, save_preview
from .fourier import GridSpec, Mode, RealField, SampleSpectrum, fft_forward, make_test_chart
from .numeric1d import (
    Grid1D,
    analytic_info_1d,
    apsf_1d,
    build_density_operator_1d,
    fdd_otfs_1d,
    fi_numeric_1d,
    mode_labels,
    qfi_numeric_1d,
    random_sample_1d,
)
from .optics import (
    OpticsSpec,
    chat_otf,
    compute_otf,
    hybrid_otfs,
    make_circular_pupil,
    partition_fdd,
)
from .reconstruct import (
    ReconstructionConfig,
    reconstruct_di_dcv,
    reconstruct_fdd,
    snr_at_k,
    snr_gain_theory,
)
from .reconstruct import estimate_fourier_params
from .simulate import AcquisitionConfig, acquire

__all__ = ["main", "ConfigError", "ValidationFailure", "DEFAULT_CONFIG", "load_config"]


class ConfigError(Exception):
    """Schema or value problem in the experiment config (exit code 2)."""


class ValidationFailure(Exception):
    """A numerical invariant did not hold at run time (exit code 3)."""


DEFAULT_CONFIG = {
    "optics": {"wavelength_nm": 540.0, "numerical_aperture": 1.4},
    "grid": {"nx": 256, "ny": 256, "dx_nm": None},
    "sample": {
        "kind": "chart",
        "lines_per_mm": 4500.0,
        "n_lines": 5,
        "orientation": "x",
        "modes": [],
    },
    "partition": {"k_a_ratio_kc": 0.7},
    "acquisition": {
        "photons": 1.0e6,
        "alpha": 0.6,
        "seed": 1234,
        "trials": 1,
        "read_noise_std_counts": 0.0,
    },
    "reconstruction": {
        "iterations": 3,
        "epsilon_floor": 1.0e-12,
        "band_limit": True,
        "epsilon_mode": "iterative",
    },
    "budget": {
        "cv": 0.4,
        "snr_threshold": 3.0,
        "alpha_grid": [],
        "ka_grid": [],
        "target_k_ratios_kc": [],
    },
    "fisher": {"k_ratios_kc": []},
    "snr": {"k_ratio_kc": 0.87},
    "estimate": {"bins": []},
    "validate": {
        "n": 512,
        "n_pupil_bins": 26,
        "n_modes": 48,
        "seed": 7,
        "k_a_ratio_kc": 0.7,
        "alpha": 0.6,
        "min_to_max": 0.1,
    },
}


def _merge(defaults, user, path):
    """Defaults overridden by user values; unknown keys are config errors
    so typos never silently fall back to a default."""
    if not isinstance(user, dict):
        raise ConfigError(f"{path or 'config'}: expected an object, got {type(user).__name__}")
    out = {}
    for key, dval in defaults.items():
        here = f"{path}.{key}" if path else key
        if key not in user:
            out[key] = dval
        elif isinstance(dval, dict):
            out[key] = _merge(dval, user[key], here)
        else:
            out[key] = user[key]
    for key in user:
        if key not in defaults:
            here = f"{path}.{key}" if path else key
            raise ConfigError(f"{here}: unknown field")
    return out


def load_config(path: str | Path | None) -> dict:
    """Parse the JSON config at path (all defaults when None) and merge it
    over the defaults."""
    if path is None:
        user = {}
    else:
        p = Path(path)
        try:
            user = json.loads(p.read_text())
        except OSError as e:
            raise ConfigError(f"cannot read config {p}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {p} is not valid JSON: {e}") from e
    return _merge(DEFAULT_CONFIG, user, "")


def _num(cfg, path, lo=None, hi=None, integer=False):
    cur = cfg
    for part in path.split("."):
        cur = cur[part]
    if isinstance(cur, bool) or not isinstance(cur, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {cur!r}")
    if integer and int(cur) != cur:
        raise ConfigError(f"{path}: expected an integer, got {cur!r}")
    if lo is not None and cur < lo:
        raise ConfigError(f"{path}: must be >= {lo}, got {cur}")
    if hi is not None and cur > hi:
        raise ConfigError(f"{path}: must be <= {hi}, got {cur}")
    return int(cur) if integer else float(cur)


def _build_optics(cfg) -> OpticsSpec:
    wl = _num(cfg, "optics.wavelength_nm", lo=1e-9)
    na = _num(cfg, "optics.numerical_aperture", lo=1e-9, hi=1.6)
    return OpticsSpec(wavelength=wl, numerical_aperture=na)


def _build_grid(cfg, optics: OpticsSpec) -> GridSpec:
    nx = _num(cfg, "grid.nx", lo=16, integer=True)
    ny = _num(cfg, "grid.ny", lo=16, integer=True)
    if nx % 2 or ny % 2:
        raise ConfigError("grid.nx/grid.ny: must be even")
    dx = cfg["grid"]["dx_nm"]
    if dx is None:
        dx = 0.8 * math.pi / optics.k_c
        cfg["grid"]["dx_nm"] = dx
    elif not isinstance(dx, (int, float)) or isinstance(dx, bool) or dx <= 0:
        raise ConfigError(f"grid.dx_nm: expected a positive number or null, got {dx!r}")
    try:
        return GridSpec(nx=nx, ny=ny, dx=float(dx))
    except ValueError as e:
        raise ConfigError(f"grid: {e}") from e


def _build_sample(cfg, grid: GridSpec, optics: OpticsSpec):
    """Returns (sample object, default estimation bins).

    kind 'chart': a resolution-chart field; the default estimation bin is
    the chart's fundamental along its orientation. kind 'modes': an exact
    cosine/sine lattice spectrum; defaults to each mode's bin.
    """
    s = cfg["sample"]
    kind = s["kind"]
    if kind == "chart":
        lpm = _num(cfg, "sample.lines_per_mm", lo=1e-9)
        n_lines = _num(cfg, "sample.n_lines", lo=0, integer=True)
        orientation = s["orientation"]
        if orientation not in ("x", "y"):
            raise ConfigError(f"sample.orientation: must be 'x' or 'y', got {orientation!r}")
        try:
            chart = make_test_chart(lpm, n_lines, grid, orientation=orientation)
        except ValueError as e:
            raise ConfigError(f"sample: {e}") from e
        k_fund = 2 * math.pi * lpm / 1e6
        dk = grid.dkx if orientation == "x" else grid.dky
        b = int(round(k_fund / dk))
        bins = [(b, 0) if orientation == "x" else (0, b)] if n_lines > 0 else []
        return chart, bins
    if kind == "modes":
        raw_modes = s["modes"]
        if not isinstance(raw_modes, list) or not raw_modes:
            raise ConfigError("sample.modes: must be a non-empty list when kind is 'modes'")
        a0 = 1.0 / grid.area
        modes = []
        bins = []
        for i, m in enumerate(raw_modes):
            here = f"sample.modes[{i}]"
            if not isinstance(m, dict):
                raise ConfigError(f"{here}: expected an object")
            for key in m:
                if key not in ("kx_bin", "ky_bin", "amp_cos_rel_a0", "amp_sin_rel_a0"):
                    raise ConfigError(f"{here}.{key}: unknown field")
            try:
                bx = int(m["kx_bin"])
                by = int(m["ky_bin"])
            except (KeyError, TypeError, ValueError) as e:
                raise ConfigError(f"{here}: kx_bin/ky_bin must be integers") from e
            if not (bx > 0 or (bx == 0 and by > 0)):
                raise ConfigError(
                    f"{here}: bins must lie in the half plane kx_bin > 0 or "
                    f"(kx_bin = 0, ky_bin > 0), got ({bx}, {by})"
                )
            k = (bx * grid.dkx, by * grid.dky)
            if math.hypot(*k) > optics.k_c:
                raise ConfigError(f"{here}: bin ({bx}, {by}) lies beyond the cutoff")
            a_rel = float(m.get("amp_cos_rel_a0", 0.0))
            b_rel = float(m.get("amp_sin_rel_a0", 0.0))
            modes.append(Mode(k, a_rel * a0, b_rel * a0))
            bins.append((bx, by))
        try:
            return SampleSpectrum(a0=a0, modes=tuple(modes)), bins
        except ValueError as e:
            raise ConfigError(f"sample.modes: {e}") from e
    raise ConfigError(f"sample.kind: must be 'chart' or 'modes', got {kind!r}")


def _build_partition(cfg, optics: OpticsSpec, grid: GridSpec):
    ka = _num(cfg, "partition.k_a_ratio_kc", lo=1e-6, hi=1 - 1e-6)
    try:
        pupil = make_circular_pupil(optics, grid)
        part = partition_fdd(pupil, ka)
    except ValueError as e:
        raise ConfigError(f"partition: {e}") from e
    return pupil, part


def _build_acquisition(cfg, part) -> AcquisitionConfig:
    photons = _num(cfg, "acquisition.photons", lo=1e-12)
    alpha = _num(cfg, "acquisition.alpha", lo=0.0, hi=1.0)
    seed = _num(cfg, "acquisition.seed", lo=0, integer=True)
    _num(cfg, "acquisition.trials", lo=1, integer=True)
    rn = _num(cfg, "acquisition.read_noise_std_counts", lo=0.0)
    try:
        return AcquisitionConfig(
            n_photons=photons, alpha=alpha, partition=part, seed=seed, read_noise_std=rn
        )
    except ValueError as e:
        raise ConfigError(f"acquisition: {e}") from e


def _build_reconstruction(cfg) -> ReconstructionConfig:
    r = cfg["reconstruction"]
    iters = _num(cfg, "reconstruction.iterations", lo=1, hi=20, integer=True)
    floor = _num(cfg, "reconstruction.epsilon_floor", lo=0.0)
    if not isinstance(r["band_limit"], bool):
        raise ConfigError(f"reconstruction.band_limit: expected true/false, got {r['band_limit']!r}")
    if r["epsilon_mode"] not in ("iterative", "fixed"):
        raise ConfigError(
            f"reconstruction.epsilon_mode: must be 'iterative' or 'fixed', got {r['epsilon_mode']!r}"
        )
    return ReconstructionConfig(
        iterations=iters,
        epsilon_floor=floor,
        band_limit=r["band_limit"],
        epsilon_mode=r["epsilon_mode"],
    )


def _build_budget_params(cfg) -> BudgetParams:
    b = cfg["budget"]
    kwargs = {
        "cv": _num(cfg, "budget.cv", lo=1e-12),
        "snr_threshold": _num(cfg, "budget.snr_threshold", lo=1e-12),
    }
    for cfg_key, field in (
        ("alpha_grid", "alpha_grid"),
        ("ka_grid", "ka_grid"),
        ("target_k_ratios_kc", "target_k_ratios"),
    ):
        vals = b[cfg_key]
        if not isinstance(vals, list):
            raise ConfigError(f"budget.{cfg_key}: expected a list")
        if vals:
            kwargs[field] = tuple(float(v) for v in vals)
    try:
        return BudgetParams(**kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"budget: {e}") from e


def _estimate_bins(cfg, grid: GridSpec, optics: OpticsSpec, default_bins):
    raw = cfg["estimate"]["bins"]
    if not isinstance(raw, list):
        raise ConfigError("estimate.bins: expected a list of [kx_bin, ky_bin] pairs")
    if not raw:
        bins = list(default_bins)
    else:
        bins = []
        for i, pair in enumerate(raw):
            if not (isinstance(pair, list) and len(pair) == 2):
                raise ConfigError(f"estimate.bins[{i}]: expected [kx_bin, ky_bin]")
            bx, by = int(pair[0]), int(pair[1])
            if not (bx > 0 or (bx == 0 and by > 0)):
                raise ConfigError(f"estimate.bins[{i}]: must lie in the positive half plane")
            bins.append((bx, by))
    for bx, by in bins:
        if math.hypot(bx * grid.dkx, by * grid.dky) > optics.k_c:
            raise ConfigError(f"estimate.bins: ({bx}, {by}) lies beyond the cutoff")
    if not bins:
        raise ConfigError("estimate.bins: no estimation bins (uniform sample and none given)")
    return bins


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: Path, header, rows) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _write_manifest(out: Path, command: str, cfg: dict, paths, summary=None) -> Path:
    manifest = {
        "command": command,
        "config": cfg,
        "outputs": {p.name: _digest(p) for p in sorted(set(paths))},
        "seed_derivation": "PCG64(SeedSequence(entropy=acquisition.seed, spawn_key=(frame, trial)))",
    }
    if summary is not None:
        manifest["summary"] = summary
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _save_with_sidecar(field, path: Path, paths: list) -> None:
    paths.append(save_field(field, path))
    paths.append(Path(str(path) + ".json"))


# ---------------------------------------------------------------- commands


def cmd_otf(cfg: dict, out: Path) -> dict:
    optics = _build_optics(cfg)
    grid = _build_grid(cfg, optics)
    pupil, part = _build_partition(cfg, optics, grid)
    alpha = _num(cfg, "acquisition.alpha", lo=0.0, hi=1.0)
    di = compute_otf(pupil)
    otfs = hybrid_otfs(part, di, alpha)
    chat = chat_otf(grid, optics.k_c)

    paths: list[Path] = []
    _save_with_sidecar(di, out / "otf_di.bin", paths)
    paths.append(save_preview(di, out / "otf_di.pgm"))
    for i, o in enumerate(otfs.regions, start=1):
        _save_with_sidecar(o, out / f"otf_region{i}.bin", paths)
        paths.append(save_preview(o, out / f"otf_region{i}.pgm"))

    dk = grid.dkx
    nbins = int(math.floor(optics.k_c / dk)) + 1
    rows = []
    for b in range(nbins):
        k = (b * dk, 0.0)
        rows.append(
            [b * dk / optics.k_c, di.at(k), chat.at(k)]
            + [o.at(k) for o in otfs.regions]
        )
    paths.append(
        _write_csv(
            out / "otf_axis.csv",
            ["k_ratio_kc", "beta_di", "beta_chat"] + [f"beta_region{i}" for i in range(1, 6)],
            rows,
        )
    )
    ptxt = out / "partition.txt"
    ptxt.write_text(partition_description(part))
    paths.append(ptxt)

    summary = {
        "k_c_per_nm": optics.k_c,
        "pupil_pixels": pupil.pixel_count,
        "region_dc_fractions": [o.dc_value for o in otfs.regions],
    }
    _write_manifest(out, "otf", cfg, paths, summary)
    return summary


def cmd_fisher(cfg: dict, out: Path) -> dict:
    optics = _build_optics(cfg)
    grid = _build_grid(cfg, optics)
    pupil, part = _build_partition(cfg, optics, grid)
    alpha = _num(cfg, "acquisition.alpha", lo=0.0, hi=1.0)
    di = compute_otf(pupil)
    otfs = hybrid_otfs(part, di, alpha)
    a0 = 1.0 / grid.area
    dk = grid.dkx

    ratios = cfg["fisher"]["k_ratios_kc"]
    if not isinstance(ratios, list):
        raise ConfigError("fisher.k_ratios_kc: expected a list")
    if ratios:
        bins = sorted({int(round(float(r) * optics.k_c / dk)) for r in ratios})
        if any(b < 1 for b in bins):
            raise ConfigError("fisher.k_ratios_kc: ratios must map to axis bins >= 1")
    else:
        bins = list(range(1, int(math.floor(0.98 * optics.k_c / dk)) + 1))
    ks = [(b * dk, 0.0) for b in bins]

    qfi = qfi_analytic(di, a0, ks)
    fidi = fi_di_analytic(di, a0, ks)
    per = [fi_pupil_analytic(o, a0, ks) for o in otfs.regions if o.dc_value > 0]
    raw = fi_fdd_raw(per)
    hyb = fi_hybrid(raw, fidi, alpha)
    crbs = {name: crb(fd, 1.0) for name, fd in
            (("qfi", qfi), ("di", fidi), ("raw", raw), ("hybrid", hyb))}

    rows = []
    for i, (k, mode) in enumerate(qfi.labels):
        c_di, c_h = crbs["di"][i], crbs["hybrid"][i]
        ratio = c_di / c_h if math.isfinite(c_di) and math.isfinite(c_h) and c_h > 0 else math.inf
        rows.append(
            [
                k[0],
                k[1],
                mode,
                qfi.values[i],
                fidi.values[i],
                raw.values[i],
                hyb.values[i],
                crbs["qfi"][i],
                c_di,
                crbs["raw"][i],
                c_h,
                ratio,
                math.hypot(*k) / optics.k_c,
            ]
        )
    paths = [
        _write_csv(
            out / "fisher_curves.csv",
            [
                "kx",
                "ky",
                "mode",
                "qfi",
                "fi_di",
                "fi_fdd_raw",
                "fi_hybrid",
                "crb_qfi",
                "crb_di",
                "crb_fdd_raw",
                "crb_fdd_hybrid",
                "crb_ratio_di_over_hybrid",
                "k_ratio_kc",
            ],
            rows,
        )
    ]
    ratios_arr = [r[11] for r in rows]
    summary = {"max_crb_ratio_di_over_hybrid": max(ratios_arr)}
    _write_manifest(out, "fisher", cfg, paths, summary)
    return summary


def cmd_budget(cfg: dict, out: Path) -> dict:
    optics = _build_optics(cfg)
    grid = _build_grid(cfg, optics)
    params = _build_budget_params(cfg)
    curve_di, curve_fdd = budget_curves(params, optics, grid)

    rows = []
    for (res, ndi, _, _), (_, nfdd, a_star, ka_star) in zip(curve_di.points, curve_fdd.points):
        k = 2 * math.pi / res
        ratio = ndi / nfdd if math.isfinite(ndi) and math.isfinite(nfdd) and nfdd > 0 else math.nan
        rows.append(
            [k / optics.k_c, res, ndi, nfdd, ratio,
             a_star if a_star is not None else math.nan,
             ka_star if ka_star is not None else math.nan]
        )
    paths = [
        _write_csv(
            out / "budget_curves.csv",
            [
                "k_ratio_kc",
                "resolution_nm",
                "n_min_di",
                "n_min_fdd",
                "ratio_di_over_fdd",
                "alpha_star",
                "ka_star",
            ],
            rows,
        )
    ]
    k_rayleigh = optics.k_c / (2 * 0.61)
    ndi = n_min_di(k_rayleigh, params, compute_otf(make_circular_pupil(optics, grid)))
    nfdd, a_star, ka_star = n_min_fdd(k_rayleigh, params, optics, grid)
    summary = {
        "rayleigh_k_ratio_kc": k_rayleigh / optics.k_c,
        "rayleigh_n_min_di": ndi,
        "rayleigh_n_min_fdd": nfdd,
        "rayleigh_ratio": ndi / nfdd,
        "rayleigh_alpha_star": a_star,
        "rayleigh_ka_star": ka_star,
    }
    _write_manifest(out, "budget", cfg, paths, summary)
    return summary


def cmd_simulate(cfg: dict, out: Path) -> dict:
    optics = _build_optics(cfg)
    grid = _build_grid(cfg, optics)
    sample, _ = _build_sample(cfg, grid, optics)
    pupil, part = _build_partition(cfg, optics, grid)
    acq = _build_acquisition(cfg, part)
    trials = _num(cfg, "acquisition.trials", lo=1, integer=True)
    di = compute_otf(pupil)
    otfs = hybrid_otfs(part, di, acq.alpha)

    paths: list[Path] = []
    rows = []
    for t in range(trials):
        raw = acquire(sample, acq, trial=t, otfs=otfs)
        for l, frame in enumerate(raw.frames):
            _save_with_sidecar(frame, out / f"trial{t:03d}_frame{l}.bin", paths)
            if t == 0:
                paths.append(save_preview(frame, out / f"trial{t:03d}_frame{l}.pgm"))
            rows.append([t, l, raw.n_photons[l], raw.clipped_pixels[l]])
    paths.append(
        _write_csv(out / "photons.csv", ["trial", "frame", "n_photons", "clipped_pixels"], rows)
    )
    summary = {
        "trials": trials,
        "total_photons_trial0": sum(r[2] for r in rows if r[0] == 0),
    }
    _write_manifest(out, "simulate", cfg, paths, summary)
    return summary


def _true_coefficients(sample, grid: GridSpec, bins):
    """(a_k, b_k) ground truth at the given bins, from the mode list for
    spectra and from the exact transform for chart fields."""
    if isinstance(sample, SampleSpectrum):
        lookup = {}
        for m in sample.modes:
            bx = int(round(m.k[0] / grid.dkx))
            by = int(round(m.k[1] / grid.dky))
            lookup[(bx, by)] = (m.a, m.b)
        return [lookup.get(bin_, (0.0, 0.0)) for bin_ in bins]
    spec = fft_forward(sample)
    out = []
    for bx, by in bins:
        v = spec.at((bx * grid.dkx, by * grid.dky))
        out.append((2 * v.real / grid.area, -2 * v.imag / grid.area))
    return out


def cmd_reconstruct(cfg: dict, out: Path) -> dict:
    optics = _build_optics(cfg)
    grid = _build_grid(cfg, optics)
    sample, default_bins = _build_sample(cfg, grid, optics)
    pupil, part = _build_partition(cfg, optics, grid)
    acq = _build_acquisition(cfg, part)
    rcfg = _build_reconstruction(cfg)
    trials = _num(cfg, "acquisition.trials", lo=1, integer=True)
    bins = _estimate_bins(cfg, grid, optics, default_bins)

    di = compute_otf(pupil)
    otfs = hybrid_otfs(part, di, acq.alpha)
    otfs_di_only = hybrid_otfs(part, di, 0.0)
    acq_di = AcquisitionConfig(
        n_photons=acq.n_photons,
        alpha=0.0,
        partition=part,
        seed=acq.seed,
        read_noise_std=acq.read_noise_std,
    )
    a0 = 1.0 / grid.area
    n_total = acq.n_photons
    ks = [(bx * grid.dkx, by * grid.dky) for bx, by in bins]

    paths: list[Path] = []
    ahat = np.zeros((trials, len(bins)))
    bhat = np.zeros((trials, len(bins)))
    for t in range(trials):
        raw = acquire(sample, acq, trial=t, otfs=otfs)
        res = reconstruct_fdd(raw, otfs, rcfg)
        for j, (_, a_h, b_h) in enumerate(estimate_fourier_params(res, a0, n_total, ks)):
            ahat[t, j] = a_h
            bhat[t, j] = b_h
        if t == 0:
            _save_with_sidecar(res.image, out / "recon_image.bin", paths)
            paths.append(save_preview(res.image, out / "recon_image.pgm"))
            _save_with_sidecar(res.spectrum, out / "recon_spectrum.bin", paths)
            paths.append(save_preview(res.spectrum, out / "recon_spectrum.pgm"))
            raw_di = acquire(sample, acq_di, trial=t, otfs=otfs_di_only)
            res_di = reconstruct_di_dcv(raw_di.frames[0], di, rcfg)
            _save_with_sidecar(res_di.image, out / "di_dcv_image.bin", paths)
            paths.append(save_preview(res_di.image, out / "di_dcv_image.pgm"))

    per = [fi_pupil_analytic(o, a0, ks) for o in otfs.regions if o.dc_value > 0]
    hyb = fi_hybrid(fi_fdd_raw(per), fi_di_analytic(di, a0, ks), acq.alpha)
    crb_abs = crb(hyb, n_total)
    truth = _true_coefficients(sample, grid, bins)

    rows = []
    for j, (bx, by) in enumerate(bins):
        t_a, t_b = truth[j]
        c = crb_abs[2 * j]
        if trials >= 2:
            var_a = float(ahat[:, j].var(ddof=1))
            var_b = float(bhat[:, j].var(ddof=1))
            se_a = math.sqrt(var_a / trials) if var_a > 0 else math.nan
            se_b = math.sqrt(var_b / trials) if var_b > 0 else math.nan
            bias_a_se = (float(ahat[:, j].mean()) - t_a) / se_a if se_a > 0 else math.nan
            bias_b_se = (float(bhat[:, j].mean()) - t_b) / se_b if se_b > 0 else math.nan
            voc_a = var_a / c if math.isfinite(c) and c > 0 else math.nan
            voc_b = var_b / c if math.isfinite(c) and c > 0 else math.nan
        else:
            var_a = var_b = bias_a_se = bias_b_se = voc_a = voc_b = math.nan
        rows.append(
            [
                bx,
                by,
                math.hypot(bx * grid.dkx, by * grid.dky) / optics.k_c,
                t_a,
                float(ahat[:, j].mean()),
                var_a,
                t_b,
                float(bhat[:, j].mean()),
                var_b,
                c,
                voc_a,
                voc_b,
                bias_a_se,
                bias_b_se,
            ]
        )
    paths.append(
        _write_csv(
            out / "estimates.csv",
            [
                "kx_bin",
                "ky_bin",
                "k_ratio_kc",
                "true_a",
                "mean_a",
                "var_a",
                "true_b",
                "mean_b",
                "var_b",
                "crb",
                "var_over_crb_a",
                "var_over_crb_b",
                "bias_a_se",
                "bias_b_se",
            ],
            rows,
        )
    )
    finite = [r[10] for r in rows if isinstance(r[10], float) and math.isfinite(r[10])]
    summary = {
        "trials": trials,
        "bins": [list(b) for b in bins],
        "max_var_over_crb_a": max(finite) if finite else None,
    }
    _write_manifest(out, "reconstruct", cfg, paths, summary)
    return summary


def cmd_snr(cfg: dict, out: Path) -> dict:
    optics = _build_optics(cfg)
    grid = _build_grid(cfg, optics)
    sample, _ = _build_sample(cfg, grid, optics)
    pupil, part = _build_partition(cfg, optics, grid)
    acq = _build_acquisition(cfg, part)
    di = compute_otf(pupil)
    otfs = hybrid_otfs(part, di, acq.alpha)

    ratio = _num(cfg, "snr.k_ratio_kc", lo=1e-9, hi=1 - 1e-9)
    dk = grid.dkx
    b = max(1, int(round(ratio * optics.k_c / dk)))
    k = (b * dk, 0.0)

    raw = acquire(sample, acq, trial=0, otfs=otfs)
    acq_di = AcquisitionConfig(
        n_photons=acq.n_photons,
        alpha=0.0,
        partition=part,
        seed=acq.seed,
        read_noise_std=acq.read_noise_std,
    )
    raw_di = acquire(sample, acq_di, trial=0, otfs=hybrid_otfs(part, di, 0.0))

    labels = ["di", "region1", "region2", "region3", "region4", "region5"]
    rows = []
    reports = {}
    for method in ("theory", "out_of_band"):
        rep = snr_at_k(raw, k, otfs, method=method)
        reports[("fdd", method)] = rep
        for lbl, db in zip(labels, rep.per_frame_db):
            rows.append(["fdd", method, lbl, db])
        rows.append(["fdd", method, "combined", rep.combined_db])
        rep_di = snr_at_k(raw_di.frames[0], k, di, method=method)
        reports[("di", method)] = rep_di
        rows.append(["di", method, "di", rep_di.per_frame_db[0]])
        rows.append(["di", method, "combined", rep_di.combined_db])
    paths = [_write_csv(out / "snr.csv", ["system", "method", "frame", "snr_db"], rows)]

    gain_theory = snr_gain_theory(otfs, k)
    summary = {
        "k_bin": b,
        "k_ratio_kc_nearest": b * dk / optics.k_c,
        "fdd_combined_theory_db": reports[("fdd", "theory")].combined_db,
        "fdd_combined_oob_db": reports[("fdd", "out_of_band")].combined_db,
        "method_difference_db": abs(
            reports[("fdd", "theory")].combined_db
            - reports[("fdd", "out_of_band")].combined_db
        ),
        "di_combined_theory_db": reports[("di", "theory")].combined_db,
        "di_combined_oob_db": reports[("di", "out_of_band")].combined_db,
        "gain_theory_db": gain_theory,
        "gain_measured_theory_db": reports[("fdd", "theory")].combined_db
        - reports[("di", "theory")].combined_db,
        "gain_measured_oob_db": reports[("fdd", "out_of_band")].combined_db
        - reports[("di", "out_of_band")].combined_db,
    }
    spath = out / "snr_summary.json"
    spath.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    paths.append(spath)
    _write_manifest(out, "snr", cfg, paths, summary)
    return summary


def cmd_validate(cfg: dict, out: Path) -> dict:
    v = cfg["validate"]
    n = _num(cfg, "validate.n", lo=16, integer=True)
    n_pupil = _num(cfg, "validate.n_pupil_bins", lo=2, integer=True)
    n_modes = _num(cfg, "validate.n_modes", lo=1, integer=True)
    seed = _num(cfg, "validate.seed", lo=0, integer=True)
    ka = _num(cfg, "validate.k_a_ratio_kc", lo=1e-6, hi=1 - 1e-6)
    alpha = _num(cfg, "validate.alpha", lo=0.0, hi=1.0)
    min_to_max = _num(cfg, "validate.min_to_max", lo=0.0, hi=1.0)
    if n % 2:
        raise ConfigError("validate.n: must be even")

    grid = Grid1D(n, 1.0)
    sample = random_sample_1d(grid, n_modes=n_modes, seed=seed, min_to_max=min_to_max)
    psi = apsf_1d(grid, n_pupil)
    rho = build_density_operator_1d(sample, psi, grid)
    otfs = fdd_otfs_1d(grid, n_pupil, ka, alpha)
    ks = sample.k_list()
    labels = mode_labels(ks)
    qfi = qfi_numeric_1d(rho, labels)
    fi_di = fi_numeric_1d(sample, otfs, labels, frames="di")
    fi_fdd = fi_numeric_1d(sample, otfs, labels, frames="fdd")
    ana = analytic_info_1d(otfs, sample.a0, labels)

    k_c = otfs.k_c
    nk = len(ks)
    checks = []
    failing_k: dict[str, list] = {}

    def add_check(name, value, bound, direction, failing=None):
        ok = value < bound if direction == "<" else value >= bound
        checks.append({"name": name, "value": value, "bound": bound, "pass": bool(ok)})
        if not ok:
            failing_k[name] = failing if failing is not None else []

    add_check("offdiag_fraction_qfi", qfi.offdiag_fraction(), 0.05, "<")
    add_check("offdiag_fraction_fi_di", fi_di.offdiag_fraction(), 0.05, "<")
    add_check("offdiag_fraction_fi_fdd", fi_fdd.offdiag_fraction(), 0.05, "<")

    for name, mat in (("qfi", qfi), ("fi_fdd", fi_fdd)):
        d = mat.diagonal
        asym = np.abs(d[:nk] / d[nk:] - 1)
        bad = [float(ks[i]) for i in np.nonzero(asym >= 0.05)[0]]
        add_check(f"cos_sin_asymmetry_{name}", float(asym.max()), 0.05, "<", bad)

    sel = np.array([k[0] <= 0.9 * k_c for k, _ in labels])
    for name, mat, ref in (
        ("qfi", qfi, ana["qfi"]),
        ("fi_di", fi_di, ana["fi_di"]),
        ("fi_fdd", fi_fdd, ana["fi_hybrid"]),
    ):
        rel = np.abs(mat.diagonal / ref - 1)
        bad = [float(labels[i][0][0]) for i in np.nonzero(rel * sel >= 0.15)[0]]
        add_check(f"diag_rel_err_{name}", float(rel[sel].max()), 0.15, "<", bad)

    for name, fi_mat in (("fi_di", fi_di), ("fi_fdd", fi_fdd)):
        diff = qfi.matrix - fi_mat.matrix
        eig = np.linalg.eigvalsh((diff + diff.T) / 2)
        rel_min = float(eig.min() / max(abs(eig).max(), 1e-300))
        add_check(f"psd_qfi_minus_{name}", rel_min, -1e-6, ">=")

    rows = []
    for i, (k, mode) in enumerate(labels):
        rows.append(
            [
                k[0] / grid.dk,
                k[0] / k_c,
                mode,
                ana["qfi"][i],
                qfi.diagonal[i],
                ana["fi_di"][i],
                fi_di.diagonal[i],
                ana["fi_hybrid"][i],
                fi_fdd.diagonal[i],
                abs(qfi.diagonal[i] / ana["qfi"][i] - 1),
                abs(fi_di.diagonal[i] / ana["fi_di"][i] - 1),
                abs(fi_fdd.diagonal[i] / ana["fi_hybrid"][i] - 1),
            ]
        )
    paths = [
        _write_csv(
            out / "validate_curves.csv",
            [
                "k_bin",
                "k_ratio_kc",
                "mode",
                "qfi_analytic",
                "qfi_numeric",
                "fi_di_analytic",
                "fi_di_numeric",
                "fi_hybrid_analytic",
                "fi_fdd_numeric",
                "rel_err_qfi",
                "rel_err_fi_di",
                "rel_err_fi_fdd",
            ],
            rows,
        )
    ]
    overall = all(c["pass"] for c in checks)
    report = {
        "checks": checks,
        "failing_k": failing_k,
        "overall_pass": overall,
        "config": {
            "n": n,
            "n_pupil_bins": n_pupil,
            "n_modes": n_modes,
            "seed": seed,
            "k_a_ratio_kc": ka,
            "alpha": alpha,
        },
    }
    rpath = out / "validate_report.json"
    rpath.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    paths.append(rpath)
    _write_manifest(out, "validate", cfg, paths, {"overall_pass": overall})
    if not overall:
        failed = [c for c in checks if not c["pass"]]
        lines = [
            f"  {c['name']}: value {c['value']:.4g} vs bound {c['bound']:.4g}"
            + (f", failing k = {failing_k.get(c['name'])}" if failing_k.get(c["name"]) else "")
            for c in failed
        ]
        raise ValidationFailure(
            "validation bands not met:\n" + "\n".join(lines)
        )
    return report


_COMMANDS = {
    "otf": cmd_otf,
    "fisher": cmd_fisher,
    "budget": cmd_budget,
    "simulate": cmd_simulate,
    "reconstruct": cmd_reconstruct,
    "snr": cmd_snr,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fddlab",
        description="Passive-imaging laboratory: pupil-partition acquisition, "
        "Fisher bounds, photon budgets, simulation, and reconstruction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} pipeline stage")
        p.add_argument("--config", type=str, default=None, help="JSON config path")
        p.add_argument("--out", type=str, default="./fddlab_out", help="output directory")
        p.add_argument("--trials", type=int, default=None, help="override acquisition.trials")
        p.add_argument("--seed", type=int, default=None, help="override acquisition.seed")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.trials is not None:
            if args.trials < 1:
                raise ConfigError(f"--trials: must be >= 1, got {args.trials}")
            cfg["acquisition"]["trials"] = args.trials
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError(f"--seed: must be >= 0, got {args.seed}")
            cfg["acquisition"]["seed"] = args.seed
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _COMMANDS[args.command](cfg, out)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ValidationFailure as e:
        print(f"invariant failure: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        print(f"numerical invariant violated: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
