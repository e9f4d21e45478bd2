"""The five analyses behind the command line, as plain functions.

Each takes validated inputs and returns a Report (or a MeasurementTable for
``run_simulate``). Nothing here touches the file system.
"""

from __future__ import annotations

import io
import csv
import math
from dataclasses import replace

import numpy as np

from . import detection, pair_mc, scaling, source, tpa
from .errors import ValidationError
from .report import Report
from .tables import MeasurementTable, Row, X_KINDS
from .units import CONSTANTS, WidthKind, photon_energy


def propagate(fn, params, errors, rel_step=1e-6):
    """First-order uncertainty of every float output of ``fn(params)``.

    Inputs are treated as uncorrelated; partial derivatives come from central
    differences.
    """
    base = fn(params)
    var = dict.fromkeys(base, 0.0)
    for name, err in errors.items():
        if not err:
            continue
        h = rel_step * abs(params[name]) or rel_step
        up = fn({**params, name: params[name] + h})
        dn = fn({**params, name: params[name] - h})
        for k in base:
            var[k] += ((up[k] - dn[k]) / (2 * h) * err) ** 2
    return base, {k: math.sqrt(v) for k, v in var.items()}


def _focal(cfg):
    beam, cell = cfg.gaussian_beam(), cfg.sample_cell()
    gauss = tpa.focal_integral(beam, cell, cfg.cell.center_offset_mm * 1e-3)
    used = cfg.beam.focal_integral_per_m if cfg.beam.focal_integral_per_m else gauss
    return gauss, used


def _prediction_chain(cfg, force_qef_one=False):
    src = cfg.spdc_source()
    P = cfg.source.pump_power_w
    _, focal = _focal(cfg)
    qef_pair = cfg.prediction.qef_flux == "pair"
    tpa_photon = cfg.prediction.tpa_flux == "photon"

    def chain(p):
        state = source.pair_rate(replace(src, pair_rate_per_watt=p["pair_rate_per_watt"]), P)
        F_pair, F_photon = state.pair_flux, state.photon_flux
        cell = tpa.SampleCell.from_lab_units(cfg.cell.length_mm, cfg.cell.concentration_mmol_per_l,
                                             p["sigma2_gm"], cfg.cell.fluorescence_yield)
        eta_col = p["eta_col"]
        if cfg.collection.eta_col_calibrated and p["sigma2_gm"] > 0:
            # the fitted amplitude fixes eta_col * sigma2
            eta_col *= cfg.cell.sigma2_gm / p["sigma2_gm"]
        col = tpa.CollectionSetup(min(eta_col, 1.0), cfg.collection.eta_det)
        F_tpa = F_photon if tpa_photon else F_pair
        if force_qef_one:
            q = 1.0
        else:
            q = tpa.qef(state.sigma_epp, F_pair if qef_pair else F_photon) if F_pair > 0 else math.inf
        classical = tpa.classical_tpa_rate(F_tpa, cell, col, focal)
        return {"pair_flux": F_pair, "photon_flux": F_photon, "qef": q,
                "classical_rate": classical,
                "etpa_rate": q * classical if classical else 0.0}

    params = {"pair_rate_per_watt": cfg.source.pair_rate_per_watt,
              "eta_col": cfg.collection.eta_col, "sigma2_gm": cfg.cell.sigma2_gm}
    errors = {"pair_rate_per_watt": cfg.source.pair_rate_per_watt_err,
              "eta_col": cfg.collection.eta_col_err, "sigma2_gm": cfg.cell.sigma2_gm_err}
    return propagate(chain, params, errors)


def predict(cfg, force_qef_one=False):
    """(values, errors) of the ETPA prediction chain."""
    return _prediction_chain(cfg, force_qef_one)


def run_predict(cfg, force_qef_one=False):
    val, err = predict(cfg, force_qef_one)
    src = cfg.spdc_source()
    state = source.pair_rate(src, cfg.source.pump_power_w)
    sigma = state.sigma_epp
    gauss, focal = _focal(cfg)
    lam = cfg.beam.wavelength_nm * 1e-9

    r = Report("predict")
    r.add("pump_power", cfg.source.pump_power_w, "W")
    r.add("pair_flux", val["pair_flux"], "s^-1", err["pair_flux"])
    r.add("photon_flux", val["photon_flux"], "s^-1", err["photon_flux"])
    r.add("sigma_epp_fwhm_wavelength", sigma.to(WidthKind.FWHM_WAVELENGTH).value, "m")
    r.add("sigma_epp_fwhm_frequency", sigma.to(WidthKind.FWHM_FREQUENCY).value, "Hz")
    r.add("sigma_epp_fwhm_angular", sigma.to(WidthKind.FWHM_ANGULAR).value, "rad s^-1")
    r.add("sigma_epp_std_angular", sigma.to(WidthKind.STD_ANGULAR).value, "rad s^-1")
    r.add("correlation_time", source.correlation_time(state), "s")
    r.add("mode_number", source.mode_number(sigma.fwhm_frequency, src.pump_linewidth_fwhm))
    if state.pair_flux > 0:
        sep = source.mean_pair_separation(state)
        r.add("mean_pair_separation", sep, "s")
        r.add("separation_over_correlation_time", sep / source.correlation_time(state))
    r.add("isolated_pairs", source.is_isolated_pairs(state))
    r.add("focal_integral_gaussian", gauss, "m^-1")
    r.add("focal_integral_diffraction_limit", math.pi**2 / lam, "m^-1")
    r.add("focal_integral_used", focal, "m^-1")
    r.add("qef_flux_convention", cfg.prediction.qef_flux)
    r.add("tpa_flux_convention", cfg.prediction.tpa_flux)
    r.add("qef", val["qef"], "1", err["qef"])
    r.add("classical_tpa_rate", val["classical_rate"], "s^-1", err["classical_rate"])
    r.add("etpa_rate", val["etpa_rate"], "s^-1", err["etpa_rate"])
    if force_qef_one:
        r.note("QEF forced to 1")
    if cfg.beam.focal_integral_per_m:
        r.note("focal integral taken from the config, not from the beam geometry")
    return r


def _computed_threshold(cfg):
    D, T = cfg.threshold.dark_rate_per_s, cfg.threshold.duration_s
    thr = detection.threshold_3sigma(D, T)
    # threshold ~ sqrt(D): relative error is half that of the dark-count total
    thr_err = 0.5 * thr / math.sqrt(D * T) if D > 0 else 0.0
    return thr, thr_err


def run_bound(cfg, threshold=None, threshold_err=None):
    val, err = predict(cfg)
    rate, rate_err = val["etpa_rate"], err["etpa_rate"]
    r = Report("bound")
    r.add("etpa_rate", rate, "s^-1", rate_err)

    thr_c, thr_c_err = _computed_threshold(cfg)
    b_c = tpa.enhancement_bound(thr_c, rate, thr_c_err, rate_err)
    r.add("threshold_computed", thr_c, "s^-1", thr_c_err)
    r.add("bound_computed", b_c.bound, "1", b_c.uncertainty)

    if threshold is None:
        threshold = cfg.threshold.measured_per_s
        threshold_err = cfg.threshold.measured_err_per_s if threshold_err is None else threshold_err
    if threshold is not None:
        b_m = tpa.enhancement_bound(threshold, rate, threshold_err or 0.0, rate_err)
        r.add("threshold_measured", threshold, "s^-1", threshold_err or 0.0)
        r.add("bound_measured", b_m.bound, "1", b_m.uncertainty)
        r.add("threshold_source", "measured")
        r.add("bound", b_m.bound, "1", b_m.uncertainty)
    else:
        r.add("threshold_source", "computed")
        r.add("bound", b_c.bound, "1", b_c.uncertainty)
    return r


def run_fit(table, fixed_exponent=None, dark_rate=None):
    """Power-law fit of a measurement table. Returns (report, plot-data CSV text)."""
    rows = table.rows
    durations = [row.duration_s for row in rows]
    if dark_rate is None:
        dark = [row.dark_counts for row in rows]
    else:
        dark = [dark_rate * row.duration_s for row in rows]
    series = scaling.series_from_counts([row.x for row in rows], [row.counts for row in rows],
                                        durations, dark)
    if table.x_kind != "attenuated_power_w":
        # attenuation here only protected the detectors; pair coincidences
        # scale with its square, so undo it. For an attenuated-power sweep the
        # attenuation is the x variable itself and stays in.
        kept = [i for i in range(len(rows)) if i not in series.excluded]
        g = [rows[i].attenuation ** -2 for i in kept]
        series = replace(series, y=tuple(v * f for v, f in zip(series.y, g)),
                         y_err=tuple(v * f for v, f in zip(series.y_err, g)))
    fit = scaling.fit_power_law(series, fixed_exponent)
    kind = scaling.classify_scaling(fit) if fixed_exponent is None else None

    x = np.asarray(series.x)
    y = np.asarray(series.y)
    ye = np.asarray(series.y_err)
    model = fit(x)
    resid = np.log(y / model) * y / ye if np.all(ye > 0) else np.zeros_like(y)
    dof = len(x) - (1 if fixed_exponent is not None else 2)
    chi2 = float(np.sum(resid**2) / dof) if dof > 0 else math.nan

    xu = X_KINDS[table.x_kind][1]
    r = Report("fit")
    r.add("x_quantity", X_KINDS[table.x_kind][0].replace(" ", "_"))
    r.add("n_points_used", fit.n_points_used)
    r.add("exponent", fit.exponent, "1", fit.exponent_err)
    r.add("amplitude", fit.amplitude, f"s^-1 {xu}^-k", fit.amplitude_err)
    r.add("exponent_fixed", fit.fixed)
    r.add("classification", kind.value if kind else "fixed-exponent")
    r.add("reduced_chi2", chi2)
    excluded = [str(i + 1) for i in series.excluded]
    r.add("excluded_rows", ",".join(excluded) if excluded else "none")

    x_mid = math.exp(np.mean(np.log(x)))
    y_mid = float(fit(x_mid))
    buf = io.StringIO()
    buf.write("# schema=1\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([table.x_kind, "rate_per_s", "rate_err_per_s", "fit_per_s",
                "slope1_ref_per_s", "slope2_ref_per_s", "residual_sigma"])
    for xi, yi, ei, mi, ri in zip(x, y, ye, model, resid):
        w.writerow([f"{v:.9e}" for v in (xi, yi, ei, mi, y_mid * xi / x_mid,
                                           y_mid * (xi / x_mid) ** 2, ri)])
    return r, buf.getvalue()


def _sweep_values(start, stop, points, spacing):
    if points < 1:
        raise ValidationError(["sweep: points must be >= 1"])
    if not (start > 0 and stop > 0):
        raise ValidationError(["sweep: start and stop must be > 0"])
    if points == 1:
        return [float(start)]
    if spacing == "log":
        return [float(v) for v in np.geomspace(start, stop, points)]
    if spacing == "linear":
        return [float(v) for v in np.linspace(start, stop, points)]
    raise ValidationError([f"sweep: unknown spacing {spacing!r}"])


def base_mc_config(cfg, duration=None, seed=0):
    da, db = cfg.detector("a"), cfg.detector("b")
    T = cfg.counting.duration_s if duration is None else duration
    if not T > 0:
        raise ValidationError(["sweep: duration must be > 0"])
    return pair_mc.McConfig(
        pair_rate=0.0, duration=T, seed=seed,
        pre_split_transmission=cfg.counting.pre_split_transmission,
        arm_transmission_a=da.efficiency, arm_transmission_b=db.efficiency,
        splitter_ratio=cfg.counting.splitter_ratio,
        coincidence_window=cfg.counting.coincidence_window_ns * 1e-9,
        dead_time=max(da.dead_time, db.dead_time),
        dark_rate_a=da.dark_rate, dark_rate_b=db.dark_rate)


def run_simulate(cfg, knob, values=None, start=None, stop=None, points=None, spacing="log",
                 seed=0, duration=None, auto_attenuate=None, workers=1):
    """Monte Carlo sweep written as a measurement table.

    ``pump``: values are pump powers [W]; the pair rate follows the source
    model. With ``auto_attenuate`` set, each point gets the pre-split
    attenuation that brings the busier arm's expected singles down to that
    rate, mimicking the attenuation used to keep detectors out of saturation.
    ``attenuation``: values are transmissions in (0, 1] applied before the
    splitter at the configured pump power.
    """
    if values is None:
        values = _sweep_values(start, stop, points, spacing)
    values = [float(v) for v in values]
    if knob not in ("pump", "attenuation"):
        raise ValidationError([f"sweep: unknown knob {knob!r}"])
    if knob == "attenuation" and any(not 0 < v <= 1 for v in values):
        raise ValidationError(["sweep: attenuation values must lie in (0, 1]"])
    if knob == "pump" and any(v <= 0 for v in values):
        raise ValidationError(["sweep: pump powers must be > 0"])
    if auto_attenuate is not None and not auto_attenuate > 0:
        raise ValidationError(["sweep: auto-attenuate rate must be > 0"])

    base = base_mc_config(cfg, duration, seed)
    src = cfg.spdc_source()
    e_photon = photon_energy(src.center_wavelength)
    seeds = pair_mc.child_seeds(seed, len(values))
    configs, atts, xs = [], [], []
    for v, s in zip(values, seeds):
        if knob == "pump":
            R = source.pair_rate(src, v).pair_flux
            att = 1.0
            if auto_attenuate is not None:
                sa, sb, _, _ = detection.expected_rates(
                    R, base.pre_split_transmission, base.arm_transmission_a,
                    base.arm_transmission_b, base.splitter_ratio)
                busiest = max(sa, sb)
                if busiest > auto_attenuate:
                    att = auto_attenuate / busiest
            x = v
        else:
            R = source.pair_rate(src, cfg.source.pump_power_w).pair_flux
            att = v
            x = 2.0 * R * att * e_photon
        configs.append(replace(base, pair_rate=R, seed=s,
                               pre_split_transmission=base.pre_split_transmission * att))
        atts.append(att)
        xs.append(x)

    results = pair_mc.run_configs(configs, workers)
    rows = tuple(Row(x, float(res.coincidences), res.elapsed_simulated_time, att,
                     float(res.accidental_estimate), float(res.singles_a), float(res.singles_b))
                 for x, att, res in zip(xs, atts, results))
    x_kind = "pump_power_w" if knob == "pump" else "attenuated_power_w"
    return MeasurementTable(x_kind, rows)


def klyshko_records(table):
    if not table.has_singles:
        raise ValidationError(["klyshko: table needs singles_a and singles_b columns"])
    pump = table.x_kind == "pump_power_w"
    # dark_counts holds the expected background under the coincidence counts
    return [detection.CountRecord(r.singles_a / r.duration_s, r.singles_b / r.duration_s,
                                  r.counts / r.duration_s, r.duration_s, r.attenuation,
                                  r.x if pump else None,
                                  accidentals=r.dark_counts / r.duration_s)
            for r in table.rows]


def run_klyshko(table, cfg):
    records = klyshko_records(table)
    short = len(records) < 3
    if not short and table.x_kind != "pump_power_w":
        raise ValidationError(["klyshko: x column must be pump_power_w for a power sweep"])
    res = detection.bound_pair_rate(records, cfg.detector("a"), cfg.detector("b"),
                                    assume_linear=short)
    eta_a, eta_b = res.klyshko
    r = Report("klyshko")
    r.add("n_rows", len(records))
    r.add("n_linear_rows", len(res.linear_indices))
    r.add("linear_rows", ",".join(str(i + 1) for i in sorted(res.linear_indices)))
    r.add("klyshko_eta_a", eta_a)
    r.add("klyshko_eta_b", eta_b)
    r.add("klyshko_eta_mean", 0.5 * (eta_a + eta_b))
    r.add("detector_efficiency", math.sqrt(cfg.detector("a").efficiency
                                           * cfg.detector("b").efficiency))
    r.add("pair_rate_bound", res.pairs_per_second, "s^-1", res.uncertainty)
    for i, (c, est) in enumerate(zip(res.corrected, res.estimates), start=1):
        r.add(f"row{i}.corrected_singles_a", c.singles_a, "s^-1")
        r.add(f"row{i}.corrected_singles_b", c.singles_b, "s^-1")
        r.add(f"row{i}.corrected_coincidences", c.coincidences, "s^-1")
        r.add(f"row{i}.unphysical", c.unphysical)
        r.add(f"row{i}.linear", (i - 1) in res.linear_indices)
        r.add(f"row{i}.pair_estimate", est, "s^-1")
    if short:
        r.note("fewer than 3 rows: all rows assumed to be in the linear regime")
    return r
