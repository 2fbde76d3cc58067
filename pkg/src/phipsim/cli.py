"""Command-line front end.

Subcommands: phip, tomography, bounds, algo, twirl, entmetrics.
Global flags: --config, --seed, --out-dir, --format {csv|json}.

Configs are INI-style files with nested sections (configparser) or JSON
with the same section/key structure.  Exit codes: 0 success, 2 config
error (message names the offending field), 3 numeric failure.  Reruns
with the same config and seed write byte-identical numeric outputs; the
run manifest (which carries the timestamp) is the only non-reproducible
file.
"""

from __future__ import annotations

import argparse
import configparser
import datetime
import hashlib
import json
import sys as _sys
from pathlib import Path

import numpy as np

from . import __version__
from . import algos, dynamics as dyn, entmetrics as ent, phip, serialize, specproc, spincore as sc

H_PLANCK = 6.62607015e-34
K_BOLTZMANN = 1.380649e-23


class ConfigError(Exception):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


def _coerce(text: str):
    s = text.strip()
    low = s.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        pass
    if "," in s:
        return [_coerce(p) for p in s.split(",") if p.strip()]
    return s


def load_config(path: str) -> dict:
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.loads(text)
    cp = configparser.ConfigParser()
    cp.read_string(text)
    return {sec: {k: _coerce(v) for k, v in cp[sec].items()} for sec in cp.sections()}


class Cfg:
    """Typed access into the nested config dict with field-path errors."""

    def __init__(self, data: dict):
        self.data = data

    def get(self, section, key, kind=float, default=None, required=False):
        sec = self.data.get(section)
        if sec is None or key not in sec:
            if required:
                raise ConfigError(f"{section}.{key}", "required field missing")
            return default
        v = sec[key]
        try:
            if kind is bool and isinstance(v, str):
                return v.lower() in ("true", "yes", "on", "1")
            if kind is list:
                return list(v) if isinstance(v, (list, tuple)) else [v]
            return kind(v)
        except (TypeError, ValueError):
            raise ConfigError(f"{section}.{key}", f"cannot interpret {v!r} as {kind.__name__}")

    def section(self, name) -> dict:
        return self.data.get(name, {})


def config_hash(data: dict) -> str:
    canon = json.dumps(data, sort_keys=True, default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def boltzmann_from(cfg: Cfg) -> float:
    b = cfg.get("spin_system", "b_factor", float)
    if b is not None:
        if not (0 < b < 1):
            raise ConfigError("spin_system.b_factor", "must lie in (0, 1)")
        return b
    mhz = cfg.get("spin_system", "frequency_mhz", float)
    tk = cfg.get("spin_system", "temperature_k", float)
    if mhz is None or tk is None:
        raise ConfigError("spin_system.b_factor",
                          "give b_factor or frequency_mhz + temperature_k")
    if tk <= 0:
        raise ConfigError("spin_system.temperature_k", "must be positive")
    return H_PLANCK * mhz * 1e6 / (K_BOLTZMANN * tk)


def spin_system_from(cfg: Cfg, need_b=False) -> sc.SpinSystem:
    delta = cfg.get("spin_system", "delta_hz", float, required=True)
    j = cfg.get("spin_system", "j_hz", float, default=0.0)
    t1 = cfg.get("spin_system", "t1_s", float)
    t2 = cfg.get("spin_system", "t2_s", float)
    b = boltzmann_from(cfg) if (need_b or "b_factor" in cfg.section("spin_system")
                                or "frequency_mhz" in cfg.section("spin_system")) else None
    try:
        return sc.two_spin_system(delta, j, t1_s=t1, t2_s=t2, boltzmann_factor=b)
    except ValueError as e:
        raise ConfigError("spin_system", str(e))


def _detection_from(cfg: Cfg, sys: sc.SpinSystem):
    kind = cfg.get("experiment", "detection", str, default="selective_90Iy")
    if kind == "none":
        return None
    if kind in ("selective_90Iy", "90iy"):
        return dyn.Pulse(np.pi / 2, np.pi / 2, target=0)
    if kind == "jump_return":
        return dyn.jump_return_90Iy(sys)
    angle = cfg.get("experiment", "detection_angle_deg", float, default=90.0)
    phase = cfg.get("experiment", "detection_phase_deg", float, default=90.0)
    target = cfg.get("experiment", "detection_target", str, default="hard")
    tgt = None if target == "hard" else (0 if target.upper() == "I" else 1)
    if kind != "pulse":
        raise ConfigError("experiment.detection",
                          f"unknown detection {kind!r} (none|selective_90Iy|jump_return|pulse)")
    return dyn.Pulse(np.deg2rad(angle), np.deg2rad(phase), target=tgt)


def state_from(cfg: Cfg, section="state") -> sc.DensityState:
    kind = cfg.get(section, "kind", str, required=True)
    try:
        if kind == "werner":
            return sc.werner_state(cfg.get(section, "epsilon", float, required=True))
        if kind == "singlet_triplet":
            a = cfg.get(section, "a", float, required=True)
            b = cfg.get(section, "b", float, required=True)
            c = cfg.get(section, "c", float, required=True)
            s = a + b + 2 * c
            return sc.singlet_triplet_state(a / s, b / s, c / s)
        if kind == "bell":
            return sc.bell_state(cfg.get(section, "which", str, required=True))
        if kind == "pseudopure":
            return sc.pseudopure_state(cfg.get(section, "epsilon", float, default=1.0),
                                       cfg.get(section, "ket", str, default="00"))
        if kind == "para_ortho":
            return sc.para_ortho_state(cfg.get(section, "singlet_fraction", float, required=True))
        if kind == "file":
            path = cfg.get(section, "path", str, required=True)
            text = Path(path).read_text()
            return (serialize.state_from_json(text) if text.lstrip().startswith("{")
                    else serialize.state_from_csv(text))
    except ConfigError:
        raise
    except (ValueError, OSError) as e:
        raise ConfigError(section, str(e))
    raise ConfigError(f"{section}.kind", f"unknown state kind {kind!r}")


class Writer:
    def __init__(self, out_dir: Path, fmt: str, chash: str):
        self.out_dir = out_dir
        self.fmt = fmt
        self.chash = chash
        self.written: list[str] = []
        out_dir.mkdir(parents=True, exist_ok=True)

    def header(self, **extra) -> dict:
        h = {"config_hash": self.chash}
        h.update(extra)
        return h

    def write_text(self, name: str, text: str) -> Path:
        p = self.out_dir / name
        p.write_text(text)
        self.written.append(name)
        return p

    def write_table(self, stem: str, columns: list[str], rows: list[list],
                    units: str = "") -> Path:
        if self.fmt == "json":
            payload = {"config_hash": self.chash, "units": units, "columns": columns,
                       "rows": rows}
            return self.write_text(stem + ".json", json.dumps(payload, indent=1))
        lines = [f"# config_hash: {self.chash}"]
        if units:
            lines.append(f"# units: {units}")
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
        return self.write_text(stem + ".csv", "\n".join(lines) + "\n")

    def manifest(self, config: dict, seed):
        man = {
            "config_hash": self.chash,
            "seed": seed,
            "versions": {"phipsim": __version__, "numpy": np.__version__},
            "timestamp_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "outputs": sorted(self.written),
            "config": config,
        }
        (self.out_dir / "run_manifest.json").write_text(json.dumps(man, indent=1, sort_keys=True))


# ---------------------------------------------------------------------------
# subcommands

def _processing(cfg: Cfg):
    return dict(
        n_points=cfg.get("processing", "n_points", int, default=4096),
        sweep_hz=cfg.get("processing", "sweep_hz", float, default=2000.0),
        line_t2=cfg.get("processing", "line_t2_s", float, default=0.58),
        zero_fill=cfg.get("processing", "zero_fill", int, default=2),
        m_doublings=cfg.get("processing", "m_doublings", int, default=4),
        snr=cfg.get("processing", "noise_snr", float),
        window_linewidths=cfg.get("processing", "window_linewidths", float, default=8.0),
        j_max=cfg.get("processing", "j_max_hz", float, default=12.0),
        j_step=cfg.get("processing", "j_step_hz", float, default=0.05),
    )


def cmd_phip(cfg: Cfg, w: Writer, seed) -> int:
    sys_ = spin_system_from(cfg, need_b=True)
    variant = cfg.get("experiment", "variant", str, required=True)
    if variant not in phip.PHIP_VARIANTS:
        raise ConfigError("experiment.variant", f"unknown variant {variant!r}")
    exp = phip.PhipExperiment(
        variant=variant,
        tau=cfg.get("experiment", "tau_s", float, default=0.0),
        tau_h=cfg.get("experiment", "tau_h_s", float, default=0.0),
        singlet_fraction_in=cfg.get("experiment", "singlet_fraction", float, default=1.0),
        n_average=cfg.get("experiment", "n_average", int, default=2048),
        t1rho=cfg.get("experiment", "t1rho_s", float),
        closed_form=cfg.get("experiment", "closed_form", bool, default=False),
    )
    rho = phip.run_phip(sys_, exp)
    detection = _detection_from(cfg, sys_)
    sv = phip.signal(rho, detection, sys_)
    proc = _processing(cfg)
    noise = 0.0
    if proc["snr"]:
        noise = specproc.noise_std_for_snr(sv, sys_, proc["snr"], proc["n_points"],
                                           proc["sweep_hz"], proc["line_t2"], proc["zero_fill"])
    fid = specproc.synthesize_fid(sv, sys_, proc["n_points"], proc["sweep_hz"],
                                  proc["line_t2"], noise_std=noise, seed=seed)
    spec = specproc.transform(fid, proc["zero_fill"])

    w.write_text("signal_vector.json", serialize.signal_to_json(sv))
    w.write_text("state_before_detection.json", serialize.state_to_json(rho))
    hdr = w.header(variant=variant, delta_hz=sys_.delta_hz, j_hz=sys_.j_matrix[0, 1])
    if w.fmt == "json":
        w.write_text("spectrum.json", json.dumps({
            "header": hdr, "freq_hz": spec.freqs.tolist(),
            "re": spec.amplitudes.real.tolist(), "im": spec.amplitudes.imag.tolist()}))
    else:
        w.write_text("spectrum.csv", serialize.spectrum_to_csv(spec, hdr))
    B = sys_.boltzmann_factor
    rows = [[variant, phip.enhancement(variant, B, delta_hz=sys_.delta_hz,
                                       tau=exp.tau) if variant == "delayed"
             else phip.enhancement(variant, B)]]
    w.write_table("enhancement", ["variant", "enhancement"], rows,
                  units="dimensionless (vs thermal)")
    w.write_text("display_pattern.txt", sv.display_pattern() + "\n")
    return 0


def cmd_tomography(cfg: Cfg, w: Writer, seed) -> int:
    mode = cfg.get("experiment", "mode", str, default="synthetic")
    cal = specproc.Calibration(
        scans=cfg.get("calibration", "scans", int, default=1),
        flashes=cfg.get("calibration", "flashes", int, default=1),
        active_volume_fraction=cfg.get("calibration", "active_volume_fraction",
                                       float, default=1.0),
        depletion_x=cfg.get("calibration", "depletion_x", float, default=0.0),
        thermal_integral=cfg.get("calibration", "thermal_integral", float, default=1.0),
        thermal_integral_err=cfg.get("calibration", "thermal_integral_err", float, default=0.0),
        boltzmann_factor=cfg.get("calibration", "b_factor", float, default=6.48e-5),
    )
    if mode == "replay":
        i_int = cfg.get("experiment", "i_integral", float, required=True)
        s_int = cfg.get("experiment", "s_integral", float, required=True)
        res = specproc.tomography(i_int, s_int, cal,
                                  i_err=cfg.get("experiment", "i_err", float, default=0.0),
                                  s_err=cfg.get("experiment", "s_err", float, default=0.0))
    elif mode == "synthetic":
        sys_ = spin_system_from(cfg, need_b=True)
        a = cfg.get("experiment", "a", float, required=True)
        b = cfg.get("experiment", "b", float, required=True)
        c = cfg.get("experiment", "c", float, required=True)
        proc = _processing(cfg)
        res = run_synthetic_tomography(a, b, c, sys_, proc, seed=seed)
    else:
        raise ConfigError("experiment.mode", "mode must be replay or synthetic")
    w.write_text("tomography_result.json", serialize.tomography_to_json(res))
    w.write_text("tomography_table.txt", serialize.tomography_table(res))
    return 0


def run_synthetic_tomography(a, b, c, sys_: sc.SpinSystem, proc: dict,
                             seed=None, twirl_input: bool = False) -> specproc.TomographyResult:
    """Full pipeline on synthesized data: jump-return detection of the
    given filtration-form state -> spectrum -> baseline -> band excision ->
    J-match -> J-doubling -> integration -> tomography against a matching
    synthetic thermal control.

    The (a, b, c) trio describes the state to characterize, i.e. a state
    already of the filtration output form (the published fractions are
    post-twirl).  twirl_input=True additionally runs the gradient
    filtration first; note the twirl conserves only the singlet fraction,
    remapping (b, c) unless b = c.
    """
    total = a + b + 2 * c
    rho = sc.singlet_triplet_state(a / total, b / total, c / total)
    if twirl_input:
        rho = specproc.partial_twirl(rho, sys_)
    sv = phip.signal(rho, dyn.jump_return_90Iy(sys_), sys_)
    noise = 0.0
    if proc.get("snr"):
        noise = specproc.noise_std_for_snr(sv, sys_, proc["snr"], proc["n_points"],
                                           proc["sweep_hz"], proc["line_t2"], proc["zero_fill"])
    fid = specproc.synthesize_fid(sv, sys_, proc["n_points"], proc["sweep_hz"],
                                  proc["line_t2"], noise_std=noise, seed=seed)
    spec = specproc.transform(fid, proc["zero_fill"])
    spec = specproc.baseline_correct(spec)
    # J-match on the excised I-multiplet band, as in the thesis processing
    fwhm = 1.0 / (np.pi * proc["line_t2"])
    half_band = proc["j_max"] + 8 * fwhm
    band_fid = specproc.excise_band(spec, sys_.delta_hz / 2 - half_band,
                                    sys_.delta_hz / 2 + half_band)
    jm = specproc.j_match(band_fid, j_max=proc["j_max"], j_step=proc["j_step"])
    m = proc["m_doublings"]
    doubled = specproc.j_double(spec, jm.j_hz, m)
    wins = specproc.peak_windows(sys_, proc["line_t2"], m_doublings=m,
                                 width_linewidths=proc["window_linewidths"],
                                 j_hz=jm.j_hz)
    ints = specproc.integrate_peaks(doubled, wins)
    # known-lineshape tail correction: own-line truncation and the signed
    # antiphase partner leakage
    delta, jhz = sys_.delta_hz, jm.j_hz
    jm_split = 2 ** m * jhz
    centers = sorted([delta / 2 + jm_split / 2, delta / 2 - jm_split / 2,
                      -delta / 2 + jm_split / 2, -delta / 2 - jm_split / 2])
    caps = specproc.antiphase_capture_fractions(wins, centers, -1.0, proc["line_t2"])
    ints = [(v / f, e / f) for (v, e), f in zip(ints, caps)]
    # windows are sorted ascending in frequency: (IbS+, IaS+, I+Sb, I+Sa)
    by_line = [ints[3], ints[2], ints[1], ints[0]]

    # thermal control: a calibration constant, synthesized noiseless (the
    # experiment buys its reference SNR with scans x flashes)
    B = sys_.boltzmann_factor
    sv_th = phip.signal(phip.thermal_reference(B), dyn.Pulse(np.pi / 2, np.pi / 2), sys_)
    fid_th = specproc.synthesize_fid(sv_th, sys_, proc["n_points"], proc["sweep_hz"],
                                     proc["line_t2"])
    spec_th = specproc.baseline_correct(specproc.transform(fid_th, proc["zero_fill"]))
    wins_th = specproc.peak_windows(sys_, proc["line_t2"], m_doublings=0,
                                    width_linewidths=proc["window_linewidths"],
                                    j_hz=jm.j_hz)
    th_ints = specproc.integrate_peaks(spec_th, wins_th)
    centers_th = sorted([delta / 2 + jhz / 2, delta / 2 - jhz / 2,
                         -delta / 2 + jhz / 2, -delta / 2 - jhz / 2])
    caps_th = specproc.antiphase_capture_fractions(wins_th, centers_th, +1.0,
                                                   proc["line_t2"])
    t_val = float(np.mean([abs(v) / f for (v, _), f in zip(th_ints, caps_th)]))
    cal = specproc.Calibration(thermal_integral=t_val, boltzmann_factor=B)
    res = specproc.tomography_from_line_integrals(
        [v for v, _ in by_line], cal, line_errs=[e for _, e in by_line],
        extras={"j_match_hz": jm.j_hz, "j_match_nyquist": jm.j_nyquist,
                "m_doublings": m, "noise_std": noise})
    return res


def cmd_bounds(cfg: Cfg, w: Writer, seed) -> int:
    n_min = cfg.get("experiment", "n_min", int, default=1)
    n_max = cfg.get("experiment", "n_max", int, default=20)
    B = cfg.get("experiment", "b_factor", float, default=1e-5)
    if B <= 0:
        raise ConfigError("experiment.b_factor", "must be positive")
    eps = cfg.get("experiment", "sv_eps", float)
    rows = []
    for n in range(n_min, n_max + 1):
        r = ent.bounds_report(n, B, eps)
        rows.append([n, r.eps_lower, r.eps_upper, r.warren]
                    + ([r.k_pure] if eps is not None else []))
    cols = ["n", "eps_lower", "eps_upper", "warren"] + (["k_pure"] if eps is not None else [])
    w.write_table("bounds", cols, rows, units="dimensionless; B=%r" % B)
    cross = ent.crossover_qubits(B)
    w.write_table("crossover", ["b_factor", "crossover_n"], [[B, cross]],
                  units="first n with warren >= eps_lower")
    temps = cfg.get("experiment", "temperatures_k", list)
    if temps:
        rotor = phip.RotorParams(theta_r=cfg.get("experiment", "theta_r_k", float, default=85.0))
        trows = [[float(t), 100.0 * phip.para_fraction(float(t), rotor)] for t in temps]
        w.write_table("para_fractions", ["temperature_k", "para_percent"], trows,
                      units="K, percent")
    return 0


def cmd_algo(cfg: Cfg, w: Writer, seed) -> int:
    sys_ = spin_system_from(cfg)
    algorithm = cfg.get("experiment", "algorithm", str, required=True)
    rho0 = state_from(cfg) if "state" in cfg.data else sc.bell_state("psi-")
    if algorithm == "dj":
        oracle = cfg.get("experiment", "oracle", str, required=True)
        try:
            res = algos.deutsch_jozsa(oracle, rho0, sys=sys_)
        except ValueError as e:
            raise ConfigError("experiment.oracle", str(e))
    elif algorithm == "grover":
        target = cfg.get("experiment", "target", int, required=True)
        iterations = cfg.get("experiment", "iterations", int, default=1)
        try:
            res = algos.grover(target, rho0, iterations=iterations, sys=sys_)
        except ValueError as e:
            raise ConfigError("experiment", str(e))
    else:
        raise ConfigError("experiment.algorithm", "algorithm must be dj or grover")
    payload = {
        "config_hash": w.chash,
        "algorithm": algorithm,
        "classification": res.classification,
        "success_probability": res.success_probability,
        "populations": res.populations.tolist(),
    }
    w.write_text("algorithm_result.json", json.dumps(payload, indent=1, sort_keys=True))
    if res.readout is not None:
        w.write_text("readout_signal.json", serialize.signal_to_json(res.readout))
    w.write_text("final_state.json", serialize.state_to_json(res.final_state))
    return 0


def cmd_twirl(cfg: Cfg, w: Writer, seed) -> int:
    rho = state_from(cfg)
    mode = cfg.get("experiment", "mode", str, default="deterministic_average")
    n_samples = cfg.get("experiment", "n_samples", int, default=1000)
    out = algos.full_twirl(rho, mode=mode, seed=seed, n_samples=n_samples)
    w.write_text("twirled_state.json", serialize.state_to_json(out))
    payload = {
        "config_hash": w.chash,
        "mode": mode,
        "singlet_fraction_in": sc.singlet_fraction(rho),
        "singlet_fraction_out": sc.singlet_fraction(out),
    }
    w.write_text("twirl_summary.json", json.dumps(payload, indent=1, sort_keys=True))
    return 0


def cmd_entmetrics(cfg: Cfg, w: Writer, seed) -> int:
    rho = state_from(cfg)
    rep = ent.report(rho)
    rows = [[rep.min_pt_eigenvalue, rep.concurrence, rep.eof, rep.entangled]]
    w.write_table("entanglement", ["min_pt_eigenvalue", "concurrence", "eof", "entangled"],
                  rows, units="dimensionless")
    return 0


_COMMANDS = {
    "phip": cmd_phip,
    "tomography": cmd_tomography,
    "bounds": cmd_bounds,
    "algo": cmd_algo,
    "twirl": cmd_twirl,
    "entmetrics": cmd_entmetrics,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="phipsim",
                                     description="parahydrogen NMR QIP simulator")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="INI or JSON experiment config")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default="phipsim_out")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    args = parser.parse_args(argv)

    try:
        data = load_config(args.config)
    except (OSError, ValueError, configparser.Error) as e:
        print(f"config error: {args.config}: {e}", file=_sys.stderr)
        return 2
    cfg = Cfg(data)
    w = Writer(Path(args.out_dir), args.format, config_hash(data))
    try:
        rc = _COMMANDS[args.command](cfg, w, args.seed)
    except ConfigError as e:
        print(f"config error: {e}", file=_sys.stderr)
        return 2
    except specproc.NumericError as e:
        print(f"numeric failure: {e}", file=_sys.stderr)
        return 3
    w.manifest(data, args.seed)
    return rc


if __name__ == "__main__":
    raise SystemExit(main())
