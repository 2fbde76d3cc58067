"""File formats for the external interfaces.

JSON carries full float precision (repr round-trip); CSV files start with
'#'-prefixed header lines holding units and provenance so emitted tables
are self-describing.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .dynamics import (Decohere, Delay, GradientCrush, MixingBlock, Pulse,
                       PulseSequence, ZRotation)
from .spincore import DensityState
from .specproc import Fid, Spectrum, TomographyResult


# ---------------------------------------------------------------------------
# density states

def state_to_json(rho: DensityState) -> str:
    m = rho.matrix
    return json.dumps({
        "dim": rho.dim,
        "re": m.real.tolist(),
        "im": m.imag.tolist(),
    })


def state_from_json(text: str) -> DensityState:
    d = json.loads(text)
    m = np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)
    if m.shape != (d["dim"], d["dim"]):
        raise ValueError("dim field disagrees with matrix shape")
    return DensityState(m)


def state_to_csv(rho: DensityState, header: dict | None = None) -> str:
    buf = io.StringIO()
    for k, v in (header or {}).items():
        buf.write(f"# {k}: {v}\n")
    buf.write("row,col,re,im\n")
    m = rho.matrix
    for i in range(rho.dim):
        for j in range(rho.dim):
            buf.write(f"{i},{j},{m[i, j].real!r},{m[i, j].imag!r}\n")
    return buf.getvalue()


def state_from_csv(text: str) -> DensityState:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    if rows and rows[0][0] == "row":
        rows = rows[1:]
    n = int(math.isqrt(len(rows)))
    if n * n != len(rows):
        raise ValueError("CSV does not contain a square matrix")
    m = np.zeros((n, n), dtype=complex)
    for i, j, re, im in rows:
        m[int(i), int(j)] = float(re) + 1j * float(im)
    return DensityState(m)


# ---------------------------------------------------------------------------
# pulse sequences

_ELEMENT_TAGS = {
    Pulse: "pulse", Delay: "delay", GradientCrush: "gradient_crush",
    ZRotation: "z_rotation", MixingBlock: "mixing", Decohere: "decohere",
}


def sequence_to_json(seq: PulseSequence) -> str:
    out = []
    for el in seq:
        d = {"type": _ELEMENT_TAGS[type(el)]}
        if isinstance(el, Pulse):
            d.update(flip_angle_rad=el.flip_angle, phase_rad=el.phase,
                     target=el.target, angle_error=el.angle_error)
        elif isinstance(el, Delay):
            d.update(duration_s=el.duration)
        elif isinstance(el, GradientCrush):
            d.update(mode=el.mode, duration_s=el.duration)
        elif isinstance(el, ZRotation):
            d.update(angles_rad=list(el.angles))
        elif isinstance(el, MixingBlock):
            d.update(kind=el.kind, duration_s=el.duration, rf_hz=el.rf_hz)
        elif isinstance(el, Decohere):
            d.update(duration_s=el.duration)
        out.append(d)
    return json.dumps(out, indent=1)


def sequence_from_json(text: str) -> PulseSequence:
    elements = []
    for d in json.loads(text):
        t = d["type"]
        if t == "pulse":
            elements.append(Pulse(d["flip_angle_rad"], d.get("phase_rad", 0.0),
                                  d.get("target"), d.get("angle_error", 0.0)))
        elif t == "delay":
            elements.append(Delay(d["duration_s"]))
        elif t == "gradient_crush":
            elements.append(GradientCrush(d.get("mode", "homonuclear"), d.get("duration_s", 0.0)))
        elif t == "z_rotation":
            elements.append(ZRotation(tuple(d["angles_rad"])))
        elif t == "mixing":
            elements.append(MixingBlock(d.get("kind", "mlev16"), d["duration_s"],
                                        d.get("rf_hz", 10000.0)))
        elif t == "decohere":
            elements.append(Decohere(d["duration_s"]))
        else:
            raise ValueError(f"unknown sequence element type {t!r}")
    return PulseSequence(elements)


# ---------------------------------------------------------------------------
# signal vectors, FIDs, spectra

def signal_to_json(sv) -> str:
    amps = sv.amplitudes if hasattr(sv, "amplitudes") else np.asarray(sv)
    return json.dumps([[a.real, a.imag] for a in amps])


def signal_from_json(text: str):
    from .phip import SignalVector
    pairs = json.loads(text)
    return SignalVector(np.array([re + 1j * im for re, im in pairs]))


def fid_to_csv(fid: Fid, header: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write("# axis: time, unit: s\n")
    buf.write(f"# dwell_s: {fid.dwell!r}\n")
    for k, v in (header or {}).items():
        buf.write(f"# {k}: {v}\n")
    buf.write("t,re,im\n")
    for t, v in zip(fid.times, fid.samples):
        buf.write(f"{t!r},{v.real!r},{v.imag!r}\n")
    return buf.getvalue()


def spectrum_to_csv(spec: Spectrum, header: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write("# axis: frequency, unit: Hz (transmitter at 0)\n")
    buf.write(f"# sweep_hz: {spec.sweep!r}\n")
    for k, v in (header or {}).items():
        buf.write(f"# {k}: {v}\n")
    buf.write("freq_hz,re,im\n")
    for f, v in zip(spec.freqs, spec.amplitudes):
        buf.write(f"{f!r},{v.real!r},{v.imag!r}\n")
    return buf.getvalue()


def spectrum_from_csv(text: str) -> Spectrum:
    sweep = None
    freqs, re, im = [], [], []
    for line in text.splitlines():
        if line.startswith("#"):
            if "sweep_hz:" in line:
                sweep = float(line.split("sweep_hz:")[1])
            continue
        if not line or line.startswith("freq_hz"):
            continue
        f, r, i = line.split(",")
        freqs.append(float(f)); re.append(float(r)); im.append(float(i))
    if sweep is None:
        sweep = float(freqs[-1] - freqs[0]) * len(freqs) / max(len(freqs) - 1, 1)
    return Spectrum(amplitudes=np.array(re) + 1j * np.array(im),
                    freqs=np.array(freqs), sweep=sweep)


def fid_from_csv(text: str) -> Fid:
    dwell = None
    samples = []
    for line in text.splitlines():
        if line.startswith("#"):
            if "dwell_s:" in line:
                dwell = float(line.split("dwell_s:")[1])
            continue
        if not line or line.startswith("t,"):
            continue
        _, r, i = line.split(",")
        samples.append(float(r) + 1j * float(i))
    if dwell is None:
        raise ValueError("missing dwell_s header")
    return Fid(samples=np.array(samples), dwell=dwell)


# ---------------------------------------------------------------------------
# results

def tomography_to_json(res: TomographyResult) -> str:
    return json.dumps({
        "p": [res.p, res.p_err],
        "q": [res.q, res.q_err],
        "a": [res.a, res.a_err],
        "b": [res.b, res.b_err],
        "c": [res.c, res.c_err],
        "effective_purity": [res.effective_purity, res.effective_purity_err],
        "concurrence": res.concurrence,
        "eof": res.eof,
        "extras": res.extras,
    }, indent=1)


def tomography_table(res: TomographyResult) -> str:
    lines = [
        "quantity        value        std_error",
        f"p           {res.p:12.6f} {res.p_err:12.6f}",
        f"q           {res.q:12.6f} {res.q_err:12.6f}",
        f"a (S0)      {res.a:12.6f} {res.a_err:12.6f}",
        f"b (T0)      {res.b:12.6f} {res.b_err:12.6f}",
        f"c (T+-1)    {res.c:12.6f} {res.c_err:12.6f}",
        f"eff. purity {res.effective_purity:12.6f} {res.effective_purity_err:12.6f}",
        f"concurrence {res.concurrence:12.6f}",
        f"eof         {res.eof:12.6f}",
    ]
    return "\n".join(lines) + "\n"
