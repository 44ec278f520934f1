"""Command-line interface: scenario configs in, tables/distributions/sweeps
out as CSV and/or JSON, with the headline non-classicality numbers printed
to standard output.

Exit codes: 0 success, 1 config/argument parse error, 2 domain-invariant
violation, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .errors import (
    AtomExplosion,
    GridTooNarrow,
    IllConditionedGrid,
    QprobError,
    SingularThermalState,
    UndefinedAngle,
)
from .operators import PAULI_X, PAULI_Z
from .quasiprob import (
    kdq,
    ndqp,
    no_signaling_residual,
    nonpositivity,
    pair_table,
)
from .schemes import (
    DetectorSpec,
    default_u_grid,
    detector_position,
    mhq_from_wtpm,
    ndqp_distribution,
    ramsey_simulate,
    reconstruct_distribution,
    wtpm_probability,
)
from .states import DensityOperator, Observable, QuantumChannel
from .thermo import (
    average_heat,
    average_work,
    classical_bound,
    driven_qubit_preset,
    heat_table,
    strong_backflow_threshold,
    two_qubit_heat_preset,
    work_table,
    work_variance,
)
from .manybody import (
    loschmidt_amplitude,
    loschmidt_kdq,
    oto_commutator,
    otoc,
    otoc_kdq,
    qubit_loschmidt_preset,
    two_qubit_otoc_preset,
)
from .ising import IsingQuenchSpec, assemble_distribution, moments_sweep

_NUMERICAL_ERRORS = (IllConditionedGrid, GridTooNarrow, AtomExplosion,
                     SingularThermalState, UndefinedAngle)

_SQRT2 = np.sqrt(2.0)
_SZ1 = np.diag([1.0, 0.0, -1.0]).astype(complex)
_SX1 = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / _SQRT2


class _ParseFailure(Exception):
    """Anything wrong with arguments or config content."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ParseFailure(message)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _as_complex(entry) -> complex:
    """Config convention: complex scalars are [re, im] pairs; bare numbers
    are taken as real."""
    if isinstance(entry, (list, tuple)):
        if len(entry) != 2:
            raise _ParseFailure(f"complex entry must be [re, im], got {entry!r}")
        return complex(float(entry[0]), float(entry[1]))
    return complex(float(entry), 0.0)


def _parse_matrix(data) -> np.ndarray:
    try:
        return np.array([[_as_complex(e) for e in row] for row in data])
    except (TypeError, ValueError) as exc:
        raise _ParseFailure(f"bad matrix in config: {exc}") from exc


# ---------------------------------------------------------------------------
# scenario construction
# ---------------------------------------------------------------------------

def _qubit_scenario(rho01: complex):
    """Maximally mixed populations with a tunable coherence rho01; spin
    measured first along z, then along x."""
    rho = DensityOperator(np.array([[0.5, rho01], [np.conj(rho01), 0.5]]))
    return (rho, Observable(PAULI_Z, label="sz"),
            QuantumChannel.identity(2), Observable(PAULI_X, label="sx"))


def _explicit_scenario(block):
    rho = DensityOperator(_parse_matrix(block["rho"]))
    O1 = Observable(_parse_matrix(block["O1"]))
    O2 = Observable(_parse_matrix(block["O2"]))
    ch = block.get("channel")
    if ch is None:
        channel = QuantumChannel.identity(rho.dim)
    elif "unitary" in ch:
        channel = QuantumChannel.unitary(_parse_matrix(ch["unitary"]))
    elif "kraus" in ch:
        channel = QuantumChannel.from_kraus([_parse_matrix(K) for K in ch["kraus"]])
    else:
        raise _ParseFailure("channel block needs 'unitary' or 'kraus'")
    return rho, O1, channel, O2


def _resolve_scenario(args, params):
    if params.get("explicit"):
        return _explicit_scenario(params["explicit"])
    preset = params.get("preset", "stern_gerlach")
    if preset in ("stern_gerlach", "qubit_ramsey", "gaussian_detector"):
        rho01 = complex(params.get("rho01_re", 0.0), params.get("rho01_im", 0.0))
        return _qubit_scenario(rho01)
    raise _ParseFailure(f"preset {preset!r} is not a generic table scenario")


def _table_rows(table):
    rows = []
    for a, o1 in enumerate(table.outcomes1):
        for b, o2 in enumerate(table.outcomes2):
            rows.append([a, b, float(o1), float(o2),
                         float(table.q[a, b].real), float(table.q[a, b].imag),
                         float(table.p_tpm[a, b])])
    return rows

_TABLE_COLUMNS = ["s1_index", "s2_index", "o1", "o2", "re_q", "im_q", "p_tpm"]
_DIST_COLUMNS = ["value", "re_weight", "im_weight"]


def _dist_rows(dist):
    return [[float(v), float(w.real), float(w.imag)]
            for v, w in zip(dist.values, dist.weights)]


# ---------------------------------------------------------------------------
# subcommand builders: each returns a result dict
# ---------------------------------------------------------------------------

def _result(kind, columns, rows, aleph, residual, notes=()):
    return {"kind": kind, "columns": columns, "rows": rows,
            "aleph": float(aleph), "residual": float(residual),
            "notes": list(notes)}


def _run_table(args, params):
    rho, O1, channel, O2 = _resolve_scenario(args, params)
    table = pair_table(rho, O1, channel, O2)
    table.validate()
    residual = max(abs(complex(table.q.sum()) - 1.0),
                   no_signaling_residual(table.q, rho, channel, O2))
    return _result("table", _TABLE_COLUMNS, _table_rows(table),
                   nonpositivity(table), residual)


def _run_ndqp(args, params):
    rho, O1, channel, O2 = _resolve_scenario(args, params)
    dist = ndqp_distribution(rho, O1, channel, O2)
    table = pair_table(rho, O1, channel, O2)
    return _result("distribution", _DIST_COLUMNS, _dist_rows(dist),
                   nonpositivity(table), abs(dist.total() - 1.0))


def _run_wtpm(args, params):
    """Spin-1 weak-TPM scenario: S_z then S_x on psi = (0, -1, 1)/sqrt(2)."""
    psi = np.array([0.0, -1.0, 1.0]) / _SQRT2
    rho = DensityOperator(np.outer(psi, psi))
    O1 = Observable(_SZ1, label="Sz")
    O2 = Observable(_SX1, label="Sx")
    channel = QuantumChannel.identity(3)
    table = pair_table(rho, O1, channel, O2)
    P2H = O2.spectrum.projectors
    p_s2 = [float(np.trace(P @ rho.matrix).real) for P in P2H]
    rows = []
    worst = 0.0
    for a, Pa in enumerate(O1.spectrum.projectors):
        for b, Pb in enumerate(P2H):
            w = wtpm_probability(rho, Pa, channel, Pb)
            q_mhq = mhq_from_wtpm(float(table.p_tpm[a, b]), p_s2[b], w)
            worst = max(worst, abs(q_mhq - table.q[a, b].real))
            rows.append([a, b, float(table.outcomes1[a]), float(table.outcomes2[b]),
                         float(table.p_tpm[a, b]), p_s2[b], w, q_mhq])
    cols = ["s1_index", "s2_index", "o1", "o2", "p_joint", "p_s2", "w", "q_mhq"]
    return _result("sweep", cols, rows, nonpositivity(table), worst)


def _run_ramsey(args, params):
    rho, O1, channel, O2 = _resolve_scenario(args, params)
    from .quasiprob import distribution as table_distribution
    table = pair_table(rho, O1, channel, O2)
    target = table_distribution(table)
    if params.get("u_count"):
        us = np.linspace(params["u_start"], params["u_stop"],
                         int(params["u_count"]))
    else:
        us = default_u_grid(target.values)
    readout = ramsey_simulate(rho, O1, channel, O2, us)
    recon = reconstruct_distribution(readout, target.values)
    rows = [[float(u), float(sx), float(sy)] for u, sx, sy in readout.samples]
    worst = float(np.max(np.abs(recon.distribution.weights - target.weights)))
    return _result("readout", ["u", "sx", "sy"], rows,
                   nonpositivity(table), worst,
                   notes=[f"reconstruction_residual {_fmt(recon.residual)}",
                          f"grid_condition_number {_fmt(recon.condition_number)}"])


def _run_detector(args, params):
    rho, O1, channel, O2 = _resolve_scenario(args, params)
    spec = DetectorSpec(kappa=params.get("kappa", 1.0),
                        p0=params.get("p0", 1.0),
                        sigma=params.get("sigma", 0.6))
    pos = detector_position(rho, O1, channel, O2, spec)
    rows = [[float(x), float(d), float(i), float(c)]
            for x, d, i, c in zip(pos.xs, pos.density,
                                  pos.incoherent, pos.coherent)]
    dist = ndqp_distribution(rho, O1, channel, O2)
    return _result("sweep", ["x", "density", "incoherent", "coherent"], rows,
                   float(np.sum(np.abs(dist.weights)) - 1.0),
                   abs(pos.integral() - 1.0))


def _run_work(args, params):
    preset = driven_qubit_preset(params["Omega"], params["delta"],
                                 params["p"], params["c"], params["t"])
    table = work_table(preset.protocol)
    table.validate()
    rep = work_variance(preset.protocol)
    notes = [f"avg_work_kdq {_fmt(average_work(preset.protocol, 'kdq'))}",
             f"avg_work_tpm {_fmt(average_work(preset.protocol, 'tpm'))}",
             f"work_variance_re {_fmt(rep.re)}",
             f"work_variance_im {_fmt(rep.im)}"]
    return _result("table", _TABLE_COLUMNS, _table_rows(table),
                   nonpositivity(table), abs(complex(table.q.sum()) - 1.0),
                   notes=notes)


def _run_heat(args, params):
    thetas = np.linspace(params.get("theta_start", 0.0),
                         params.get("theta_stop", np.pi),
                         int(params.get("theta_count", 181)))
    rows = []
    worst_res = 0.0
    worst_aleph = 0.0
    for th in thetas:
        spec = two_qubit_heat_preset(params["p"], params["eta"], params["xi"],
                                     float(th), params["beta_c"],
                                     params["beta_h"])
        q = np.asarray(heat_table(spec))
        worst_res = max(worst_res, abs(complex(q.sum()) - 1.0))
        worst_aleph = max(worst_aleph, float(np.sum(np.abs(q)) - 1.0))
        rows.append([float(th), average_heat(spec),
                     strong_backflow_threshold(spec)])
    return _result("sweep", ["theta", "avg_heat", "threshold"], rows,
                   worst_aleph, worst_res)


def _run_otoc(args, params):
    spec = two_qubit_otoc_preset(params["B1"], params["B2"], params["J"],
                                 params["beta"])
    u = params.get("u", np.pi / 2.0)
    ts = np.linspace(params.get("t_start", 0.0), params.get("t_stop", 20.0),
                     int(params.get("t_count", 401)))
    rows = []
    worst_aleph = 0.0
    worst_res = 0.0
    for t in ts:
        F = otoc(spec, float(t), u)
        C = oto_commutator(spec, float(t), u)
        table = otoc_kdq(spec, float(t))
        worst_aleph = max(worst_aleph, nonpositivity(table))
        worst_res = max(worst_res, abs(complex(table.q.sum()) - 1.0))
        # outcome labels: index 0 <-> eigenvalue +1 on qubit 2
        hi, lo = 1, 0        # ascending branches: lo = -1, hi = +1
        rows.append([float(t), F.real, F.imag, C,
                     float(table.q[hi, hi].real), float(table.q[hi, hi].imag),
                     float(table.q[hi, lo].real), float(table.q[hi, lo].imag),
                     float(table.q[lo, hi].real), float(table.q[lo, hi].imag),
                     float(table.q[lo, lo].real), float(table.q[lo, lo].imag)])
    cols = ["t", "re_F", "im_F", "C",
            "re_q00", "im_q00", "re_q01", "im_q01",
            "re_q10", "im_q10", "re_q11", "im_q11"]
    return _result("sweep", cols, rows, worst_aleph, worst_res)


def _run_loschmidt(args, params):
    preset = qubit_loschmidt_preset(params["B"], params["delta"])
    table = loschmidt_kdq(preset.spec)
    table.validate()
    ts = np.linspace(params.get("t_start", 0.0), params.get("t_stop", 10.0),
                     int(params.get("t_count", 501)))
    rows = []
    for t in ts:
        G = loschmidt_amplitude(preset.spec, float(t))
        rows.append([float(t), G.real, G.imag, abs(G) ** 2])
    return _result("sweep", ["t", "re_G", "im_G", "echo"], rows,
                   nonpositivity(table), abs(complex(table.q.sum()) - 1.0))


def _run_ising(args, params):
    spec = IsingQuenchSpec(N=int(params["N"]), lambda0=params["lambda0"],
                           lambda1=params["lambda1"], beta=params["beta"],
                           p=params["p"])
    dist = assemble_distribution(spec)
    aleph = float(np.sum(np.abs(dist.weights)) - 1.0)
    return _result("distribution", _DIST_COLUMNS, _dist_rows(dist),
                   aleph, abs(dist.total() - 1.0))


# ---------------------------------------------------------------------------
# figure data series
# ---------------------------------------------------------------------------

def _figure_fig2(params):
    xs = None
    series = []
    for rho01 in (0.0, 0.3, -0.3):
        rho, O1, channel, O2 = _qubit_scenario(complex(rho01, 0.0))
        pos = detector_position(rho, O1, channel, O2,
                                DetectorSpec(kappa=1.0, p0=1.0, sigma=0.6))
        xs = pos.xs
        series.append(pos.density)
    rows = [[float(x)] + [float(s[i]) for s in series]
            for i, x in enumerate(xs)]
    cols = ["x", "density_rho01_0", "density_rho01_p03", "density_rho01_m03"]
    return _result("sweep", cols, rows, 0.0, 0.0)


def _driven_q_series(omega_factor):
    delta = 1.0
    Omega = omega_factor * delta
    ts = np.linspace(0.0, 2.0 * np.pi / Omega, 401)
    rows = []
    for t in ts:
        pre = driven_qubit_preset(Omega, delta, 0.5, 0.5, float(t))
        q = work_table(pre.protocol).q
        rows.append([float(t), float(q[0, 0].real), float(q[1, 0].real),
                     float(q[0, 1].real), float(q[1, 1].real)])
    cols = ["t", "re_q_mm", "re_q_pm", "re_q_mp", "re_q_pp"]
    return _result("sweep", cols, rows, 0.0, 0.0)


def _figure_fig4(params, variance=False):
    import warnings as _warnings
    delta = 1.0
    Omega = (1.0 + _SQRT2) * delta
    ts = np.linspace(1e-6, 2.0 * np.pi / Omega, 301)
    rows = []
    for t in ts:
        pre = driven_qubit_preset(Omega, delta, 0.5, -0.5, float(t))
        if variance:
            rep = work_variance(pre.protocol)
            from .thermo import work_distribution
            d_tpm = work_distribution(pre.protocol, "tpm")
            var_tpm = float((d_tpm.moment(2) - d_tpm.moment(1) ** 2).real)
            rows.append([float(t), rep.re, var_tpm])
        else:
            with _warnings.catch_warnings():
                _warnings.simplefilter("ignore")
                rep = classical_bound(pre.protocol)
            rows.append([float(t), rep.avg_work_kdq, rep.avg_work_tpm,
                         -rep.classical_bound])
    if variance:
        cols = ["t", "var_re_kdq", "var_tpm"]
    else:
        cols = ["t", "avg_w_kdq", "avg_w_tpm", "minus_classical_bound"]
    return _result("sweep", cols, rows, 0.0, 0.0)


def _figure_fig5(panel, params):
    B1, B2, beta, u = 1.0, 1.1, 10.0, np.pi / 2.0
    if panel in ("a", "b", "c"):
        Js = (0.5, 1.5, 2.5)
        ts = np.linspace(0.0, 20.0, 401)
        specs = [two_qubit_otoc_preset(B1, B2, J, beta) for J in Js]
        rows = []
        for t in ts:
            row = [float(t)]
            for spec in specs:
                if panel == "c":
                    row.append(nonpositivity(otoc_kdq(spec, float(t))))
                else:
                    F = otoc(spec, float(t), u)
                    row.append(F.real if panel == "a" else F.imag)
            rows.append(row)
        tag = {"a": "re_G", "b": "im_G", "c": "aleph"}[panel]
        cols = ["t"] + [f"{tag}_J{str(J).replace('.', '')}" for J in Js]
        return _result("sweep", cols, rows, 0.0, 0.0)
    if panel in ("d", "e"):
        J = 2.0
        omega = 2.0 * np.sqrt((B1 + B2) ** 2 + J ** 2)
        spec = two_qubit_otoc_preset(B1, B2, J, beta)
        ts = np.linspace(0.0, 2.0 * np.pi / omega, 301)
        rows = []
        for t in ts:
            q = otoc_kdq(spec, float(t)).q
            part = (lambda z: z.real) if panel == "d" else (lambda z: z.imag)
            # paper-style labels: 0 <-> the +1 outcome (ascending index 1)
            rows.append([float(omega * t), part(q[1, 1]), part(q[1, 0]),
                         part(q[0, 1]), part(q[0, 0])])
        tag = "re" if panel == "d" else "im"
        cols = ["omega_t"] + [f"{tag}_q{nm}" for nm in ("00", "01", "10", "11")]
        return _result("sweep", cols, rows, 0.0, 0.0)
    # panel f: contour of min Re G over (beta, J)
    betas = np.linspace(0.2, 10.0, 13)
    Js = np.linspace(0.25, 3.0, 12)
    ts = np.linspace(0.0, 20.0, 201)
    rows = []
    for b in betas:
        for J in Js:
            spec = two_qubit_otoc_preset(B1, B2, float(J), float(b))
            m = min(otoc(spec, float(t), u).real for t in ts)
            rows.append([float(b), float(J), float(m)])
    return _result("sweep", ["beta", "J", "min_re_G"], rows, 0.0, 0.0)


def _figure_fig6(params):
    thetas = np.linspace(0.0, np.pi, 181)
    etas = (0.0, 0.2, 0.4)
    rows = []
    for th in thetas:
        row = [float(th)]
        for eta in etas:
            spec = two_qubit_heat_preset(0.0, eta, 0.0, float(th), 10.0, 0.1)
            row.append(average_heat(spec))
        rows.append(row)
    cols = ["theta", "avg_q_eta0", "avg_q_eta02", "avg_q_eta04"]
    return _result("sweep", cols, rows, 0.0, 0.0)


def _figure_fig7(p, params):
    return _run_ising(None, {"N": 12, "lambda0": 0.0, "lambda1": 0.5,
                             "beta": 0.1, "p": p})


def _figure_fig8(params):
    spec = IsingQuenchSpec(N=12, lambda0=0.0, lambda1=0.5, beta=0.1, p=0.0)
    rows = [[p, abs(avg), var]
            for p, avg, var in moments_sweep(spec, np.linspace(0.0, 1.0, 21))]
    return _result("sweep", ["p", "abs_avg_w", "var_w"], rows, 0.0, 0.0)


def _figure_fig9(panel, params):
    B = 1.0
    if panel == "a":
        deltas = (0.1, 0.4, 0.7, 1.0)
        ts = np.linspace(0.0, 10.0, 501)
        presets = [qubit_loschmidt_preset(B, d) for d in deltas]
        rows = []
        for t in ts:
            rows.append([float(t)] + [
                loschmidt_amplitude(p.spec, float(t)).real for p in presets])
        cols = ["t"] + [f"re_G_d{str(d).replace('.', '')}" for d in deltas]
        return _result("sweep", cols, rows, 0.0, 0.0)
    deltas = np.linspace(0.01, 4.0, 400)
    rows = []
    for d in deltas:
        pre = qubit_loschmidt_preset(B, float(d))
        table = loschmidt_kdq(pre.spec)
        q = table.q.real
        # paper-style labels: n = 0 <-> the +B branch (ascending index 1)
        rows.append([float(d), float(q[1, 1]), float(q[1, 0]),
                     float(q[0, 1]), float(q[0, 0]), nonpositivity(table)])
    cols = ["delta", "q00", "q01", "q10", "q11", "aleph"]
    return _result("sweep", cols, rows, 0.0, 0.0)


_FIGURES = {
    "fig2": lambda params: _figure_fig2(params),
    "fig3a": lambda params: _driven_q_series(_SQRT2 - 1.0),
    "fig3b": lambda params: _driven_q_series(_SQRT2 + 1.0),
    "fig4": lambda params: _figure_fig4(params),
    "fig5a": lambda params: _figure_fig5("a", params),
    "fig5b": lambda params: _figure_fig5("b", params),
    "fig5c": lambda params: _figure_fig5("c", params),
    "fig5d": lambda params: _figure_fig5("d", params),
    "fig5e": lambda params: _figure_fig5("e", params),
    "fig5f": lambda params: _figure_fig5("f", params),
    "fig6": lambda params: _figure_fig6(params),
    "fig7a": lambda params: _figure_fig7(0.0, params),
    "fig7b": lambda params: _figure_fig7(1.0, params),
    "fig8": lambda params: _figure_fig8(params),
    "fig9a": lambda params: _figure_fig9("a", params),
    "fig9b": lambda params: _figure_fig9("b", params),
    "fig10": lambda params: _figure_fig4(params, variance=True),
}


def _run_figure(args, params):
    fid = params.get("id") or getattr(args, "id", None)
    if fid not in _FIGURES:
        raise _ParseFailure(
            f"unknown figure id {fid!r}; known: {sorted(_FIGURES)}")
    return _FIGURES[fid](params)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _verify_payload(result):
    rows = result["rows"]
    if not rows:
        raise ValueError("refusing to serialize an empty payload")
    cols = result["columns"]
    if result["kind"] == "table":
        i_re, i_im = cols.index("re_q"), cols.index("im_q")
        i_p = cols.index("p_tpm")
        total = sum(complex(r[i_re], r[i_im]) for r in rows)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"table payload sums to {total!r}, not 1")
        ptot = sum(r[i_p] for r in rows)
        if abs(ptot - 1.0) > 1e-9:
            raise ValueError(f"table p_tpm column sums to {ptot!r}, not 1")
    elif result["kind"] == "distribution":
        i_re, i_im = cols.index("re_weight"), cols.index("im_weight")
        total = sum(complex(r[i_re], r[i_im]) for r in rows)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"distribution payload sums to {total!r}, not 1")


def _write_csv(path, result):
    lines = [",".join(result["columns"])]
    for row in result["rows"]:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_json(path, result, metadata):
    doc = {
        "metadata": metadata,
        "payload": {
            "kind": result["kind"],
            "columns": result["columns"],
            "rows": [[(int(v) if isinstance(v, (int, np.integer)) else float(v))
                      for v in row] for row in result["rows"]],
            "aleph": result["aleph"],
            "normalization_residual": result["residual"],
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

_RUNNERS = {
    "tpm": _run_table,
    "kdq": _run_table,
    "mhq": _run_table,
    "ndqp": _run_ndqp,
    "wtpm": _run_wtpm,
    "ramsey": _run_ramsey,
    "detector": _run_detector,
    "work": _run_work,
    "heat": _run_heat,
    "otoc": _run_otoc,
    "loschmidt": _run_loschmidt,
    "ising": _run_ising,
    "figure": _run_figure,
}

_PARAM_FLAGS = {
    # flag name -> (type, commands it applies to)
    "rho01_re": float, "rho01_im": float,
    "kappa": float, "p0": float, "sigma": float,
    "u_start": float, "u_stop": float, "u_count": int,
    "Omega": float, "delta": float, "p": float, "c": float, "t": float,
    "eta": float, "xi": float, "theta_start": float, "theta_stop": float,
    "theta_count": int, "beta_c": float, "beta_h": float,
    "B1": float, "B2": float, "J": float, "beta": float, "u": float,
    "t_start": float, "t_stop": float, "t_count": int,
    "B": float, "N": int, "lambda0": float, "lambda1": float,
}

_DEFAULTS = {
    "work": {"Omega": 1.0 + _SQRT2, "delta": 1.0, "p": 0.5, "c": -0.5, "t": 1.0},
    "heat": {"p": 0.0, "eta": 0.2, "xi": 0.0, "beta_c": 10.0, "beta_h": 0.1},
    "otoc": {"B1": 1.0, "B2": 1.1, "J": 2.0, "beta": 10.0},
    "loschmidt": {"B": 1.0, "delta": 0.5},
    "ising": {"N": 12, "lambda0": 0.0, "lambda1": 0.5, "beta": 0.1, "p": 0.0},
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="qprob",
                     description="two-time quasiprobability statistics")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _RUNNERS:
        sp = sub.add_parser(name)
        if name == "figure":
            sp.add_argument("id", nargs="?")
        sp.add_argument("--config")
        sp.add_argument("--preset")
        sp.add_argument("--out", default="qprob_out")
        sp.add_argument("--format", choices=("csv", "json", "both"),
                        default="both")
        sp.add_argument("--threads", type=int, default=None)
        sp.add_argument("--seed", type=int, default=None)
        for flag, typ in _PARAM_FLAGS.items():
            sp.add_argument(f"--{flag.replace('_', '-')}", dest=flag,
                            type=typ, default=None)
    return parser


def _collect_params(args):
    params = {}
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except OSError as exc:
            raise _ParseFailure(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise _ParseFailure(f"config is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise _ParseFailure("config root must be an object")
        if ("preset" in loaded) == ("explicit" in loaded):
            raise _ParseFailure("config needs exactly one of preset/explicit")
        params.update(loaded)
    params.update(_DEFAULTS.get(args.command, {}))
    if args.config:
        # config values win over command defaults, flags win over both
        with open(args.config) as fh:
            params.update(json.load(fh))
    if args.preset:
        params["preset"] = args.preset
    for flag in _PARAM_FLAGS:
        value = getattr(args, flag, None)
        if value is not None:
            params[flag] = value
    if args.command == "figure" and getattr(args, "id", None):
        params["id"] = args.id
    return params


def main(argv=None) -> int:
    try:
        parser = _build_parser()
        args = parser.parse_args(argv)
        params = _collect_params(args)
    except _ParseFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    threads = args.threads
    if threads is None and os.environ.get("QPROB_THREADS"):
        try:
            threads = int(os.environ["QPROB_THREADS"])
        except ValueError:
            print("error: QPROB_THREADS is not an integer", file=sys.stderr)
            return 1
    if args.seed is not None:
        np.random.seed(args.seed)       # helper randomness only, never physics

    try:
        result = _RUNNERS[args.command](args, params)
        _verify_payload(result)
    except _ParseFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (QprobError, ValueError, KeyError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2

    hash_src = json.dumps({k: v for k, v in sorted(params.items())},
                          sort_keys=True, default=str)
    metadata = {
        "command": args.command,
        "config_hash": hashlib.sha256(hash_src.encode()).hexdigest()[:16],
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    if threads is not None:
        metadata["threads"] = threads

    try:
        if args.format in ("csv", "both"):
            _write_csv(f"{args.out}.csv", result)
        if args.format in ("json", "both"):
            _write_json(f"{args.out}.json", result, metadata)
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4

    print(f"aleph {_fmt(result['aleph'])}")
    print(f"normalization_residual {_fmt(result['residual'])}")
    for note in result["notes"]:
        print(note)
    return 0


if __name__ == "__main__":
    sys.exit(main())
