"""End-to-end acceptance checks.

Each test covers one release criterion and prints exactly one
[PASS]/[FAIL] line (with the worst offending sub-check on failure) before
asserting, so the high-level verdicts survive in the captured run log.
"""

import time

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from qprob import (
    DensityOperator,
    DetectorSpec,
    IsingQuenchSpec,
    Observable,
    QuantumChannel,
    WorkProtocol,
    assemble_distribution,
    average_heat,
    characteristic,
    classical_bound,
    default_u_grid,
    detector_phase,
    detector_position,
    distribution,
    driven_qubit_preset,
    exchange_fluctuation,
    free_energy_difference,
    gibbs_state,
    jarzynski_kdq,
    jarzynski_tpm,
    loschmidt_amplitude,
    loschmidt_kdq,
    mhq_from_wtpm,
    mode_oracle,
    mode_table,
    moments_sweep,
    no_signaling_residual,
    nonpositivity,
    otoc,
    otoc_characteristic,
    otoc_kdq,
    pair_table,
    quasimomenta,
    qubit_loschmidt_preset,
    ramsey_simulate,
    reconstruct_distribution,
    two_qubit_heat_preset,
    two_qubit_otoc_preset,
    work_table,
    work_variance,
    wtpm_probability,
)
from qprob.operators import PAULI_X, PAULI_Z
from util import rand_channel, rand_density, rand_observable, rand_unitary

SQRT2 = np.sqrt(2.0)


def _verdict(capsys, name, failures):
    with capsys.disabled():
        if failures:
            print(f"[FAIL] {name}: {failures[0]}")
        else:
            print(f"[PASS] {name}")
    assert not failures, failures


def _qubit(rho01):
    rho = DensityOperator(np.array([[0.5, rho01], [np.conj(rho01), 0.5]]))
    return rho, Observable(PAULI_Z), QuantumChannel.identity(2), Observable(PAULI_X)


def test_acceptance_01_spin1_wtpm_goldens(capsys):
    failures = []
    start = time.monotonic()
    psi = np.array([0.0, -1.0, 1.0]) / SQRT2
    rho = DensityOperator(np.outer(psi, psi))
    Sz = Observable(np.diag([1.0, 0.0, -1.0]).astype(complex))
    Sx = Observable(np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]],
                             dtype=complex) / SQRT2)
    ch = QuantumChannel.identity(3)
    table = pair_table(rho, Sz, ch, Sx)
    a = int(np.argmin(np.abs(table.outcomes1 + 1.0)))
    b = int(np.argmin(np.abs(table.outcomes2 - 1.0)))
    Pa = Sz.spectrum.projectors[a]
    Pb = Sx.spectrum.projectors[b]
    p_joint = float(table.p_tpm[a, b])
    p_s2 = float(np.trace(Pb @ rho.matrix).real)
    w = wtpm_probability(rho, Pa, ch, Pb)
    q = mhq_from_wtpm(p_joint, p_s2, w)
    for label, got, want in [
        ("q_MHQ(-1,1)", q, (1.0 - SQRT2) / 8.0),
        ("p(-1,1)", p_joint, 1.0 / 8.0),
        ("p_s2(1)", p_s2, (3.0 - 2.0 * SQRT2) / 8.0),
        ("w(-1,1)", w, 3.0 / 8.0),
        ("affine closure", q, float(table.q[a, b].real)),
    ]:
        if abs(got - want) > 1e-10:
            failures.append(f"{label}: {got} != {want}")
    elapsed = time.monotonic() - start
    if elapsed > 1.0:
        failures.append(f"runtime {elapsed:.2f}s exceeds 1s")
    _verdict(capsys, "spin-1 weak-TPM golden values", failures)


def test_acceptance_02_stern_gerlach_qubit(capsys):
    failures = []
    rho, O1, ch, O2 = _qubit(0.0)
    t = pair_table(rho, O1, ch, O2)
    if np.max(np.abs(t.q - 0.25)) > 1e-10:
        failures.append("maximally mixed state does not give all-1/4 table")
    for rho01 in (0.3, -0.2 + 0.35j, 0.15j):
        rho, O1, ch, O2 = _qubit(rho01)
        t = pair_table(rho, O1, ch, O2)
        mean = distribution(t).moment(1)
        if abs(mean - 2.0 * np.real(rho01)) > 1e-10:
            failures.append(f"mean outcome change at rho01={rho01}")
        # conjugate-ordering differences, rows ascending in s1 = -1, +1
        diff = pair_table(rho, O1, ch, O2, ordering="KDQ2").q - t.p_tpm
        expect = 0.5 * np.array([[-rho01, rho01],
                                 [-np.conj(rho01), np.conj(rho01)]])
        if np.max(np.abs(diff - expect)) > 1e-10:
            failures.append(f"KDQ-TPM differences at rho01={rho01}")
    _verdict(capsys, "sequential-spin qubit closed forms", failures)


def test_acceptance_03_ramsey_exactness(capsys):
    failures = []
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(200):
        d = int(rng.integers(2, 7))
        rho = rand_density(rng, d, pure=bool(rng.integers(0, 2)))
        O1, O2 = rand_observable(rng, d), rand_observable(rng, d)
        ch = rand_channel(rng, d)
        us = rng.uniform(-3.0, 3.0, size=16)
        readout = ramsey_simulate(rho, O1, ch, O2, us)
        for u, val in zip(readout.us, readout.values):
            worst = max(worst, abs(val - characteristic(rho, O1, ch, O2, u)))
    if worst > 1e-10:
        failures.append(f"readout deviates from characteristic by {worst:.2e}")
    worst = 0.0
    for _ in range(25):
        d = int(rng.integers(2, 5))
        rho = rand_density(rng, d)
        O1, O2 = rand_observable(rng, d), rand_observable(rng, d)
        ch = rand_channel(rng, d)
        dist = distribution(pair_table(rho, O1, ch, O2))
        readout = ramsey_simulate(rho, O1, ch, O2, default_u_grid(dist.values))
        rec = reconstruct_distribution(readout, dist.values)
        worst = max(worst, float(np.max(np.abs(
            rec.distribution.weights - dist.weights))))
    if worst > 1e-8:
        failures.append(f"reconstruction error {worst:.2e}")
    _verdict(capsys, "interferometric readout exactness", failures)


def test_acceptance_04_detector_scheme(capsys):
    failures = []
    for rho01 in (0.3, -0.3, 0.1 + 0.2j):
        rho, O1, ch, O2 = _qubit(rho01)
        for u in np.linspace(0.0, 3.0, 13):
            got = detector_phase(rho, O1, ch, O2, float(u))
            want = 0.5 * (1.0 + np.cos(2 * u)) + 2j * np.real(rho01) * np.sin(u)
            if abs(got - want) > 1e-10:
                failures.append(f"modified phase at rho01={rho01}, u={u}")
                break
    spec = DetectorSpec(kappa=1.0, p0=1.0, sigma=0.6)
    asyms = {}
    for rho01 in (0.3, -0.3, 0.0):
        rho, O1, ch, O2 = _qubit(rho01)
        pos = detector_position(rho, O1, ch, O2, spec)
        if np.min(pos.density) < 0:
            failures.append(f"negative pointer density at rho01={rho01}")
        if abs(pos.integral() - 1.0) > 1e-3:
            failures.append(f"pointer mass {pos.integral()} at rho01={rho01}")
        asyms[rho01] = float(np.trapezoid(pos.xs * pos.density, pos.xs))
    if not (asyms[0.3] > 0 > asyms[-0.3] and abs(asyms[0.0]) < 1e-10):
        failures.append("asymmetry does not track the sign of the coherence")
    _verdict(capsys, "pointer-detector scheme", failures)


def _min_over_t(entry, Omega, delta):
    period = 2.0 * np.pi / Omega
    a, b = divmod(entry, 2)

    def f(t):
        return float(driven_qubit_preset(Omega, delta, 0.5, 0.5,
                                         t).analytic_table()[a, b].real)

    coarse = min(np.linspace(0.0, period, 41), key=f)
    res = minimize_scalar(f, bracket=(max(coarse - 0.1 * period, 0.0),
                                      coarse, coarse + 0.1 * period),
                          options={"xtol": 1e-10})
    return float(res.fun)


def test_acceptance_05_driven_qubit_protocol(capsys):
    failures = []
    start = time.monotonic()
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(40):
        Omega = float(rng.uniform(0.1, 3.0))
        delta = float(rng.uniform(0.1, 3.0))
        p = float(rng.uniform(0.0, 1.0))
        c = float(rng.uniform(-1.0, 1.0)) * np.sqrt(p * (1 - p))
        t = float(rng.uniform(0.0, 8.0))
        preset = driven_qubit_preset(Omega, delta, p, c, t)
        worst = max(worst, float(np.max(np.abs(
            work_table(preset.protocol).q - preset.analytic_table()))))
    if worst > 1e-10:
        failures.append(f"analytic-table mismatch {worst:.2e}")
    for entry, omega_star, name in [(0, SQRT2 - 1.0, "lower-lower"),
                                    (2, SQRT2 + 1.0, "upper-lower")]:
        res = minimize_scalar(lambda O: _min_over_t(entry, float(O), 1.0),
                              bracket=(0.6 * omega_star, omega_star,
                                       1.6 * omega_star),
                              options={"xtol": 1e-9})
        if abs(res.x - omega_star) > 1e-6:
            failures.append(f"{name} deepest drive at {res.x}, not {omega_star}")
        if abs(res.fun - (1.0 - SQRT2) / 4.0) > 1e-8:
            failures.append(f"{name} depth {res.fun} != (1-sqrt2)/4")
    elapsed = time.monotonic() - start
    if elapsed > 10.0:
        failures.append(f"runtime {elapsed:.1f}s exceeds 10s")
    _verdict(capsys, "driven-qubit work protocol", failures)


def test_acceptance_06_extractable_work(capsys):
    failures = []
    delta = 1.0
    Omega = (1.0 + SQRT2) * delta
    exceeded = False
    ts = np.linspace(0.0, 2.0 * np.pi / Omega, 161)
    variances = []
    for t in ts:
        preset = driven_qubit_preset(Omega, delta, 0.5, -0.5, float(t))
        rep = classical_bound(preset.protocol)
        if abs(rep.avg_work_tpm) > 1e-10:
            failures.append(f"nonzero TPM work {rep.avg_work_tpm} at t={t}")
            break
        if rep.violation and 0.6 <= Omega * t / np.pi <= 1.4:
            exceeded = True
        variances.append(work_variance(preset.protocol).re)
    if not exceeded:
        failures.append("classical bound never exceeded in the window")
    i = int(np.argmin(np.abs(ts * Omega - np.pi)))
    if not (variances[i] <= variances[i - 1]
            and variances[i] <= variances[i + 1]):
        failures.append("no variance local minimum at the half drive period")
    rng = np.random.default_rng(31)
    for _ in range(1000):
        d = int(rng.integers(2, 7))
        proto = WorkProtocol(H1=rand_observable(rng, d),
                             H2=rand_observable(rng, d),
                             channel=rand_channel(rng, d),
                             rho=rand_density(rng, d))
        rep = work_variance(proto)
        if abs(rep.im) > rep.robertson_bound + 1e-9:
            failures.append(f"uncertainty bound violated: {rep}")
            break
    _verdict(capsys, "extractable-work bound and variance", failures)


def test_acceptance_07_fluctuation_identities(capsys):
    failures = []
    rng = np.random.default_rng(47)
    for _ in range(60):
        d = int(rng.integers(2, 6))
        proto = WorkProtocol(H1=rand_observable(rng, d),
                             H2=rand_observable(rng, d),
                             channel=rand_channel(rng, d),
                             rho=rand_density(rng, d))
        beta = float(rng.uniform(0.05, 2.0))
        lhs, rhs, _ = jarzynski_tpm(proto, beta)
        if abs(lhs - rhs) > 1e-9 * max(1.0, abs(lhs)):
            failures.append(f"integral work relation (dephased) off by {abs(lhs - rhs):.2e}")
            break
        lhs, Gamma = jarzynski_kdq(proto, beta)
        dF = free_energy_difference(proto.H1, proto.H2, beta)
        if abs(lhs - np.exp(-beta * dF) * Gamma) > 1e-9 * max(1.0, abs(lhs)):
            failures.append("integral work relation (quasiprobability) broken")
            break
    for _ in range(20):
        d = int(rng.integers(2, 5))
        H1, H2 = rand_observable(rng, d), rand_observable(rng, d)
        beta = float(rng.uniform(0.1, 1.5))
        proto = WorkProtocol(H1=H1, H2=H2,
                             channel=QuantumChannel.unitary(rand_unitary(rng, d)),
                             rho=gibbs_state(H1, beta))
        _, Gamma = jarzynski_kdq(proto, beta)
        if abs(Gamma - 1.0) > 1e-9:
            failures.append(f"thermal+unital correction {Gamma} != 1")
            break
    beta_c, beta_h = 2.0, 0.5
    a_c, a_h = 1.0 + np.exp(-beta_c), 1.0 + np.exp(-beta_h)
    for p, eta, want_one in [(1.0 / (a_c * a_h), 0.0, True),
                             (0.55, 0.0, True),
                             (0.55, 0.1, False)]:
        spec = two_qubit_heat_preset(p, eta, 0.3, 1.1, beta_c, beta_h)
        lhs, ups = exchange_fluctuation(spec)
        if abs(lhs - (1.0 + ups)) > 1e-9:
            failures.append(f"exchange identity off at p={p}, eta={eta}")
        if want_one and abs(lhs - 1.0) > 1e-9:
            failures.append(f"incoherent exchange average {lhs} != 1")
        if not want_one and abs(ups) < 1e-6:
            failures.append("coherent state shows no exchange correction")
    _verdict(capsys, "fluctuation identities", failures)


def test_acceptance_08_two_qubit_heat(capsys):
    failures = []
    beta_c, beta_h = 10.0, 0.1
    qtpm = 1.0 / (1.0 + np.exp(beta_c)) - 1.0 / (1.0 + np.exp(beta_h))
    for eta in (0.0, 0.2, 0.4):
        backflow = False
        for theta in np.linspace(0.0, np.pi, 181):
            spec = two_qubit_heat_preset(0.0, eta, 0.0, float(theta),
                                         beta_c, beta_h)
            Q = average_heat(spec)
            want = -eta * np.sin(2 * theta) + np.sin(theta) ** 2 * qtpm
            if abs(Q - want) > 1e-10:
                failures.append(f"closed form off at eta={eta}, theta={theta}")
                break
            if eta == 0.0 and Q > 1e-12:
                failures.append(f"backflow without coherence at theta={theta}")
                break
            if Q > 1e-12:
                backflow = True
        if eta > 0 and not backflow:
            failures.append(f"no backflow found at eta={eta}")
    _verdict(capsys, "two-qubit heat exchange", failures)


def test_acceptance_09_otoc(capsys):
    failures = []
    B1, B2, J, beta, u = 1.0, 1.1, 2.0, 10.0, np.pi / 2
    spec = two_qubit_otoc_preset(B1, B2, J, beta)
    ts = np.linspace(0.0, 20.0, 401)
    worst = max(abs(otoc(spec, float(t), u)
                    - otoc_characteristic(spec, float(t), u)) for t in ts[::8])
    if worst > 1e-10:
        failures.append(f"correlator/table identity off by {worst:.2e}")
    omega = 2.0 * np.sqrt((B1 + B2) ** 2 + J ** 2)
    period = 2.0 * np.pi / omega
    worst = max(abs(otoc(spec, float(t), u) - otoc(spec, float(t) + period, u))
                for t in ts[::8])
    if worst > 1e-8:
        failures.append(f"periodicity residual {worst:.2e} exceeds 1e-8")
    mins = np.full((2, 2), np.inf)
    for t in ts:
        mins = np.minimum(mins, otoc_kdq(spec, float(t)).q.real)
    offdiag_floor = min(mins[0, 0], mins[0, 1], mins[1, 0])
    if not (mins[1, 1] < -1e-3 and offdiag_floor > -1e-10):
        failures.append("negativity not confined to the upper-branch cell")
    tgrid = np.linspace(0.0, 20.0, 201)
    for b in (0.2, 1.0, 5.0, 10.0):
        depths = []
        for Jv in (0.5, 1.0, 1.5, 2.0, 2.5):
            s = two_qubit_otoc_preset(B1, B2, Jv, b)
            depths.append(min(otoc(s, float(t), u).real for t in tgrid))
        if not np.all(np.diff(depths) < 1e-12):
            failures.append(f"contour not monotone in J at beta={b}")
    _verdict(capsys, "scrambling correlator", failures)


def test_acceptance_10_loschmidt_qubit(capsys):
    failures = []
    B = 1.0
    for delta in (0.1, 0.5, 1.0, 2.0):
        preset = qubit_loschmidt_preset(B, delta)
        table = loschmidt_kdq(preset.spec)
        if np.max(np.abs(table.q - preset.table_closed_form())) > 1e-10:
            failures.append(f"table closed form off at delta={delta}")
        worst = max(abs(loschmidt_amplitude(preset.spec, float(t))
                        - preset.amplitude_closed_form(float(t)))
                    for t in np.linspace(0.0, 12.0, 49))
        if worst > 1e-10:
            failures.append(f"amplitude closed form off by {worst:.2e}")
        if not preset.table_closed_form()[1, 0].real < 0:
            failures.append(f"no negative entry at delta={delta}")
    deltas = np.linspace(0.05, 3.0, 60)
    alephs = [nonpositivity(loschmidt_kdq(qubit_loschmidt_preset(B, float(d)).spec))
              for d in deltas]
    best = float(deltas[int(np.argmax(alephs))])
    if not (max(alephs) > 0 and abs(best - B) < 0.2 * B):
        failures.append(f"nonpositivity peak at {best}, expected near {B}")
    _verdict(capsys, "quench echo qubit", failures)


def test_acceptance_11_ising_quench(capsys):
    failures = []
    rng = np.random.default_rng(19)
    worst_q, worst_sum = 0.0, 0.0
    for _ in range(60):
        spec = IsingQuenchSpec(N=int(2 * rng.integers(2, 9)),
                               lambda0=float(rng.uniform(0.0, 2.0)),
                               lambda1=float(rng.uniform(0.0, 2.0)),
                               beta=float(rng.uniform(0.0, 3.0)),
                               p=float(rng.uniform(0.0, 1.0)))
        for k in quasimomenta(spec.N):
            t = mode_table(k, spec)
            o = mode_oracle(k, spec)
            worst_q = max(worst_q, max(
                abs(qa - qb) for (_, _, qa), (_, _, qb)
                in zip(t.entries, o.entries)))
            worst_sum = max(worst_sum, abs(float(np.sum(t.weights)) - 1.0))
    if worst_q > 1e-10:
        failures.append(f"mode table vs dense oracle off by {worst_q:.2e}")
    if worst_sum > 1e-12:
        failures.append(f"per-mode sum residual {worst_sum:.2e}")
    base = dict(N=12, lambda0=0.0, lambda1=0.5, beta=0.1)
    d0 = assemble_distribution(IsingQuenchSpec(p=0.0, **base))
    if float(np.min(d0.weights.real)) < -1e-12:
        failures.append("incoherent mixture has negative weights")
    d1 = assemble_distribution(IsingQuenchSpec(p=1.0, **base))
    neg = d1.values[d1.weights.real < -1e-12]
    if not (neg.size > 0 and np.all(neg > 0)):
        failures.append("coherent state negativity not at positive work")
    ps = np.linspace(0.0, 1.0, 11)
    rows = moments_sweep(IsingQuenchSpec(p=0.0, **base), ps)
    m1 = np.array([r[1] for r in rows])
    var = np.array([r[2] for r in rows])
    fit = np.polyfit(ps, m1, 1)
    if np.max(np.abs(np.polyval(fit, ps) - m1)) > 1e-9:
        failures.append("average work not affine in the mixture weight")
    if not (np.all(np.diff(np.abs(m1)) > -1e-12)
            and np.all(np.diff(var) < 1e-12)):
        failures.append("moment monotonicity in the mixture weight broken")
    start = time.monotonic()
    d20 = assemble_distribution(IsingQuenchSpec(N=20, lambda0=0.0,
                                                lambda1=0.5, beta=0.1, p=0.5))
    elapsed = time.monotonic() - start
    if elapsed > 60.0:
        failures.append(f"N=20 assembly took {elapsed:.1f}s")
    if abs(complex(np.sum(d20.weights)) - 1.0) > 1e-9:
        failures.append("N=20 distribution not normalized")
    _verdict(capsys, "transverse-field chain quench", failures)


def test_acceptance_12_property_suite(capsys):
    failures = []
    start = time.monotonic()
    rng = np.random.default_rng(1234)
    cases = 0
    for _ in range(1000):
        d = int(rng.integers(2, 6))
        rho = rand_density(rng, d, pure=bool(rng.integers(0, 2)))
        O1, O2 = rand_observable(rng, d), rand_observable(rng, d)
        ch = rand_channel(rng, d)
        t1 = pair_table(rho, O1, ch, O2)
        t2 = pair_table(rho, O1, ch, O2, ordering="KDQ2")
        if abs(complex(t1.q.sum()) - 1.0) > 1e-10:
            failures.append("table sum != 1")
            break
        if no_signaling_residual(t1.q, rho, ch, O2) > 1e-10:
            failures.append("marginal invasiveness detected")
            break
        if np.max(np.abs(t2.q - t1.q.conj())) > 1e-10:
            failures.append("ordering conventions not conjugate")
            break
        if np.max(np.abs(t1.mhq - t1.q.real)) > 1e-12:
            failures.append("symmetrized table is not the real part")
            break
        if nonpositivity(t1) > 1e-8:
            comm = O1.matrix @ ch.adjoint(O2.matrix) \
                - ch.adjoint(O2.matrix) @ O1.matrix
            if np.linalg.norm(comm) < 1e-10:
                failures.append("negativity without non-commutativity")
                break
        cases += 1
        if cases % 3 == 0:
            # commuting companion case collapses onto the two-point
            # projective statistics
            rho_d = DensityOperator(np.diag(np.diag(rho.matrix)).real
                                    / np.trace(rho.matrix).real)
            Od = Observable(np.diag(rng.uniform(-1.0, 1.0, size=d)))
            Od2 = Observable(Od.matrix @ Od.matrix + 0.5 * Od.matrix)
            tc = pair_table(rho_d, Od, QuantumChannel.identity(d), Od2)
            if np.max(np.abs(tc.q - tc.p_tpm)) > 1e-10:
                failures.append("commuting case fails to collapse")
                break
            cases += 1
    elapsed = time.monotonic() - start
    if cases < 1000:
        failures.append(f"only {cases} property cases completed")
    if elapsed > 120.0:
        failures.append(f"property sweep took {elapsed:.1f}s")
    _verdict(capsys, "cross-cutting property suite", failures)
