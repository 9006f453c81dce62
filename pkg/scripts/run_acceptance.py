#!/usr/bin/env python3
"""
Run the end-to-end acceptance checks and print PASS/FAIL per criterion.

Usage examples:
- python scripts/run_acceptance.py
- python scripts/run_acceptance.py --only 1 2 10

Exit code is 0 only if every selected criterion passes.
"""

import argparse
import math
import os
import sys
import time

import numpy as np
from scipy.stats import unitary_group

# Allow importing project modules when run as a script
CURRENT_DIR = os.path.dirname(os.path.abspath(__file__))
PROJECT_ROOT = os.path.abspath(os.path.join(CURRENT_DIR, os.pardir))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from dynamics.ensemble import DecoherenceLayers, layered_fidelity  # noqa: E402
from dynamics.lindblad import (  # noqa: E402
    DecoherenceParams,
    calibrate_dephasing_mode,
    excited_population_trace,
    lifetime_consistency,
    propagate,
    propagate_and_relax,
)
from experiments.commands import cmd_phase_sweep, cmd_pulse_compare  # noqa: E402
from experiments.run_config import RunConfig  # noqa: E402
from quantum_model.drive import GateSpec, dark_bright, pulse_duration  # noqa: E402
from quantum_model.holonomy import ideal_for_spec, named_gate_spec  # noqa: E402
from quantum_model.states import Level, StandardState, embed_qubit_state, standard_state, state_fidelity  # noqa: E402
from tomography.process_tomography import (  # noqa: E402
    TOMOGRAPHY_INPUTS,
    chi_ideal,
    process_fidelity,
    process_from_outputs,
    simulate_process,
)

TWO_PI = 2.0 * math.pi
MHZ = TWO_PI * 1e6
MARGIN = 1e-4


def _strictly_increasing(values, margin=MARGIN) -> bool:
    return all(b - a > margin for a, b in zip(values[:-1], values[1:]))


def check_phase_law():
    config = RunConfig.from_mapping({
        "gate": "Z", "axis": "detuning", "axis_min": -2.0, "axis_max": 2.0, "points": 21,
        "omegas_mhz": [168.0, 252.0], "layers": "none",
    })
    table = cmd_phase_sweep(config).table
    worst = float(table["gamma_error"].max())
    curves = [table[table["omega_mhz"] == w]["gamma_sim"].to_numpy() for w in config.omegas_mhz]
    collapse = float(np.max(np.abs(curves[0] - curves[1])))
    return worst <= 1e-3 and collapse <= 1e-6, f"max |gamma - law| = {worst:.2e}, collapse = {collapse:.2e}"


def check_rates():
    params = DecoherenceParams.from_mhz()
    mode, error = calibrate_dephasing_mode(params)
    report = lifetime_consistency(params)
    t1_error = abs(report.t1 - 11.1e-9) / 11.1e-9
    ok = t1_error <= 0.01 and error <= 0.01 and mode is params.dephasing_mode
    return ok, f"T1 = {report.t1 * 1e9:.2f} ns, T_phi = {report.t_phi * 1e9:.2f} ns ({mode.value} mode)"


def check_ideal_oracle():
    ideal = DecoherenceParams.ideal()
    worst = 1.0
    for theta in np.linspace(0.0, math.pi, 5):
        for phi in np.linspace(0.0, TWO_PI, 5, endpoint=False):
            for delta in np.linspace(-2.0, 2.0, 5):
                spec = GateSpec(theta=theta, phi=phi, delta=delta, omega=150 * MHZ)
                f = process_fidelity(simulate_process(spec, ideal), chi_ideal(ideal_for_spec(spec)))
                worst = min(worst, f)
    return worst >= 1 - 1e-6, f"min fidelity over 125 gates = {worst:.9f}"


def check_tomography_round_trip():
    rng = np.random.default_rng(2024)
    inputs = [standard_state(s).qubit_block for s in TOMOGRAPHY_INPUTS]
    worst_f, worst_d = 1.0, 0.0
    for _ in range(200):
        u = unitary_group.rvs(2, random_state=rng)
        chi = process_from_outputs([u @ rho @ u.conj().T for rho in inputs])
        ref = chi_ideal(u)
        worst_f = min(worst_f, process_fidelity(chi, ref))
        worst_d = max(worst_d, chi.distance(ref))
    return worst_f >= 1 - 1e-6 and worst_d <= 1e-5, f"min F = {worst_f:.9f}, max distance = {worst_d:.2e}"


def check_detuning_trend():
    params = DecoherenceParams.from_mhz()
    deltas = np.linspace(-1.6, 1.6, 9)
    fids = []
    for d in deltas:
        spec = GateSpec(theta=0.0, phi=0.0, delta=float(d), omega=252 * MHZ)
        fids.append(layered_fidelity(spec, spec.omega, DecoherenceLayers.FULL, params))
    centre = len(deltas) // 2
    ok = (int(np.argmin(fids)) == centre
          and _strictly_increasing(fids[centre:])
          and _strictly_increasing(fids[centre::-1]))
    return ok, f"F(Delta=0) = {fids[centre]:.4f}, F(edges) = {fids[0]:.4f}/{fids[-1]:.4f}"


def check_power_trend():
    params = DecoherenceParams.from_mhz()
    powers = [60, 100, 150, 200, 250, 300, 400]
    layers = (DecoherenceLayers.T1_ONLY, DecoherenceLayers.T1_AND_TPHI, DecoherenceLayers.FULL)
    table = {layer: [layered_fidelity("Z", w * MHZ, layer, params, gamma=math.pi) for w in powers] for layer in layers}
    monotone = all(_strictly_increasing(table[layer]) for layer in layers)
    ordered = all(
        table[layers[0]][i] - table[layers[1]][i] > MARGIN and table[layers[1]][i] - table[layers[2]][i] > MARGIN
        for i in range(len(powers))
    )
    return monotone and ordered, f"full: {table[DecoherenceLayers.FULL][0]:.4f} -> {table[DecoherenceLayers.FULL][-1]:.4f}"


def check_detuned_advantage():
    params = DecoherenceParams.from_mhz()
    omega = 152 * MHZ
    f_x90 = layered_fidelity("X(pi/2)", omega, DecoherenceLayers.FULL, params)
    f_x = layered_fidelity("X", omega, DecoherenceLayers.FULL, params)
    f_h = layered_fidelity("H", omega, DecoherenceLayers.FULL, params)
    ok = f_x90 - f_x > 0.01 and f_x90 - f_x * f_h > 0.01
    return ok, f"F(X(pi/2)) = {f_x90:.4f}, F(X) = {f_x:.4f}, F(X)F(H) = {f_x * f_h:.4f}"


def check_dark_state_protection():
    params = DecoherenceParams.from_mhz().without_hopping()
    worst_dark, worst_excitation, min_gap = 1.0, 0.0, math.inf
    leak_ordered, worst_linearity = True, 0.0
    for theta in np.linspace(0.0, math.pi, 5):
        spec = GateSpec(theta=float(theta), phi=0.0, delta=0.0, omega=150 * MHZ)
        pair = dark_bright(spec.theta, spec.phi)
        unitary = ideal_for_spec(spec).unitary
        dark = embed_qubit_state(pair.dark)
        trace = excited_population_trace(dark, spec, params, pulse_duration(spec), 101)
        worst_excitation = max(worst_excitation, float(trace.p_a2.max()))

        inputs = {"dark": pair.dark, "bright": pair.bright}
        inputs.update({s.value: s.vector for s in StandardState})
        finals = {label: propagate_and_relax(embed_qubit_state(ket), spec, params) for label, ket in inputs.items()}
        losses = {label: 1.0 - state_fidelity(unitary @ inputs[label], final) for label, final in finals.items()}
        worst_dark = min(worst_dark, state_fidelity(pair.dark, finals["dark"]))
        min_gap = min(min_gap, losses["bright"] - losses["dark"])

        # |0> is fed only through the bright component, so leakage scales with |<b|psi>|^2
        leaks = {label: final.population(Level.ZERO) for label, final in finals.items()}
        leak_ordered &= all(leaks["bright"] >= leak - 1e-12 for leak in leaks.values())
        for label, ket in inputs.items():
            weight = abs(np.vdot(pair.bright, ket)) ** 2
            worst_linearity = max(worst_linearity, abs(leaks[label] - weight * leaks["bright"]))
    ok = (worst_dark >= 1 - 1e-6 and worst_excitation <= 1e-10 and min_gap > 0.05
          and leak_ordered and worst_linearity <= 1e-8)
    return ok, (f"dark overlap >= {worst_dark:.9f}, max p_A2 = {worst_excitation:.1e}, "
                f"bright - dark loss >= {min_gap:.4f}, leak linearity error = {worst_linearity:.1e}")


def check_pulse_shape():
    low = cmd_pulse_compare(RunConfig.from_mapping({
        "gate": "Y(pi/2)", "axis": "power", "axis_min": 100.0, "axis_max": 400.0, "points": 4,
        "layers": "full",
    })).table
    low_ok = bool(low["trap_feasible"].all()) and float(low["rect_minus_trap"].abs().max()) < 0.005
    # 1.2 ns ramps already carry the full 2*pi area slightly above 720 MHz for this gate
    high = cmd_pulse_compare(RunConfig.from_mapping({
        "gate": "Y(pi/2)", "axis": "power", "axis_min": 600.0, "axis_max": 1000.0, "points": 9,
        "layers": "full",
    })).table
    feasible = high[high["trap_feasible"]]
    gaps = feasible["rect_minus_trap"].to_numpy()
    high_ok = len(gaps) >= 3 and gaps[0] > 0 and _strictly_increasing(gaps, margin=0.0)
    skipped = high.loc[~high["trap_feasible"], "omega_mhz"].tolist()
    detail = f"max |gap| <= 400 MHz = {low['rect_minus_trap'].abs().max():.4f}; gaps above 600 MHz = {np.round(gaps, 4).tolist()}"
    if skipped:
        detail += f"; infeasible at {skipped} MHz"
    return low_ok and high_ok, detail


def check_detuned_rabi_oracle():
    ideal = DecoherenceParams.ideal()
    omega = 60 * MHZ
    rho0 = standard_state(TOMOGRAPHY_INPUTS[1])
    worst = 0.0
    for delta in (-1.0, -0.5, 0.0, 0.5, 1.0):
        spec = GateSpec(theta=0.0, phi=0.0, delta=delta, omega=omega)
        rabi = math.hypot(omega, spec.detuning)
        t_end = 3 * TWO_PI / rabi
        trace = excited_population_trace(rho0, spec, ideal, t_end, 301, steps_per_cycle=2000)
        peak = omega ** 2 / rabi ** 2
        analytic = peak * np.sin(rabi * trace.times / 2) ** 2
        worst = max(worst, float(np.max(np.abs(trace.p_a2 - analytic))) / peak)
    return worst <= 1e-6, f"max relative deviation = {worst:.2e}"


def check_physicality():
    params = DecoherenceParams.from_mhz().without_hopping()
    worst_shift = 0.0
    for name in ("X", "H", "X(pi/2)", "Y(pi/2)"):
        spec = named_gate_spec(name, 150 * MHZ)
        for s in TOMOGRAPHY_INPUTS:
            propagate(standard_state(s), spec, params).validate(herm_tol=1e-10, trace_tol=1e-9, psd_tol=1e-8)
        coarse = process_fidelity(simulate_process(spec, params, steps_per_cycle=400), chi_ideal(ideal_for_spec(spec)))
        fine = process_fidelity(simulate_process(spec, params, steps_per_cycle=800), chi_ideal(ideal_for_spec(spec)))
        worst_shift = max(worst_shift, abs(coarse - fine))
    return worst_shift <= 1e-7, f"max step-halving change = {worst_shift:.2e}"


CRITERIA = {
    1: ("Geometric phase law", check_phase_law),
    2: ("Rate consistency", check_rates),
    3: ("Ideal-holonomy oracle", check_ideal_oracle),
    4: ("Tomography round trip", check_tomography_round_trip),
    5: ("Fidelity vs detuning trend", check_detuning_trend),
    6: ("Fidelity vs power and layer ordering", check_power_trend),
    7: ("Detuned-vs-resonant advantage", check_detuned_advantage),
    8: ("Dark-state protection", check_dark_state_protection),
    9: ("Pulse-shape threshold", check_pulse_shape),
    10: ("Detuned Rabi oracle", check_detuned_rabi_oracle),
    11: ("Physicality", check_physicality),
}


def main():
    parser = argparse.ArgumentParser(description="Run the simulator acceptance checks")
    parser.add_argument("--only", type=int, nargs="+", choices=sorted(CRITERIA), help="Criteria to run")
    args = parser.parse_args()

    selected = args.only or sorted(CRITERIA)
    failures = 0
    print("=" * 70)
    for number in selected:
        title, check = CRITERIA[number]
        start = time.perf_counter()
        try:
            ok, detail = check()
        except Exception as e:
            ok, detail = False, f"raised {type(e).__name__}: {e}"
        status = "PASS" if ok else "FAIL"
        failures += 0 if ok else 1
        print(f"[{status}] {number:>2}. {title} ({time.perf_counter() - start:.1f} s)")
        print(f"          {detail}")
    print("-" * 70)
    print(f"{len(selected) - failures}/{len(selected)} criteria passed")
    print("=" * 70)
    sys.exit(0 if failures == 0 else 1)


if __name__ == "__main__":
    main()
