#!/usr/bin/env python3
"""End-to-end smoke test for the molatom_py extension module.

Covers one call into every exposed operation and checks the numbers the
library guarantees: the CZ conditional phase, the calibrated CaF budget
column, GHZ fidelity closed forms, stabilizer protocol verification, and
spin-chain ground-state / weak-measurement behavior.

Run `cargo build -p molatom-py --release` first (or install the package
with maturin); the script finds the built extension on its own.
"""

import cmath
import math
import sys


def _import_module():
    try:
        import molatom_py

        return molatom_py
    except ImportError:
        pass

    # Fall back to the cargo-built cdylib: copy it next to this script under
    # the importable name, preferring the freshest build.
    import pathlib
    import shutil

    root = pathlib.Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / "release" / "libmolatom_py.so",
        root / "target" / "debug" / "libmolatom_py.so",
    ]
    built = [p for p in candidates if p.exists()]
    if not built:
        sys.exit(
            "molatom_py is not installed and no built extension was found; "
            "run: cargo build -p molatom-py --release"
        )
    newest = max(built, key=lambda p: p.stat().st_mtime)
    dest = pathlib.Path(__file__).resolve().parent / "molatom_py.so"
    if not dest.exists() or dest.stat().st_mtime < newest.stat().st_mtime:
        shutil.copy2(newest, dest)
    sys.path.insert(0, str(dest.parent))
    import molatom_py

    return molatom_py


m = _import_module()
checks = 0


def ok(label, cond):
    global checks
    if not cond:
        sys.exit(f"FAIL: {label}")
    checks += 1
    print(f"  ok  {label}")


print("gates")
r = m.hybrid_cz(v_ma=1.0, omega_ratio=0.1)
ok("cz phase is pi", abs(abs(r.conditional_phase) - math.pi) < 1e-3)
ok("cz leakage < 1e-4", r.leakage < 1e-4)
ok("cz lossless without decay", r.decay_loss == 0.0)
ok("cz unitary is 4x4", len(r.unitary) == 4 and len(r.unitary[0]) == 4)
ok("cz no warnings", r.warnings == [])

rd = m.hybrid_cz(v_ma=1.0, omega_ratio=0.1, gamma_rs=1e-3, gamma_rp=1e-3)
ok("decay costs population", rd.decay_loss > 0.0)
ok("decay costs fidelity", rd.fidelity_vs_ideal < r.fidelity_vs_ideal)

ri = m.iswap(v_mm=1.0)
amp = ri.unitary[2][1]  # <21| U |12> after a quarter exchange period
ok("iswap transfer amplitude is i/sqrt(2)", abs(amp - 1j / math.sqrt(2)) < 1e-9)

rp = m.pair_drive_cz(v_mm=1.0, drive_rabi=0.05)
u11 = rp.unitary[3][3]
ok("pair drive returns |11>", abs(u11) ** 2 > 0.999)
phase_err = math.remainder(cmath.phase(u11) - math.pi, 2 * math.pi)
ok("pair drive pi phase on |11>", abs(phase_err) < 0.05)

print("budget")
b = m.error_budget("CaF", 20.5e9, 1.77)
ok("anchor decay", b.decay == 7e-4)
ok("anchor adiabaticity", b.adiabaticity == 2.5e-4)
ok("anchor leakage", b.leakage == 5e-8)
ok("anchor field", b.field == 8e-5)
ok("anchor total rounds to 1e-3", b.total_one_sig_fig == 1e-3)
ok("anchor rydberg level", b.matched_n == 59)

b2 = m.error_budget("CaF-2d", 20.5e9, 3.54)
ok("decay scales as 1/d", abs(b2.decay - 3.5e-4) < 1e-12)

try:
    m.error_budget("RbCs", 0.49e9, 1.23)
    sys.exit("FAIL: RbCs should have no Rydberg match in range")
except RuntimeError:
    ok("out-of-range species raises RuntimeError", True)

g = m.ghz_fidelity(1e-3, 20, scheme="measurement_based", readout_error=1e-3)
s = 1.0 - 1e-3
ok("measurement-based closed form", abs(g.fidelity - s ** 38 * s ** 19) < 1e-15)
ok("measurement-based depth 2", g.depth == 2)
glin = m.ghz_fidelity(1e-2, 20, scheme="gate_only_linear")
glog = m.ghz_fidelity(1e-2, 20, scheme="gate_only_log")
ok("linear and log schemes agree on fidelity", glin.fidelity == glog.fidelity)
ok("log depth for n=20 is 5", glog.depth == 5 and glin.depth == 19)

print("stabilizer protocols")
run = m.ghz_protocol(2, 4, seed=7)
ok("qubit chain uses 3 ancillas", len(run.records) == 3)
ok("ghz long-range correlator", abs(run.z_pair_expectation - 1) < 1e-12)

run3 = m.ghz_protocol(3, 4, seed=11)
ok("qutrit outcomes are trits", all(rec[1] in (0, 1, 2) for rec in run3.records))
ok("qutrit ghz correlator", abs(run3.z_pair_expectation - 1) < 1e-12)

t = m.toric_code(2, seed=0)
ok("toric checks all pass", t.checks_passing == t.check_count == 8)
ok("toric code dimension 9", t.code_dimension == 9)
ok("toric measures 4 ancillas", len(t.outcomes) == 4)

print("criticality")
chain = m.SpinChain("xxz", 8, boundary="periodic", anisotropy=-1.0)
ok("xxz dimension", chain.dimension == 256)
gs = chain.ground(k_states=3)
ok("xxz ground energy negative", gs.energy < 0.0)
gap6 = m.SpinChain("xxz", 6, boundary="periodic", anisotropy=-1.0).ground().gap
ok("critical gap open and shrinking with size", 0.0 < gs.gap < gap6)
ok("eigensolver converged", gs.residual < 1e-8)

c = gs.correlators("zz", [(0, 1), (0, 4)], connected=True)
ok("neighbor zz anticorrelated", c[0].real < 0.0)
ok("correlators are real", abs(c[0].imag) < 1e-10 and abs(c[1].imag) < 1e-10)

w = gs.weak_measure(theta=0.3, sites=[0, 3], seed=5)
total = sum(w["outcome_probabilities"].values())
ok("weak measurement probabilities sum to 1", abs(total - 1.0) < 1e-12)
ok("outcome recorded per site", len(w["selected_outcome"]) == 2)
ok("success prob matches table", abs(w["success_probability"] - w["outcome_probabilities"][w["selected_outcome"]]) < 1e-12)

ok("theta=0 channel is the identity", gs.channel_trace_distance(0.0, [0, 3]) < 1e-12)
d1 = gs.channel_trace_distance(0.2, [1])
d2 = gs.channel_trace_distance(0.1, [1])
ok("trace distance closes ~theta^2", 3.0 < d1 / d2 < 5.0)

potts = m.SpinChain("potts3", 5, boundary="periodic", j=1.0, h=1.0)
ok("potts dimension", potts.dimension == 243)
pg = potts.ground(k_states=2)
pc = pg.correlators("potts_order", [(0, 2)])
ok("potts order correlator positive", pc[0].real > 0.0)

scan = m.potts_gap_scan([4, 5, 6], [1.0])
gaps = [row[2] for row in scan]
ok("critical gap shrinks with size", gaps[0] > gaps[1] > gaps[2] > 0.0)
scan_ord = m.potts_gap_scan([6], [10.0])
ok("ordered phase gap nearly closed", scan_ord[0][2] < 0.05)

print(f"\nall {checks} checks passed")
