"""Subcycling sweep on the three-subdomain bar.

The middle subdomain runs explicit central difference, so it must be
sub-stepped below its critical time-step while the implicit outer
subdomains keep the coarse system step.  Sweeping the middle sub-step
count eta_B shows the tip-displacement error against the modal series
solution dropping and then saturating at the error floor set by the
coarse implicit subdomains.

Run:  python demos/bar_subcycling_sweep.py
"""

from mtstep.coupling import advance_system_step
from mtstep.problems import build_bar_1d, series_bar_solution


def tip_error(eta_b):
    scenario = build_bar_1d(etas=(1, eta_b, 1))
    sys = scenario.system
    sub_idx, dof = scenario.probes[-1]  # tip DOF of the last subdomain
    worst = 0.0
    final = 0.0
    for _ in range(round(scenario.duration / sys.dt_system)):
        sys = sys.apply(advance_system_step(sys))
        tip = sys.states[sub_idx].d[dof]
        final = abs(tip - series_bar_solution(1.0, sys.t_current))
        worst = max(worst, final)
    return worst, final


if __name__ == "__main__":
    print(f"{'eta_B':>6} {'max tip error':>14} {'final tip error':>16}")
    for eta_b in (10, 20, 50, 100, 1000):
        worst, final = tip_error(eta_b)
        print(f"{eta_b:6d} {worst:14.4e} {final:16.4e}")
