"""Critical-velocity searches: bisection between decaying and blowing-up
trajectories of the homogeneous relaxing fluid and of the stationary
non-relaxing fluid."""

from fractions import Fraction

from fluidsym import cli, fluid, odesolve as od

print("homogeneous relaxing fluid (case 1), heat-flux seed q0 = -0.5:")
params = fluid.FluidParams(lam=Fraction(1))
d = cli.CRITICAL_DEFAULTS[1]
run = cli.critical_run_factory(1, "israel-stewart", params, d["q0"],
                               d["horizon"], d["blowup_delta"])
res = od.find_critical(run, 0.5, 0.9, tol=1e-3)
print(f"  v_c = {res.v_critical:.4f}  (bracket width {res.hi - res.lo:.1e}, "
      f"{res.iterations} bisections)")

print("conductivity sweep under the scaled-time normalization:")
for kap in (Fraction(1, 2), Fraction(1), Fraction(2)):
    p2 = fluid.FluidParams(lam=Fraction(1), kappa=kap)
    run2 = cli.critical_run_factory(1, "israel-stewart", p2, d["q0"],
                                    d["horizon"], d["blowup_delta"])
    r2 = od.find_critical(run2, 0.5, 0.9, tol=1e-3)
    print(f"  kappa = {kap}: v_c = {r2.v_critical:.4f}")
print("  (exactly invariant: the scaled homogeneous dynamics is free of k "
      "and kappa)")

print()
print("stationary non-relaxing fluid (case 2), seed q0 = -0.1, steepening "
      "orientation:")
params = fluid.FluidParams(lam=Fraction(0))
d = cli.CRITICAL_DEFAULTS[2]
run = cli.critical_run_factory(2, "eckart", params, d["q0"], d["horizon"],
                               d["blowup_delta"])
res = od.find_critical(run, 0.5, 0.9, tol=1e-3)
print(f"  v_c = {res.v_critical:.4f}; sub-threshold profiles relax onto the "
      "sonic state v = 1/sqrt(3) ~ 0.5774")

print()
print("the non-relaxing homogeneous family has no critical velocity: every "
      "seeded state blows up:")
params = fluid.FluidParams(lam=Fraction(0))
d = cli.CRITICAL_DEFAULTS[1]
run = cli.critical_run_factory(1, "eckart", params, d["q0"], d["horizon"],
                               d["blowup_delta"])
try:
    od.find_critical(run, 0.1, 0.9)
except od.NoBracketError as err:
    print(f"  no-bracket error raised as expected: {err}")
