"""Adaptive explicit Runge-Kutta integration of the reduced systems.

The integrator is the Dormand-Prince 5(4) embedded pair with the standard
quartic dense-output interpolant, step-size control on the embedded error
estimate, event localisation by bisection on the dense output, and
deterministic float arithmetic (identical inputs give identical samples).

Critical-velocity searches bisect the initial velocity between a decaying
and a blowing-up trajectory of a reduced system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from . import expr as ex
from . import fluid
from .reduction import ReducedSystem

__all__ = [
    "EventSpec",
    "SolverConfig",
    "Trajectory",
    "classify_trajectory",
    "compile_rhs",
    "convergence_order",
    "find_critical",
    "integrate",
    "scaled_time_factor",
]


@dataclass(frozen=True)
class SolverConfig:
    rtol: float = 1e-8
    atol: float = 1e-10
    initial_step: float = 1e-4
    max_step: float = 1.0
    max_steps: int = 200_000
    span: float = 10.0  # length of the integration interval
    direction: int = 1  # +1 forward, -1 backward in the independent variable
    dense_points: int = 200

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must bound the runtime")


@dataclass(frozen=True)
class EventSpec:
    """Guard functions g(t, u); an event fires when any guard crosses zero
    from positive to non-positive.  delta bounds the bracketing width."""

    guards: tuple = ()
    names: tuple = ()
    delta: float = 1e-6


@dataclass
class Trajectory:
    ts: list
    states: list
    termination: str  # 'reached-end' | 'event' | 'step-failure'
    event_name: str | None = None
    event_value: float | None = None
    n_steps: int = 0
    n_rejected: int = 0

    def final(self):
        return self.ts[-1], self.states[-1]


# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
       187 / 2100, 1 / 40)


def _rk_step(f, t, u, h, k1):
    ks = [k1]
    n = len(u)
    for i in range(1, 7):
        acc = list(u)
        row = _A[i]
        for j, a in enumerate(row):
            if a:
                kj = ks[j]
                for m in range(n):
                    acc[m] += h * a * kj[m]
        ks.append(f(t + _C[i] * h, acc))
    u5 = list(u)
    err = [0.0] * n
    for j in range(7):
        b5 = _B5[j]
        diff = _B5[j] - _B4[j]
        kj = ks[j]
        for m in range(n):
            if b5:
                u5[m] += h * b5 * kj[m]
            if diff:
                err[m] += h * diff * kj[m]
    return u5, err, ks


def _dense(u, u5, ks, h, theta):
    """Cubic Hermite interpolant over one step.

    Uses the derivative at both step ends (the pair is FSAL: stage 7 is the
    right-end derivative), giving O(h^4) dense output, below the step error
    at practical tolerances.
    """
    k1, k7 = ks[0], ks[6]
    t2 = theta * theta
    t3 = t2 * theta
    out = []
    for m in range(len(u)):
        d = u5[m] - u[m]
        out.append(u[m] + h * theta * k1[m]
                   + t2 * (3.0 * d - h * (2.0 * k1[m] + k7[m]))
                   + t3 * (-2.0 * d + h * (k1[m] + k7[m])))
    return out


def integrate(rhs: Callable, u0: Sequence[float], cfg: SolverConfig,
              ev: EventSpec = EventSpec(), t0: float = 0.0) -> Trajectory:
    """Adaptive integration with dense output and event localisation.

    rhs(t, u) -> sequence of derivatives.  Step failures (error control
    underflow or non-finite right-hand sides) terminate the trajectory with
    reason 'step-failure' instead of raising.
    """
    sgn = 1.0 if cfg.direction >= 0 else -1.0
    t_end = t0 + sgn * cfg.span
    u = [float(v) for v in u0]
    t = t0
    ts = [t]
    states = [list(u)]
    sample_dt = (t_end - t0) / max(cfg.dense_points, 1)
    next_sample = t0 + sample_dt
    h = sgn * min(abs(cfg.initial_step), abs(cfg.max_step))
    hmin = 1e-14 * max(1.0, abs(t_end - t0))
    traj = Trajectory(ts=ts, states=states, termination="reached-end")

    def guards_at(tt, uu):
        return [g(tt, uu) for g in ev.guards]

    try:
        k1 = list(rhs(t, u))
    except (ZeroDivisionError, OverflowError, ValueError):
        traj.termination = "step-failure"
        return traj
    g_prev = guards_at(t, u)
    nsteps = 0
    nrej = 0
    while (t_end - t) * sgn > 1e-14 * max(1.0, abs(t_end)):
        if nsteps >= cfg.max_steps:
            traj.termination = "step-failure"
            break
        if abs(h) > abs(cfg.max_step):
            h = sgn * abs(cfg.max_step)
        if (t + h - t_end) * sgn > 0:
            h = t_end - t
        try:
            u5, errv, ks = _rk_step(rhs, t, u, h, k1)
            bad = any(math.isnan(v) or math.isinf(v) for v in u5)
        except (ZeroDivisionError, OverflowError, ValueError):
            bad = True
            u5, errv, ks = None, None, None
        if bad:
            h *= 0.25
            nrej += 1
            if abs(h) < hmin:
                traj.termination = "step-failure"
                break
            continue
        # scaled error norm
        norm = 0.0
        for m in range(len(u)):
            sc = cfg.atol + cfg.rtol * max(abs(u[m]), abs(u5[m]))
            norm = max(norm, abs(errv[m]) / sc)
        if norm > 1.0:
            h *= max(0.2, 0.9 * norm ** -0.2)
            nrej += 1
            if abs(h) < hmin:
                traj.termination = "step-failure"
                break
            continue
        nsteps += 1
        t_new = t + h
        # event check at the step end, refined on the dense output
        event_hit = None
        try:
            g_new = guards_at(t_new, u5)
        except (ZeroDivisionError, OverflowError, ValueError):
            g_new = [float("nan")] * len(g_prev)
        for gi in range(len(g_prev)):
            gp, gn = g_prev[gi], g_new[gi]
            if not (math.isnan(gn) or math.isnan(gp)) and gp > 0.0 >= gn:
                lo_th, hi_th = 0.0, 1.0
                while (hi_th - lo_th) * abs(h) > ev.delta:
                    mid = 0.5 * (lo_th + hi_th)
                    um = _dense(u, u5, ks, h, mid)
                    try:
                        gm = ev.guards[gi](t + mid * h, um)
                    except (ZeroDivisionError, OverflowError, ValueError):
                        gm = float("nan")
                    if math.isnan(gm) or gm <= 0.0:
                        hi_th = mid
                    else:
                        lo_th = mid
                te = t + hi_th * h
                ue = _dense(u, u5, ks, h, hi_th)
                event_hit = (gi, te, ue)
                break
        if event_hit is not None:
            gi, te, ue = event_hit
            # dense samples up to the event
            while (te - next_sample) * sgn > 0:
                theta = (next_sample - t) / h
                ts.append(next_sample)
                states.append(_dense(u, u5, ks, h, theta))
                next_sample += sample_dt
            ts.append(te)
            states.append(ue)
            traj.termination = "event"
            traj.event_name = ev.names[gi] if gi < len(ev.names) else f"guard{gi}"
            traj.event_value = ev.guards[gi](te, ue)
            break
        # dense output samples inside the accepted step
        while (t_new - next_sample) * sgn >= 0 and abs(h) > 0:
            theta = (next_sample - t) / h
            if 0.0 <= theta <= 1.0:
                ts.append(next_sample)
                states.append(_dense(u, u5, ks, h, theta))
            next_sample += sample_dt
        t = t_new
        u = u5
        g_prev = g_new
        try:
            k1 = list(rhs(t, u))
        except (ZeroDivisionError, OverflowError, ValueError):
            traj.termination = "step-failure"
            break
        h = h * min(5.0, max(0.2, 0.9 * (norm + 1e-16) ** -0.2))
    if traj.termination == "reached-end":
        if abs(ts[-1] - t_end) > 1e-12 * max(1.0, abs(t_end)):
            ts.append(t_end)
            states.append(list(u))
    traj.n_steps = nsteps
    traj.n_rejected = nrej
    return traj


def fixed_step_integrate(rhs: Callable, u0: Sequence[float], t0: float,
                         t_end: float, nsteps: int) -> list:
    """Classic-order reference integration with the 5th-order propagator and
    constant steps; used for the observed-order study."""
    h = (t_end - t0) / nsteps
    u = [float(v) for v in u0]
    t = t0
    for _ in range(nsteps):
        k1 = list(rhs(t, u))
        u, _, _ = _rk_step(rhs, t, u, h, k1)
        t += h
    return u


def compile_rhs(rs: ReducedSystem, params: fluid.FluidParams):
    """Compile a reduced system's right-hand sides to a float function.

    Returns rhs(t, u) over the state vector in rs.states order.
    """
    bind = {}
    if params.k is not None:
        bind["k"] = ex.number(params.k)
    if params.kappa is not None:
        bind["kappa"] = ex.number(params.kappa)
    exprs = [ex.subs(rs.rhs[s], bind) if bind else rs.rhs[s] for s in rs.states]
    args = [rs.independent] + list(rs.states)
    fn = ex.compile_exprs(exprs, args)

    def rhs(t, u):
        return fn(t, *u)

    return rhs


def compile_guard_exprs(rs: ReducedSystem, params: fluid.FluidParams):
    """Singular-locus guards |denominator| - tiny, for event monitoring."""
    bind = {}
    if params.k is not None:
        bind["k"] = ex.number(params.k)
    if params.kappa is not None:
        bind["kappa"] = ex.number(params.kappa)
    guards = []
    names = []
    args = [rs.independent] + list(rs.states)
    for i, den in enumerate(rs.singular):
        e = ex.subs(den, bind) if bind else den
        fn = ex.compile_exprs([e], args)

        def g(t, u, fn=fn):
            try:
                return abs(fn(t, *u)[0]) - 1e-10
            except (ZeroDivisionError, OverflowError, ValueError):
                return float("nan")

        guards.append(g)
        names.append(f"singular-locus-{i}")
    return guards, names


def scaled_time_factor(params: fluid.FluidParams, n0: float, psi0: float) -> float:
    """Conversion factor from physical to scaled time, 4*k*N0/kappa, with
    N0 the conserved n*cosh(psi) of the homogeneous case."""
    k = float(params.k if params.k is not None else 1)
    kappa = float(params.kappa if params.kappa is not None else 1)
    N0 = n0 * math.cosh(psi0)
    return 4.0 * k * N0 / kappa


_PSI_INDEX = 0  # psi is the first state in every catalog entry


def velocity_blowup_guard(delta: float):
    def g(t, u):
        v = math.tanh(u[_PSI_INDEX])
        return (1.0 - v * v) - delta

    return g


def positivity_guards(rs: ReducedSystem):
    """Density-like states must stay positive."""
    guards = []
    names = []
    positive = {"n", "rho", "alpha", "beta", "w", "sigma"}
    for i, s in enumerate(rs.states):
        if s in positive:
            def g(t, u, i=i):
                return u[i] - 1e-12

            guards.append(g)
            names.append(f"{s}-collapse")
    return guards, names


def default_events(rs: ReducedSystem, params: fluid.FluidParams,
                   blowup_delta: float = 1e-6) -> EventSpec:
    guards = [velocity_blowup_guard(blowup_delta)]
    names = ["v-blowup"]
    pg, pn = positivity_guards(rs)
    guards += pg
    names += pn
    sg, sn = compile_guard_exprs(rs, params)
    guards += sg
    names += sn
    return EventSpec(guards=tuple(guards), names=tuple(names), delta=1e-6)


def classify_trajectory(tr: Trajectory) -> str:
    """'decaying' | 'blowing-up' | 'inconclusive'.

    Blowing-up: the blow-up guard fired with v approaching +1 (the guard
    itself is two-sided in 1 - v^2; the mirror branch v -> -1 terminates the
    trajectory but is not the blow-up this classification names).
    Decaying: |v| non-increasing over the final third of samples and no
    event fired.
    """
    if tr.termination == "event" and tr.event_name == "v-blowup":
        if math.tanh(tr.states[-1][_PSI_INDEX]) > 0:
            return "blowing-up"
        return "inconclusive"
    if not tr.states or len(tr.states) < 6:
        return "inconclusive"
    if tr.termination != "reached-end":
        return "inconclusive"
    vs = [abs(math.tanh(s[_PSI_INDEX])) for s in tr.states]
    tail = vs[len(vs) * 2 // 3:]
    tol = 1e-10 + 1e-6 * max(tail)
    if all(b <= a + tol for a, b in zip(tail, tail[1:])):
        return "decaying"
    return "inconclusive"


@dataclass(frozen=True)
class CriticalResult:
    v_critical: float
    lo: float
    hi: float
    lo_class: str
    hi_class: str
    iterations: int
    trajectories: tuple  # (lo trajectory, hi trajectory)


class NoBracketError(RuntimeError):
    pass


def find_critical(run: Callable[[float], Trajectory], lo: float, hi: float,
                  tol: float = 1e-3) -> CriticalResult:
    """Bisect the initial velocity separating decaying from blowing-up runs.

    run(v0) integrates the family member; classification at the endpoints
    must differ (decaying at one end, blowing-up at the other).
    """
    tr_lo = run(lo)
    tr_hi = run(hi)
    c_lo = classify_trajectory(tr_lo)
    c_hi = classify_trajectory(tr_hi)
    if {c_lo, c_hi} != {"decaying", "blowing-up"}:
        raise NoBracketError(
            f"endpoints do not bracket a critical velocity: "
            f"v0={lo} -> {c_lo}, v0={hi} -> {c_hi}")
    flip = c_lo == "blowing-up"
    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        c_mid = classify_trajectory(run(mid))
        iterations += 1
        blow = (c_mid == "blowing-up")
        if c_mid == "inconclusive":
            # resolve toward the blowing side: an undecided run is treated
            # as not-decaying so the bracket keeps a decaying endpoint
            blow = True
        if blow != flip:
            hi = mid
        else:
            lo = mid
        if iterations > 200:
            break
    return CriticalResult(v_critical=0.5 * (lo + hi), lo=lo, hi=hi,
                          lo_class=c_lo, hi_class=c_hi,
                          iterations=iterations,
                          trajectories=(tr_lo, tr_hi))


def convergence_order(rhs: Callable, u0: Sequence[float], t_end: float,
                      exact: Sequence[float], steps: Sequence[int] = (8, 16, 32, 64)) -> float:
    """Observed order from fixed-step error ratios under step halving.

    Step counts stay coarse so the error ratios are measured above the
    roundoff floor."""
    errs = []
    for ns in steps:
        u = fixed_step_integrate(rhs, u0, 0.0, t_end, ns)
        errs.append(max(abs(a - b) for a, b in zip(u, exact)))
    orders = []
    for a, b in zip(errs, errs[1:]):
        if b == 0:
            continue
        orders.append(math.log2(a / b))
    return min(orders) if orders else float("inf")
