"""1+1D demonstration of the density-dependent time factor.

Only the (0, 3) directions are kept: the normalized field xi obeys

    i R d_t xi = (-i alpha^3 d_x + m rho1) xi,     psi = sqrt(R) xi,

on a periodic grid. R is closed by R = R_b(x) + a j0[psi]: a prescribed background
(R_b = R0 plus an optional Gaussian bump marking a high-R region) and a self-coupling
of strength a to the density j0 = psi^dag psi = R |xi|^2. For a = 0 and R_b = 1 the
equation is the free Dirac equation (vacuum).

Time stepping: with R frozen over a step (lagged from the current xi) the update is
xi -> R^-1/2 exp(-i dt K) R^1/2 xi with K = R^-1/2 H R^-1/2 Hermitian. The exponential
is applied with scipy's expm_multiply and H spectrally, so int j0 dx is conserved to
rounding when R is fixed. The lag makes the nonlinear coupling first order in dt.
"""
import csv
import io
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.sparse.linalg import LinearOperator, expm_multiply

from .algebra import MATS
from .errors import BlowUp, FixedPointDivergence

_A3 = MATS.alpha[3]
_R1 = MATS.rho[0]


@dataclass
class Packet:
    center: float = 0.0
    width: float = 4.0
    momentum: float = 0.0
    amplitude: float = 1.0
    spinor: tuple = None        # 4 complex entries; default: positive-energy state at `momentum`


@dataclass
class Evolution1p1Config:
    L: float = 80.0
    N: int = 256
    dt: float = None            # defaults to 0.5 dx
    m: float = 1.0
    nonlinear: bool = True
    steps: int = 1000
    initial: Packet = field(default_factory=Packet)
    R0: float = 1.0             # background level
    bump_height: float = 0.0    # Gaussian bump of the background
    bump_center: float = 0.0
    bump_width: float = 5.0
    self_coupling: float = 0.0  # a in R = R_b + a j0[psi]
    fp_tol: float = 1e-10
    fp_maxiter: int = 200
    blowup_factor: float = 1e6
    sample_every: int = 10

    def __post_init__(self):
        if isinstance(self.initial, dict):
            self.initial = Packet(**self.initial)
        if self.N < 64:
            raise ValueError("need N >= 64")
        if self.dt is None:
            self.dt = 0.5 * self.dx
        if self.dt > self.dx * (1 + 1e-12):
            raise ValueError(f"CFL violated: dt = {self.dt} > dx = {self.dx}")
        if self.R0 <= 0 or self.R0 + min(self.bump_height, 0) <= 0:
            raise ValueError("background R must stay positive")

    @property
    def dx(self):
        return self.L / self.N

    def grid(self):
        return -0.5 * self.L + self.dx * np.arange(self.N)


@dataclass
class EvolutionState:
    xi: np.ndarray             # (N, 4)
    R: np.ndarray              # (N,)
    t: float = 0.0
    step: int = 0
    diagnostics: dict = field(default_factory=dict)

    @property
    def psi(self):
        return np.sqrt(self.R)[:, None] * self.xi


def reduce_1p1(config: Evolution1p1Config):
    """Operator description: wavenumbers, the Hermitian symbol alpha^3 p + m rho1 and the closure."""
    k = 2 * np.pi * np.fft.fftfreq(config.N, d=config.dx)
    if config.N % 2 == 0:
        k[config.N // 2] = 0.0      # unpaired Nyquist mode would break x -> -x symmetry
    symbol = k[:, None, None] * _A3 + config.m * _R1
    return {
        "equation": "i R d_t xi = (-i alpha^3 d_x + m rho1) xi",
        "k": k,
        "symbol": symbol,
        "closure": "R = R_b + a |sqrt(R) xi|^2" if config.nonlinear else "R = 1",
        "dx": config.dx, "dt": config.dt,
    }


def apply_H(xi, k, m):
    """(-i alpha^3 d_x + m rho1) xi, the derivative taken spectrally."""
    dxi = np.fft.ifft(1j * k[:, None] * np.fft.fft(xi, axis=0), axis=0)
    return -1j * (dxi @ _A3.T) + m * (xi @ _R1.T)


def background(config, x=None):
    x = config.grid() if x is None else x
    if not config.nonlinear:
        return np.ones_like(x)
    return config.R0 + config.bump_height * np.exp(-0.5 * ((x - config.bump_center) / config.bump_width) ** 2)


def closure_R(xi, Rb, a, R_start=None, tol=1e-10, maxiter=200):
    """Fixed point of R = R_b + a R |xi|^2. Diverges where a |xi|^2 >= 1."""
    rho = np.sum(np.abs(xi) ** 2, axis=-1)
    R = Rb.copy() if R_start is None else R_start.copy()
    if a == 0:
        return Rb.copy(), 0
    for it in range(1, maxiter + 1):
        Rn = Rb + a * R * rho
        err = np.max(np.abs(Rn - R) / np.maximum(np.abs(Rn), 1e-300))
        R = Rn
        if not np.all(np.isfinite(R)):
            break
        if err < tol:
            return R, it
    raise FixedPointDivergence(f"R self-consistency failed (max a|xi|^2 = {a * rho.max():.3g})")


def initial_state(config: Evolution1p1Config):
    x = config.grid()
    pk = config.initial
    env = pk.amplitude * np.exp(-0.5 * ((x - pk.center) / pk.width) ** 2) * np.exp(1j * pk.momentum * x)
    if pk.spinor is None:
        H = pk.momentum * _A3 + config.m * _R1
        w, v = np.linalg.eigh(H)
        spin = v[:, np.argmax(w)]
    else:
        spin = np.asarray(pk.spinor, dtype=complex)
        spin = spin / np.linalg.norm(spin)
    psi_target = env[:, None] * spin[None, :]
    if pk.spinor is None and pk.amplitude != 0:
        # keep only the positive-energy part of every Fourier mode
        kk = 2 * np.pi * np.fft.fftfreq(config.N, d=config.dx)
        w, v = np.linalg.eigh(kk[:, None, None] * _A3 + config.m * _R1)
        Pp = np.einsum("nia,nja->nij", v[:, :, 2:], np.conj(v[:, :, 2:]))
        ft = np.einsum("nij,nj->ni", Pp, np.fft.fft(psi_target, axis=0))
        psi_target = np.fft.ifft(ft, axis=0)
    # the packet is the normalized field xi; R then solves R = R_b + a R |xi|^2
    xi = psi_target
    Rb = background(config, x)
    a = config.self_coupling if config.nonlinear else 0.0
    R, it = closure_R(xi, Rb, a, tol=config.fp_tol, maxiter=config.fp_maxiter)
    psi = np.sqrt(R)[:, None] * xi
    consistency = float(np.max(np.abs(R - (Rb + a * np.sum(np.abs(psi) ** 2, axis=-1))) / R))
    st = EvolutionState(xi=xi, R=R, t=0.0, step=0)
    st.diagnostics = diagnostics(st, config)
    st.diagnostics["init_consistency"] = consistency
    st.diagnostics["init_iterations"] = it
    st.diagnostics["max_psi0"] = float(np.max(np.abs(st.psi)))
    return st


def diagnostics(state, config):
    x = config.grid()
    j0 = np.sum(np.abs(state.psi) ** 2, axis=-1)
    tot = float(np.sum(j0) * config.dx)
    c = float(np.sum(x * j0) * config.dx / tot) if tot > 0 else 0.0
    w = float(np.sqrt(max(np.sum((x - c) ** 2 * j0) * config.dx / tot, 0.0))) if tot > 0 else 0.0
    return {"t": state.t, "total_j0": tot, "centroid": c, "width": w, "max_R": float(state.R.max()),
            "max_psi": float(np.max(np.abs(state.psi))) if tot > 0 else 0.0}


def _propagate(xi, R, dt, k, m):
    s = np.sqrt(R)
    n = xi.size

    def K(v):
        v = v.reshape(xi.shape)
        return (apply_H(v / s[:, None], k, m) / s[:, None]).ravel()
    op = LinearOperator((n, n), matvec=lambda v: -1j * dt * K(v), rmatvec=lambda v: 1j * dt * K(v), dtype=complex)
    w = expm_multiply(op, (s[:, None] * xi).ravel(), traceA=0.0)
    return w.reshape(xi.shape) / s[:, None]


def step(state: EvolutionState, config: Evolution1p1Config, ops=None):
    """Advance one step with R lagged from the incoming xi."""
    if ops is None:
        ops = reduce_1p1(config)
    if not np.any(state.xi):
        out = EvolutionState(xi=state.xi.copy(), R=state.R.copy(), t=state.t + config.dt, step=state.step + 1)
        out.diagnostics = diagnostics(out, config)
        return out
    xi = _propagate(state.xi, state.R, config.dt, ops["k"], config.m)
    t = state.t + config.dt
    if config.nonlinear and config.self_coupling:
        try:
            R, _ = closure_R(xi, background(config), config.self_coupling, R_start=state.R,
                             tol=config.fp_tol, maxiter=config.fp_maxiter)
        except FixedPointDivergence as ex:
            raise BlowUp(f"R closure diverged at t = {t:.6g}: {ex}", t=t, step=state.step + 1) from ex
    else:
        R = state.R
    out = EvolutionState(xi=xi, R=R, t=t, step=state.step + 1)
    out.diagnostics = diagnostics(out, config)
    if not np.all(np.isfinite(xi)):
        raise BlowUp(f"non-finite field at t = {t:.6g}", t=t, step=out.step)
    ref = state.diagnostics.get("max_psi0", None)
    out.diagnostics["max_psi0"] = ref
    if ref and out.diagnostics["max_psi"] > config.blowup_factor * ref:
        raise BlowUp(f"amplitude exceeded {config.blowup_factor:g} x initial at t = {t:.6g}", t=t, step=out.step)
    return out


@dataclass
class RunResult:
    rows: list
    status: str              # "ok" or "caustic"
    stop_time: float = None
    final: EvolutionState = None
    message: str = ""

    def column(self, name):
        return np.array([r[name] for r in self.rows])


COLUMNS = ("t", "centroid", "width", "max_R", "total_j0")


def run(config: Evolution1p1Config, state=None, snapshot_every=0, snapshots=None):
    """Time series of diagnostics; a BlowUp stops the run with status 'caustic'."""
    ops = reduce_1p1(config)
    st = initial_state(config) if state is None else state
    rows = [{c: st.diagnostics[c] for c in COLUMNS}]
    status, stop, msg = "ok", None, ""
    for n in range(config.steps):
        try:
            st = step(st, config, ops)
        except BlowUp as ex:
            status, stop, msg = "caustic", ex.t, str(ex)
            break
        if (n + 1) % config.sample_every == 0 or n + 1 == config.steps:
            rows.append({c: st.diagnostics[c] for c in COLUMNS})
        if snapshot_every and snapshots is not None and (n + 1) % snapshot_every == 0:
            snapshots.append((st.t, st.psi.copy()))
    return RunResult(rows=rows, status=status, stop_time=stop, final=st, message=msg)


def to_csv(rows, header_comment=None):
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([repr(float(r[c])) for c in COLUMNS])
    return buf.getvalue()


# ---------------------------------------------------------------- studies

def conservation_drift(config: Evolution1p1Config):
    """Relative change of int j0 dx over config.steps steps."""
    res = run(config)
    tot = res.column("total_j0")
    return float(abs(tot[-1] - tot[0]) / tot[0]), res


def group_velocity(config: Evolution1p1Config):
    """Fitted centroid velocity and the free value p/E for the packet momentum."""
    res = run(config)
    t, c = res.column("t"), res.column("centroid")
    v = np.polyfit(t, c, 1)[0]
    p = config.initial.momentum
    return float(v), float(p / np.hypot(p, config.m)), res


def refraction_drift(config: Evolution1p1Config):
    """Centroid displacement of the run minus that of the same packet without the bump,
    projected on the direction from the packet to the bump (positive = toward)."""
    base = Evolution1p1Config(**{**asdict(config), "bump_height": 0.0, "initial": config.initial})
    r1, r0 = run(config), run(base)
    d1 = r1.column("centroid")[-1] - r1.column("centroid")[0]
    d0 = r0.column("centroid")[-1] - r0.column("centroid")[0]
    direction = np.sign(config.bump_center - config.initial.center)
    return float((d1 - d0) * direction), r1, r0


def refraction_ensemble(seed=0, n_runs=10, **overrides):
    """Seeded runs with random packet/bump placement; returns the signed drifts."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_runs):
        side = rng.choice([-1.0, 1.0])
        sep = rng.uniform(8.0, 14.0)
        c0 = rng.uniform(-3.0, 3.0)
        cfg = Evolution1p1Config(
            initial=Packet(center=c0, width=rng.uniform(2.5, 4.0), momentum=0.0),
            bump_center=c0 + side * sep, bump_height=rng.uniform(0.5, 1.5),
            bump_width=rng.uniform(3.0, 5.0), **overrides)
        out.append(refraction_drift(cfg)[0])
    return np.array(out)


def localization_time(config: Evolution1p1Config, fraction=0.8):
    """First time the width drops below fraction x initial width (inf if never); a caustic
    counts as localization at its stop time."""
    res = run(config)
    t, w = res.column("t"), res.column("width")
    hit = np.nonzero(w < fraction * w[0])[0]
    if len(hit):
        return float(t[hit[0]]), res
    if res.status == "caustic":
        return float(res.stop_time), res
    return float("inf"), res
