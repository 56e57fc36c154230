"""Semi-discrete system assembly: regularized density transport on the grid
and coefficient ODEs for velocity, temperature, and magnetic field.

Conventions fixed here and relied on by the integrator and diagnostics:

* momentum, tested against the divergence-free modes ``psi_j``::

      M(rho) da/dt = -(rho (u.grad)u, psi_j) - (S, D(psi_j))
                     + eps (grad rho . grad u, psi_j) + ((curl H) x H, psi_j)

  with ``D`` the unscaled symmetrization and ``(grad rho . grad u)_i =
  d_m rho d_m u_i``, the contraction that exactly offsets the kinetic-energy
  contribution of the density diffusion term;

* temperature, tested against the scalar modes ``omega_j`` (conservative,
  integrated-by-parts transport and flux)::

      N(rho, theta) db/dt = (rho Q(theta) u, grad omega_j) - (q, grad omega_j)
                            + (nu |curl H|^2 + S:D(u) - rho_t Q(theta), omega_j)

  where the ``rho_t Q`` coupling uses the same density rate that advances
  ``rho``; with the constant scalar mode present this yields an exact
  discrete heat balance: d/dt (rho Q, 1) = (S:D(u) + nu |curl H|^2, 1);

* induction, tested against curls of the modes::

      dc_j/dt = -nu |k_j|^2 c_j + (u x H, curl pi_j)

Quadratic and cubic products of basis-band fields are integrated exactly on
the base grid (the mode cutoff sits strictly inside the two-thirds rule);
non-polynomial factors (power-law stress, temperature powers, specific heat)
are evaluated on a 3/2-oversampled grid, leaving a controlled quadrature
error there and nowhere else.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from specmhd import constitutive as cst
from specmhd.errors import MassSolveError
from specmhd.spectral import DivFreeSpectralBasis, Field

# Flipped only by the verification suite to prove the energy-identity check
# actually detects a miswired Lorentz force.
_LORENTZ_SIGN = 1.0


@dataclass
class SimState:
    """Density field plus coefficient vectors at one instant.

    ``rho`` is a scalar Field in spectral representation on the base grid,
    band-limited to the basis cutoff.  Lengths of ``a``, ``b``, ``c`` are the
    velocity, temperature, and magnetic truncation levels.
    """

    t: float
    rho: Field
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    basis: DivFreeSpectralBasis

    def copy(self) -> "SimState":
        return SimState(self.t, self.rho.copy(), self.a.copy(), self.b.copy(), self.c.copy(), self.basis)

    def is_finite(self) -> bool:
        return bool(
            np.all(np.isfinite(self.a))
            and np.all(np.isfinite(self.b))
            and np.all(np.isfinite(self.c))
            and np.all(np.isfinite(self.rho.data))
        )

    def validate(self, params: cst.ConstitutiveParams, tol: float = 1e-10) -> list[str]:
        """Return a list of violated state invariants (empty when valid)."""
        problems = []
        if not self.is_finite():
            problems.append("non-finite state entries")
            return problems
        rho_grid = self.rho.to_grid().data
        if rho_grid.min() < params.density_min - tol or rho_grid.max() > params.density_max + tol:
            problems.append(
                f"density outside [{params.density_min}, {params.density_max}] "
                f"(range [{rho_grid.min():.3e}, {rho_grid.max():.3e}])"
            )
        for name, vec, avail in (
            ("velocity", self.a, self.basis.n_vector_modes),
            ("temperature", self.b, self.basis.n_scalar_modes),
            ("magnetic", self.c, self.basis.n_vector_modes),
        ):
            if len(vec) > avail:
                problems.append(f"{name} truncation {len(vec)} exceeds available modes {avail}")
        return problems


@dataclass
class Rates:
    """One right-hand-side evaluation of the coupled system."""

    drho: np.ndarray  # spectral density rate, base grid
    da: np.ndarray
    db: np.ndarray
    dc: np.ndarray
    clamp_count: int


class _StateFields:
    """Lazy grid realizations shared by one right-hand-side evaluation."""

    def __init__(self, ops: "GalerkinOperators", state: SimState):
        self.ops = ops
        self.st = state
        self.basis = ops.basis
        self.n = ops.basis.grid_points
        self.m = ops.basis.oversample_grid()

    # ---- base grid (exact for polynomial nonlinearities)

    @cached_property
    def c_u(self):
        return self.basis.synth_vector(self.st.a, self.n)

    @cached_property
    def c_H(self):
        return self.basis.synth_vector(self.st.c, self.n)

    @cached_property
    def u(self):
        return self.basis.spectral_to_grid(self.c_u)

    @cached_property
    def H(self):
        return self.basis.spectral_to_grid(self.c_H)

    @cached_property
    def grad_u(self):
        """Jacobian grid array with grad_u[i, m] = d_m u_i."""
        kx, ky, kz = self.basis.wavenumbers(self.n)
        out = np.empty((3, 3) + self.c_u.shape[1:], dtype=float)
        for m, k in enumerate((kx, ky, kz)):
            out[:, m] = self.basis.spectral_to_grid(1j * k * self.c_u)
        return out

    @cached_property
    def curl_H(self):
        kx, ky, kz = self.basis.wavenumbers(self.n)
        c = self.c_H
        spec = np.stack(
            [
                1j * (ky * c[2] - kz * c[1]),
                1j * (kz * c[0] - kx * c[2]),
                1j * (kx * c[1] - ky * c[0]),
            ]
        )
        return self.basis.spectral_to_grid(spec)

    @cached_property
    def rho(self):
        return self.basis.spectral_to_grid(self.st.rho.data)

    @cached_property
    def grad_rho(self):
        kx, ky, kz = self.basis.wavenumbers(self.n)
        c = self.st.rho.data
        return np.stack(
            [
                self.basis.spectral_to_grid(1j * kx * c),
                self.basis.spectral_to_grid(1j * ky * c),
                self.basis.spectral_to_grid(1j * kz * c),
            ]
        )

    @cached_property
    def theta(self):
        return self.basis.scalar_grid(self.st.b, self.n)

    @cached_property
    def density_rate(self):
        """Spectral rate -div(rho u) + eps lap(rho), dealiased, mean zero."""
        flux = self.rho[None] * self.u
        c_flux = self.basis.grid_to_spectral(flux)
        kx, ky, kz = self.basis.wavenumbers(self.n)
        div = 1j * (kx * c_flux[0] + ky * c_flux[1] + kz * c_flux[2])
        rate = -div * self.ops._mask_n
        if self.ops.eps_density:
            rate = rate - self.ops.eps_density * self.ops._k2_n * self.st.rho.data
        return rate

    # ---- oversampled grid (non-polynomial factors)

    @cached_property
    def u_m(self):
        return self.basis.spectral_to_grid(self.basis.synth_vector(self.st.a, self.m))

    @cached_property
    def strain_m(self):
        """Rate of strain grad u + (grad u)^T on the oversampled grid."""
        c = self.basis.synth_vector(self.st.a, self.m)
        kx, ky, kz = self.basis.wavenumbers(self.m)
        ks = (kx, ky, kz)
        out = np.empty((3, 3) + c.shape[1:], dtype=float)
        for i in range(3):
            for m_ in range(i, 3):
                val = self.basis.spectral_to_grid(1j * (ks[m_] * c[i] + ks[i] * c[m_]))
                out[i, m_] = val
                out[m_, i] = val
        return out

    @cached_property
    def rho_m(self):
        return self.basis.spectral_to_grid(self.basis.resample_spectrum(self.st.rho.data, self.m))

    @cached_property
    def theta_m(self):
        return self.basis.scalar_grid(self.st.b, self.m)

    @cached_property
    def grad_theta_m(self):
        c = self.basis.synth_scalar(self.st.b, self.m)
        kx, ky, kz = self.basis.wavenumbers(self.m)
        return np.stack(
            [
                self.basis.spectral_to_grid(1j * kx * c),
                self.basis.spectral_to_grid(1j * ky * c),
                self.basis.spectral_to_grid(1j * kz * c),
            ]
        )

    @cached_property
    def curl_H_m(self):
        c = self.basis.synth_vector(self.st.c, self.m)
        kx, ky, kz = self.basis.wavenumbers(self.m)
        spec = np.stack(
            [
                1j * (ky * c[2] - kz * c[1]),
                1j * (kz * c[0] - kx * c[2]),
                1j * (kx * c[1] - ky * c[0]),
            ]
        )
        return self.basis.spectral_to_grid(spec)

    @cached_property
    def clamp_count(self) -> int:
        return int(np.count_nonzero(self.theta_m < self.ops.params.temperature_floor))

    @cached_property
    def theta_floor_m(self):
        return np.maximum(self.theta_m, self.ops.params.temperature_floor)

    @cached_property
    def stress_m(self):
        p = self.ops.params
        return cst.stress_tensor(
            p, self.rho_m, np.maximum(self.theta_m, 0.0), np.moveaxis(self.strain_m, (0, 1), (-2, -1))
        )

    @cached_property
    def stress_tensor_axes_first(self):
        return np.moveaxis(self.stress_m, (-2, -1), (0, 1))

    @cached_property
    def viscous_power_m(self):
        """Pointwise S : D on the oversampled grid."""
        return np.sum(self.stress_tensor_axes_first * self.strain_m, axis=(0, 1))


class GalerkinOperators:
    """Precomputed mode machinery plus right-hand-side and matrix assembly.

    Pure given (params, state): safe to share across threads for independent
    states.  The dense mass factorizations are rebuilt per call; at desk-scale
    truncations (tens of modes) a Cholesky solve is cheaper than any caching
    scheme, and an iterative solver only pays beyond thousands of modes.
    """

    def __init__(self, params: cst.ConstitutiveParams, basis: DivFreeSpectralBasis, eps_density: float = 0.0):
        self.params = params
        self.basis = basis
        self.eps_density = float(eps_density)
        kx, ky, kz = basis.wavenumbers(basis.grid_points)
        self._k2_n = kx * kx + ky * ky + kz * kz
        self._mask_n = basis.dealias_mask(basis.grid_points)
        self.magnetic_stiffness_diag = params.magnetic_diffusivity * basis.vec_k2

    # ------------------------------------------------------------ rhs pieces

    def fields(self, state: SimState) -> _StateFields:
        return _StateFields(self, state)

    def density_rhs(self, state: SimState, fields: _StateFields | None = None) -> np.ndarray:
        f = fields or self.fields(state)
        return f.density_rate

    def momentum_rhs(self, state: SimState, fields: _StateFields | None = None) -> np.ndarray:
        f = fields or self.fields(state)
        k_u = len(state.a)
        conv = np.einsum("mxyz,imxyz->ixyz", f.u, f.grad_u)
        integrand = -f.rho[None] * conv + _LORENTZ_SIGN * np.cross(
            f.curl_H, f.H, axisa=0, axisb=0, axisc=0
        )
        if self.eps_density:
            integrand = integrand + self.eps_density * np.einsum(
                "mxyz,imxyz->ixyz", f.grad_rho, f.grad_u
            )
        entries = self.basis.gather_vector(self.basis.grid_to_spectral(integrand), k_u)
        c_s = self.basis.grid_to_spectral(f.stress_tensor_axes_first)
        return entries - self.basis.gather_strain(c_s, k_u)

    def thermal_rhs(
        self,
        state: SimState,
        fields: _StateFields | None = None,
        density_coupling: bool = True,
    ) -> np.ndarray:
        f = fields or self.fields(state)
        p = self.params
        k_b = len(state.b)
        heat = cst.thermal_energy(p, np.maximum(f.theta_m, 0.0))
        flux = cst.heat_flux(p, f.rho_m, f.theta_floor_m, np.moveaxis(f.grad_theta_m, 0, -1))
        transport = f.rho_m[None] * heat[None] * f.u_m - np.moveaxis(flux, -1, 0)
        source = (
            p.magnetic_diffusivity * np.sum(f.curl_H_m**2, axis=0) + f.viscous_power_m
        )
        if density_coupling:
            rho_t_m = self.basis.spectral_to_grid(
                self.basis.resample_spectrum(f.density_rate, f.m)
            )
            source = source - rho_t_m * heat
        entries = self.basis.gather_scalar_grad(self.basis.grid_to_spectral(transport), k_b)
        return entries + self.basis.gather_scalar(self.basis.grid_to_spectral(source), k_b)

    def induction_rhs(self, state: SimState, fields: _StateFields | None = None) -> np.ndarray:
        f = fields or self.fields(state)
        k_c = len(state.c)
        entries = -self.magnetic_stiffness_diag[:k_c] * state.c
        w = np.cross(f.u, f.H, axisa=0, axisb=0, axisc=0)
        return entries + self.basis.gather_vector_curl(self.basis.grid_to_spectral(w), k_c)

    def rates(self, state: SimState) -> Rates:
        f = self.fields(state)
        drho = f.density_rate
        da = self.solve_mass(self.velocity_mass(state, f), self.momentum_rhs(state, f))
        db = self.solve_mass(self.thermal_mass(state, f), self.thermal_rhs(state, f))
        dc = self.induction_rhs(state, f)
        return Rates(drho, da, db, dc, f.clamp_count)

    def total_heat(self, fields: _StateFields) -> float:
        """Quadrature of rho Q(theta), consistent with the thermal assembly."""
        w_m = self.basis.volume / fields.m**3
        q = cst.thermal_energy(self.params, np.maximum(fields.theta_m, 0.0))
        return w_m * float(np.sum(fields.rho_m * q))

    def solenoidal_residual(self, fields: _StateFields) -> float:
        """Largest spectral divergence amplitude of velocity and magnetic field."""
        kx, ky, kz = self.basis.wavenumbers(self.basis.grid_points)
        worst = 0.0
        for c in (fields.c_u, fields.c_H):
            div = np.abs(kx * c[0] + ky * c[1] + kz * c[2])
            worst = max(worst, float(div.max()))
        return worst

    # -------------------------------------------------------- mass matrices

    def _trig_product_matrix(self, c_w, nvecs, phases, prefactor):
        """Matrix of (w mode_i, mode_j) from the weight spectrum c_w.

        Products of two real trig modes reduce to weight amplitudes at the
        difference and sum wavevectors, so each entry is a pair of lookups.
        """
        m = len(nvecs)
        diff = nvecs[:, None, :] - nvecs[None, :, :]
        summ = nvecs[:, None, :] + nvecs[None, :, :]
        cd = self.basis.gather_amplitudes(c_w, diff.reshape(-1, 3)).reshape(m, m)
        cs = self.basis.gather_amplitudes(c_w, summ.reshape(-1, 3)).reshape(m, m)
        pi = phases[:, None]
        pj = phases[None, :]
        out = np.select(
            [
                (pi == 0) & (pj == 0),
                (pi == 1) & (pj == 1),
                (pi == 1) & (pj == 0),
                (pi == 0) & (pj == 1),
            ],
            [
                cd.real + cs.real,
                cd.real - cs.real,
                -cd.imag - cs.imag,
                cd.imag - cs.imag,
            ],
        )
        return prefactor * out

    def velocity_mass(self, state: SimState, fields: _StateFields | None = None) -> np.ndarray:
        """Density-weighted Gram matrix (rho psi_i, psi_j); exact quadrature."""
        k_u = len(state.a)
        b = self.basis
        nvecs, phases = b.vec_n[:k_u], b.vec_phase[:k_u].astype(int)
        pref = b.vec_e[:k_u] @ b.vec_e[:k_u].T
        mat = self._trig_product_matrix(state.rho.data, nvecs, phases, pref)
        return 0.5 * (mat + mat.T)

    def thermal_mass(self, state: SimState, fields: _StateFields | None = None) -> np.ndarray:
        """(rho c(theta) omega_i, omega_j) with the constant mode included."""
        f = fields or self.fields(state)
        p = self.params
        k_b = len(state.b)
        b = self.basis
        if p.specific_heat_form == "constant":
            cbar = 0.5 * (p.specific_heat_min + p.specific_heat_max)
            c_w = cbar * b.resample_spectrum(state.rho.data, f.m)
        else:
            w = f.rho_m * cst.specific_heat(p, np.maximum(f.theta_m, 0.0))
            c_w = b.grid_to_spectral(w)
        nvecs, phases = b.scal_n[:k_b], b.scal_phase[:k_b].astype(int)
        mat = self._trig_product_matrix(c_w, nvecs, np.minimum(phases, 1), np.ones((k_b, k_b)))
        const = phases == 2
        if np.any(const):
            # constant-mode rows/cols: omega_0 = 1/sqrt(V)
            amps = b.gather_amplitudes(c_w, nvecs)
            row = np.where(
                phases == 0, np.sqrt(2.0) * amps.real, -np.sqrt(2.0) * amps.imag
            )
            row[const] = amps[const].real
            mat[const, :] = row
            mat[:, const] = row[:, None]
        return 0.5 * (mat + mat.T)

    @staticmethod
    def solve_mass(mat: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        try:
            lo = np.linalg.cholesky(mat)
        except np.linalg.LinAlgError as exc:
            raise MassSolveError("mass matrix not positive definite") from exc
        y = np.linalg.solve(lo, rhs)
        return np.linalg.solve(lo.T, y)

    # ---------------------------------------------------- induction matrix

    def induction_matrix(self, state: SimState, form: str = "weak") -> np.ndarray:
        """Matrix A with dc/dt + A c = 0 for the frozen velocity of ``state``.

        ``weak`` tests the transport against curls, matching the evolution
        actually used; ``advective`` assembles the pointwise-transport variant
        (including the formally-zero div(u) term) for cross-checking.  For
        divergence-free modes the two differ by the transpose of the advection
        block; both share the exact curl-curl diffusion diagonal.
        """
        if form not in ("weak", "advective"):
            raise ValueError(f"unknown induction matrix form {form!r}")
        f = self.fields(state)
        b = self.basis
        k_c = len(state.c)
        a_mat = np.diag(self.magnetic_stiffness_diag[:k_c])
        if form == "weak":
            for i in range(k_c):
                mode = b.vector_mode_grid(i, b.grid_points)
                w = np.cross(f.u, mode, axisa=0, axisb=0, axisc=0)
                a_mat[:, i] -= b.gather_vector_curl(b.grid_to_spectral(w), k_c)
            return a_mat
        kx, ky, kz = b.wavenumbers(b.grid_points)
        div_u = b.spectral_to_grid(1j * (kx * f.c_u[0] + ky * f.c_u[1] + kz * f.c_u[2]))
        for i in range(k_c):
            mode = b.vector_mode_grid(i, b.grid_points)
            u_dot_grad_mode = self._advect_mode(f, i)
            mode_dot_grad_u = np.einsum("mxyz,imxyz->ixyz", mode, f.grad_u)
            integrand = -u_dot_grad_mode - mode_dot_grad_u + div_u[None] * mode
            a_mat[:, i] += b.gather_vector(b.grid_to_spectral(integrand), k_c)
        return a_mat

    def _advect_mode(self, f: _StateFields, i: int) -> np.ndarray:
        """(u . grad) pi_i evaluated from the closed form of the mode."""
        b = self.basis
        x, y, z = b.mesh(b.grid_points)
        k = b.vec_k[i]
        ph = k[0] * x + k[1] * y + k[2] * z
        u_dot_k = f.u[0] * k[0] + f.u[1] * k[1] + f.u[2] * k[2]
        scale = np.sqrt(2.0 / b.volume)
        if b.vec_phase[i] == 0:
            deriv = -np.sin(ph) * u_dot_k
        else:
            deriv = np.cos(ph) * u_dot_k
        return scale * b.vec_e[i][:, None, None, None] * deriv


# ----------------------------------------------------------- module-level API


def density_rhs(state: SimState, eps_density: float = 0.0) -> Field:
    """Spectral rate of the regularized density transport equation."""
    ops = GalerkinOperators(cst.ConstitutiveParams(), state.basis, eps_density)
    return Field("scalar", "spectral", ops.density_rhs(state), state.basis.box_size)


def momentum_rhs(params: cst.ConstitutiveParams, state: SimState, eps_density: float = 0.0) -> np.ndarray:
    return GalerkinOperators(params, state.basis, eps_density).momentum_rhs(state)


def thermal_rhs(
    params: cst.ConstitutiveParams,
    state: SimState,
    eps_density: float = 0.0,
    density_coupling: bool = True,
) -> np.ndarray:
    ops = GalerkinOperators(params, state.basis, eps_density)
    return ops.thermal_rhs(state, density_coupling=density_coupling)


def induction_rhs(params: cst.ConstitutiveParams, state: SimState) -> np.ndarray:
    return GalerkinOperators(params, state.basis).induction_rhs(state)


def induction_matrix(params: cst.ConstitutiveParams, state: SimState, form: str = "weak") -> np.ndarray:
    return GalerkinOperators(params, state.basis).induction_matrix(state, form)


def assemble_mass(params: cst.ConstitutiveParams, state: SimState, which: str) -> np.ndarray:
    ops = GalerkinOperators(params, state.basis)
    if which == "velocity":
        mat = ops.velocity_mass(state)
    elif which == "thermal":
        mat = ops.thermal_mass(state)
    else:
        raise ValueError(f"unknown mass matrix selector {which!r}")
    try:
        np.linalg.cholesky(mat)
    except np.linalg.LinAlgError as exc:
        raise MassSolveError("mass matrix not positive definite") from exc
    return mat


def energy_report(
    params: cst.ConstitutiveParams,
    state: SimState,
    eps_density: float = 0.0,
    extras: bool = True,
    neg_power: float = 0.5,
) -> dict:
    """Instantaneous energies, dissipations, monitors, and identity terms.

    All quadratures here are consistent with the right-hand-side assembly, so
    the reported identity defect measures only rounding at a single state and
    only time discretization along a trajectory.
    """
    ops = GalerkinOperators(params, state.basis, eps_density)
    f = ops.fields(state)
    b = state.basis
    n3 = b.grid_points**3
    w_n = b.volume / n3
    w_m = b.volume / f.m**3

    u2 = np.sum(f.u**2, axis=0)
    e_kin = 0.5 * w_n * float(np.sum(f.rho * u2))
    e_mag = 0.5 * float(np.sum(state.c**2))
    d_visc = w_m * float(np.sum(f.viscous_power_m))
    k2_c = b.vec_k2[: len(state.c)]
    d_mag = params.magnetic_diffusivity * float(np.sum(state.c**2 * k2_c))
    heat = cst.thermal_energy(params, np.maximum(f.theta_m, 0.0))
    heat_total = w_m * float(np.sum(f.rho_m * heat))

    mom = ops.momentum_rhs(state, f)
    ind = ops.induction_rhs(state, f)
    rho_t = b.spectral_to_grid(f.density_rate)
    ddt_rho_kin = w_n * float(np.sum(rho_t * u2))
    adot_term = float(state.a @ mom)
    cdot_term = float(state.c @ ind)
    identity_lhs = 0.5 * ddt_rho_kin + adot_term + cdot_term
    identity_rhs = -d_visc - d_mag
    identity_scale = abs(e_kin) + abs(e_mag) + abs(d_visc) + abs(d_mag) + 1e-30

    k2_a = b.vec_k2[: len(state.a)]
    grad_u_norm = float(np.sqrt(np.sum(state.a**2 * k2_a)))
    strain_norm = float(np.sqrt(w_m * np.sum(f.strain_m**2)))
    h_norm = float(np.sqrt(np.sum(state.c**2)))
    grad_h_norm = float(np.sqrt(np.sum(state.c**2 * k2_c)))

    kx, ky, kz = b.wavenumbers(b.grid_points)
    div_u = np.abs(1j * (kx * f.c_u[0] + ky * f.c_u[1] + kz * f.c_u[2]))
    div_h = np.abs(1j * (kx * f.c_H[0] + ky * f.c_H[1] + kz * f.c_H[2]))

    frob2_m = np.sum(f.strain_m**2, axis=(0, 1))
    power = 0.5 * (params.power_law_exponent - 2.0)
    d_visc_floor = params.viscosity_min * w_m * float(
        np.sum((params.stress_smoothing + frob2_m) ** power * frob2_m)
    )

    report = {
        "t": state.t,
        "E_kin": e_kin,
        "E_mag": e_mag,
        "D_visc": d_visc,
        "D_visc_floor": d_visc_floor,
        "D_mag": d_mag,
        "heat_total": heat_total,
        "rho_min": float(f.rho.min()),
        "rho_max": float(f.rho.max()),
        "theta_min": float(f.theta.min()),
        "clamp_count": f.clamp_count,
        "div_u_max": float(div_u.max()),
        "div_H_max": float(div_h.max()),
        "korn_ratio": grad_u_norm / strain_norm if strain_norm > 0 else 0.0,
        "poincare_ratio": h_norm / grad_h_norm if grad_h_norm > 0 else 0.0,
        "grad_u_norm": grad_u_norm,
        "identity_lhs": identity_lhs,
        "identity_rhs": identity_rhs,
        "identity_defect": abs(identity_lhs - identity_rhs),
        "identity_scale": identity_scale,
        "ddt_rho_kin": ddt_rho_kin,
        "adot_term": adot_term,
        "conv_term": w_n
        * float(np.sum(f.rho * np.einsum("ixyz,ixyz->xyz", np.einsum("mxyz,imxyz->ixyz", f.u, f.grad_u), f.u))),
        "eps_lap_term": (
            -eps_density * w_n * float(np.sum(b.spectral_to_grid(ops._k2_n * state.rho.data) * u2))
            if eps_density
            else 0.0
        ),
    }
    if extras:
        p = params
        lam = neg_power
        r = p.power_law_exponent
        report["strain_lr_r"] = w_m * float(np.sum(frob2_m ** (r / 2.0)))
        theta_min = report["theta_min"]
        report["sup_theta_negpow"] = float(theta_min ** (-lam)) if theta_min > 0 else np.inf
        report["rho_theta_l1"] = w_n * float(np.sum(np.abs(f.rho * f.theta)))
        expo = 0.5 * (p.conductivity_exponent - lam + 1.0)
        g = f.theta_floor_m**expo
        c_g = b.grid_to_spectral(g)
        kxm, kym, kzm = b.wavenumbers(f.m)
        grad_g2 = (
            np.abs(kxm * c_g) ** 2 + np.abs(kym * c_g) ** 2 + np.abs(kzm * c_g) ** 2
        )
        report["theta_sobolev_sq"] = w_m * float(np.sum(g * g)) + b.volume * float(
            np.sum(grad_g2)
        )
    return report


def energy_identity_defect(
    params: cst.ConstitutiveParams, state: SimState, eps_density: float = 0.0
) -> tuple[float, float]:
    """Defect and scale of the instantaneous kinetic-magnetic energy identity."""
    rep = energy_report(params, state, eps_density, extras=False)
    return rep["identity_defect"], rep["identity_scale"]
