"""Desk-scale synthetic vibration datasets for the two-domain pipeline.

Two generators are provided. The toy generator emits a noisy sinusoid per
domain, giving a translation task whose spectra are trivially inspectable.
The modal simulator builds a grounded spring-mass chain, introduces damage
as a stiffness reduction on one spring, and synthesizes the acceleration
response to white-noise forcing by superposing exactly discretized damped
single-mode oscillators. Both are deterministic given their seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.signal

from .errors import ConfigError, DataError
from .signal_data import (
    CANONICAL_SAMPLE_RATE_HZ,
    DomainLabel,
    Provenance,
    VibrationRecord,
)


@dataclass(frozen=True)
class ToyDomainSpec:
    """A noisy single-tone domain: amplitude * sin(2*pi*f*t) + N(0, noise_std)."""

    carrier_freq_hz: float
    amplitude: float = 1.0
    noise_std: float = 0.1
    sample_rate_hz: float = CANONICAL_SAMPLE_RATE_HZ
    seed: int = 0

    def __post_init__(self) -> None:
        if self.carrier_freq_hz <= 0 or self.amplitude <= 0:
            raise ConfigError("carrier_freq_hz and amplitude must be positive")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be nonnegative")
        if self.sample_rate_hz <= 0:
            raise ConfigError("sample_rate_hz must be positive")
        if self.carrier_freq_hz >= self.sample_rate_hz / 2:
            raise ConfigError(
                f"carrier_freq_hz {self.carrier_freq_hz} violates the Nyquist limit "
                f"for sample_rate_hz {self.sample_rate_hz}"
            )


def generate_toy_record(
    spec: ToyDomainSpec,
    duration_s: float,
    joint_id: int = 1,
    domain: DomainLabel = DomainLabel.UNDAMAGED,
) -> VibrationRecord:
    """Deterministically synthesize a toy-domain record of whole seconds."""
    n = duration_s * spec.sample_rate_hz
    if n <= 0 or abs(n - round(n)) > 1e-9:
        raise ConfigError(
            f"duration_s * sample_rate_hz must be a positive integer, got {n}"
        )
    n = int(round(n))
    t = np.arange(n, dtype=np.float64) / spec.sample_rate_hz
    rng = np.random.default_rng(spec.seed)
    samples = spec.amplitude * np.sin(2.0 * np.pi * spec.carrier_freq_hz * t)
    if spec.noise_std > 0:
        samples = samples + rng.normal(0.0, spec.noise_std, n)
    return VibrationRecord(joint_id, domain, Provenance.REAL, spec.sample_rate_hz, samples)


@dataclass(frozen=True)
class ModalModel:
    """A grounded spring-mass chain with optional single-spring damage.

    Spring ``i`` (1-based) connects mass ``i`` to mass ``i-1``; spring 1 is
    anchored to ground. ``damage_factor`` scales the stiffness of spring
    ``damage_dof`` before the eigenproblem is solved, so ``damage_factor=1``
    reproduces the undamaged chain exactly. ``natural_freqs_hz`` and the
    mass-normalized ``mode_shapes`` are derived at construction.
    """

    n_dof: int
    mass: tuple[float, ...]
    stiffness: tuple[float, ...]
    damping_ratio: float
    damage_dof: int | None = None
    damage_factor: float = 1.0
    natural_freqs_hz: np.ndarray = field(init=False, repr=False)
    mode_shapes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.n_dof < 1:
            raise ConfigError(f"n_dof must be positive, got {self.n_dof}")
        if len(self.mass) != self.n_dof or len(self.stiffness) != self.n_dof:
            raise ConfigError(
                f"chain with {self.n_dof} DOFs needs {self.n_dof} masses and springs"
            )
        if any(m <= 0 for m in self.mass) or any(k <= 0 for k in self.stiffness):
            raise ConfigError("all masses and stiffnesses must be positive")
        if not 0.0 < self.damping_ratio < 1.0:
            raise ConfigError(f"damping_ratio must be in (0, 1), got {self.damping_ratio}")
        if not 0.0 < self.damage_factor <= 1.0:
            raise ConfigError(f"damage_factor must be in (0, 1], got {self.damage_factor}")
        if self.damage_dof is not None and not 1 <= self.damage_dof <= self.n_dof:
            raise ConfigError(
                f"damage_dof {self.damage_dof} out of range 1..{self.n_dof}"
            )
        freqs, shapes = _solve_chain_modes(
            self.mass, self.effective_stiffness(), np.float64
        )
        freqs.setflags(write=False)
        shapes.setflags(write=False)
        object.__setattr__(self, "natural_freqs_hz", freqs)
        object.__setattr__(self, "mode_shapes", shapes)

    def effective_stiffness(self) -> tuple[float, ...]:
        """Spring stiffnesses with the damage factor applied."""
        ks = list(self.stiffness)
        if self.damage_dof is not None:
            ks[self.damage_dof - 1] = ks[self.damage_dof - 1] * self.damage_factor
        return tuple(ks)


def chain_matrices(
    mass: Sequence[float], stiffness: Sequence[float]
) -> tuple[np.ndarray, np.ndarray]:
    """Mass and stiffness matrices of a grounded chain."""
    n = len(mass)
    m_mat = np.diag(np.asarray(mass, dtype=np.float64))
    k_mat = np.zeros((n, n), dtype=np.float64)
    k_mat[0, 0] += stiffness[0]
    for j in range(1, n):
        k = stiffness[j]
        k_mat[j - 1, j - 1] += k
        k_mat[j, j] += k
        k_mat[j - 1, j] -= k
        k_mat[j, j - 1] -= k
    return m_mat, k_mat


def _solve_chain_modes(mass, stiffness, dtype) -> tuple[np.ndarray, np.ndarray]:
    m_mat, k_mat = chain_matrices(mass, stiffness)
    # Generalized symmetric eigenproblem; eigenvalues are squared angular
    # frequencies, eigenvectors come back mass-normalized and ascending.
    eigvals, eigvecs = scipy.linalg.eigh(k_mat, m_mat)
    if np.any(eigvals <= 0):
        raise ConfigError("chain has a non-positive eigenvalue; check parameters")
    freqs = np.sqrt(eigvals) / (2.0 * np.pi)
    return freqs.astype(dtype), eigvecs.astype(dtype)


def build_modal_model(
    n_dof: int,
    mass: Sequence[float],
    stiffness: Sequence[float],
    damping_ratio: float,
    damage_dof: int | None = None,
    damage_factor: float = 1.0,
) -> ModalModel:
    """Construct and eigen-solve a chain model with optional spring damage."""
    return ModalModel(
        n_dof=n_dof,
        mass=tuple(float(m) for m in mass),
        stiffness=tuple(float(k) for k in stiffness),
        damping_ratio=float(damping_ratio),
        damage_dof=damage_dof,
        damage_factor=float(damage_factor),
    )


def _mode_accel_response(
    omega: float, zeta: float, modal_force: np.ndarray, dt: float
) -> np.ndarray:
    """Acceleration of one damped mode under zero-order-hold forcing.

    The continuous oscillator q'' + 2*zeta*omega*q' + omega^2 q = u is
    discretized exactly (matrix exponential of the state transition), which
    is unconditionally stable for any step size.
    """
    a = np.array([[0.0, 1.0], [-omega * omega, -2.0 * zeta * omega]])
    b = np.array([[0.0], [1.0]])
    # Output is the acceleration q'' = u - 2*zeta*omega*q' - omega^2 q.
    c = np.array([[-omega * omega, -2.0 * zeta * omega]])
    d = np.array([[1.0]])
    a_d, b_d, c_d, d_d, _ = scipy.signal.cont2discrete((a, b, c, d), dt, method="zoh")
    num, den = scipy.signal.ss2tf(a_d, b_d, c_d, d_d)
    return scipy.signal.lfilter(num[0], den, modal_force)


def simulate_response(
    model: ModalModel,
    measured_dof: int,
    duration_s: float,
    sample_rate_hz: float = CANONICAL_SAMPLE_RATE_HZ,
    excitation_seed: int = 0,
    force_dof: int = 1,
    force_amplitude: float = 1.0,
    joint_id: int = 1,
    domain: DomainLabel | None = None,
) -> VibrationRecord:
    """Acceleration at one DOF under seeded white-noise forcing at another.

    Modal superposition: the white-noise force is projected onto each
    mass-normalized mode, each modal oscillator is integrated exactly, and
    the weighted modal accelerations are summed at the measured DOF.
    """
    if not 1 <= measured_dof <= model.n_dof:
        raise DataError(f"measured_dof {measured_dof} out of range 1..{model.n_dof}")
    if not 1 <= force_dof <= model.n_dof:
        raise DataError(f"force_dof {force_dof} out of range 1..{model.n_dof}")
    n = duration_s * sample_rate_hz
    if n <= 0 or abs(n - round(n)) > 1e-9:
        raise DataError(
            f"duration_s * sample_rate_hz must be a positive integer, got {n}"
        )
    n = int(round(n))
    if domain is None:
        damaged = model.damage_dof is not None and model.damage_factor < 1.0
        domain = DomainLabel.DAMAGED if damaged else DomainLabel.UNDAMAGED

    rng = np.random.default_rng(excitation_seed)
    force = force_amplitude * rng.standard_normal(n)
    dt = 1.0 / sample_rate_hz
    accel = np.zeros(n, dtype=np.float64)
    if force_amplitude != 0.0:
        for r in range(model.n_dof):
            omega = 2.0 * np.pi * float(model.natural_freqs_hz[r])
            phi_force = float(model.mode_shapes[force_dof - 1, r])
            phi_meas = float(model.mode_shapes[measured_dof - 1, r])
            q_ddot = _mode_accel_response(
                omega, model.damping_ratio, phi_force * force, dt
            )
            accel += phi_meas * q_ddot
    return VibrationRecord(joint_id, domain, Provenance.REAL, sample_rate_hz, accel)


def default_desk_scale_models() -> tuple[ModalModel, ModalModel]:
    """Default undamaged and damaged 3-DOF chains (~9/25/36 Hz modes).

    Damage is a 40% stiffness reduction on spring 2, shifting every natural
    frequency downward like a loosened joint would.
    """
    k = (2.0 * np.pi * 20.0) ** 2
    undamaged = build_modal_model(3, (1.0, 1.0, 1.0), (k, k, k), damping_ratio=0.02)
    damaged = build_modal_model(
        3, (1.0, 1.0, 1.0), (k, k, k), damping_ratio=0.02, damage_dof=2, damage_factor=0.6
    )
    return undamaged, damaged
