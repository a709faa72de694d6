"""Unconditional energy decay of the convex-splitting phase step.

Random initial data in [-1, 1] and no proliferation source: the discrete
free energy must fall at every step for every step size, which is the whole
point of treating the convex part of the double well implicitly and the
expansive part explicitly.
"""

import numpy as np

from phenofield import (ChState, ScalarField, build_operators, build_uniform_mesh,
                        ch_step, chemical_potential_init, energy)

eps, mobility = 1e-2, 1e-2
ops = build_operators(build_uniform_mesh(16))
rng = np.random.default_rng(42)
phi0 = rng.uniform(-1.0, 1.0, ops.n_nodes)

for dt in (1e-3, 1e-2, 1e-1):
    phi = ScalarField(phi0.copy(), "phi")
    state = ChState(phi=phi, mu=chemical_potential_init(phi, ops, eps))
    energies = [energy(state.phi, ops, eps)]
    for _ in range(100):
        state = ch_step(state, np.zeros(ops.n_nodes), mobility, eps, dt, ops)
        energies.append(energy(state.phi, ops, eps))
    increments = np.diff(energies)
    print(f"dt = {dt:5.0e}: E {energies[0]:9.3f} -> {energies[-1]:8.3f}, "
          f"max step increment = {increments.max():+.3e} (must be <= 0 up to roundoff)")
