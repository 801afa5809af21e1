"""Pure-numpy mirror of the compiled path-stepping core.

Each function matches `_pathcore` bit for bit: identical per-element
expression trees and identical accumulation order (numpy reduces the short
asset axis sequentially), so a backend switch never changes results.
"""

import numpy as np

NAME = "python"


def noise_block(xi, y, z, phi, add, gain, sqrt_dt, dt, xi_left, track_y):
    """Advance the memory state over one block of steps.

    xi, y        : (m, n) states, updated in place
    z            : (K, m, n) standard normals
    phi/add/gain : (K, n) per-step decay, drift increment, noise gain
    xi_left      : (K, m, n) output, state at each step's left node
    """
    n_steps = z.shape[0]
    for k in range(n_steps):
        xi_left[k] = xi
        if track_y:
            y += sqrt_dt * z[k] - xi * dt
        xi[:] = phi[k] * xi + add[k] + gain[k] * z[k]


def wealth_block(logx, z, xi_left, r, lam, a_coef, d_coef, sqrt_dt, dt):
    """Accumulate log-wealth over one block under an affine exposure.

    The market exposure at step k is u = a_coef[k] + d_coef[k] * xi, and the
    log-wealth increment is (r + u'(lam - xi) - ||u||^2 / 2) dt + u' dB.
    """
    n_steps = z.shape[0]
    for k in range(n_steps):
        x = xi_left[k]
        u = a_coef[k] + d_coef[k] * x
        drift = (u * (lam[k] - x) - 0.5 * u * u).sum(axis=1)
        stoch = (u * z[k]).sum(axis=1)
        logx += (r[k] + drift) * dt + stoch * sqrt_dt


def quad_block(acc, xi_left, xi_end, qdiag, hvec, dt):
    """Trapezoid accumulation of the quadratic functional over one block.

    qdiag, hvec : (K+1, n) diagonal quadratic and linear weights at the
                  block's nodes; the last node's state is ``xi_end``.
    """
    n_steps = xi_left.shape[0]
    for k in range(n_steps):
        xl = xi_left[k]
        xr = xi_left[k + 1] if k + 1 < n_steps else xi_end
        left = (0.5 * qdiag[k] * xl * xl + hvec[k] * xl).sum(axis=1)
        right = (0.5 * qdiag[k + 1] * xr * xr + hvec[k + 1] * xr).sum(axis=1)
        acc += 0.5 * dt * (left + right)
