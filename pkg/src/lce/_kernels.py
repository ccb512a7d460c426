"""Numba inner loop for the Euler-Maruyama engine.

advance_chunk must stay arithmetically identical to engine._advance_python:
the two are asserted bit-equal in the test suite, and the fallback is the
reference semantics.  No fastmath (reassociation or FMA contraction would
change results).
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def advance_chunk(x, y, cuts, t, alpha, omega, amp, dt, noise,
                  a00, a01, a10, a11, fx, fy):
    """Advance one trajectory through a chunk of standard-normal pairs.

    Returns (x, y, cuts, t, used, status); status 1 means absorbed at
    |z| = 1, with (x, y) the interpolated crossing point, t the
    interpolated exit time, and cuts the signed count of crossings of the
    ray opposite the focus (used to reconstruct the winding number).
    """
    one_m_a2 = 1.0 - alpha * alpha
    n = noise.shape[0]
    ux = x - fx
    uy = y - fy
    for i in range(n):
        w1r = x + alpha
        w1i = y
        w2r = 1.0 + alpha * x
        w2i = alpha * y
        pr = w1r * w2r - w1i * w2i
        pi = w1r * w2i + w1i * w2r
        r2 = (w1r * w1r + w1i * w1i) / (w2r * w2r + w2i * w2i)
        fr = r2 - 1.0
        bx = (pr * fr - pi * omega) / one_m_a2
        by = (pr * omega + pi * fr) / one_m_a2
        g0 = noise[i, 0]
        g1 = noise[i, 1]
        nx = a00 * g0 + a01 * g1
        ny = a10 * g0 + a11 * g1
        xn = x + bx * dt + amp * nx
        yn = y + by * dt + amp * ny
        exited = xn * xn + yn * yn >= 1.0
        if exited:
            dx = xn - x
            dy = yn - y
            a = dx * dx + dy * dy
            b = 2.0 * (x * dx + y * dy)
            c = x * x + y * y - 1.0
            disc = b * b - 4.0 * a * c
            if disc < 0.0:
                disc = 0.0
            s = (-b + np.sqrt(disc)) / (2.0 * a)
            xn = x + s * dx
            yn = y + s * dy
            t += s * dt
        else:
            t += dt
        vx = xn - fx
        vy = yn - fy
        if (uy < 0.0) != (vy < 0.0):
            xc = ux + (vx - ux) * (0.0 - uy) / (vy - uy)
            if xc < 0.0:
                # upward crossing left of the focus is a clockwise turn
                if vy >= 0.0:
                    cuts -= 1
                else:
                    cuts += 1
        if exited:
            return xn, yn, cuts, t, i + 1, 1
        x = xn
        y = yn
        ux = vx
        uy = vy
    return x, y, cuts, t, n, 0
