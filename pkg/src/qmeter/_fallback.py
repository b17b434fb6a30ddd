"""Numpy implementations of the hot kernels, used when the extension is absent."""
import numpy as np


def wigner_accumulate(amp, rho, mid_index, n_mid):
    """Accumulate ``amp[i, j] rho[j, k] conj(amp[i, k])`` into column ``mid_index[j, k]``.

    Returns a complex ``(amp.shape[0], n_mid)`` array.
    """
    terms = amp[:, :, None] * rho[None, :, :] * amp.conj()[:, None, :]
    out = np.zeros((amp.shape[0], n_mid), dtype=complex)
    cols = np.broadcast_to(mid_index, terms.shape)
    rows = np.broadcast_to(np.arange(amp.shape[0])[:, None, None], terms.shape)
    np.add.at(out, (rows.ravel(), cols.ravel()), terms.ravel())
    return out


def qq_closed_form(lam, omega, alpha_re, alpha_im, beta, pn, qn, qp, qnp):
    """Postselection probability and ``P(E_f, +) - P(E_f, -)`` for the qubit-qubit setup.

    All arguments are equal-length float arrays; ``qnp`` is the triple
    product ``(q x n) . p``.
    """
    c = np.cos(0.5 * lam)
    s = np.sin(0.5 * lam)
    cc, ss, sc = c * c, s * s, s * c
    u = 1.0 - pn
    p_post = 0.5 * ((1.0 + cc + ss * pn) * omega + 2.0 * sc * u * alpha_im + ss * u * beta)
    diff = 0.5 * (
        omega * (2.0 * cc * qn + ss * qp * (1.0 + pn) - 2.0 * sc * qnp)
        + 2.0 * alpha_re * (ss * (qn - qp * pn) + sc * qnp)
        + 2.0 * alpha_im * (sc * (qn - qp) - ss * qnp)
        - beta * ss * qp * u
    )
    return p_post, diff
