"""Product quadrature over the Euler-angle volume sin(theta) dtheta dphi dpsi."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Legendre in cos(theta), uniform periodic rules in phi and psi.

    The Gauss-Legendre rule with ``n_theta`` nodes is exact for polynomials
    in cos(theta) of degree < 2*n_theta; the periodic rules are exact for
    trigonometric polynomials of degree < n.
    """

    n_theta: int
    n_phi: int
    n_psi: int

    def __post_init__(self):
        for name in ("n_theta", "n_phi", "n_psi"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")

    @classmethod
    def uniform(cls, n: int) -> "QuadratureSpec":
        return cls(n, n, n)

    def nodes(self):
        """Return ``(phi, theta, psi, weight)`` flat arrays over the full grid.

        The weights sum to 8*pi**2, the volume of the Euler-angle domain.
        """
        x, wx = np.polynomial.legendre.leggauss(self.n_theta)
        theta = np.arccos(x)
        phi = 2 * np.pi * np.arange(self.n_phi) / self.n_phi
        psi = 2 * np.pi * np.arange(self.n_psi) / self.n_psi
        w_phi = 2 * np.pi / self.n_phi
        w_psi = 2 * np.pi / self.n_psi
        P, T, Q = np.meshgrid(phi, theta, psi, indexing="ij")
        W = np.broadcast_to(wx[None, :, None] * w_phi * w_psi, P.shape)
        return P.ravel(), T.ravel(), Q.ravel(), np.array(W).ravel()

    @property
    def size(self) -> int:
        return self.n_theta * self.n_phi * self.n_psi
