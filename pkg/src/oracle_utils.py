import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigh
from scipy.optimize import brentq

from src.grid import assembly_for
from src.models.fucik_models import Domain
from src.models.spectrum_models import CurvePoint, SpectrumData

SHOOTING_RTOL = 1e-10
SHOOTING_ATOL = 1e-12
SCAN_FACTOR = 1.1
SCAN_LIMIT = 400


class OracleUtils:
    def pi_p(self, p: float) -> float:
        """Half period of the one-dimensional p-sine

        Args:
            p (float): exponent, p > 1

        Returns:
            float: 2 pi (p-1)^(1/p) / (p sin(pi/p)), equal to pi at p = 2
        """
        return 2.0 * np.pi * (p - 1.0) ** (1.0 / p) / (p * np.sin(np.pi / p))

    def eigenvalue_1d(self, p: float, k: int = 1, length: float = 1.0) -> float:
        """k-th Dirichlet eigenvalue of the p-Laplacian on an interval

        Args:
            p (float): exponent
            k (int): index of the eigenvalue, starting at 1
            length (float): interval length

        Returns:
            float: (k pi_p / length)^p
        """
        return (k * self.pi_p(p) / length) ** p

    def lambda1_1d(self, p: float, length: float = 1.0) -> float:
        return self.eigenvalue_1d(p, 1, length)

    def lambda2_1d(self, p: float, length: float = 1.0) -> float:
        return self.eigenvalue_1d(p, 2, length)

    def fucik_relation(self, a: float, b: float, p: float, length: float = 1.0) -> float:
        """Defect of the classical relation for the first nontrivial curve

        Args:
            a (float): slope on the positive part, a > 0
            b (float): slope on the negative part, b > 0
            p (float): exponent
            length (float): interval length

        Returns:
            float: pi_p / a^(1/p) + pi_p / b^(1/p) - length, zero exactly on the curve
        """
        pi_p = self.pi_p(p)
        return pi_p / a ** (1.0 / p) + pi_p / b ** (1.0 / p) - length

    def c_of_s(self, s: float, p: float, length: float = 1.0) -> float:
        """Classical c(s): the root c in (lambda1, lambda2] of the relation at (s + c, c)

        Args:
            s (float): shift, s >= 0
            p (float): exponent
            length (float): interval length

        Returns:
            float: c(s)
        """
        low = self.lambda1_1d(p, length)
        high = self.lambda2_1d(p, length)
        if s == 0.0:
            return high
        return brentq(lambda c: self.fucik_relation(s + c, c, p, length), low * (1.0 + 1e-12), high, xtol=1e-13)

    def spectrum_data(self, p: float, s_values, length: float = 1.0) -> SpectrumData:
        """Spectrum built from the classical relation, for tests and comparisons

        Args:
            p (float): exponent
            s_values (Sequence[float]): ascending shifts starting at 0
            length (float): interval length

        Returns:
            SpectrumData: curve points with zero residual
        """
        curve = [CurvePoint.from_sc(float(s), self.c_of_s(float(s), p, length), 0.0) for s in s_values]
        return SpectrumData(lambda1=self.lambda1_1d(p, length), lambda2=curve[0].c, curve=curve)

    def discrete_eigenvalues(self, domain: Domain, count: int = 2) -> np.ndarray:
        """Lowest eigenvalues of the P1 Laplacian, K v = lambda M v, by a dense solve

        Args:
            domain (Domain): mesh
            count (int): number of eigenvalues

        Returns:
            np.ndarray: ascending eigenvalues
        """
        asm = assembly_for(domain)
        mass = asm.weighted_mass(np.ones((domain.n_interior + 1, 3)))
        return eigh(asm.stiffness, mass, eigvals_only=True, subset_by_index=[0, count - 1])

    def shoot(self, a: float, b: float, p: float, length: float = 1.0) -> tuple[float, int]:
        """Integrate -(|u'|^{p-2} u')' = a (u+)^{p-1} - b (u-)^{p-1} from u(0) = 0, |u'|^{p-2}u'(0) = 1

        Args:
            a (float): slope on the positive part
            b (float): slope on the negative part
            p (float): exponent
            length (float): interval length

        Returns:
            tuple[float, int]: u(length) and the number of zeros of u inside (0, length)
        """
        q = 1.0 / (p - 1.0)

        def rhs(_, y):
            u, v = y
            du = np.sign(v) * abs(v) ** q
            dv = -(a * max(u, 0.0) ** (p - 1.0) - b * max(-u, 0.0) ** (p - 1.0))
            return [du, dv]

        def crossing(_, y):
            return y[0]

        solution = solve_ivp(
            rhs,
            (0.0, length),
            [0.0, 1.0],
            events=crossing,
            rtol=SHOOTING_RTOL,
            atol=SHOOTING_ATOL,
            max_step=length / 50.0,
        )
        zeros = [t for t in solution.t_events[0] if 1e-9 * length < t < length * (1.0 - 1e-9)]
        return float(solution.y[0, -1]), len(zeros)

    def _scan_root(self, func, start: float) -> float:
        """First sign change of func on a geometric grid from start, refined by brentq."""
        low = start
        value = func(low)
        for _ in range(SCAN_LIMIT):
            high = low * SCAN_FACTOR
            candidate = func(high)
            if np.sign(candidate) != np.sign(value):
                return brentq(func, low, high, xtol=1e-12 * high)
            low, value = high, candidate
        raise RuntimeError(f"No sign change found from {start:g} in {SCAN_LIMIT} steps.")

    def shooting_eigenvalue(self, p: float, k: int = 1, length: float = 1.0) -> float:
        """k-th eigenvalue from the shooting map, independent of the closed form

        Args:
            p (float): exponent
            k (int): index of the eigenvalue
            length (float): interval length

        Returns:
            float: lambda with u(length) = 0 and k - 1 interior zeros
        """
        endpoint = lambda lam: self.shoot(lam, lam, p, length)[0]
        lam = 0.1 / length**p
        for _ in range(k):
            lam = self._scan_root(endpoint, lam * (1.0 + 1e-6))
        return lam

    def shooting_c_of_s(self, s: float, p: float, length: float = 1.0) -> float:
        """c(s) from the shooting map: the c at which (s + c, c) admits a solution with one interior zero

        Args:
            s (float): shift, s >= 0
            p (float): exponent
            length (float): interval length

        Returns:
            float: c(s)
        """
        lambda1 = self.shooting_eigenvalue(p, 1, length)
        endpoint = lambda c: self.shoot(s + c, c, p, length)[0]
        return self._scan_root(endpoint, lambda1 * (1.0 + 1e-6))
