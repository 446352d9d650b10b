"""Dense multivariate polynomials over the frequency variables (tau, xi_1,
..., xi_d), with the exact operations needed for characteristic polynomials:
arithmetic, Taylor shifts, homogeneous parts, and derivative-based root
multiplicity in tau.

Coefficients are stored sparsely in a dict keyed by exponent tuples; the
variable order is fixed with tau first.
"""
from __future__ import annotations

from math import comb
from typing import Iterable, Mapping

import numpy as np

from .errors import MultiplicityMismatch

__all__ = ["MultivariatePolynomial"]


class MultivariatePolynomial:
    """Polynomial in ``nvars`` variables with complex coefficients.

    Exponent tuples have length ``nvars``; zero coefficients are never stored.
    """

    __slots__ = ("nvars", "coeffs")

    def __init__(self, nvars: int, coeffs: Mapping[tuple, complex] | None = None):
        self.nvars = int(nvars)
        self.coeffs: dict[tuple, complex] = {}
        if coeffs:
            for k, v in coeffs.items():
                if v != 0:
                    key = tuple(int(e) for e in k)
                    if len(key) != self.nvars:
                        raise ValueError(f"exponent {key} has wrong length")
                    self.coeffs[key] = complex(v)

    # ---- constructors -------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "MultivariatePolynomial":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, value: complex) -> "MultivariatePolynomial":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, index: int, nvars: int) -> "MultivariatePolynomial":
        e = [0] * nvars
        e[index] = 1
        return cls(nvars, {tuple(e): 1.0})

    @classmethod
    def affine(cls, constant: complex, linear: Iterable[complex]) -> "MultivariatePolynomial":
        """constant + sum linear[i] * x_i."""
        lin = list(linear)
        nvars = len(lin)
        c: dict[tuple, complex] = {}
        if constant != 0:
            c[(0,) * nvars] = complex(constant)
        for i, a in enumerate(lin):
            if a != 0:
                e = [0] * nvars
                e[i] = 1
                c[tuple(e)] = complex(a)
        return cls(nvars, c)

    # ---- ring operations ----------------------------------------------

    def _check_compatible(self, other: "MultivariatePolynomial"):
        if self.nvars != other.nvars:
            raise ValueError("operand variable counts differ")

    def __add__(self, other):
        if np.isscalar(other):
            other = MultivariatePolynomial.constant(self.nvars, other)
        self._check_compatible(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            s = out.get(k, 0.0) + v
            if s == 0:
                out.pop(k, None)
            else:
                out[k] = s
        return MultivariatePolynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultivariatePolynomial(
            self.nvars, {k: -v for k, v in self.coeffs.items()}
        )

    def __sub__(self, other):
        if np.isscalar(other):
            other = MultivariatePolynomial.constant(self.nvars, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            if other == 0:
                return MultivariatePolynomial.zero(self.nvars)
            return MultivariatePolynomial(
                self.nvars, {k: v * other for k, v in self.coeffs.items()}
            )
        self._check_compatible(other)
        # iterate over the smaller operand outside for fewer dict passes
        a, b = self.coeffs, other.coeffs
        if len(a) > len(b):
            a, b = b, a
        out: dict[tuple, complex] = {}
        for ka, va in a.items():
            for kb, vb in b.items():
                key = tuple(x + y for x, y in zip(ka, kb))
                s = out.get(key, 0.0) + va * vb
                if s == 0:
                    out.pop(key, None)
                else:
                    out[key] = s
        return MultivariatePolynomial(self.nvars, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, MultivariatePolynomial):
            return NotImplemented
        return self.nvars == other.nvars and self.coeffs == other.coeffs

    def __repr__(self):
        if not self.coeffs:
            return "MultivariatePolynomial(0)"
        terms = []
        for k in sorted(self.coeffs, key=lambda e: (sum(e), e), reverse=True):
            terms.append(f"{self.coeffs[k]:.6g}*x^{k}")
        return "MultivariatePolynomial(" + " + ".join(terms[:8]) + (
            " + ..." if len(terms) > 8 else ""
        ) + ")"

    # ---- queries -------------------------------------------------------

    @property
    def total_degree(self) -> int:
        return max((sum(k) for k in self.coeffs), default=0)

    @property
    def max_abs_coeff(self) -> float:
        return max((abs(v) for v in self.coeffs.values()), default=0.0)

    def is_real(self, tol: float = 0.0) -> bool:
        return all(abs(v.imag) <= tol for v in self.coeffs.values())

    def is_homogeneous(self, degree: int | None = None) -> bool:
        degrees = {sum(k) for k in self.coeffs}
        if not degrees:
            return True
        if degree is None:
            return len(degrees) == 1
        return degrees == {degree}

    # ---- evaluation ----------------------------------------------------

    def __call__(self, point) -> complex:
        pt = np.asarray(point, dtype=complex)
        if pt.shape != (self.nvars,):
            raise ValueError(f"point must have {self.nvars} entries")
        total = 0.0 + 0.0j
        for k, v in self.coeffs.items():
            term = v
            for x, e in zip(pt, k):
                if e:
                    term = term * x**e
            total += term
        return complex(total)

    def eval_grid(self, columns: np.ndarray) -> np.ndarray:
        """Vectorized evaluation; ``columns`` has shape (npoints, nvars)."""
        pts = np.asarray(columns, dtype=complex)
        out = np.zeros(pts.shape[0], dtype=complex)
        for k, v in self.coeffs.items():
            term = np.full(pts.shape[0], v, dtype=complex)
            for i, e in enumerate(k):
                if e:
                    term = term * pts[:, i] ** e
            out += term
        return out

    # ---- calculus ------------------------------------------------------

    def derivative(self, var: int, order: int = 1) -> "MultivariatePolynomial":
        out = self
        for _ in range(order):
            c: dict[tuple, complex] = {}
            for k, v in out.coeffs.items():
                e = k[var]
                if e:
                    key = k[:var] + (e - 1,) + k[var + 1 :]
                    c[key] = c.get(key, 0.0) + v * e
            out = MultivariatePolynomial(self.nvars, c)
        return out

    def shift(self, point) -> "MultivariatePolynomial":
        """Exact Taylor shift: returns q with q(x) = p(point + x)."""
        pt = np.asarray(point, dtype=complex)
        if pt.shape != (self.nvars,):
            raise ValueError(f"shift point must have {self.nvars} entries")
        out: dict[tuple, complex] = {}
        for k, v in self.coeffs.items():
            # expand prod_i (a_i + x_i)^{k_i} by binomials
            partial = {(): v}
            for i, e in enumerate(k):
                nxt: dict[tuple, complex] = {}
                a = pt[i]
                for key, coeff in partial.items():
                    if e == 0:
                        nxt[key + (0,)] = nxt.get(key + (0,), 0.0) + coeff
                        continue
                    for j in range(e + 1):
                        w = coeff * comb(e, j) * (a ** (e - j) if e != j else 1.0)
                        kk = key + (j,)
                        nxt[kk] = nxt.get(kk, 0.0) + w
                partial = nxt
            for key, coeff in partial.items():
                if coeff != 0:
                    out[key] = out.get(key, 0.0) + coeff
        return MultivariatePolynomial(self.nvars, {k: v for k, v in out.items() if v != 0})

    def homogeneous_part(self, degree: int) -> "MultivariatePolynomial":
        return MultivariatePolynomial(
            self.nvars, {k: v for k, v in self.coeffs.items() if sum(k) == degree}
        )

    def tau_multiplicity(self, point, rel_tol: float = 1e-9) -> int:
        """Order of vanishing in the first variable at ``point``.

        Taylor coefficients in tau are computed from the exact polynomial;
        the multiplicity is the smallest order whose coefficient exceeds
        ``rel_tol`` relative to the largest tau-Taylor coefficient.

        Raises
        ------
        MultiplicityMismatch
            If every coefficient vanishes (the polynomial is identically
            zero on the tau-line), which no well-posed symbol produces.
        """
        pt = np.asarray(point, dtype=complex)
        shifted = self.shift(pt)
        # collapse all non-tau variables to zero: keep exponents (k0, 0, ..., 0)
        tau_coeffs: dict[int, complex] = {}
        for k, v in shifted.coeffs.items():
            if all(e == 0 for e in k[1:]):
                tau_coeffs[k[0]] = tau_coeffs.get(k[0], 0.0) + v
        if not tau_coeffs:
            raise MultiplicityMismatch("polynomial vanishes identically in tau")
        scale = max(abs(v) for v in tau_coeffs.values())
        for order in sorted(tau_coeffs):
            if abs(tau_coeffs[order]) > rel_tol * scale:
                return order
        raise MultiplicityMismatch("no nonvanishing tau coefficient found")
