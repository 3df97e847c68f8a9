"""Dense two-phase tableau simplex with Bland's rule.

Solves ``min c.x  s.t.  A x >= b,  x >= 0``.  With ``exact=True`` the tableau
holds :class:`fractions.Fraction` entries and every comparison is exact; the
float path uses a small pivot tolerance.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


class SimplexError(RuntimeError):
    pass


class Infeasible(SimplexError):
    pass


class Unbounded(SimplexError):
    pass


class DenseSimplex:
    def __init__(self, exact: bool = False, tol: float = 1e-10, max_pivots: int = 100_000):
        self.exact = exact
        self.tol = 0 if exact else tol
        self.max_pivots = max_pivots
        self.pivots = 0

    def _arr(self, x) -> np.ndarray:
        if self.exact:
            a = np.array(x, dtype=object)
            flat = [Fraction(v) for v in a.ravel()]
            out = np.empty(a.shape, dtype=object)
            out.ravel()[:] = flat
            return out
        return np.array(x, dtype=float)

    def _pivot(self, T, basis, row, col):
        T[row] = T[row] / T[row, col]
        for r in range(T.shape[0]):
            if r != row and T[r, col] != 0:
                T[r] = T[r] - T[r, col] * T[row]
        basis[row] = col
        self.pivots += 1
        if self.pivots > self.max_pivots:
            # unreachable under Bland's rule in exact arithmetic
            raise SimplexError("pivot limit exceeded (cycling guard)")

    def _run(self, T, basis, ncols):
        """Primal simplex on T (last row = reduced costs) over the first ``ncols`` columns."""
        m = T.shape[0] - 1
        tol = self.tol
        while True:
            # Bland: lowest-index improving column
            col = next((j for j in range(ncols) if T[-1, j] < -tol), None)
            if col is None:
                return
            row = None
            best = None
            for r in range(m):
                a = T[r, col]
                if a > tol:
                    ratio = T[r, -1] / a
                    if row is None or ratio < best - tol or (ratio <= best + tol and basis[r] < basis[row]):
                        best, row = ratio, r
            if row is None:
                raise Unbounded("objective unbounded below")
            self._pivot(T, basis, row, col)

    def solve(self, c, A, b) -> tuple[np.ndarray, object]:
        c = self._arr(c).ravel()
        b = self._arr(b).ravel()
        n, m = len(c), len(b)
        A = self._arr(A).reshape(m, n)
        zero = Fraction(0) if self.exact else 0.0
        one = Fraction(1) if self.exact else 1.0
        dtype = object if self.exact else float

        # columns: x (n) | surplus (m) | artificial (m) | rhs
        T = np.empty((m + 1, n + 2 * m + 1), dtype=dtype)
        T[...] = zero
        for r in range(m):
            sign = one if b[r] >= 0 else -one
            T[r, :n] = A[r] * sign
            T[r, n + r] = -sign
            T[r, n + m + r] = one
            T[r, -1] = b[r] * sign
        basis = [n + m + r for r in range(m)]

        # phase 1: minimise the sum of artificials
        for r in range(m):
            T[-1] = T[-1] - T[r]
        T[-1, n + m:n + 2 * m] = zero
        self._run(T, basis, n + 2 * m)
        feas_tol = 0 if self.exact else 1e-8 * max(1.0, float(np.abs(b).max(initial=0)))
        if -T[-1, -1] > feas_tol:
            raise Infeasible("no feasible point")

        keep = []
        for r in range(m):
            if basis[r] >= n + m:
                col = next((j for j in range(n + m) if abs(T[r, j]) > self.tol), None)
                if col is None:
                    continue  # redundant row
                self._pivot(T, basis, r, col)
            keep.append(r)
        cols = list(range(n + m)) + [n + 2 * m]
        T = T[keep + [m]][:, cols]
        basis = [basis[r] for r in keep]

        # phase 2: reduced costs of the original objective
        T[-1] = zero
        T[-1, :n] = c
        for r, bcol in enumerate(basis):
            cb = T[-1, bcol]
            if cb != 0:
                T[-1] = T[-1] - cb * T[r]
        self._run(T, basis, n + m)

        x = np.empty(n, dtype=dtype)
        x[...] = zero
        for r, bcol in enumerate(basis):
            if bcol < n:
                x[bcol] = T[r, -1]
        val = sum((c[j] * x[j] for j in range(n)), zero)
        return x, val


def solve_lp(c, A, b, exact: bool = False) -> tuple[np.ndarray, object]:
    """Minimise ``c.x`` over ``A x >= b, x >= 0``; returns ``(x, objective)``."""
    return DenseSimplex(exact=exact).solve(c, A, b)
