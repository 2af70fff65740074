"""Cartier-Manin matrices of y**2 = (x - z_1)...(x - z_n) mod p.

Entry (i, j) is the coefficient of x**(j*p - 1) in x**(i-1) f(x)**((p-1)/2)
reduced mod p; it is homogeneous of degree i + (g - j) p + (p - n)/2.  These
matrices realize multiplication by p on the graded pieces of the solution
module: reducing a level-t solution mod p expresses it over level t-1
generators through C twisted by z -> z**(p**(t-1)).
"""

from __future__ import annotations

from dataclasses import dataclass

from .kz import KZInstance
from .sparsepoly import ModulusContext, Polynomial, PolyVector, product_power_slice, z_variables


@dataclass
class CartierMatrix:
    p: int
    n: int
    entries: list  # g x g nested list of Polynomial mod p (entries[i-1][j-1] = C_i^j)

    @property
    def g(self) -> int:
        return (self.n - 1) // 2

    def entry(self, i: int, j: int) -> Polynomial:
        return self.entries[i - 1][j - 1]

    def twist(self, e: int) -> "CartierMatrix":
        """Substitute z -> z**(p**e) by exponent scaling."""
        k = self.p ** e
        return CartierMatrix(self.p, self.n,
                             [[c.scale_exponents(k) for c in row] for row in self.entries])

    def expected_degree(self, i: int, j: int) -> int:
        return i + (self.g - j) * self.p + (self.p - self.n) // 2

    def degrees_ok(self) -> bool:
        for i in range(1, self.g + 1):
            for j in range(1, self.g + 1):
                entry = self.entry(i, j)
                if entry.is_zero():
                    continue
                if entry.degrees_present() != {self.expected_degree(i, j)}:
                    return False
        return True

    def to_json(self) -> dict:
        from .sparsepoly import poly_to_json

        return {
            "p": self.p,
            "n": self.n,
            "entries": [[poly_to_json(c) for c in row] for row in self.entries],
        }


def cartier_matrix(p: int, n: int) -> CartierMatrix:
    """C_i^j = coefficient of x**(j p - 1) in x**(i-1) f(x)**((p-1)/2) mod p."""
    ModulusContext(p, 1)  # validates that p is an odd prime
    if n % 2 == 0 or n < 3 or p < n:
        raise ValueError("need odd n >= 3 and p >= n")
    g = (n - 1) // 2
    zvars = z_variables(n)
    caps = ((p - 1) // 2,) * n
    entries = []
    for i in range(1, g + 1):
        row = []
        for j in range(1, g + 1):
            sl = product_power_slice(caps, j * p - 1 - (i - 1))
            row.append(Polynomial(zvars, sl).reduce_mod(p))
        entries.append(row)
    return CartierMatrix(p, n, entries)


def matmul(A: CartierMatrix, B: CartierMatrix) -> CartierMatrix:
    if (A.p, A.n) != (B.p, B.n):
        raise ValueError("matrix frames differ")
    g = A.g
    rows = []
    for i in range(g):
        row = []
        for j in range(g):
            acc = Polynomial.zero(A.entries[0][0].vars)
            for k in range(g):
                acc = acc + A.entries[i][k] * B.entries[k][j]
            row.append(acc.reduce_mod(A.p))
        rows.append(row)
    return CartierMatrix(A.p, A.n, rows)


@dataclass
class GradingReport:
    """Per-l outcome of the multiplication-by-p congruence at one level step."""

    t: int
    matches: list               # bool per l = 1..g
    first_mismatch: dict | None

    @property
    def passed(self) -> bool:
        return all(self.matches)

    def to_json(self) -> dict:
        return {"t": self.t, "matches": self.matches,
                "first_mismatch": self.first_mismatch, "pass": self.passed}


def _level_solution(inst: KZInstance, t: int, l: int) -> PolyVector:
    from .solutions import extract_solution

    return extract_solution(inst.level(t), None, l, t).vector


def verify_grading_relation(inst: KZInstance, t: int) -> GradingReport:
    """Check I at level t = sum_m (level t-1 solution)_m * C_m^l(z**(p**(t-1))) mod p."""
    if not 2 <= t <= inst.ctx.s:
        raise ValueError(f"t={t} outside 2..{inst.ctx.s}")
    p = inst.ctx.p
    C = cartier_matrix(p, inst.n).twist(t - 1)
    lower = [_level_solution(inst, t - 1, m) for m in range(1, inst.g + 1)]
    matches = []
    first_mismatch = None
    for l in range(1, inst.g + 1):
        lhs = _level_solution(inst, t, l).reduce_mod(p)
        rhs = PolyVector.zero(inst.n, inst.zvars)
        for m in range(1, inst.g + 1):
            rhs = rhs + lower[m - 1].scale(C.entry(m, l))
        diff = (lhs - rhs).reduce_mod(p)
        matches.append(diff.is_zero())
        if first_mismatch is None and not diff.is_zero():
            for comp, entry in enumerate(diff.entries):
                if entry:
                    mono = min(entry.terms)
                    first_mismatch = {"l": l, "component": comp + 1,
                                      "monomial": list(mono),
                                      "coefficient": entry.terms[mono]}
                    break
    return GradingReport(t, matches, first_mismatch)


def iterated_product(inst: KZInstance, t: int, m: int) -> CartierMatrix:
    """C(z**(p**(t-m))) C(z**(p**(t-m+1))) ... C(z**(p**(t-1))) mod p.

    Left-to-right factors carry ascending twists, matching repeated
    application of the level-lowering map from level t down to level t-m.
    """
    if not 1 <= m < t:
        raise ValueError("need 1 <= m < t")
    C = cartier_matrix(inst.ctx.p, inst.n)
    product = C.twist(t - m)
    for k in range(t - m + 1, t):
        product = matmul(product, C.twist(k))
    return product


@dataclass
class IteratedReport:
    product: CartierMatrix
    reformulation_ok: bool | None

    @property
    def passed(self) -> bool:
        return self.reformulation_ok is not False


def verify_iterated_product(inst: KZInstance, t: int, m: int) -> IteratedReport:
    """For t = s, m = s-1 also check the fully lowered reformulation:

    the level-s solution reduces mod p to the level-1 solutions paired with
    the full twisted matrix product.
    """
    product = iterated_product(inst, t, m)
    reform = None
    if t == inst.ctx.s and m == inst.ctx.s - 1 and m >= 1:
        p = inst.ctx.p
        ok = True
        base = [_level_solution(inst, 1, m1) for m1 in range(1, inst.g + 1)]
        for l in range(1, inst.g + 1):
            lhs = _level_solution(inst, inst.ctx.s, l).reduce_mod(p)
            rhs = PolyVector.zero(inst.n, inst.zvars)
            for m1 in range(1, inst.g + 1):
                rhs = rhs + base[m1 - 1].scale(product.entry(m1, l))
            if (lhs - rhs).reduce_mod(p) != PolyVector.zero(inst.n, inst.zvars):
                ok = False
        reform = ok
    return IteratedReport(product, reform)
