"""The reduced KZ system as a verifiable object.

The system couples n first-order equations
    dI/dz_i = (1/2) sum_{j != i} Omega_ij / (z_i - z_j) I
with the algebraic constraint I_1 + ... + I_n = 0.  Verification works
modulo p**s on polynomial vectors after clearing denominators: equation i
holds iff
    prod_{j != i}(z_i - z_j) dI/dz_i
      - inv(2) sum_{j != i} prod_{k != i,j}(z_i - z_k) Omega_ij I
vanishes mod p**s.  Multiplying a vanishing identity by a polynomial keeps
it vanishing, so a zero residual is sound; as a converse probe the residual
is also evaluated at random points where the cleared factor is a unit.
"""

from __future__ import annotations

import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .sparsepoly import ModulusContext, Polynomial, PolyVector, z_variables


@dataclass(frozen=True)
class KZInstance:
    """System size n = 2g+1 with its arithmetic frame."""

    n: int
    ctx: ModulusContext

    def __post_init__(self):
        if self.n < 3 or self.n % 2 == 0:
            raise ValueError("n must be odd and >= 3")
        # p = n is admitted: the defining identities only need M = -1/2 mod p^s.
        if self.ctx.p < self.n:
            raise ValueError(f"prime {self.ctx.p} smaller than n={self.n}")

    @property
    def g(self) -> int:
        return (self.n - 1) // 2

    @property
    def zvars(self) -> tuple:
        return z_variables(self.n)

    def level(self, r: int) -> "KZInstance":
        return KZInstance(self.n, self.ctx.level(r))


@dataclass(frozen=True)
class OmegaMatrix:
    """Interaction matrix with -1 at (i,i),(j,j) and +1 at (i,j),(j,i)."""

    i: int
    j: int
    n: int
    rows: tuple = field(init=False)

    def __post_init__(self):
        if not (1 <= self.i <= self.n and 1 <= self.j <= self.n):
            raise ValueError("indices out of range")
        if self.i == self.j:
            raise ValueError("indices must differ")
        rows = [[0] * self.n for _ in range(self.n)]
        a, b = self.i - 1, self.j - 1
        rows[a][a] = rows[b][b] = -1
        rows[a][b] = rows[b][a] = 1
        object.__setattr__(self, "rows", tuple(tuple(r) for r in rows))


def omega(i: int, j: int, n: int) -> OmegaMatrix:
    return OmegaMatrix(i, j, n)


def apply_omega(vec: PolyVector, i: int, j: int) -> PolyVector:
    """Omega_ij applied to a vector: slots i,j get the antisymmetric mix."""
    a, b = i - 1, j - 1
    out = [Polynomial.zero(vec.vars) for _ in range(len(vec))]
    out[a] = vec[b] - vec[a]
    out[b] = vec[a] - vec[b]
    return PolyVector(out)


def _difference_product(zvars, i: int, skip: set) -> Polynomial:
    """prod over j not in skip of (z_i - z_j), 1-based indices."""
    poly = Polynomial.one(zvars)
    zi = Polynomial.variable(zvars[i - 1], zvars)
    for j in range(1, len(zvars) + 1):
        if j == i or j in skip:
            continue
        poly = poly * (zi - Polynomial.variable(zvars[j - 1], zvars))
    return poly


def kz_residue(I: PolyVector, i: int, inst: KZInstance) -> PolyVector:
    """Cleared-denominator residual of equation i, reduced mod p**s."""
    if len(I) != inst.n:
        raise ValueError(f"vector length {len(I)} != n={inst.n}")
    zvars = I.vars
    zi_index = zvars.index(f"z{i}")
    lead = _difference_product(zvars, i, set())
    res = PolyVector([lead * e.diff_index(zi_index) for e in I.entries])
    inv2 = inst.ctx.inv2
    for j in range(1, inst.n + 1):
        if j == i:
            continue
        rest = _difference_product(zvars, i, {j})
        res = res - apply_omega(I, i, j).scale(rest).scale(inv2)
    return res.reduce_mod(inst.ctx.modulus)


@dataclass
class FailureSite:
    equation: int | str
    component: int
    monomial: tuple
    coefficient: int

    def to_json(self) -> dict:
        return {
            "equation": self.equation,
            "component": self.component,
            "monomial": list(self.monomial),
            "coefficient": str(self.coefficient),
        }


@dataclass
class SolutionCheck:
    sum_ok: bool
    equations: list
    first_failure: FailureSite | None
    point_checks: list

    @property
    def passed(self) -> bool:
        return self.sum_ok and all(self.equations) and all(self.point_checks)

    def to_json(self) -> dict:
        return {
            "sum_ok": self.sum_ok,
            "equations": self.equations,
            "point_checks": self.point_checks,
            "first_failure": self.first_failure.to_json() if self.first_failure else None,
            "pass": self.passed,
        }


def _first_term(vec: PolyVector):
    for comp, entry in enumerate(vec.entries):
        if entry:
            mono = min(entry.terms)
            return comp + 1, mono, entry.terms[mono]
    return None


def resolve_workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("KZ_PADIC_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _distinct_point(rng: random.Random, inst: KZInstance) -> list:
    """A point with pairwise distinct coordinates mod p (cleared factor a unit)."""
    p, m = inst.ctx.p, inst.ctx.modulus
    residues = rng.sample(range(p), inst.n)
    return [r + p * rng.randrange(m // p) for r in residues]


def verify_solution(I: PolyVector, inst: KZInstance, workers: int | None = 1,
                    point_checks: int = 4, seed: int = 0) -> SolutionCheck:
    """Check the sum constraint and every cleared equation residual mod p**s.

    Residuals for distinct equations are independent; with ``workers`` > 1
    they are computed on a thread pool and merged by equation index.
    """
    m = inst.ctx.modulus
    sum_ok = I.sum_entries().reduce_mod(m).is_zero()
    nworkers = resolve_workers(workers)
    indices = range(1, inst.n + 1)
    if nworkers > 1:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            residues = list(pool.map(lambda i: kz_residue(I, i, inst), indices))
    else:
        residues = [kz_residue(I, i, inst) for i in indices]

    equations = [r.is_zero() for r in residues]
    first_failure = None
    if not sum_ok:
        total = I.sum_entries().reduce_mod(m)
        mono = min(total.terms)
        first_failure = FailureSite("sum", 0, mono, total.terms[mono])
    else:
        for i, r in zip(indices, residues):
            if not r.is_zero():
                comp, mono, coeff = _first_term(r)
                first_failure = FailureSite(i, comp, mono, coeff)
                break

    rng = random.Random(seed)
    points = []
    for _ in range(point_checks):
        z = _distinct_point(rng, inst)
        ok = all(
            all(entry.evaluate(z, m) == 0 for entry in r.entries)
            for r in residues
        )
        points.append(ok)
    return SolutionCheck(sum_ok, equations, first_failure, points)


@dataclass
class MasterIdentityCheck:
    """Outcome of the two defining identities of the master polynomial."""

    derivative_sum_exact: bool      # sum_j M_j Phi/(x-z_j) == dPhi/dx over Z
    derivative_sum_mod: bool        # M * sum_j Phi/(x-z_j) == dPhi/dx mod p^s
    vector_identities: list         # cleared equation-wise identity mod p^s

    @property
    def passed(self) -> bool:
        return self.derivative_sum_exact and self.derivative_sum_mod and all(self.vector_identities)

    def to_json(self) -> dict:
        return {
            "derivative_sum_exact": self.derivative_sum_exact,
            "derivative_sum_mod": self.derivative_sum_mod,
            "vector_identities": self.vector_identities,
            "pass": self.passed,
        }


def verify_master_identities(inst: KZInstance, mvec) -> MasterIdentityCheck:
    """Symbolically verify the identities behind the solution construction.

    Over the exact integers, sum_j M_j Phi/(x-z_j) equals dPhi/dx; with every
    M_j = -1/2 mod p**s this collapses to the uniform form.  The vector
    identity is checked per equation in cleared-denominator form, with
    Psi^i carrying -Phi/(x-z_i) at slot i.
    """
    from .solutions import master_component, validate_mvec  # local import, no cycle

    mvec = validate_mvec(inst, mvec)
    n = inst.n
    m = inst.ctx.modulus
    xvars = ("x",) + inst.zvars
    comps = [master_component(inst, mvec, j, xvars) for j in range(1, n + 1)]
    P = PolyVector(comps)

    x = Polynomial.variable("x", xvars)
    phi = comps[0] * (x - Polynomial.variable("z1", xvars))
    total = Polynomial.zero(xvars)
    for Mi, comp in zip(mvec, comps):
        total = total + comp.scale(Mi)
    exact = total == phi.diff("x")

    half = inst.ctx.half
    uniform = Polynomial.zero(xvars)
    for comp in comps:
        uniform = uniform + comp
    mod_ok = (uniform.scale(half) - phi.diff("x")).reduce_mod(m).is_zero()

    inv2 = inst.ctx.inv2
    zpols = [Polynomial.variable(v, xvars) for v in inst.zvars]
    vector_ok = []
    for i in range(1, n + 1):
        lead = Polynomial.one(xvars)
        for j in range(1, n + 1):
            if j != i:
                lead = lead * (zpols[i - 1] - zpols[j - 1])
        lhs = PolyVector([lead * e.diff(f"z{i}") for e in P.entries])
        for j in range(1, n + 1):
            if j == i:
                continue
            rest = Polynomial.one(xvars)
            for k in range(1, n + 1):
                if k not in (i, j):
                    rest = rest * (zpols[i - 1] - zpols[k - 1])
            lhs = lhs - apply_omega(P, i, j).scale(rest).scale(inv2)
        rhs = [Polynomial.zero(xvars) for _ in range(n)]
        rhs[i - 1] = lead * (-comps[i - 1]).diff("x")
        vector_ok.append((lhs - PolyVector(rhs)).reduce_mod(m).is_zero())

    return MasterIdentityCheck(exact, mod_ok, vector_ok)
