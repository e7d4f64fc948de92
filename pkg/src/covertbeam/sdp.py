"""Compact primal-dual interior-point solver for small dense SDPs.

Problems are stated as: maximize sum_i Tr(C_i X_i) over PSD blocks X_i,
subject to affine trace constraints sum_i Tr(A_ij X_i) {=, <=, >=} b_j and
optional LMI constraints (affine Hermitian-valued maps required PSD).

Internally everything is reduced to a real symmetric equality-form cone
program and solved with an infeasible-start Mehrotra predictor-corrector
using the HKM search direction and a fraction-to-boundary rule (0.98):

- complex blocks go through the real embedding [[Re, -Im], [Im, Re]]
  (coefficients carry a 1/2 so callers see complex-domain values);
- inequality rows get scalar slack blocks;
- each LMI becomes one extra PSD block tied entrywise to its affine
  expression through a Hermitian-basis expansion.

Rows, objective and variables are rescaled to O(1) before iterating, so
gap_tol / feas_tol act as relative tolerances. This is deliberately a
small dense solver: block dims beyond ~64 are out of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .linalg import as_hermitian

# Step-length fraction-to-boundary parameter.
_STEP_FRACTION = 0.98
# Consecutive non-improving iterations tolerated before giving up.
_STALL_LIMIT = 10


class SdpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class SdpSettings:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iter: int = 200
    # Expected magnitude of the primal blocks; None derives it from the
    # constraint bounds. Callers that know the solution scale (e.g. unit
    # diagonal constraints) should pin it to avoid scale-mismatch crawls.
    scale_hint: float | None = None


@dataclass
class SdpConstraint:
    """sum_i Tr(blocks[i] X_i) relation bound, with Hermitian coefficient blocks."""

    blocks: dict[int, np.ndarray]
    relation: str  # "==", "<=" or ">="
    bound: float


@dataclass
class LmiTerm:
    """One affine term of an LMI map.

    For a matrix variable block the term contributes
    sign * factor^H X_block factor with factor of shape (n_block, lmi_dim).
    For a 1x1 (scalar) block, factor is a (lmi_dim, lmi_dim) Hermitian
    coefficient and the term contributes sign * x * factor.
    """

    block: int
    factor: np.ndarray
    sign: float = 1.0


@dataclass
class LmiConstraint:
    """const + sum of terms must be PSD."""

    dim: int
    const: np.ndarray
    terms: list[LmiTerm]


@dataclass
class SdpProblem:
    block_dims: list[int]
    objective: dict[int, np.ndarray]
    constraints: list[SdpConstraint] = field(default_factory=list)
    lmi_constraints: list[LmiConstraint] = field(default_factory=list)

    def validate(self) -> None:
        if not self.block_dims:
            raise ValueError("at least one variable block is required")
        for d in self.block_dims:
            if d < 1:
                raise ValueError("block dimensions must be positive")
        for b, c in self.objective.items():
            self._check_block_matrix("objective", b, c)
        for j, con in enumerate(self.constraints):
            if con.relation not in ("==", "<=", ">="):
                raise ValueError(f"constraint {j}: unknown relation {con.relation!r}")
            if not math.isfinite(con.bound):
                raise ValueError(f"constraint {j}: bound must be finite")
            if not con.blocks:
                raise ValueError(f"constraint {j}: empty coefficient set")
            for b, a in con.blocks.items():
                self._check_block_matrix(f"constraint {j}", b, a)
        for k, lmi in enumerate(self.lmi_constraints):
            if lmi.dim < 1:
                raise ValueError(f"lmi {k}: dimension must be positive")
            if lmi.const.shape != (lmi.dim, lmi.dim):
                raise ValueError(f"lmi {k}: constant term has wrong shape")
            as_hermitian(lmi.const)
            for t in lmi.terms:
                if not 0 <= t.block < len(self.block_dims):
                    raise ValueError(f"lmi {k}: unknown block {t.block}")
                n = self.block_dims[t.block]
                if n == 1 and t.factor.shape == (lmi.dim, lmi.dim):
                    as_hermitian(t.factor)
                elif t.factor.shape != (n, lmi.dim):
                    raise ValueError(
                        f"lmi {k}: factor shape {t.factor.shape} incompatible with "
                        f"block dim {n} and lmi dim {lmi.dim}"
                    )

    def _check_block_matrix(self, where: str, b: int, a: np.ndarray) -> None:
        if not 0 <= b < len(self.block_dims):
            raise ValueError(f"{where}: unknown block {b}")
        d = self.block_dims[b]
        if a.shape != (d, d):
            raise ValueError(f"{where}: block {b} matrix has shape {a.shape}, expected ({d},{d})")
        as_hermitian(a)

    def dump(self, fh) -> None:
        """Line-oriented text dump for cross-checking against external solvers.

        Format: one `blocks` line with dimensions; `objective`/`coeff` lines
        list nonzero upper-triangle entries as `block i j re im`; each
        constraint opens with `constraint idx relation bound`; each LMI
        opens with `lmi idx dim` followed by `const`/`term` lines.
        """
        fh.write("blocks " + " ".join(str(d) for d in self.block_dims) + "\n")
        for b in sorted(self.objective):
            for i, j, re, im in _nonzero_entries(self.objective[b]):
                fh.write(f"objective {b} {i} {j} {re!r} {im!r}\n")
        for idx, con in enumerate(self.constraints):
            fh.write(f"constraint {idx} {con.relation} {con.bound!r}\n")
            for b in sorted(con.blocks):
                for i, j, re, im in _nonzero_entries(con.blocks[b]):
                    fh.write(f"coeff {b} {i} {j} {re!r} {im!r}\n")
        for idx, lmi in enumerate(self.lmi_constraints):
            fh.write(f"lmi {idx} {lmi.dim}\n")
            for i, j, re, im in _nonzero_entries(lmi.const):
                fh.write(f"const {i} {j} {re!r} {im!r}\n")
            for t in lmi.terms:
                fh.write(f"term {t.block} {t.sign!r}\n")
                arr = np.atleast_2d(t.factor)
                for i in range(arr.shape[0]):
                    for j in range(arr.shape[1]):
                        v = complex(arr[i, j])
                        if v != 0:
                            fh.write(f"factor {i} {j} {v.real!r} {v.imag!r}\n")


def _nonzero_entries(a: np.ndarray):
    a = np.asarray(a)
    for i in range(a.shape[0]):
        for j in range(i, a.shape[1]):
            v = complex(a[i, j])
            if v != 0:
                yield i, j, v.real, v.imag


@dataclass
class SdpSolution:
    status: SdpStatus
    primal_blocks: list[np.ndarray]
    objective_value: float
    duality_gap: float
    iterations: int
    gap_history: list[float] = field(default_factory=list)


class SdpError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Canonicalization helpers


def _is_complex_data(a: np.ndarray) -> bool:
    return np.iscomplexobj(a) and float(np.abs(np.asarray(a).imag).max(initial=0.0)) > 0.0


def _embed(a: np.ndarray) -> np.ndarray:
    """Real embedding of a complex Hermitian coefficient, with the 1/2 factor
    that makes <embed(A), X_emb> equal the complex-domain value."""
    ar = np.asarray(a).real
    ai = np.asarray(a).imag if np.iscomplexobj(a) else np.zeros_like(ar)
    out = np.block([[ar, -ai], [ai, ar]])
    return 0.5 * (out + out.T) * 0.5


def _unembed(x: np.ndarray, d: int) -> np.ndarray:
    x11 = x[:d, :d]
    x22 = x[d:, d:]
    x12 = x[:d, d:]
    x21 = x[d:, :d]
    out = 0.5 * (x11 + x22) + 0.5j * (x21 - x12)
    return 0.5 * (out + out.conj().T)


def _hermitian_basis(d: int, complex_block: bool):
    """Orthogonal-ish basis of the Hermitian (or real symmetric) d x d space."""
    basis = []
    for p in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[p, p] = 1.0
        basis.append(e)
    for p in range(d):
        for q in range(p + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[p, q] = 0.5
            e[q, p] = 0.5
            basis.append(e)
            if complex_block:
                e = np.zeros((d, d), dtype=complex)
                e[p, q] = 0.5j
                e[q, p] = -0.5j
                basis.append(e)
    return basis


def _facial_reduction(problem: SdpProblem):
    """Presolve: eliminate single-block equalities Tr(A X) = 0 with semidefinite A.

    Such a row forces range(X) into ker(A), so the block is reparametrized
    as X = B X~ B^H with B an orthonormal kernel basis and the degenerate
    row dropped. This restores a strict interior (the raw row admits none)
    and makes the eliminated constraint hold exactly at the solution.

    Returns (objective, constraints, lmi_terms_map, reducers) where
    reducers[b] is None or the accumulated basis for block b.
    """
    n = len(problem.block_dims)
    reducers: list[np.ndarray | None] = [None] * n
    red_dims = list(problem.block_dims)
    objective = {b: np.asarray(c, dtype=complex) for b, c in problem.objective.items()}
    cons = [
        ({b: np.asarray(a, dtype=complex) for b, a in c.blocks.items()}, c.relation, float(c.bound))
        for c in problem.constraints
    ]
    lmi_factors = [
        [np.asarray(t.factor, dtype=complex) for t in lmi.terms]
        for lmi in problem.lmi_constraints
    ]

    changed = True
    while changed:
        changed = False
        for idx, (coeffs, relation, bound) in enumerate(cons):
            if relation != "==" or bound != 0.0 or len(coeffs) != 1:
                continue
            (blk, a), = coeffs.items()
            if red_dims[blk] <= 1:
                continue
            vals, vecs = np.linalg.eigh(0.5 * (a + a.conj().T))
            top = max(abs(float(vals[0])), abs(float(vals[-1])))
            if top <= 0.0:
                continue
            if float(vals[0]) < -1e-10 * top and float(vals[-1]) > 1e-10 * top:
                continue  # indefinite coefficient, leave the row alone
            if float(vals[-1]) < 0:
                vals = -vals[::-1]
                vecs = vecs[:, ::-1]
            kernel = vecs[:, np.abs(vals) <= 1e-10 * top]
            if kernel.shape[1] == red_dims[blk]:
                continue  # coefficient is numerically zero; handled later
            basis = kernel if kernel.shape[1] > 0 else np.zeros((red_dims[blk], 1), dtype=complex)

            def shrink(mat: np.ndarray) -> np.ndarray:
                return basis.conj().T @ mat @ basis

            if blk in objective:
                objective[blk] = shrink(objective[blk])
            for c2, _, _ in cons:
                if blk in c2 and c2 is not coeffs:
                    c2[blk] = shrink(c2[blk])
            for li, lmi in enumerate(problem.lmi_constraints):
                for ti, t in enumerate(lmi.terms):
                    if t.block == blk and problem.block_dims[blk] > 1:
                        lmi_factors[li][ti] = basis.conj().T @ lmi_factors[li][ti]
            reducers[blk] = basis if reducers[blk] is None else reducers[blk] @ basis
            red_dims[blk] = basis.shape[1]
            del cons[idx]
            changed = True
            break
    return objective, cons, lmi_factors, reducers, red_dims


def solve(problem: SdpProblem, settings: SdpSettings | None = None) -> SdpSolution:
    """Solve a small dense SDP, self-initializing from an infeasible start."""
    settings = settings or SdpSettings()
    problem.validate()

    n_user = len(problem.block_dims)
    objective_red, cons_red, lmi_factors, reducers, red_dims = _facial_reduction(problem)

    dims = list(red_dims)
    is_complex = [False] * n_user
    for b, c in objective_red.items():
        is_complex[b] = is_complex[b] or _is_complex_data(c)
    for coeffs, _, _ in cons_red:
        for b, a in coeffs.items():
            is_complex[b] = is_complex[b] or _is_complex_data(a)
    for b in range(n_user):
        if reducers[b] is not None and _is_complex_data(reducers[b]):
            is_complex[b] = True

    # rows: (coeffs per internal block, bound), all equalities after slacks.
    rows: list[tuple[dict[int, np.ndarray], float]] = []
    pending: list[tuple[dict[int, np.ndarray], str, float]] = []

    for coeffs, relation, bound in cons_red:
        pending.append((dict(coeffs), relation, bound))

    # LMI constraints: one PSD slack block plus entrywise equality rows.
    for li, lmi in enumerate(problem.lmi_constraints):
        lmi_complex = _is_complex_data(lmi.const)
        for ti, t in enumerate(lmi.terms):
            lmi_complex = lmi_complex or _is_complex_data(lmi_factors[li][ti]) or (
                dims[t.block] > 1 and is_complex[t.block]
            )
        slack_idx = len(dims)
        dims.append(lmi.dim)
        is_complex.append(lmi_complex)
        for h in _hermitian_basis(lmi.dim, lmi_complex):
            coeffs: dict[int, np.ndarray] = {slack_idx: h}
            for ti, t in enumerate(lmi.terms):
                factor = lmi_factors[li][ti]
                if problem.block_dims[t.block] == 1 and factor.shape == (lmi.dim, lmi.dim):
                    val = -t.sign * float(np.real(np.trace(h @ factor)))
                    g = np.array([[val]], dtype=complex)
                else:
                    g = -t.sign * (factor @ h @ factor.conj().T)
                if t.block in coeffs:
                    coeffs[t.block] = coeffs[t.block] + g
                else:
                    coeffs[t.block] = g
            bound = float(np.real(np.trace(h @ lmi.const)))
            pending.append((coeffs, "==", bound))

    # Relations: fold >= into <=, then add scalar slacks for <=.
    for coeffs, relation, bound in pending:
        if relation == ">=":
            coeffs = {b: -a for b, a in coeffs.items()}
            bound = -bound
            relation = "<="
        if relation == "<=":
            slack_idx = len(dims)
            dims.append(1)
            is_complex.append(False)
            coeffs[slack_idx] = np.array([[1.0]], dtype=complex)
        rows.append((coeffs, bound))

    # Real embedding of complex blocks.
    core_dims = [2 * d if is_complex[i] else d for i, d in enumerate(dims)]
    n_blocks = len(dims)

    def to_core(b: int, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=complex)
        if is_complex[b]:
            return _embed(a)
        herm = 0.5 * (a + a.conj().T)
        return np.ascontiguousarray(herm.real)

    c_core = [np.zeros((core_dims[i], core_dims[i])) for i in range(n_blocks)]
    for b, c in objective_red.items():
        c_core[b] = c_core[b] + to_core(b, c)

    a_rows = []
    b_vec = []
    for coeffs, bound in rows:
        a_rows.append({b: to_core(b, a) for b, a in coeffs.items()})
        b_vec.append(bound)
    b_arr = np.array(b_vec, dtype=float)

    # Drop numerically empty rows (0 = 0); an empty row with a nonzero bound
    # is a trivially infeasible problem.
    keep_rows: list[int] = []
    for j, row in enumerate(a_rows):
        norm = math.sqrt(sum(float(np.sum(a * a)) for a in row.values()))
        if norm <= 1e-300:
            if abs(b_arr[j]) > settings.feas_tol:
                return SdpSolution(SdpStatus.INFEASIBLE, [], 0.0, float("inf"), 0)
        else:
            keep_rows.append(j)
    a_rows = [a_rows[j] for j in keep_rows]
    b_arr = b_arr[keep_rows]
    if len(a_rows) == 0:
        raise SdpError("problem has no effective constraints")

    core = _IpmCore(core_dims, c_core, a_rows, b_arr, settings)
    status, x_core, iterations, relgap, gap_history = core.run()

    primal: list[np.ndarray] = []
    if status in (SdpStatus.OPTIMAL, SdpStatus.MAX_ITERATIONS):
        for i in range(n_user):
            xb = x_core[i]
            if is_complex[i]:
                xb = _unembed(xb, red_dims[i])
            else:
                xb = 0.5 * (xb + xb.T)
            if reducers[i] is not None:
                xb = reducers[i] @ xb @ reducers[i].conj().T
                xb = 0.5 * (xb + xb.conj().T)
                if not _is_complex_data(np.asarray(xb)):
                    xb = xb.real
            primal.append(xb)
        obj = 0.0
        for b, c in problem.objective.items():
            obj += float(np.real(np.trace(np.asarray(c, dtype=complex) @ primal[b])))
    else:
        obj = 0.0

    return SdpSolution(
        status=status,
        primal_blocks=primal,
        objective_value=obj,
        duality_gap=relgap,
        iterations=iterations,
        gap_history=gap_history,
    )


# ---------------------------------------------------------------------------
# Interior-point core (real symmetric blocks, equality rows only)


class _IpmCore:
    """Infeasible-start HKM predictor-corrector on min <C,X> s.t. A(X)=b, X PSD.

    The public problem is a maximization; the sign flip happens here. Rows
    and the objective are normalized to unit Frobenius norm and variables
    rescaled so that max |b| = 1, which makes the stopping tolerances
    effectively relative.
    """

    def __init__(self, dims, c_blocks, a_rows, b, settings: SdpSettings):
        self.dims = dims
        self.nb = len(dims)
        self.m = len(a_rows)
        self.settings = settings
        self.total_dim = sum(dims)

        # Row normalization.
        self.row_scale = np.ones(self.m)
        self.rows = []
        for j, row in enumerate(a_rows):
            norm = math.sqrt(sum(float(np.sum(a * a)) for a in row.values()))
            self.row_scale[j] = norm
            self.rows.append({bk: a / norm for bk, a in row.items()})
        b_scaled = np.asarray(b, dtype=float) / self.row_scale

        # Variable scale: bring max |b| (or the caller's hint) to 1.
        if settings.scale_hint is not None and settings.scale_hint > 0:
            self.var_scale = float(settings.scale_hint)
        else:
            self.var_scale = max(float(np.max(np.abs(b_scaled))), 1e-12)
        self.b = b_scaled / self.var_scale

        # Objective normalization (internal minimization of -C).
        c_norm = math.sqrt(sum(float(np.sum(c * c)) for c in c_blocks))
        self.obj_scale = c_norm if c_norm > 0 else 1.0
        self.c = [-(c / self.obj_scale) for c in c_blocks]

        # Stacked row coefficients per block for vectorized assembly.
        self.row_stack = []
        offs = []
        off = 0
        for d in dims:
            offs.append(off)
            off += d * d
        self.vec_len = off
        self.avec = np.zeros((self.m, self.vec_len))
        for j, row in enumerate(self.rows):
            for bk, a in row.items():
                self.avec[j, offs[bk]: offs[bk] + dims[bk] ** 2] = a.reshape(-1)
        self.offs = offs
        for bk in range(self.nb):
            d = dims[bk]
            self.row_stack.append(
                self.avec[:, offs[bk]: offs[bk] + d * d].reshape(self.m, d, d)
            )
        self.b_norm = float(np.linalg.norm(self.b))
        self.c_norm = math.sqrt(sum(float(np.sum(c * c)) for c in self.c))

    # -- block helpers

    def _apply_a(self, xs) -> np.ndarray:
        vec = np.concatenate([x.reshape(-1) for x in xs])
        return self.avec @ vec

    def _apply_at(self, y) -> list[np.ndarray]:
        vec = self.avec.T @ y
        out = []
        for bk in range(self.nb):
            d = self.dims[bk]
            out.append(vec[self.offs[bk]: self.offs[bk] + d * d].reshape(d, d))
        return out

    @staticmethod
    def _inner(xs, zs) -> float:
        return float(sum(np.sum(x * z) for x, z in zip(xs, zs)))

    def _max_step(self, xs, dxs) -> float:
        """Largest alpha with X + alpha dX still PSD, via scaled eigenvalues."""
        alpha = np.inf
        for x, dx in zip(xs, dxs):
            if not np.all(np.isfinite(dx)):
                return 0.0
            try:
                ell = np.linalg.cholesky(x)
                s = np.linalg.solve(ell, np.linalg.solve(ell, dx).T)
                s = 0.5 * (s + s.T)
                lam_min = float(np.linalg.eigvalsh(s)[0])
            except np.linalg.LinAlgError:
                return 0.0
            if lam_min < 0:
                alpha = min(alpha, -1.0 / lam_min)
        return alpha

    def run(self):
        dims = self.dims
        k_total = float(self.total_dim)
        eta = max(1.0, math.sqrt(k_total))
        xs = [eta * np.eye(d) for d in dims]
        zs = [max(1.0, self.c_norm / math.sqrt(k_total)) * np.eye(d) for d in dims]
        y = np.zeros(self.m)

        best = None
        best_score = np.inf
        stall = 0
        gap_history: list[float] = []
        status = SdpStatus.MAX_ITERATIONS
        it = 0

        for it in range(1, self.settings.max_iter + 1):
            if not all(np.all(np.isfinite(x)) for x in xs) \
                    or not all(np.all(np.isfinite(z)) for z in zs) \
                    or not np.all(np.isfinite(y)):
                status = SdpStatus.MAX_ITERATIONS
                break
            mu = self._inner(xs, zs) / k_total
            rp = self.b - self._apply_a(xs)
            aty = self._apply_at(y)
            rd = [self.c[i] - aty[i] - zs[i] for i in range(self.nb)]

            pobj = self._inner(self.c, xs)
            dobj = float(self.b @ y)
            pinf = float(np.linalg.norm(rp)) / (1.0 + self.b_norm)
            dinf = math.sqrt(sum(float(np.sum(r * r)) for r in rd)) / (1.0 + self.c_norm)
            # On degenerate optimal faces |pobj - dobj| bottoms out at
            # ||y|| * ||rp|| while the complementarity keeps shrinking; either
            # measure certifies the gap once the residuals are in tolerance.
            relgap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
            mu_rel = self._inner(xs, zs) / (1.0 + abs(pobj) + abs(dobj))
            gap_meas = min(relgap, mu_rel)
            gap_history.append(self._inner(xs, zs))

            score = max(pinf, dinf, gap_meas)
            if score < best_score:
                best_score = score
                best = ([x.copy() for x in xs], y.copy(), gap_meas)

            if pinf <= self.settings.feas_tol and dinf <= self.settings.feas_tol \
                    and gap_meas <= self.settings.gap_tol:
                status = SdpStatus.OPTIMAL
                best = ([x.copy() for x in xs], y.copy(), gap_meas)
                break

            # Farkas-style certificates for infeasible / unbounded problems.
            bty = dobj
            if bty > 1e4 * (1.0 + self.b_norm):
                ray = self._apply_at(y / bty)
                lam = min(float(np.linalg.eigvalsh(-r)[0]) for r in ray)
                scale = max(math.sqrt(sum(float(np.sum(r * r)) for r in ray)), 1e-30)
                if lam >= -1e-7 * scale:
                    status = SdpStatus.INFEASIBLE
                    break
            if pobj < -1e5 * (1.0 + self.b_norm):
                # Primal improving ray: A(X)/|<C,X>| -> 0 while <C,X> -> -inf.
                anorm = float(np.linalg.norm(self._apply_a(xs))) / (-pobj)
                if anorm <= 1e-6:
                    status = SdpStatus.UNBOUNDED
                    break

            if stall >= _STALL_LIMIT:
                status = SdpStatus.MAX_ITERATIONS
                break

            # Factorizations shared by predictor and corrector.
            try:
                zinv = [np.linalg.inv(z) for z in zs]
            except np.linalg.LinAlgError:
                status = SdpStatus.MAX_ITERATIONS
                break
            if not all(np.all(np.isfinite(zi)) for zi in zinv):
                status = SdpStatus.MAX_ITERATIONS
                break

            m_mat = self._schur(xs, zinv)
            chol = self._chol_with_jitter(m_mat)
            if chol is None:
                status = SdpStatus.MAX_ITERATIONS
                break

            def direction(sigma_mu: float, corr):
                w = []
                for i in range(self.nb):
                    t = xs[i] @ rd[i]
                    if corr is not None:
                        t = t + corr[i]
                    wi = -xs[i] - t @ zinv[i]
                    if sigma_mu != 0.0:
                        wi = wi + sigma_mu * zinv[i]
                    w.append(wi)
                g = rp - self._apply_a(w)
                dy = self._solve_schur(m_mat, chol, g)
                atdy = self._apply_at(dy)
                dz = [rd[i] - atdy[i] for i in range(self.nb)]
                dx = []
                for i in range(self.nb):
                    v = w[i] + xs[i] @ atdy[i] @ zinv[i]
                    dx.append(0.5 * (v + v.T))
                return dx, dy, dz

            # Predictor (affine scaling).
            dx_p, dy_p, dz_p = direction(0.0, None)
            ap = min(1.0, _STEP_FRACTION * self._max_step(xs, dx_p))
            ad = min(1.0, _STEP_FRACTION * self._max_step(zs, dz_p))
            mu_aff = self._inner(
                [xs[i] + ap * dx_p[i] for i in range(self.nb)],
                [zs[i] + ad * dz_p[i] for i in range(self.nb)],
            ) / k_total
            # Aggressive cubic centering only once steps are long (SDPT3-style).
            expon = max(1.0, 3.0 * min(ap, ad) ** 2)
            sigma = min(max((max(mu_aff, 0.0) / mu) ** expon, 1e-8), 0.999)

            # Corrector.
            corr = [dx_p[i] @ dz_p[i] for i in range(self.nb)]
            dx, dy, dz = direction(sigma * mu, corr)
            ap = min(1.0, _STEP_FRACTION * self._max_step(xs, dx))
            ad = min(1.0, _STEP_FRACTION * self._max_step(zs, dz))

            # A frozen iterate (vanishing steps) is a numerical breakdown.
            if max(ap, ad) < 1e-7:
                stall += 1
            else:
                stall = 0

            xs = [0.5 * ((xs[i] + ap * dx[i]) + (xs[i] + ap * dx[i]).T) for i in range(self.nb)]
            zs = [0.5 * ((zs[i] + ad * dz[i]) + (zs[i] + ad * dz[i]).T) for i in range(self.nb)]
            y = y + ad * dy

        if best is None:
            best = (xs, y, 1.0)
        xs_best, _, relgap_best = best
        x_out = [self.var_scale * x for x in xs_best]
        return status, x_out, it, relgap_best, gap_history

    def _schur(self, xs, zinv) -> np.ndarray:
        m_mat = np.zeros((self.m, self.m))
        for bk in range(self.nb):
            r = self.row_stack[bk]
            t = xs[bk][None, :, :] @ r @ zinv[bk][None, :, :]
            t = np.swapaxes(t, 1, 2)
            m_mat += r.reshape(self.m, -1) @ t.reshape(self.m, -1).T
        return 0.5 * (m_mat + m_mat.T)

    @staticmethod
    def _chol_with_jitter(m_mat: np.ndarray):
        # Ridge proportional to the matrix's own scale; absolute floors would
        # swamp the Schur system once the iterates get small.
        base = max(float(np.trace(m_mat)) / max(m_mat.shape[0], 1), 1e-300)
        jitter = 1e-14 * base
        for _ in range(12):
            try:
                return np.linalg.cholesky(m_mat + jitter * np.eye(m_mat.shape[0]))
            except np.linalg.LinAlgError:
                jitter *= 100.0
        return None

    @staticmethod
    def _solve_schur(m_mat: np.ndarray, ell: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Solve M dy = g through the jittered factor, with one guarded round
        of iterative refinement against the unjittered matrix."""
        dy = np.linalg.solve(ell.T, np.linalg.solve(ell, g))
        r = g - m_mat @ dy
        r_norm = float(np.linalg.norm(r))
        if r_norm <= 1e-12 * max(1.0, float(np.linalg.norm(g))):
            return dy
        dy2 = dy + np.linalg.solve(ell.T, np.linalg.solve(ell, r))
        r2 = float(np.linalg.norm(g - m_mat @ dy2))
        return dy2 if r2 < r_norm else dy


# ---------------------------------------------------------------------------
# Gaussian randomization


class GaussianRandomizationError(RuntimeError):
    """No feasible candidate was produced; carries the best infeasible draw."""

    def __init__(self, message: str, best_candidate: np.ndarray | None):
        super().__init__(message)
        self.best_candidate = best_candidate


def gaussian_randomization(
    w: np.ndarray,
    samples: int,
    feasibility_projector,
    objective,
    rng: np.random.Generator | int = 0,
) -> np.ndarray:
    """Best-of-N rank-one recovery from a PSD relaxation solution.

    Draws z ~ CN(0, W), maps each draw through feasibility_projector
    (which returns a feasible vector or None), and returns the feasible
    candidate maximizing the objective. Deterministic for a fixed rng seed.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(rng))))
    w = as_hermitian(np.asarray(w, dtype=complex))
    vals, vecs = np.linalg.eigh(w)
    vals = np.clip(vals, 0.0, None)
    factor = vecs * np.sqrt(vals)
    n = w.shape[0]

    best_vec = None
    best_obj = -np.inf
    best_raw = None
    for _ in range(samples):
        xi = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2.0)
        z = factor @ xi
        if best_raw is None:
            best_raw = z
        cand = feasibility_projector(z)
        if cand is None:
            continue
        val = float(objective(cand))
        if val > best_obj:
            best_obj = val
            best_vec = cand
    if best_vec is None:
        raise GaussianRandomizationError(
            f"no feasible candidate after {samples} randomization samples", best_raw
        )
    return best_vec
