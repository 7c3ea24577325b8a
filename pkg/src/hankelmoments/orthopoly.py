"""Orthonormal-polynomial transition matrices from Hankel truncations.

``factor`` peels the truncation into ``C = D^{1/2} U`` (unit upper triangular
``U``, positive pivots ``D``) so that ``C^t C`` reproduces the matrix and
``B = C^{-1}`` carries the polynomial coefficients: column ``n`` of ``B``
holds the monomial coefficients of the n-th orthonormal polynomial.  Under
the rational backend everything stays square-root-free and exact; identities
are checked in that form.

Hankel truncations of bounded-support families are notoriously ill
conditioned (Hilbert-type condition numbers grow like e^{3.5 N}), so float
factorizations run on a precision ladder: machine floats up to a small size,
then big floats with dimension- and scale-dependent bits, doubling on pivot
failure up to a hard cap.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath

from .backends import (
    BIGFLOAT,
    F64,
    RATIONAL,
    Backend,
    F64_BACKEND,
    bigfloat,
    to_float,
)
from .moments import MomentSequence
from .triangular import (
    PositivityError,
    invert_unit_upper,
    ldl_decompose,
    utdu_product,
)


@dataclass(frozen=True)
class PrecisionPolicy:
    """Constants of the factorization precision ladder."""

    machine_max_n: int = 12
    bits_per_dim: int = 4
    base_margin_bits: int = 64
    scale_aware: bool = True
    retry_cap_bits: int = 65536
    escalate_max_n: int = 64  # spectral profiles refuse big-float work above this

    def ladder_bits(self, ms: MomentSequence, n: int) -> int:
        bits = self.bits_per_dim * n + self.base_margin_bits
        if self.scale_aware:
            bits += max(0, _max_moment_log2(ms, 2 * n - 1))
        return max(bits, 64)


DEFAULT_POLICY = PrecisionPolicy()


def _max_moment_log2(ms: MomentSequence, count: int) -> int:
    """ceil(log2 max |m_j|) over j < count, probed at low precision."""
    probe = ms.with_backend(bigfloat(64))
    with mpmath.workprec(64):
        top = max(abs(probe.moment(j)) for j in range(count))
        if top <= 1:
            return 0
        return int(mpmath.ceil(mpmath.log(top, 2)))


@dataclass(frozen=True)
class TriangularPair:
    """Factorization data: matrix = U^t diag(pivots) U, plus the inverse of U.

    ``backend`` is the scalar backend of the stored entries; ``precision_bits``
    records the mantissa actually used (53 for f64, None for exact data).
    """

    n: int
    backend: Backend
    unit_upper: tuple
    pivots: tuple
    unit_upper_inv: tuple
    precision_bits: int | None

    # -- views ---------------------------------------------------------------

    def _view_backend(self) -> Backend:
        return F64_BACKEND if self.backend.kind == RATIONAL else self.backend

    def c_matrix(self):
        """Upper-triangular Cholesky factor C = D^{1/2} U (numeric view)."""
        vb = self._view_backend()
        with vb.context():
            roots = [vb.sqrt(vb.convert(d)) for d in self.pivots]
            return [
                [roots[k] * vb.convert(self.unit_upper[k][j]) for j in range(self.n)]
                for k in range(self.n)
            ]

    def b_matrix(self):
        """Inverse factor B = U^{-1} D^{-1/2}; column n holds P_n's coefficients."""
        vb = self._view_backend()
        with vb.context():
            roots = [vb.sqrt(vb.convert(d)) for d in self.pivots]
            return [
                [vb.convert(self.unit_upper_inv[k][j]) / roots[j] for j in range(self.n)]
                for k in range(self.n)
            ]

    def monic_values(self, x):
        """Exact values pi_k(x) of the monic orthogonal polynomials.

        pi_k has the coefficients of column k of U^{-1}; P_k = pi_k / sqrt(d_k).
        Stays in the pair's scalar backend (exact for rational pairs).
        """
        x = self.backend.convert(x)
        with self.backend.context():
            values = []
            for k in range(self.n):
                acc = self.backend.zero()
                for j in range(k, -1, -1):
                    acc = acc * x + self.unit_upper_inv[j][k]
                values.append(acc)
            return values

    def reconstruction(self):
        """U^t D U, for reconstruction checks against the source matrix."""
        with self.backend.context():
            return utdu_product(
                [list(r) for r in self.unit_upper], list(self.pivots),
                self.backend.zero(),
            )

    def inverse_residual_identity(self):
        """U * U^{-1}, which must be the identity (exactly, when rational)."""
        from .triangular import mat_mul

        with self.backend.context():
            return mat_mul(
                [list(r) for r in self.unit_upper],
                [list(r) for r in self.unit_upper_inv],
                self.backend.zero(),
            )

    def hs_norm_sq_b(self):
        """Squared Frobenius norm of B (exact for rational pairs)."""
        with self.backend.context():
            acc = self.backend.zero()
            for j in range(self.n):
                col = self.backend.zero()
                for k in range(j + 1):
                    col = col + self.unit_upper_inv[k][j] * self.unit_upper_inv[k][j]
                acc = acc + col / self.pivots[j]
            return acc


def factor(
    ms: MomentSequence,
    n: int,
    policy: PrecisionPolicy | None = None,
) -> TriangularPair:
    """Factor the N x N truncation on the precision ladder.

    Rational input stays exact.  f64 input is factored at machine precision up
    to ``policy.machine_max_n`` and on the big-float ladder beyond; explicit
    big-float backends start from their own precision.  Pivot failures double
    the precision up to the cap before reporting positivity failure.
    """
    policy = policy or DEFAULT_POLICY
    if n < 1:
        raise ValueError("factorization size must be >= 1")
    ms.check_truncation(n)
    backend = ms.backend

    if backend.kind == RATIONAL:
        rows = [[ms.moment(k + l) for l in range(n)] for k in range(n)]
        unit_upper, pivots = ldl_decompose(rows, n, backend.zero())
        inv = invert_unit_upper(unit_upper, n, backend.zero())
        return TriangularPair(
            n, backend,
            tuple(tuple(r) for r in unit_upper),
            tuple(pivots),
            tuple(tuple(r) for r in inv),
            None,
        )

    if backend.kind == F64 and n <= policy.machine_max_n:
        rows = [[to_float(ms.moment(k + l)) for l in range(n)] for k in range(n)]
        try:
            unit_upper, pivots = ldl_decompose(rows, n, 0.0)
        except PositivityError as err:
            raise PositivityError(
                err.dimension,
                str(err) + " (machine precision; the ladder may still succeed)",
                precision_suspect=True,
            ) from None
        inv = invert_unit_upper(unit_upper, n, 0.0)
        return TriangularPair(
            n, backend,
            tuple(tuple(r) for r in unit_upper),
            tuple(pivots),
            tuple(tuple(r) for r in inv),
            53,
        )

    bits = policy.ladder_bits(ms, n)
    if backend.kind == BIGFLOAT:
        bits = max(bits, backend.precision)
    bits = max(bits, 64)
    last_err = None
    while bits <= policy.retry_cap_bits:
        work = ms.with_backend(bigfloat(bits))
        with mpmath.workprec(bits):
            rows = [[work.moment(k + l) for l in range(n)] for k in range(n)]
            try:
                unit_upper, pivots = ldl_decompose(
                    rows, n, mpmath.mpf(0), precision_suspect=True
                )
                inv = invert_unit_upper(unit_upper, n, mpmath.mpf(0))
            except PositivityError as err:
                last_err = err
                bits *= 2
                continue
        return TriangularPair(
            n, bigfloat(bits),
            tuple(tuple(r) for r in unit_upper),
            tuple(pivots),
            tuple(tuple(r) for r in inv),
            bits,
        )
    raise PositivityError(
        last_err.dimension if last_err else n,
        f"not positive definite at any ladder precision up to "
        f"{policy.retry_cap_bits} bits: {last_err}",
        precision_suspect=True,
    )


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def eval_polys(tp: TriangularPair, x):
    """Numeric values (P_0(x), ..., P_{N-1}(x)); leading coefficients positive.

    Square roots force a float view: rational pairs evaluate at f64.  Exact
    checks should use :meth:`TriangularPair.monic_values` instead.
    """
    vb = tp._view_backend()
    with vb.context():
        xv = vb.convert(x)
        values = []
        for k in range(tp.n):
            acc = vb.zero()
            for j in range(k, -1, -1):
                acc = acc * xv + vb.convert(tp.unit_upper_inv[j][k])
            values.append(acc / vb.sqrt(vb.convert(tp.pivots[k])))
        return values


@dataclass(frozen=True)
class PFunctionPartial:
    value: object
    last_increment: object
    increments: list

    def to_json(self):
        from .backends import scalar_to_json

        return {
            "value": scalar_to_json(self.value),
            "last_increment": scalar_to_json(self.last_increment),
            "increments": [scalar_to_json(x) for x in self.increments],
        }


def p_function(tp: TriangularPair, z, n_max: int) -> PFunctionPartial:
    """Partial sums of the squared orthonormal polynomial values at ``z``.

    Returns (sum_{n<=n_max} P_n(z)^2)^{1/2} together with the last increment;
    bounded increments over growing ``n_max`` are the numeric signature of
    indeterminate-type behavior.
    """
    if not 0 <= n_max < tp.n:
        raise ValueError("n_max must satisfy 0 <= n_max < N")
    values = eval_polys(tp, z)
    vb = tp._view_backend()
    with vb.context():
        increments = [v * v for v in values[: n_max + 1]]
        total = vb.zero()
        for inc in increments:
            total = total + inc
        return PFunctionPartial(vb.sqrt(total), increments[-1], increments)


# ---------------------------------------------------------------------------
# three-term recurrence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecurrenceCoeffs:
    """x P_n = beta_{n+1} P_{n+1} + alpha_n P_n + beta_n P_{n-1}.

    ``alpha[n]`` holds alpha_n for n < N-1; ``beta[n]`` holds beta_{n+1}.
    """

    alpha: list
    beta: list

    def to_json(self):
        from .backends import scalar_to_json

        return {
            "alpha": [scalar_to_json(a) for a in self.alpha],
            "beta": [scalar_to_json(b) for b in self.beta],
        }


def recurrence(tp: TriangularPair) -> RecurrenceCoeffs:
    """Extract recurrence coefficients from consecutive coefficient columns.

    The monomial coefficients of x P_n are column n of B shifted down one
    degree; conversion back through C reads off alpha_n and beta_{n+1}.
    """
    if tp.n < 3:
        raise ValueError("recurrence extraction needs N >= 3")
    vb = tp._view_backend()
    with vb.context():
        b = tp.b_matrix()
        roots = [vb.sqrt(vb.convert(d)) for d in tp.pivots]
        alpha = []
        beta = []
        for n in range(tp.n - 1):
            shifted = [vb.zero()] + [b[j][n] for j in range(n + 1)]
            gamma = []
            for k in range(n + 2):
                acc = vb.zero()
                for j in range(k, n + 2):
                    acc = acc + vb.convert(tp.unit_upper[k][j]) * shifted[j]
                gamma.append(roots[k] * acc)
            alpha.append(gamma[n])
            beta.append(gamma[n + 1])
        return RecurrenceCoeffs(alpha=alpha, beta=beta)
