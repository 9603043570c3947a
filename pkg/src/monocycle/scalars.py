"""Exact scalar arithmetic and linear algebra over the supported coefficient rings.

A coefficient ring is one of:

  * the prime field F_p,
  * the rational field Q,
  * the localization Z_(p) of the integers at a prime p.

Elements are plain ints (F_p) or fractions.Fraction (Q and Z_(p)); the ring
object knows which values are legal and what "unit" means.  All matrix
routines work uniformly over the three rings by treating fields as the
valuation-zero case of a local ring.
"""

from fractions import Fraction

_PRIMES_OK = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _is_prime(p):
    if not isinstance(p, int) or p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


class Scalars:
    """One of F_p, Q, Z_(p).  Immutable; equality by (kind, p)."""

    def __init__(self, kind, p=None):
        if kind not in ("F", "Q", "Zloc"):
            raise ValueError("unknown scalar kind %r" % (kind,))
        if kind == "Q":
            p = None
        else:
            if not _is_prime(p):
                raise ValueError("p must be a prime, got %r" % (p,))
        self.kind = kind
        self.p = p

    def __eq__(self, other):
        return isinstance(other, Scalars) and (self.kind, self.p) == (other.kind, other.p)

    def __hash__(self):
        return hash((self.kind, self.p))

    def __repr__(self):
        if self.kind == "F":
            return "F_%d" % self.p
        if self.kind == "Q":
            return "Q"
        return "Z_(%d)" % self.p

    # -- element construction -------------------------------------------

    @property
    def zero(self):
        return 0 if self.kind == "F" else Fraction(0)

    @property
    def one(self):
        return 1 if self.kind == "F" else Fraction(1)

    @property
    def varpi(self):
        """Generator of the maximal ideal: p for Z_(p), 0 for the fields."""
        if self.kind == "Zloc":
            return Fraction(self.p)
        return self.zero

    def el(self, x):
        """Coerce an int, Fraction or "a/b" string into this ring."""
        if self.kind == "F":
            if isinstance(x, str):
                x = int(x)
            if isinstance(x, Fraction):
                if x.denominator % self.p == 0:
                    raise ValueError("denominator not invertible in %r" % self)
                return (x.numerator * pow(x.denominator, self.p - 2, self.p)) % self.p
            return int(x) % self.p
        v = Fraction(x)
        if self.kind == "Zloc" and v.denominator % self.p == 0:
            raise ValueError("%s is not an element of %r" % (v, self))
        return v

    # -- arithmetic -----------------------------------------------------

    def add(self, a, b):
        return (a + b) % self.p if self.kind == "F" else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.kind == "F" else a - b

    def neg(self, a):
        return (-a) % self.p if self.kind == "F" else -a

    def mul(self, a, b):
        return (a * b) % self.p if self.kind == "F" else a * b

    def is_zero(self, a):
        return a == 0

    def is_unit(self, a):
        if a == 0:
            return False
        if self.kind == "Zloc":
            return a.numerator % self.p != 0
        return True

    def inv(self, a):
        if not self.is_unit(a):
            raise ZeroDivisionError("%r is not a unit in %r" % (a, self))
        if self.kind == "F":
            return pow(a, self.p - 2, self.p)
        return 1 / a

    def val(self, a):
        """p-adic valuation for Z_(p); 0 on nonzero field elements; None on 0."""
        if a == 0:
            return None
        if self.kind != "Zloc":
            return 0
        n, v = a.numerator, 0
        while n % self.p == 0:
            n //= self.p
            v += 1
        return v

    def div(self, a, b):
        """Exact division a/b inside the ring; b need not be a unit over Z_(p)."""
        if b == 0:
            raise ZeroDivisionError
        if self.kind == "F":
            return self.mul(a, self.inv(b))
        q = a / b
        if self.kind == "Zloc" and q.denominator % self.p == 0:
            raise ValueError("%s does not divide %s in %r" % (b, a, self))
        return q

    # -- serialization --------------------------------------------------

    def to_json(self):
        out = {"kind": self.kind}
        if self.p is not None:
            out["p"] = self.p
        return out

    @staticmethod
    def from_json(d):
        return Scalars(d["kind"], d.get("p"))

    def el_to_json(self, a):
        if self.kind == "F":
            return a
        if a.denominator == 1:
            return a.numerator
        return "%d/%d" % (a.numerator, a.denominator)


# ---------------------------------------------------------------------------
# Dense exact linear algebra.  Matrices are lists of rows.


def zeros(S, m, n):
    z = S.zero
    return [[z] * n for _ in range(m)]


def eye(S, n):
    M = zeros(S, n, n)
    for i in range(n):
        M[i][i] = S.one
    return M


def mat_mul(S, A, B):
    m = len(A)
    k = len(B)
    n = len(B[0]) if k else 0
    C = zeros(S, m, n)
    for i in range(m):
        Ai = A[i]
        Ci = C[i]
        for t in range(k):
            a = Ai[t]
            if a == 0:
                continue
            Bt = B[t]
            for j in range(n):
                if Bt[j] != 0:
                    Ci[j] = S.add(Ci[j], S.mul(a, Bt[j]))
    return C


def mat_vec(S, A, v):
    out = []
    for row in A:
        acc = S.zero
        for a, x in zip(row, v):
            if a != 0 and x != 0:
                acc = S.add(acc, S.mul(a, x))
        out.append(acc)
    return out


def transpose(A):
    if not A:
        return []
    return [list(col) for col in zip(*A)]


def smith_form(S, A):
    """Diagonalize A by invertible row/column operations.

    Returns (diag, U, V) with U*A*V having diag on the main diagonal and
    zeros elsewhere.  diag entries are normalized: 1 over fields, a power
    of p over Z_(p).  Pivots are chosen with minimal valuation (ties by
    position) so the result is deterministic and valid over the local ring.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    D = [row[:] for row in A]
    U = eye(S, m)
    V = eye(S, n)
    t = 0
    while True:
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if D[i][j] == 0:
                    continue
                v = S.val(D[i][j])
                if best is None or v < best[0]:
                    best = (v, i, j)
                    if v == 0:
                        break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        _, bi, bj = best
        if bi != t:
            D[t], D[bi] = D[bi], D[t]
            U[t], U[bi] = U[bi], U[t]
        if bj != t:
            for row in D:
                row[t], row[bj] = row[bj], row[t]
            for row in V:
                row[t], row[bj] = row[bj], row[t]
        piv = D[t][t]
        # normalize the pivot to a power of varpi (or 1 over a field)
        v = S.val(piv)
        if S.kind == "Zloc":
            unit = S.div(piv, S.varpi ** v if v else S.one)
            target = S.varpi ** v if v else S.one
        else:
            unit = piv
            target = S.one
        uinv = S.inv(unit)
        for j in range(n):
            D[t][j] = S.mul(D[t][j], uinv)
        for j in range(m):
            U[t][j] = S.mul(U[t][j], uinv)
        piv = target
        for i in range(t + 1, m):
            if D[i][t] == 0:
                continue
            q = S.div(D[i][t], piv)
            for j in range(n):
                if D[t][j] != 0:
                    D[i][j] = S.sub(D[i][j], S.mul(q, D[t][j]))
            for j in range(m):
                if U[t][j] != 0:
                    U[i][j] = S.sub(U[i][j], S.mul(q, U[t][j]))
        for j in range(t + 1, n):
            if D[t][j] == 0:
                continue
            q = S.div(D[t][j], piv)
            for i in range(m):
                if D[i][t] != 0:
                    D[i][j] = S.sub(D[i][j], S.mul(q, D[i][t]))
            for i in range(n):
                if V[i][t] != 0:
                    V[i][j] = S.sub(V[i][j], S.mul(q, V[i][t]))
        t += 1
        if t >= m or t >= n:
            break
    diag = [D[i][i] for i in range(min(m, n))]
    return diag, U, V


def matrix_rank(S, A):
    if not A or not A[0]:
        return 0
    diag, _, _ = smith_form(S, A)
    return sum(1 for d in diag if d != 0)


def kernel_basis(S, A):
    """Basis of {x : A x = 0}, as a list of column vectors.

    Over Z_(p) the result is a basis of the saturated kernel submodule
    (every ring solution is a ring combination of it).
    """
    m = len(A)
    n = len(A[0]) if m else 0
    if n == 0:
        return []
    if m == 0:
        return [[S.one if i == j else S.zero for i in range(n)] for j in range(n)]
    diag, _, V = smith_form(S, A)
    r = sum(1 for d in diag if d != 0)
    return [[V[i][j] for i in range(n)] for j in range(r, n)]


def solve_exact(S, A, b):
    """Solve A x = b inside the ring.

    Returns (x, None) on success with the deterministic particular solution
    (free coordinates zero), or (None, cert) where cert = (w, v) certifies
    unsolvability: w*A has all valuations >= v while w*b has valuation < v
    (over a field v is None and w*A = 0, w*b != 0).
    """
    m = len(A)
    n = len(A[0]) if m else 0
    if m == 0:
        return [S.zero] * n, None
    diag, U, V = smith_form(S, A)
    c = mat_vec(S, U, b)
    y = [S.zero] * n
    for i in range(min(m, n)):
        if diag[i] != 0:
            try:
                y[i] = S.div(c[i], diag[i])
            except ValueError:
                return None, (U[i][:], S.val(diag[i]))
        elif c[i] != 0:
            return None, (U[i][:], None)
    for i in range(min(m, n), m):
        if c[i] != 0:
            return None, (U[i][:], None)
    x = mat_vec(S, V, y)
    return x, None


def solve_columns(S, A, B):
    """Solve A X = B column by column; returns X or raises ValueError."""
    m = len(A)
    n = len(A[0]) if m else 0
    k = len(B[0]) if B else 0
    cols = []
    for j in range(k):
        b = [B[i][j] for i in range(m)]
        x, cert = solve_exact(S, A, b)
        if x is None:
            raise ValueError("inconsistent linear system")
        cols.append(x)
    return [[cols[j][i] for j in range(k)] for i in range(n)]


def cohomology_dims(S, d_in, d_out, dim_mid):
    """Middle cohomology of  . --d_in--> k^dim_mid --d_out--> .

    d_in has dim_mid rows; d_out has dim_mid columns.  Returns
    (free_rank, torsion) where torsion lists the positive p-exponents of
    the finite part (always [] over a field).
    """
    if dim_mid == 0:
        return 0, []
    n_in = len(d_in[0]) if d_in and d_in[0] else 0
    have_out = d_out and len(d_out) > 0
    if S.kind != "Zloc":
        r_out = matrix_rank(S, d_out) if have_out else 0
        r_in = matrix_rank(S, d_in) if n_in else 0
        return dim_mid - r_out - r_in, []
    if have_out:
        K = kernel_basis(S, d_out)
    else:
        K = [[S.one if i == j else S.zero for i in range(dim_mid)] for j in range(dim_mid)]
    k = len(K)
    if k == 0:
        return 0, []
    if n_in == 0:
        return k, []
    Kmat = [[K[j][i] for j in range(k)] for i in range(dim_mid)]
    Y = solve_columns(S, Kmat, d_in)
    diag, _, _ = smith_form(S, Y)
    r = sum(1 for d in diag if d != 0)
    torsion = []
    for d in diag:
        if d != 0:
            v = S.val(d)
            if v > 0:
                torsion.append(v)
    return k - r, sorted(torsion)
