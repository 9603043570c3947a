"""The bigraded operator rings and their differentials.

Everything lives inside the enveloping ring B, generated by

    xi    of bidegree (2, 2)    polynomial
    xibar of bidegree (1, 2)    odd
    r     of bidegree (0, -2)   polynomial
    rbar  of bidegree (-1, -2)  odd

subject to: xi and r are central, xibar^2 = 0, rbar^2 = 0, and
rbar*xibar + xibar*rbar = 1.  A monomial is stored in the normal order
r^a * rbar^e1 * xibar^e2 * xi^d as the key (a, e1, e2, d); since the odd
generators only interact inside the middle factor, multiplication picks
up no global Koszul signs beyond the middle-factor rewriting.

The named subrings select which monomial keys are allowed:

    R  = k[xi]          Rv = k[r]          S = k[r, xi]
    L  = k[xibar]       Lv = k[rbar]       E = <rbar, xibar>
    A  = k[xi, xibar]   Av = k[r, rbar]    B = everything

Three of them carry a differential: kappa on A (xibar -> xi), the dual
kappa on Av (rbar -> r), and on B conjugation by omega = r*xibar + rbar*xi.
"""

from .scalars import Scalars, cohomology_dims

RING_TAGS = ("R", "L", "Rv", "Lv", "A", "Av", "S", "E", "B")

# which (a, e1, e2, d) exponents a subring allows: masks (r, rbar, xibar, xi)
_ALLOWED = {
    "R": (False, False, False, True),
    "L": (False, False, True, False),
    "Rv": (True, False, False, False),
    "Lv": (False, True, False, False),
    "A": (False, False, True, True),
    "Av": (True, True, False, False),
    "S": (True, False, False, True),
    "E": (False, True, True, False),
    "B": (True, True, True, True),
}

# middle-factor (E) multiplication table on the basis 1, rbar, xibar, rbar*xibar.
# _EMUL[x][y] lists (basis_index, integer_coefficient) terms of x*y.
_EMUL = {
    (0, 0): {(0, 0): [((0, 0), 1)], (1, 0): [((1, 0), 1)], (0, 1): [((0, 1), 1)], (1, 1): [((1, 1), 1)]},
    (1, 0): {(0, 0): [((1, 0), 1)], (1, 0): [], (0, 1): [((1, 1), 1)], (1, 1): []},
    (0, 1): {(0, 0): [((0, 1), 1)], (1, 0): [((0, 0), 1), ((1, 1), -1)], (0, 1): [], (1, 1): [((0, 1), 1)]},
    (1, 1): {(0, 0): [((1, 1), 1)], (1, 0): [((1, 0), 1)], (0, 1): [], (1, 1): [((1, 1), 1)]},
}


def mono_bidegree(key):
    a, e1, e2, d = key
    return (-e1 + e2 + 2 * d, -2 * a - 2 * e1 + 2 * e2 + 2 * d)


def mono_allowed(tag, key):
    a, e1, e2, d = key
    mr, mrb, mxb, mx = _ALLOWED[tag]
    return (a == 0 or mr) and (e1 == 0 or mrb) and (e2 == 0 or mxb) and (d == 0 or mx)


class RingElem:
    """An element of one of the operator rings: dict of monomial -> scalar."""

    __slots__ = ("S", "terms")

    def __init__(self, S, terms=None):
        self.S = S
        self.terms = {} if terms is None else terms

    def is_zero(self):
        return not self.terms

    def copy(self):
        return RingElem(self.S, dict(self.terms))

    def __eq__(self, other):
        return isinstance(other, RingElem) and self.S == other.S and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))
    def add(self, other):
        out = dict(self.terms)
        S = self.S
        for k, v in other.terms.items():
            w = S.add(out.get(k, S.zero), v)
            if w == 0:
                out.pop(k, None)
            else:
                out[k] = w
        return RingElem(S, out)

    def neg(self):
        S = self.S
        return RingElem(S, {k: S.neg(v) for k, v in self.terms.items()})

    def sub(self, other):
        return self.add(other.neg())

    def scale(self, c):
        S = self.S
        if c == 0:
            return RingElem(S)
        return RingElem(S, {k: S.mul(v, c) for k, v in self.terms.items()})

    def mul(self, other):
        S = self.S
        out = {}
        for (a1, e11, e21, d1), c1 in self.terms.items():
            for (a2, e12, e22, d2), c2 in other.terms.items():
                c = S.mul(c1, c2)
                for (f1, f2), m in _EMUL[(e11, e21)][(e12, e22)]:
                    key = (a1 + a2, f1, f2, d1 + d2)
                    v = S.add(out.get(key, S.zero), S.mul(c, S.el(m)))
                    if v == 0:
                        out.pop(key, None)
                    else:
                        out[key] = v
        return RingElem(S, out)

    def bidegree(self):
        """The common bidegree of all terms, or None for 0 / mixed elements."""
        degs = {mono_bidegree(k) for k in self.terms}
        if len(degs) == 1:
            return degs.pop()
        return None

    def in_ring(self, tag):
        return all(mono_allowed(tag, k) for k in self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for key in sorted(self.terms):
            a, e1, e2, d = key
            word = []
            if a:
                word.append("r" if a == 1 else "r^%d" % a)
            if e1:
                word.append("rbar")
            if e2:
                word.append("xibar")
            if d:
                word.append("xi" if d == 1 else "xi^%d" % d)
            mono = "*".join(word) or "1"
            bits.append("%s*%s" % (self.terms[key], mono))
        return " + ".join(bits)


def ring_zero(S):
    return RingElem(S)


def ring_one(S):
    return RingElem(S, {(0, 0, 0, 0): S.one})


def ring_gen(S, name, power=1):
    key = {"r": (power, 0, 0, 0), "rbar": (0, 1, 0, 0), "xibar": (0, 0, 1, 0), "xi": (0, 0, 0, power)}[name]
    if name in ("rbar", "xibar") and power > 1:
        return RingElem(S)
    return RingElem(S, {key: S.one})


def ring_scalar(S, c):
    c = S.el(c)
    if c == 0:
        return RingElem(S)
    return RingElem(S, {(0, 0, 0, 0): c})


def omega(S):
    """omega = r*xibar + rbar*xi; its square is Theta = r*xi."""
    return RingElem(S, {(1, 0, 1, 0): S.one, (0, 1, 0, 1): S.one})


def theta(S):
    return RingElem(S, {(1, 0, 0, 1): S.one})


def apply_kappa(tag, x):
    """The differential of the dg rings A, Av and B; zero on the others.

    On A it is the k[xi]-derivation with xibar -> xi, on Av the k[r]-
    derivation with rbar -> r, and on B the graded commutator with omega.
    """
    S = x.S
    if tag == "A":
        out = RingElem(S)
        for (a, e1, e2, d), c in x.terms.items():
            if e2:
                out = out.add(RingElem(S, {(a, e1, 0, d + 1): c}))
        return out
    if tag == "Av":
        out = RingElem(S)
        for (a, e1, e2, d), c in x.terms.items():
            if e1:
                out = out.add(RingElem(S, {(a + 1, 0, e2, d): c}))
        return out
    if tag == "B":
        w = omega(S)
        out = RingElem(S)
        for key, c in x.terms.items():
            i, _ = mono_bidegree(key)
            term = RingElem(S, {key: c})
            left = w.mul(term)
            right = term.mul(w)
            if i % 2 == 0:
                out = out.add(left).sub(right)
            else:
                out = out.add(left).add(right)
        return out
    return RingElem(S)


def ring_basis_at(tag, i, j):
    """All normal-form monomials of the subring with bidegree (i, j)."""
    out = []
    mr, mrb, mxb, mx = _ALLOWED[tag]
    for e1 in (0, 1) if mrb else (0,):
        for e2 in (0, 1) if mxb else (0,):
            num = i + e1 - e2
            if num % 2 or num < 0:
                continue
            d = num // 2
            if d and not mx:
                continue
            num2 = 2 * d + 2 * e2 - 2 * e1 - j
            if num2 % 2 or num2 < 0:
                continue
            a = num2 // 2
            if a and not mr:
                continue
            out.append((a, e1, e2, d))
    return sorted(out)


def dg_ring_cohomology(S, tag, window=None):
    """Cohomology of a dg ring on a bidegree window.

    Returns {(i, j): (free_rank, torsion)} with zero spots omitted.
    window is (imax, jmax) bounding |i| and |j|; default (8, 16).
    """
    if tag not in ("A", "Av", "B"):
        raise ValueError("ring %r carries no differential" % (tag,))
    imax, jmax = window if window is not None else (8, 16)
    out = {}
    for j in range(-jmax, jmax + 1):
        for i in range(-imax, imax + 1):
            mid = ring_basis_at(tag, i, j)
            if not mid:
                continue
            prev = ring_basis_at(tag, i - 1, j)
            nxt = ring_basis_at(tag, i + 1, j)
            d_in = _kappa_matrix(S, tag, prev, mid)
            d_out = _kappa_matrix(S, tag, mid, nxt)
            free, tors = cohomology_dims(S, d_in, d_out, len(mid))
            if free or tors:
                out[(i, j)] = (free, tors)
    return out


def _kappa_matrix(S, tag, src_basis, dst_basis):
    index = {k: n for n, k in enumerate(dst_basis)}
    M = [[S.zero] * len(src_basis) for _ in dst_basis]
    for c, key in enumerate(src_basis):
        img = apply_kappa(tag, RingElem(S, {key: S.one}))
        for k, v in img.terms.items():
            # kappa of a normal monomial stays in the subring for A and Av;
            # for B the rewriting may leave it, but never leaves B itself
            M[index[k]][c] = v
    return M
