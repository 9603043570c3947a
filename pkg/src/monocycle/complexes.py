"""Complexes of parity summands with recorded differentials.

An object is a finite list of cells (object name, c, t), each standing for
a summand object<t>[-c], together with a matrix of recorded entries.  An
entry from cell l to cell k is a sum of terms

    coeff * r^a * xb^e * (coefficient monomial) * (basis element)

where xb is the odd degree-(1,2) generator, r the degree-(0,-2) one.  The
flavor constrains which exterior parts may appear:

  * eqv: no r, no xb; the differential squares to zero,
  * con: xb allowed (square zero forced); the law is d*d + kappa(d) = 0,
    where kappa replaces one xb by the xi element of the coefficient ring,
  * mon: r allowed; the law is d*d = Theta, with Theta = r*xi on the nose.

The viewed bidegree of a term from cell l to cell k is

    (e + deg + (c_k - c_l), 2e - 2a + deg + (t_k - t_l))

with deg the diagonal degree of the polynomial times basis part.  All
differential entries are viewed (1, 0); a morphism F -> G<n>[m] has all
entries viewed (m, -n).

Composition of recorded entries g after f multiplies the exterior parts
(xb^2 = 0 kills terms), composes the basis parts through the presentation
table, and carries the Koszul sign (-1)^(e_f * (v_g - e_g)) for moving
f's exterior part past g's map part, where v_g is the viewed first
component of g.
"""

from .scalars import solve_exact, cohomology_dims
from .presentation import Poly


FLAVORS = ("eqv", "con", "mon")


class DggError(Exception):
    pass


class FlavorError(DggError):
    pass


class DegreeError(DggError):
    pass


class ModuleError(DggError):
    pass


class CurvatureError(DggError):
    pass


class ClosednessError(DggError):
    pass


# A cone over a map that fails d(f) = 0 is reported under this name.
NotChainMap = ClosednessError


class LiftError(DggError):
    pass


class IndeterminateError(DggError):
    pass


def ext_allowed(flavor, a, e):
    if a < 0 or e < 0 or e > 1:
        return False
    if flavor == "eqv":
        return a == 0 and e == 0
    if flavor == "con":
        return a == 0
    if flavor == "mon":
        return e == 0
    raise FlavorError("unknown flavor %r" % (flavor,))


def term_viewed(P, cells, k, l, key):
    a, e, exps, b = key
    d = P.basis_info[b][2] + P.ring.mono_degree(exps)
    ck, tk = cells[k][1], cells[k][2]
    cl, tl = cells[l][1], cells[l][2]
    return (e + d + ck - cl, 2 * e - 2 * a + d + tk - tl)


def _acc_term(out, key, c, S):
    w = S.add(out.get(key, S.zero), c)
    if w == 0:
        out.pop(key, None)
    else:
        out[key] = w


def compose_entries(P, vg, gterms, vf, fterms):
    """Recorded-entry composition g after f, with the Koszul sign."""
    S = P.S
    out = {}
    for (ag, eg, xg, bg), cg in gterms.items():
        sign_base = (vg - eg) % 2
        for (af, ef, xf, bf), cf in fterms.items():
            if eg + ef > 1:
                continue
            coeff = S.mul(cg, cf)
            if ef and sign_base:
                coeff = S.neg(coeff)
            for poly, h in P.compose_names(bg, bf):
                for pex, pc in poly.terms.items():
                    exps = tuple(i + j + m for i, j, m in zip(xg, xf, pex))
                    _acc_term(out, (ag + af, eg + ef, exps, h), S.mul(coeff, pc), S)
    return out


def matrix_compose(P, vg, gmat, vf, fmat):
    out = {}
    by_src = {}
    for (k, m), terms in gmat.items():
        by_src.setdefault(m, []).append((k, terms))
    S = P.S
    for (m, l), fterms in fmat.items():
        for k, gterms in by_src.get(m, []):
            prod = compose_entries(P, vg, gterms, vf, fterms)
            if prod:
                dst = out.setdefault((k, l), {})
                for key, c in prod.items():
                    _acc_term(dst, key, c, S)
    return {kl: t for kl, t in out.items() if t}


def kappa_entries(P, mat):
    """Replace one xb by the xi element, termwise (zero on xb-free terms)."""
    S = P.S
    out = {}
    for (k, l), terms in mat.items():
        dst = {}
        for (a, e, exps, b), c in terms.items():
            if e != 1:
                continue
            for pex, pc in P.xi.terms.items():
                key = (a, 0, tuple(i + j for i, j in zip(exps, pex)), b)
                _acc_term(dst, key, S.mul(c, pc), S)
        if dst:
            out[(k, l)] = dst
    return out


def scale_matrix(S, mat, c):
    out = {}
    for kl, terms in mat.items():
        dst = {}
        for key, v in terms.items():
            w = S.mul(v, c)
            if w != 0:
                dst[key] = w
        if dst:
            out[kl] = dst
    return out


def add_matrices(S, *mats):
    out = {}
    for mat in mats:
        for kl, terms in mat.items():
            dst = out.setdefault(kl, {})
            for key, c in terms.items():
                _acc_term(dst, key, c, S)
    return {kl: t for kl, t in out.items() if t}


def theta_matrix(P, cells):
    """r*xi times the identity, as a recorded matrix."""
    out = {}
    for k, (obj, c, t) in enumerate(cells):
        idn = P.identity[obj]
        terms = {}
        for pex, pc in P.xi.terms.items():
            terms[(1, 0, pex, idn)] = pc
        if terms:
            out[(k, k)] = terms
    return out


class DggObject:
    def __init__(self, P, flavor, cells, delta, check=True):
        self.P = P
        self.flavor = flavor
        self.cells = [tuple(c) for c in cells]
        self.delta = {kl: dict(t) for kl, t in delta.items() if t}
        if check:
            self.check()

    def check(self):
        P = self.P
        if self.flavor not in FLAVORS:
            raise FlavorError("unknown flavor %r" % (self.flavor,))
        for obj, c, t in self.cells:
            if obj not in P.stratum_of:
                raise ModuleError("cell object %r is not in the presentation" % (obj,))
        n = len(self.cells)
        for (k, l), terms in self.delta.items():
            if not (0 <= k < n and 0 <= l < n):
                raise ModuleError("entry (%d,%d) is out of range" % (k, l))
            for key, c in terms.items():
                a, e, exps, b = key
                if c == 0:
                    raise ModuleError("explicit zero coefficient at (%d,%d)" % (k, l))
                if not ext_allowed(self.flavor, a, e):
                    raise FlavorError(
                        "exterior part r^%d xb^%d is not allowed in flavor %s" % (a, e, self.flavor))
                info = P.basis_info.get(b)
                if info is None:
                    raise ModuleError("unknown basis element %r" % (b,))
                src, dst, _ = info
                if src != self.cells[l][0] or dst != self.cells[k][0]:
                    raise ModuleError(
                        "entry (%d,%d) uses %s from the wrong module" % (k, l, b))
                if term_viewed(P, self.cells, k, l, key) != (1, 0):
                    raise DegreeError(
                        "entry (%d,%d) term %r is not viewed (1,0)" % (k, l, key))
        self._check_curvature()

    def _check_curvature(self):
        P = self.P
        sq = matrix_compose(P, 1, self.delta, 1, self.delta)
        if self.flavor == "eqv":
            bad = sq
        elif self.flavor == "con":
            bad = add_matrices(P.S, sq, kappa_entries(P, self.delta))
        else:
            bad = add_matrices(P.S, sq, scale_matrix(P.S, theta_matrix(P, self.cells),
                                                     P.S.neg(P.S.one)))
        if bad:
            kl = sorted(bad)[0]
            raise CurvatureError(
                "flavor %s curvature law fails at entry %r: %r" % (self.flavor, kl, bad[kl]))

    def __eq__(self, other):
        return (isinstance(other, DggObject) and self.P.name == other.P.name
                and self.flavor == other.flavor and self.cells == other.cells
                and self.delta == other.delta)

    def __repr__(self):
        return "DggObject(%s, %s, %d cells, %d entries)" % (
            self.P.name, self.flavor, len(self.cells), len(self.delta))

    def shift(self, m=1):
        """The object [m]: cells move c -> c - m, entries pick up -(-1)^e."""
        cells = [(obj, c - m, t) for obj, c, t in self.cells]
        if m % 2 == 0:
            delta = self.delta
        else:
            delta = shift_delta_sign(self.P.S, self.delta)
        return DggObject(self.P, self.flavor, cells, delta, check=False)

    def twist(self, n):
        cells = [(obj, c, t + n) for obj, c, t in self.cells]
        return DggObject(self.P, self.flavor, cells, self.delta, check=False)

    def canonical(self):
        """Cells sorted by (c, -t, object); entries reindexed to match."""
        order = sorted(range(len(self.cells)),
                       key=lambda i: (self.cells[i][1], -self.cells[i][2],
                                      self.cells[i][0], i))
        pos = {old: new for new, old in enumerate(order)}
        cells = [self.cells[i] for i in order]
        delta = {(pos[k], pos[l]): dict(t) for (k, l), t in self.delta.items()}
        return DggObject(self.P, self.flavor, cells, delta, check=False)

    def to_json(self):
        return {
            "presentation": self.P.name,
            "flavor": self.flavor,
            "cells": [[obj, c, t] for obj, c, t in self.cells],
            "delta": [{"to": k, "from": l,
                       "terms": [[a, e, list(x), b, self.P.S.el_to_json(c)]
                                 for (a, e, x, b), c in sorted(terms.items())]}
                      for (k, l), terms in sorted(self.delta.items())],
        }

    @staticmethod
    def from_json(P, data):
        cells = [tuple(c) for c in data["cells"]]
        delta = {}
        for row in data["delta"]:
            terms = {}
            for a, e, x, b, c in row["terms"]:
                terms[(a, e, tuple(x), b)] = P.S.el(c)
            delta[(row["to"], row["from"])] = terms
        return DggObject(P, data["flavor"], cells, delta)


def _sign_twist(S, delta, parity_fn):
    out = {}
    for kl, terms in delta.items():
        dst = {}
        for key, c in terms.items():
            a, e, exps, b = key
            if parity_fn(e) % 2:
                dst[key] = S.neg(c)
            else:
                dst[key] = c
        out[kl] = dst
    return out


def shift_delta_sign(S, delta):
    """Entries of the shifted differential: multiply by -(-1)^e."""
    out = {}
    for kl, terms in delta.items():
        dst = {}
        for (a, e, exps, b), c in terms.items():
            if e % 2 == 0:
                dst[(a, e, exps, b)] = S.neg(c)
            else:
                dst[(a, e, exps, b)] = c
        out[kl] = dst
    return out


def zero_object(P, flavor):
    return DggObject(P, flavor, [], {}, check=False)


def generator(P, flavor, obj, c=0, t=0):
    return DggObject(P, flavor, [(obj, c, t)], {}, check=False)


def direct_sum(F, G):
    if F.P.name != G.P.name or F.flavor != G.flavor:
        raise FlavorError("direct sum needs matching presentation and flavor")
    off = len(F.cells)
    delta = {kl: dict(t) for kl, t in F.delta.items()}
    for (k, l), terms in G.delta.items():
        delta[(k + off, l + off)] = dict(terms)
    return DggObject(F.P, F.flavor, list(F.cells) + list(G.cells), delta, check=False)


class ChainMap:
    """A morphism F -> G<n>[m], recorded entrywise (viewed (m, -n))."""

    def __init__(self, src, dst, m, n, entries, check=True):
        self.src = src
        self.dst = dst
        self.m = m
        self.n = n
        self.entries = {kl: dict(t) for kl, t in entries.items() if t}
        if check:
            self.check()

    @property
    def viewed(self):
        return (self.m, -self.n)

    def check(self):
        F, G = self.src, self.dst
        if F.P.name != G.P.name or F.flavor != G.flavor:
            raise FlavorError("chain map endpoints do not match")
        P = F.P
        want = self.viewed
        for (k, l), terms in self.entries.items():
            if not (0 <= k < len(G.cells) and 0 <= l < len(F.cells)):
                raise ModuleError("chain map entry (%d,%d) out of range" % (k, l))
            for key, c in terms.items():
                a, e, exps, b = key
                if c == 0:
                    raise ModuleError("explicit zero coefficient in chain map")
                if not ext_allowed(F.flavor, a, e):
                    raise FlavorError("exterior part not allowed in flavor %s" % F.flavor)
                src, dst, _ = P.basis_info[b]
                if src != F.cells[l][0] or dst != G.cells[k][0]:
                    raise ModuleError("chain map entry (%d,%d) in the wrong module" % (k, l))
                got = _viewed_between(P, G.cells[k], F.cells[l], key)
                if got != want:
                    raise DegreeError(
                        "chain map entry (%d,%d) viewed %r, want %r" % (k, l, got, want))

    def differential(self):
        """d(f) = delta_G f - (-1)^m f delta_F (+ kappa f in flavor con)."""
        P = self.src.P
        left = matrix_compose(P, 1, self.dst.delta, self.m, self.entries)
        right = matrix_compose(P, self.m, self.entries, 1, self.src.delta)
        if self.m % 2 == 0:
            right = scale_matrix(P.S, right, P.S.neg(P.S.one))
        parts = [left, right]
        if self.src.flavor == "con":
            parts.append(kappa_entries(P, self.entries))
        out = add_matrices(P.S, *parts)
        return ChainMap(self.src, self.dst, self.m + 1, self.n, out, check=False)

    def is_closed(self):
        return not self.differential().entries

    def require_closed(self):
        d = self.differential()
        if d.entries:
            kl = sorted(d.entries)[0]
            raise ClosednessError("map is not closed at %r: %r" % (kl, d.entries[kl]))

    def compose(self, other):
        """self after other."""
        if other.dst is not self.src and other.dst.cells != self.src.cells:
            raise ModuleError("composition endpoints do not match")
        P = self.src.P
        mat = matrix_compose(P, self.m, self.entries, other.m, other.entries)
        return ChainMap(other.src, self.dst, self.m + other.m, self.n + other.n,
                        mat, check=False)

    def add(self, other):
        if (self.m, self.n) != (other.m, other.n):
            raise DegreeError("cannot add maps of different degrees")
        return ChainMap(self.src, self.dst, self.m, self.n,
                        add_matrices(self.src.P.S, self.entries, other.entries),
                        check=False)

    def scale(self, c):
        return ChainMap(self.src, self.dst, self.m, self.n,
                        scale_matrix(self.src.P.S, self.entries, self.src.P.S.el(c)),
                        check=False)

    def neg(self):
        return self.scale(self.src.P.S.neg(self.src.P.S.one))

    def is_zero(self):
        return not self.entries

    def __eq__(self, other):
        return (isinstance(other, ChainMap) and self.src == other.src
                and self.dst == other.dst and (self.m, self.n) == (other.m, other.n)
                and self.entries == other.entries)

    def to_json(self):
        return {
            "shift": self.m, "twist": self.n,
            "src": self.src.to_json(), "dst": self.dst.to_json(),
            "entries": [{"to": k, "from": l,
                         "terms": [[a, e, list(x), b, self.src.P.S.el_to_json(c)]
                                   for (a, e, x, b), c in sorted(t.items())]}
                        for (k, l), t in sorted(self.entries.items())],
        }

    @staticmethod
    def from_json(P, data):
        src = DggObject.from_json(P, data["src"])
        dst = DggObject.from_json(P, data["dst"])
        entries = {}
        for row in data["entries"]:
            terms = {}
            for a, e, x, b, c in row["terms"]:
                terms[(a, e, tuple(x), b)] = P.S.el(c)
            entries[(row["to"], row["from"])] = terms
        return ChainMap(src, dst, data["shift"], data["twist"], entries)


def _viewed_between(P, cell_k, cell_l, key):
    a, e, exps, b = key
    d = P.basis_info[b][2] + P.ring.mono_degree(exps)
    return (e + d + cell_k[1] - cell_l[1], 2 * e - 2 * a + d + cell_k[2] - cell_l[2])


def identity_map(F):
    entries = {}
    for i, (obj, c, t) in enumerate(F.cells):
        entries[(i, i)] = {(0, 0, (0,) * F.P.ring.n, F.P.identity[obj]): F.P.S.one}
    return ChainMap(F, F, 0, 0, entries, check=False)


def zero_map(F, G, m=0, n=0):
    return ChainMap(F, G, m, n, {}, check=False)


def shift_map(f, m=1):
    """Transport f: F -> G to F[m] -> G[m] (entries pick up (-1)^(m*e))."""
    F2 = f.src.shift(m)
    G2 = f.dst.shift(m)
    if m % 2 == 0:
        entries = f.entries
    else:
        entries = _sign_twist(f.src.P.S, f.entries, lambda e: e)
    return ChainMap(F2, G2, f.m, f.n, entries, check=False)


def twist_map(f, n):
    return ChainMap(f.src.twist(n), f.dst.twist(n), f.m, f.n, f.entries, check=False)


def cone(f):
    """cone(f: F -> G) = (G + F[1], [[delta_G, f], [0, delta_F[1]]])."""
    if (f.m, f.n) != (0, 0):
        raise DegreeError("cones are taken over degree-(0,0) maps")
    f.require_closed()
    F, G = f.src, f.dst
    sF = F.shift(1)
    off = len(G.cells)
    cells = list(G.cells) + list(sF.cells)
    delta = {kl: dict(t) for kl, t in G.delta.items()}
    for (k, l), terms in sF.delta.items():
        delta[(k + off, l + off)] = dict(terms)
    for (k, l), terms in f.entries.items():
        delta[(k, l + off)] = dict(terms)
    return DggObject(F.P, F.flavor, cells, delta)


def cocone(f):
    """cocone(f: A -> B) = (B[-1] + A, [[delta_B[-1], s(f)], [0, delta_A]]).

    The f block carries (-1)^e per term so the curvature law survives in
    the xb-carrying flavor.
    """
    if (f.m, f.n) != (0, 0):
        raise DegreeError("cocones are taken over degree-(0,0) maps")
    f.require_closed()
    A, B = f.src, f.dst
    sB = B.shift(-1)
    off = len(sB.cells)
    cells = list(sB.cells) + list(A.cells)
    delta = {kl: dict(t) for kl, t in sB.delta.items()}
    for (k, l), terms in A.delta.items():
        delta[(k + off, l + off)] = dict(terms)
    signed = _sign_twist(A.P.S, f.entries, lambda e: e)
    for (k, l), terms in signed.items():
        delta[(k, l + off)] = dict(terms)
    return DggObject(A.P, A.flavor, cells, delta)


class Triangle:
    """The maps around a cone: base f: F -> G, into: G -> C, out: C -> F[1]."""

    def __init__(self, base, into, out):
        self.base = base
        self.into = into
        self.out = out

    def __iter__(self):
        return iter((self.base, self.into, self.out))


def cone_triangle(f):
    """The cone of f together with its distinguished triangle."""
    into, out = cone_maps(f)
    return into.dst, Triangle(f, into, out)


def cone_maps(f):
    """The triangle maps G -> cone(f) and cone(f) -> F[1]."""
    C = cone(f)
    G = f.dst
    sF = f.src.shift(1)
    off = len(G.cells)
    P = f.src.P
    inc = {}
    for i, (obj, c, t) in enumerate(G.cells):
        inc[(i, i)] = {(0, 0, (0,) * P.ring.n, P.identity[obj]): P.S.one}
    proj = {}
    for i, (obj, c, t) in enumerate(sF.cells):
        proj[(i, i + off)] = {(0, 0, (0,) * P.ring.n, P.identity[obj]): P.S.one}
    return ChainMap(G, C, 0, 0, inc, check=False), ChainMap(C, sF, 0, 0, proj, check=False)


def cocone_maps(f):
    """The triangle maps cocone(f) -> A and B[-1] -> cocone(f)."""
    C = cocone(f)
    A = f.src
    sB = f.dst.shift(-1)
    off = len(sB.cells)
    P = A.P
    proj = {}
    for i, (obj, c, t) in enumerate(A.cells):
        proj[(i, i + off)] = {(0, 0, (0,) * P.ring.n, P.identity[obj]): P.S.one}
    inc = {}
    for i, (obj, c, t) in enumerate(sB.cells):
        inc[(i, i)] = {(0, 0, (0,) * P.ring.n, P.identity[obj]): P.S.one}
    return ChainMap(C, A, 0, 0, proj, check=False), ChainMap(sB, C, 0, 0, inc, check=False)


# ---------------------------------------------------------------------------
# Hom complexes.


def hom_basis(F, G, v, w):
    """All recorded-entry monomials F -> G of viewed bidegree (v, w)."""
    P = F.P
    flavor = F.flavor
    out = []
    for l, (ol, cl, tl) in enumerate(F.cells):
        for k, (ok, ck, tk) in enumerate(G.cells):
            basis = P.hom_basis(ol, ok)
            if not basis:
                continue
            dc = ck - cl
            dt = tk - tl
            gap = v - w - dc + dt
            exts = []
            if flavor == "eqv":
                if gap == 0:
                    exts.append((0, 0))
            elif flavor == "con":
                if gap == 0:
                    exts.append((0, 0))
                elif gap == -1:
                    exts.append((0, 1))
            else:
                if gap >= 0 and gap % 2 == 0:
                    exts.append((gap // 2, 0))
            for a, e in exts:
                for b, d in basis:
                    D = v - e - d - dc
                    if D < 0:
                        continue
                    for exps in P.ring.monomials(D):
                        out.append((k, l, (a, e, exps, b)))
    return out


def _d_matrix(F, G, v, w, basis_from, basis_to):
    """Matrix of the Hom differential from viewed (v, w) to (v+1, w)."""
    P = F.P
    S = P.S
    index = {mon: i for i, mon in enumerate(basis_to)}
    cols = []
    for (k, l, key) in basis_from:
        f = ChainMap(F, G, v, -w, {(k, l): {key: S.one}}, check=False)
        df = f.differential()
        col = [S.zero] * len(basis_to)
        for (k2, l2), terms in df.entries.items():
            for key2, c in terms.items():
                col[index[(k2, l2, key2)]] = c
        cols.append(col)
    return [[cols[j][i] for j in range(len(cols))] for i in range(len(basis_to))]


def hom_space(F, G, m, n):
    """Cohomology of Hom(F, G<n>[m]) at its own degree: (free rank, torsion).

    Exact: each viewed bidegree carries finitely many entry monomials, so
    no truncation window is involved.
    """
    v, w = m, -n
    S = F.P.S
    mid = hom_basis(F, G, v, w)
    below = hom_basis(F, G, v - 1, w)
    above = hom_basis(F, G, v + 1, w)
    d_in = _d_matrix(F, G, v - 1, w, below, mid)
    d_out = _d_matrix(F, G, v, w, mid, above)
    return cohomology_dims(S, d_in, d_out, len(mid))


def hom_space_basis(F, G, m, n):
    """Representatives: closed entry-monomial combinations spanning the
    cohomology, as ChainMaps, plus the ambient monomial count."""
    v, w = m, -n
    S = F.P.S
    mid = hom_basis(F, G, v, w)
    below = hom_basis(F, G, v - 1, w)
    above = hom_basis(F, G, v + 1, w)
    d_in = _d_matrix(F, G, v - 1, w, below, mid)
    d_out = _d_matrix(F, G, v, w, mid, above)
    from .scalars import kernel_basis
    ker = kernel_basis(S, d_out, len(mid))
    reps = []
    for vec in ker:
        entries = {}
        for i, c in enumerate(vec):
            if c == 0:
                continue
            k, l, key = mid[i]
            entries.setdefault((k, l), {})[key] = c
        reps.append(ChainMap(F, G, m, n, entries, check=False))
    return reps, d_in, mid


class Homotopy(ChainMap):
    """A map h with d(h) = f - g, remembering the pair it connects."""

    def __init__(self, f, g, entries):
        ChainMap.__init__(self, f.src, f.dst, f.m - 1, f.n, entries, check=False)
        self.connects = (f, g)

    def verify(self):
        want = self.connects[0].add(self.connects[1].neg())
        if self.differential().entries != want.entries:
            raise ClosednessError("homotopy does not connect its recorded pair")
        return self


class Refutation:
    """Certificate that f - g = d(h) has no solution: a cokernel vector
    annihilating every d-image but pairing nontrivially with f - g."""

    def __init__(self, certificate, basis):
        self.certificate = certificate
        self.basis = basis

    def __bool__(self):
        return False

    def __repr__(self):
        return "Refutation(%d-dim certificate)" % len(self.certificate)


def homotopy_to_zero(f):
    """Solve d(h) = f; returns (entries, None) or (None, certificate)."""
    F, G = f.src, f.dst
    v, w = f.viewed
    S = F.P.S
    below = hom_basis(F, G, v - 1, w)
    mid = hom_basis(F, G, v, w)
    index = {mon: i for i, mon in enumerate(mid)}
    d_in = _d_matrix(F, G, v - 1, w, below, mid)
    b = [S.zero] * len(mid)
    for (k, l), terms in f.entries.items():
        for key, c in terms.items():
            b[index[(k, l, key)]] = c
    x, cert = solve_exact(S, d_in, b)
    if x is None:
        return None, (cert, mid)
    entries = {}
    for i, c in enumerate(x):
        if c == 0:
            continue
        k, l, key = below[i]
        entries.setdefault((k, l), {})[key] = c
    return entries, None


def find_homotopy(f, g=None):
    """Solve f - g = d(h) exactly; g omitted means the zero map.

    Returns a Homotopy on success and a Refutation (which is falsy)
    when the linear system is inconsistent.
    """
    if g is None:
        g = zero_map(f.src, f.dst, f.m, f.n)
    if (f.m, f.n) != (g.m, g.n):
        raise DegreeError("cannot connect maps of different degrees")
    diff = f.add(g.neg())
    entries, refuted = homotopy_to_zero(diff)
    if entries is None:
        cert, basis = refuted
        return Refutation(cert, basis)
    return Homotopy(f, g, entries)


def maps_equal_up_to_homotopy(f, g):
    diff = f.add(g.neg())
    if diff.is_zero():
        return True
    return homotopy_to_zero(diff)[0] is not None


# ---------------------------------------------------------------------------
# Rendering.


def term_str(P, key, c):
    a, e, exps, b = key
    bits = []
    if str(c) != "1" or (a == 0 and e == 0 and not any(exps)):
        bits.append(str(c))
    if a:
        bits.append("r" if a == 1 else "r^%d" % a)
    if e:
        bits.append("xb")
    for ex, (nm, _) in zip(exps, P.ring.gens):
        if ex == 1:
            bits.append(nm)
        elif ex > 1:
            bits.append("%s^%d" % (nm, ex))
    bits.append(b)
    return "*".join(bits)


def entry_str(P, terms):
    return " + ".join(term_str(P, key, c) for key, c in sorted(terms.items()))


def object_str(F):
    lines = ["flavor %s over %s" % (F.flavor, F.P.name)]
    for i, (obj, c, t) in enumerate(F.cells):
        lines.append("  cell %d: %s  c=%d t=%d" % (i, obj, c, t))
    for (k, l), terms in sorted(F.delta.items()):
        lines.append("  d[%d<-%d] = %s" % (k, l, entry_str(F.P, terms)))
    return "\n".join(lines)


def object_dot(F):
    lines = ["digraph dgg {", "  rankdir=LR;"]
    for i, (obj, c, t) in enumerate(F.cells):
        lines.append('  n%d [label="%s c=%d t=%d" shape=box];' % (i, obj, c, t))
    for (k, l), terms in sorted(F.delta.items()):
        label = entry_str(F.P, terms).replace('"', "'")
        lines.append('  n%d -> n%d [label="%s"];' % (l, k, label))
    lines.append("}")
    return "\n".join(lines)
