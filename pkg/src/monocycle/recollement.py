"""Gluing functors for a stratified presentation.

Restriction to a declared open, pushforward along a closed union of
strata, extension by zero (and its dual) along chains of declared opens,
and the supported-part triangles that cut an object down to a closed
union.  Everything here returns explicit complexes and explicit maps;
the only search involved is exact linear algebra over the coefficients.
"""

import sys

from .complexes import (
    ChainMap, DggError, DggObject, LiftError, Triangle, add_matrices,
    cocone, cocone_maps, cone_triangle, find_homotopy, hom_basis,
    identity_map, kappa_entries, matrix_compose, scale_matrix, shift_map,
    theta_matrix, zero_object,
)
from .functors import verdier
from .presentation import Poly
from .scalars import solve_exact
from . import reduction


class ScopeError(DggError):
    """A stratum subset that the presentation does not know about."""


# ---------------------------------------------------------------------------
# Open restriction.


def _declared(P, O):
    """The declared open of P that O names."""
    for decl in P.filtration:
        if decl is O:
            return decl
    for decl in P.filtration:
        if decl.name == O.name:
            return decl
    raise ScopeError("open %r is not declared in presentation %r"
                     % (O.name, P.name))


def _decl_for(P, pres):
    """The declared open of P whose restricted presentation is pres."""
    for decl in P.filtration:
        if decl.pres is pres or decl.pres.name == pres.name:
            return decl
    raise ScopeError("presentation %r is not a declared open of %r"
                     % (pres.name, P.name))


def _restrict_entry(P, O, terms):
    """Image of one matrix entry under restriction to the open part."""
    S = P.S
    out = {}
    for (a, e, exps, b), coeff in terms.items():
        image = O.restrict_terms([(Poly(P.ring, {exps: S.one}), b)])
        for polyu, nameu in image:
            for expsu, cu in polyu.terms.items():
                key = (a, e, expsu, nameu)
                c = S.add(out.get(key, S.zero), S.mul(coeff, cu))
                if c == 0:
                    out.pop(key, None)
                else:
                    out[key] = c
    return out


def _restrict_pos(F, O):
    """Surviving cells of F over the open part, with the index map."""
    pos = {}
    cells = []
    for i, (obj, c, t) in enumerate(F.cells):
        if obj not in O.obj_map:
            raise ScopeError("object %r is not covered by open %r"
                             % (obj, O.name))
        tgt = O.obj_map[obj]
        if tgt is None:
            continue
        pos[i] = len(cells)
        cells.append((tgt, c, t))
    return cells, pos


def j_restrict(F, O):
    """Restrict a complex to a declared open subset."""
    P = F.P
    O = _declared(P, O)
    cells, pos = _restrict_pos(F, O)
    delta = {}
    for (k, l), terms in F.delta.items():
        if k not in pos or l not in pos:
            continue
        out = _restrict_entry(P, O, terms)
        if out:
            delta[(pos[k], pos[l])] = out
    return DggObject(O.pres, F.flavor, cells, delta)


def j_restrict_map(f, O):
    """Restrict a map to a declared open subset."""
    P = f.src.P
    O = _declared(P, O)
    srcu = j_restrict(f.src, O)
    dstu = j_restrict(f.dst, O)
    _, spos = _restrict_pos(f.src, O)
    _, dpos = _restrict_pos(f.dst, O)
    entries = {}
    for (k, l), terms in f.entries.items():
        if k not in dpos or l not in spos:
            continue
        out = _restrict_entry(P, O, terms)
        if out:
            entries[(dpos[k], spos[l])] = out
    return ChainMap(srcu, dstu, f.m, f.n, entries, check=False)


# ---------------------------------------------------------------------------
# Closed pushforward.


def _check_closed(P, sids, what):
    zset = set(sids)
    for sid in sids:
        st = P.stratum_by_id.get(sid)
        if st is None:
            raise ScopeError("%s mentions unknown stratum %r" % (what, sid))
        if not set(st.closure) <= zset:
            raise ScopeError("%s %r is not closed in %r"
                             % (what, sorted(zset), P.name))


def i_push(F, P):
    """Regard a complex over a closed sub-presentation as one over P."""
    PZ = F.P
    if PZ.ring != P.ring or PZ.xi != P.xi:
        raise ScopeError("pushforward needs matching rings and parameters")
    _check_closed(P, [st.sid for st in PZ.strata], "pushforward support")
    for st in PZ.strata:
        if P.objects.get(st.sid) != PZ.objects[st.sid]:
            raise ScopeError("object names disagree on stratum %r" % st.sid)
    return DggObject(P, F.flavor, list(F.cells),
                     {kl: dict(t) for kl, t in F.delta.items()})


def i_push_map(f, P):
    """Regard a map over a closed sub-presentation as one over P."""
    return ChainMap(i_push(f.src, P), i_push(f.dst, P), f.m, f.n,
                    {kl: dict(t) for kl, t in f.entries.items()}, check=False)


# ---------------------------------------------------------------------------
# Sparse exact solving, by independent components.


def _solve_sparse(S, cols, rhs):
    """Solve sum_j x_j cols[j] = rhs where columns are sparse dicts.

    Rows are arbitrary hashable keys.  The system splits into connected
    components, each solved exactly on its own; returns None when any
    component is inconsistent."""
    idx = {}

    def rid(key):
        if key not in idx:
            idx[key] = len(idx)
        return idx[key]

    ccols = [{rid(r): c for r, c in col.items() if c != 0} for col in cols]
    crhs = {rid(r): c for r, c in rhs.items() if c != 0}
    parent = {}

    def find(i):
        root = i
        while parent.get(root, root) != root:
            root = parent[root]
        while parent.get(i, i) != i:
            parent[i], i = root, parent[i]
        return root

    for col in ccols:
        rows = list(col)
        for r in rows[1:]:
            parent[find(r)] = find(rows[0])
    groups = {}
    for j, col in enumerate(ccols):
        if col:
            groups.setdefault(find(next(iter(col))), []).append(j)
    byroot = {}
    for r, c in crhs.items():
        byroot.setdefault(find(r), {})[r] = c
    for root in byroot:
        if root not in groups:
            return None
    x = [S.zero] * len(cols)
    for root, js in groups.items():
        rows = set(byroot.get(root, {}))
        for j in js:
            rows.update(ccols[j])
        rows = sorted(rows)
        rpos = {r: i for i, r in enumerate(rows)}
        mat = [[S.zero] * len(js) for _ in rows]
        for jj, j in enumerate(js):
            for r, c in ccols[j].items():
                mat[rpos[r]][jj] = c
        vec = [byroot.get(root, {}).get(r, S.zero) for r in rows]
        sol, _ = solve_exact(S, mat, vec)
        if sol is None:
            return None
        for jj, j in enumerate(js):
            x[j] = sol[jj]
    return x


def _entries_of(x, slots):
    out = {}
    for val, (k, l, key) in zip(x, slots):
        if val == 0:
            continue
        out.setdefault((k, l), {})[key] = val
    return out


# ---------------------------------------------------------------------------
# Extension over one closed stratum.


def _defect(P, flavor, cells, delta):
    """How far delta is from satisfying its curvature law."""
    parts = [matrix_compose(P, 1, delta, 1, delta)]
    if flavor == "con":
        parts.append(kappa_entries(P, delta))
    out = add_matrices(P.S, *parts)
    if flavor == "mon":
        out = add_matrices(P.S, out, scale_matrix(
            P.S, theta_matrix(P, cells), P.S.neg(P.S.one)))
    return out


def _defect_lin(P, flavor, fixed, unit):
    """Change of the defect to first order in one unit entry."""
    parts = [matrix_compose(P, 1, fixed, 1, unit),
             matrix_compose(P, 1, unit, 1, fixed)]
    if flavor == "con":
        parts.append(kappa_entries(P, unit))
    return add_matrices(P.S, *parts)


def _stage(P, flavor, cells, fixed, slots, row_pred, label):
    """Fill one block of the differential so the defect dies on a block.

    The demanded rows are chosen so that products of two unknown entries
    cannot land there, which keeps the system linear."""
    S = P.S
    rhs = {}
    for (k, l), terms in _defect(P, flavor, cells, fixed).items():
        if not row_pred(k, l):
            continue
        for key, c in terms.items():
            rhs[(k, l, key)] = S.neg(c)
    cols = []
    for (k, l, key) in slots:
        lin = _defect_lin(P, flavor, fixed, {(k, l): {key: S.one}})
        col = {}
        for (k2, l2), terms in lin.items():
            if not row_pred(k2, l2):
                continue
            for key2, c in terms.items():
                col[(k2, l2, key2)] = c
        cols.append(col)
    x = _solve_sparse(S, cols, rhs)
    if x is None:
        raise LiftError("no %s solves the curvature constraint" % label)
    return add_matrices(S, fixed, _entries_of(x, slots))


def _lift_tilde(F, P, O, cells_x):
    """A differential on the relabeled cells restricting exactly to F's."""
    S = P.S
    tmp = DggObject(P, F.flavor, cells_x, {}, check=False)
    slots = hom_basis(tmp, tmp, 1, 0)
    cols = []
    for (k, l, key) in slots:
        col = {}
        for keyu, c in _restrict_entry(P, O, {key: S.one}).items():
            col[(k, l, keyu)] = c
        cols.append(col)
    rhs = {}
    for (k, l), terms in F.delta.items():
        for key, c in terms.items():
            rhs[(k, l, key)] = c
    x = _solve_sparse(S, cols, rhs)
    if x is None:
        raise LiftError("the differential does not lift over the ambient "
                        "presentation")
    return _entries_of(x, slots)


def extend_over_closed_stratum(F, P, O=None):
    """Extend F over the one extra stratum of P, restricting back exactly.

    F lives over the presentation of a declared open O of P whose
    complement is a single closed stratum.  The result keeps F's cells
    (relabeled to ambient objects) and grows a block of cells on the
    closed stratum, one for each way a map can enter from there; the new
    differential blocks are forced by the curvature law."""
    flavor = F.flavor
    if O is None:
        O = _decl_for(P, F.P)
    else:
        O = _declared(P, O)
        if O.pres.name != F.P.name:
            raise ScopeError("F does not live over the open %r" % O.name)
    missing = [s for s in P.order if s not in set(O.strata)]
    if len(missing) != 1:
        raise ScopeError("expected one missing stratum, found %r" % (missing,))
    z = missing[0]
    if set(P.stratum_by_id[z].closure) != {z}:
        raise ScopeError("stratum %r is not closed in %r" % (z, P.name))
    amb_of = {}
    for amb, res in O.obj_map.items():
        if res is None:
            continue
        if res in amb_of:
            raise LiftError("object %r has two ambient sources" % res)
        amb_of[res] = amb
    cells_x = []
    for (o, c, t) in F.cells:
        if o not in amb_of:
            raise LiftError("no ambient object restricts to %r" % o)
        cells_x.append((amb_of[o], c, t))
    S = P.S
    zeros = (0,) * P.ring.n
    tilde = _lift_tilde(F, P, O, cells_x)
    objz = P.objects[z]
    cost = []
    eps = {}
    for i, (o, c, t) in enumerate(cells_x):
        for b, d in P.hom_basis(objz, o):
            eps[(i, len(cells_x) + len(cost))] = {(0, 0, zeros, b): S.one}
            cost.append((objz, c + d - 1, t + d))
    off = len(cells_x)
    cells_g = cells_x + cost
    fixed = add_matrices(S, tilde, eps)
    if cost:
        tmp = DggObject(P, flavor, cells_g, {}, check=False)
        slots = hom_basis(tmp, tmp, 1, 0)
        fixed = _stage(P, flavor, cells_g, fixed,
                       [s for s in slots if s[0] >= off and s[1] >= off],
                       lambda k, l: k < off <= l, "differential on the new block")
        fixed = _stage(P, flavor, cells_g, fixed,
                       [s for s in slots if s[0] >= off > s[1]],
                       lambda k, l: k < off and l < off, "gluing correction")
    G = DggObject(P, flavor, cells_g, fixed)
    back = j_restrict(G, O)
    if back.cells != F.cells or back.delta != F.delta:
        raise LiftError("the extension does not restrict back to its input")
    return G


# ---------------------------------------------------------------------------
# The stalk at a closed stratum, and the plus construction.


def closed_stalk(F, z):
    """Pushed stalk at a closed stratum, with the unit map into it.

    The stalk block has one cell for each way a map can leave a cell of F
    toward the stratum; its differential is the unique one making the
    unit a chain map."""
    P = F.P
    S = P.S
    flavor = F.flavor
    if z not in P.stratum_by_id:
        raise ScopeError("unknown stratum %r" % z)
    if set(P.stratum_by_id[z].closure) != {z}:
        raise ScopeError("stratum %r is not closed in %r" % (z, P.name))
    objz = P.objects[z]
    zeros = (0,) * P.ring.n
    cells = []
    uent = {}
    for i, (o, c, t) in enumerate(F.cells):
        for b, d in P.hom_basis(o, objz):
            uent[(len(cells), i)] = {(0, 0, zeros, b): S.one}
            cells.append((objz, c - d, t - d))
    tmp = DggObject(P, flavor, cells, {}, check=False)
    slots = hom_basis(tmp, tmp, 1, 0)
    cols = []
    for (k, l, key) in slots:
        col = {}
        mat = matrix_compose(P, 1, {(k, l): {key: S.one}}, 0, uent)
        for (k2, l2), terms in mat.items():
            for key2, c in terms.items():
                col[(k2, l2, key2)] = c
        cols.append(col)
    rhs = {}
    for (k2, l2), terms in matrix_compose(P, 0, uent, 1, F.delta).items():
        for key2, c in terms.items():
            rhs[(k2, l2, key2)] = c
    x = _solve_sparse(S, cols, rhs)
    if x is None:
        raise LiftError("no stalk differential makes the unit a chain map")
    X = DggObject(P, flavor, cells, _entries_of(x, slots))
    unit = ChainMap(F, X, 0, 0, uent)
    unit.require_closed()
    return X, unit


def plus_part(F, z):
    """Kill the stalk at a closed stratum: the cocone of the unit map."""
    _, unit = closed_stalk(F, z)
    return cocone(unit)


# ---------------------------------------------------------------------------
# Extension by zero and its dual.


def _chain_candidates(P):
    out = [(list(o.strata), o.pres) for o in P.filtration]
    out.append((list(P.order), P))
    return out


def j_shriek(F, P):
    """Extend by zero to P along declared opens, one stratum at a time.

    Each step extends over the new closed stratum and then kills the
    stalk there, so the result restricts back to F on the nose.  When
    several declared opens could supply the next stratum, the one whose
    stratum comes latest in the ambient order wins."""
    start = _decl_for(P, F.P)
    cur = F
    cur_strata = set(start.strata)
    full = set(P.order)
    while cur_strata != full:
        best = None
        for astrata, apres in _chain_candidates(P):
            aset = set(astrata)
            if len(aset) != len(cur_strata) + 1 or not aset >= cur_strata:
                continue
            inner = apres.open_by_strata(sorted(cur_strata))
            if inner is None or inner.pres.name != cur.P.name:
                continue
            z = next(iter(aset - cur_strata))
            posn = P.order.index(z)
            if best is None or posn > best[0]:
                best = (posn, z, apres, inner, aset)
        if best is None:
            raise ScopeError("no declared chain of opens grows %r inside %r"
                             % (sorted(cur_strata), P.name))
        _, z, apres, inner, aset = best
        if cur.P is not inner.pres:
            cur = DggObject(inner.pres, cur.flavor, cur.cells, cur.delta,
                            check=False)
        G = extend_over_closed_stratum(cur, apres, inner)
        cur = plus_part(G, z)
        cur_strata = aset
    direct = P.open_by_strata(sorted(start.strata))
    if direct is not None:
        back = j_restrict(cur, direct)
        if back.cells != F.cells or back.delta != F.delta:
            raise LiftError("extension by zero moved the open part")
    return cur


def j_star(F, P):
    """Extend to P with no sections from the boundary side.

    Computed by conjugating the extension by zero with duality."""
    G = verdier(j_shriek(verdier(F), P))
    start = _decl_for(P, F.P)
    direct = P.open_by_strata(sorted(start.strata))
    if direct is not None:
        back = j_restrict(G, direct)
        if back.cells != F.cells or back.delta != F.delta:
            raise LiftError("the dual extension moved the open part")
    return G


def _identity_anchor(A, B):
    if A.cells != B.cells:
        raise LiftError("restrictions disagree, no identity anchor exists")
    ent = {}
    for i, (obj, c, t) in enumerate(A.cells):
        ent[(i, i)] = {(0, 0, (0,) * A.P.ring.n, A.P.identity[obj]): A.P.S.one}
    return ChainMap(A, B, 0, 0, ent, check=False)


def _this_module():
    return sys.modules[__name__]


def adjunction_counit(F, O):
    """The map from the extension by zero of F's open part back to F."""
    P = F.P
    O = _declared(P, O)
    fu = j_restrict(F, O)
    fm = j_shriek(fu, P)
    known = _identity_anchor(j_restrict(fm, O), fu)
    return reduction._open_anchored(_this_module(), O, fm, F, known)


def adjunction_unit(F, O):
    """The map from F into the dual extension of its open part."""
    P = F.P
    O = _declared(P, O)
    fu = j_restrict(F, O)
    js = j_star(fu, P)
    known = _identity_anchor(fu, j_restrict(js, O))
    return reduction._open_anchored(_this_module(), O, F, js, known)


def shriek_to_star(F, P):
    """The comparison map between the two extensions of F."""
    O = _decl_for(P, F.P)
    direct = P.open_by_strata(sorted(O.strata))
    if direct is None:
        raise ScopeError("the opens of %r do not include %r directly"
                         % (P.name, sorted(O.strata)))
    left = j_shriek(F, P)
    right = j_star(F, P)
    known = _identity_anchor(j_restrict(left, direct),
                             j_restrict(right, direct))
    return reduction._open_anchored(_this_module(), direct, left, right, known)


# ---------------------------------------------------------------------------
# Supported parts.


class SupportedObject:
    """An object together with evidence it lives on a closed union.

    obj is the supported model, plus the extension by zero of the open
    part, triangle the span connecting them, strata the closed union,
    and certificate a homotopy contracting the restriction of obj to the
    complementary open (None when that open is empty)."""

    def __init__(self, obj, plus, triangle, strata, certificate, open_decl):
        self.obj = obj
        self.plus = plus
        self.triangle = triangle
        self.strata = list(strata)
        self.certificate = certificate
        self.open_decl = open_decl

    def verify(self):
        if self.open_decl is None:
            return True
        cu = j_restrict(self.obj, self.open_decl)
        want = identity_map(cu)
        return self.certificate.differential().entries == want.entries


def _closed_and_complement(F, Z):
    P = F.P
    zset = set(Z)
    _check_closed(P, sorted(zset), "support")
    strata = [s for s in P.order if s in zset]
    comp = [s for s in P.order if s not in zset]
    return strata, comp


def i_upper_star(F, Z):
    """The part of F supported on the closed union Z, from above.

    Cone of the counit from the extension by zero of the complementary
    open part; its restriction to that open is certified contractible."""
    P = F.P
    strata, comp = _closed_and_complement(F, Z)
    if not comp:
        zm = zero_object(P, F.flavor)
        alpha = ChainMap(zm, F, 0, 0, {}, check=False)
        C, tri = cone_triangle(alpha)
        return SupportedObject(C, zm, tri, strata, None, None)
    O = P.open_by_strata(comp)
    if O is None:
        raise ScopeError("no declared open covers the complement %r" % comp)
    alpha = adjunction_counit(F, O)
    C, tri = cone_triangle(alpha)
    cert = find_homotopy(identity_map(j_restrict(C, O)))
    if not cert:
        raise LiftError("the supported part kept sections on the open side")
    return SupportedObject(C, alpha.src, tri, strata, cert, O)


def i_upper_shriek(F, Z):
    """The part of F supported on Z, from below: cocone of the unit."""
    P = F.P
    strata, comp = _closed_and_complement(F, Z)
    if not comp:
        zm = zero_object(P, F.flavor)
        beta = ChainMap(F, zm, 0, 0, {}, check=False)
        C = cocone(beta)
        proj, inc = cocone_maps(beta)
        tri = Triangle(proj, beta, shift_map(inc, 1))
        return SupportedObject(C, zm, tri, strata, None, None)
    O = P.open_by_strata(comp)
    if O is None:
        raise ScopeError("no declared open covers the complement %r" % comp)
    beta = adjunction_unit(F, O)
    C = cocone(beta)
    proj, inc = cocone_maps(beta)
    tri = Triangle(proj, beta, shift_map(inc, 1))
    cert = find_homotopy(identity_map(j_restrict(C, O)))
    if not cert:
        raise LiftError("the cosupported part kept sections on the open side")
    return SupportedObject(C, beta.dst, tri, strata, cert, O)


class PurifyResult:
    """Outcome of cutting a supported object down to its closed union."""

    def __init__(self, purified, equivalence, report):
        self.purified = purified
        self.equivalence = equivalence
        self.report = report


def support_purify(sup):
    """Minimize a supported object onto its closed union of strata.

    When minimization clears every cell away from the support, the
    survivor is rebuilt over the closed sub-presentation and returned
    with the equivalence back to the original; otherwise purified is
    None and the report says which cells stayed outside."""
    C = sup.obj
    P = C.P
    M, tr = reduction.minimize(C)
    zset = set(sup.strata)
    outside = [cell for cell in M.cells if P.stratum_of[cell[0]] not in zset]
    eq = tr.equivalence.inverse()
    if outside:
        report = ("minimization left cells outside the support: %r"
                  % (outside,))
        return PurifyResult(None, eq, report)
    PZ = P.closed_sub([s for s in P.order if s in zset])
    pure = DggObject(PZ, C.flavor, list(M.cells),
                     {kl: dict(t) for kl, t in M.delta.items()})
    report = "supported on %r with %d cells" % (sorted(zset), len(M.cells))
    return PurifyResult(pure, eq, report)
