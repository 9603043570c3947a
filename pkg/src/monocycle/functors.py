"""Functors between the three flavors of recorded-entry objects.

The traffic pattern:

    eqv --forget--> con --mon--> mon --coi/inv--> eqv

mon doubles the cells (F, then F<-2>[1]) and wires the blocks as

    [[d0, d1 + r], [xi, -d0]]

where d = d0 + xb*d1 is the split of a constructible differential by
exterior part.  coi keeps the r-free part of a monodromic differential;
inv is the dual composite.  Verdier duality transposes the entry matrix
through the presentation's duality table; in the monodromic flavor the
cells are also reindexed by <-2>[1].  The Jordan functors view an
equivariant object over an r-trivial presentation as monodromic
(verbatim), or fit it in a two-block object with an r^n connecting
entry.

Every natural-isomorphism claim here is materialized as a NaturalWitness
holding explicit verified chain maps; nothing is asserted unwitnessed.
"""

from .presentation import Poly, PolyRing, Presentation, Stratum, OpenDecl
from .complexes import (
    ChainMap, DggError, DggObject, DegreeError, FlavorError, Triangle,
    cone, cone_maps, identity_map, zero_map,
)


class TrivialityError(DggError):
    pass


class FreeError(DggError):
    pass


class DualityError(DggError):
    pass


class NaturalWitness:
    """Named bundle of verified chain maps backing a naturality claim."""

    def __init__(self, claim, maps, homotopies=None, notes=""):
        self.claim = claim
        self.maps = dict(maps)
        self.homotopies = dict(homotopies or {})
        self.notes = notes

    def __repr__(self):
        return "NaturalWitness(%r: %s)" % (self.claim, ", ".join(sorted(self.maps)))


# ---------------------------------------------------------------------------
# Entry-matrix helpers.


def _add_term(delta, kl, key, c, S):
    row = delta.setdefault(kl, {})
    acc = S.add(row.get(key, S.zero), c)
    if S.is_zero(acc):
        row.pop(key, None)
        if not row:
            del delta[kl]
    else:
        row[key] = acc


def _copy(mat):
    return {kl: dict(t) for kl, t in mat.items()}


def _negate(S, mat):
    return {kl: {key: S.neg(c) for key, c in t.items()} for kl, t in mat.items()}


def _split_e(mat):
    """Split a constructible matrix as d0 + xb*d1; the d1 part is returned
    with its exterior marker stripped."""
    d0, d1 = {}, {}
    for kl, terms in mat.items():
        for (a, e, exps, b), c in terms.items():
            if e:
                d1.setdefault(kl, {})[(a, 0, exps, b)] = c
            else:
                d0.setdefault(kl, {})[(a, e, exps, b)] = c
    return d0, d1


def _split_r(mat):
    """Split a monodromic matrix as d0 + r*B; B keeps any leftover r powers."""
    d0, B = {}, {}
    for kl, terms in mat.items():
        for (a, e, exps, b), c in terms.items():
            if a:
                B.setdefault(kl, {})[(a - 1, e, exps, b)] = c
            else:
                d0.setdefault(kl, {})[(a, e, exps, b)] = c
    return d0, B


def _id_key(P, obj, a=0):
    return (a, 0, (0,) * P.ring.n, P.identity[obj])


# ---------------------------------------------------------------------------
# The four flavor changers.


def forget(F):
    """Reinterpret an equivariant object in the xb-carrying flavor."""
    if F.flavor != "eqv":
        raise FlavorError("forget consumes equivariant objects, got %s" % F.flavor)
    return DggObject(F.P, "con", F.cells, _copy(F.delta))


def mon(F):
    """Free-monodromy image of a constructible (or equivariant) object."""
    if F.flavor == "eqv":
        F = forget(F)
    if F.flavor != "con":
        raise FlavorError("mon consumes constructible objects, got %s" % F.flavor)
    P = F.P
    S = P.S
    off = len(F.cells)
    cells = list(F.cells) + [(o, c - 1, t - 2) for (o, c, t) in F.cells]
    d0, d1 = _split_e(F.delta)
    delta = {}
    for (k, l), terms in d0.items():
        for key, c in terms.items():
            _add_term(delta, (k, l), key, c, S)
            _add_term(delta, (k + off, l + off), key, S.neg(c), S)
    for (k, l), terms in d1.items():
        for key, c in terms.items():
            _add_term(delta, (k, l + off), key, c, S)
    for i, (o, c, t) in enumerate(F.cells):
        _add_term(delta, (i, i + off), _id_key(P, o, a=1), S.one, S)
        for exps, cf in P.xi.terms.items():
            _add_term(delta, (i + off, i), (0, 0, exps, P.identity[o]), cf, S)
    return DggObject(P, "mon", cells, delta)


def mon_map(f):
    """mon on morphisms: [[f0, (-1)^(m+1) f1], [0, (-1)^m f0]]."""
    src, dst = f.src, f.dst
    if src.flavor == "eqv":
        src, dst = forget(src), forget(dst)
        f = ChainMap(src, dst, f.m, f.n, _copy(f.entries), check=False)
    M, N = mon(src), mon(dst)
    S = src.P.S
    offs = len(src.cells)
    offd = len(dst.cells)
    f0, f1 = _split_e(f.entries)
    odd = f.m % 2
    entries = {}
    for (k, l), terms in f0.items():
        for key, c in terms.items():
            _add_term(entries, (k, l), key, c, S)
            _add_term(entries, (k + offd, l + offs), key,
                      S.neg(c) if odd else c, S)
    for (k, l), terms in f1.items():
        for key, c in terms.items():
            _add_term(entries, (k, l + offs), key,
                      c if odd else S.neg(c), S)
    return ChainMap(M, N, f.m, f.n, entries, check=False)


def coi(F):
    """Keep the r-free part of a monodromic differential."""
    if F.flavor != "mon":
        raise FlavorError("coi consumes monodromic objects, got %s" % F.flavor)
    delta = {}
    for kl, terms in F.delta.items():
        kept = {key: c for key, c in terms.items() if key[0] == 0}
        if kept:
            delta[kl] = kept
    return DggObject(F.P, "eqv", F.cells, delta)


def coi_map(f):
    """coi on morphisms: drop every entry term carrying an r power."""
    entries = {}
    for kl, terms in f.entries.items():
        kept = {key: c for key, c in terms.items() if key[0] == 0}
        if kept:
            entries[kl] = kept
    return ChainMap(coi(f.src), coi(f.dst), f.m, f.n, entries, check=False)


def inv(F):
    """Invariants of monodromy: the dual composite around coi."""
    return verdier(coi(verdier(F)))


def inv_coi_witness(F):
    """Chain isomorphism inv(F) -> coi(F)<2>[-1], with its inverse."""
    A = inv(F)
    B = coi(F).twist(2).shift(-1)
    pair = match_diagonal(A, B)
    if pair is None:
        raise DggError("invariants and shifted coinvariants did not line up")
    w, winv = pair
    return NaturalWitness("inv = coi<2>[-1]", {"iso": w, "inverse": winv})


# ---------------------------------------------------------------------------
# Verdier duality.


def _dual_cells(P, flavor, cells):
    out = []
    for (o, c, t) in cells:
        if o not in P.dual_obj:
            raise DualityError("no dual recorded for object %r" % o)
        if flavor == "mon":
            out.append((P.dual_obj[o], -c - 1, -t - 2))
        else:
            out.append((P.dual_obj[o], -c, -t))
    return out


def _dual_entries(P, entries, m):
    """Transpose an entry matrix through the duality table.

    Each term picks up (-1)^(e*(m-e)) for moving its exterior part to the
    other side of the transposed composition order; m is the first viewed
    component shared by all entries.
    """
    S = P.S
    out = {}
    for (k, l), terms in entries.items():
        for (a, e, exps, b), c in terms.items():
            if b not in P.dual_basis:
                raise DualityError("no dual recorded for basis element %r" % b)
            sc, db = P.dual_basis[b]
            c2 = S.mul(c, S.el(sc))
            if e and (m - e) % 2:
                c2 = S.neg(c2)
            _add_term(out, (l, k), (a, e, exps, db), c2, S)
    return out


def verdier(F):
    """Verdier duality; an involution on the nose in every flavor."""
    cells = _dual_cells(F.P, F.flavor, F.cells)
    delta = _dual_entries(F.P, F.delta, 1)
    return DggObject(F.P, F.flavor, cells, delta)


def verdier_map(f):
    """Dual of f: F -> G<n>[m], as a map dual(G) -> dual(F)<n>[m]."""
    DG = verdier(f.dst)
    DF = verdier(f.src)
    entries = _dual_entries(f.src.P, f.entries, f.m)
    return ChainMap(DG, DF, f.m, f.n, entries, check=False)


def mon_dual_witness(F):
    """The comparison mon(dual F) -> dual(mon F) for constructible F,
    realized by per-cell signs."""
    if F.flavor != "con":
        raise FlavorError("the mon/duality comparison starts constructible")
    A = mon(verdier(F))
    B = verdier(mon(F))
    pair = match_diagonal(A, B)
    if pair is None:
        raise DggError("mon and duality did not commute up to cell signs")
    w, winv = pair
    return NaturalWitness("mon(dual) = dual(mon)", {"iso": w, "inverse": winv})


# ---------------------------------------------------------------------------
# Jordan functors over r-trivial presentations.


def jordan(F):
    """View an equivariant object as monodromic, verbatim."""
    if F.flavor != "eqv":
        raise FlavorError("jordan consumes equivariant objects, got %s" % F.flavor)
    if not F.P.is_r_trivial():
        raise TrivialityError(
            "presentation %r has a nonzero xi element" % F.P.name)
    return DggObject(F.P, "mon", F.cells, _copy(F.delta))


def jordan_power_map(F, n):
    """The map jordan(F)<-2n> -> jordan(F) given by r^n times the identity."""
    J = jordan(F)
    A = J.twist(-2 * n)
    P = F.P
    entries = {}
    for i, (o, c, t) in enumerate(F.cells):
        entries[(i, i)] = {_id_key(P, o, a=n): P.S.one}
    return ChainMap(A, J, 0, 0, entries, check=False)


def jordan_n(F, n):
    """Two-block object with an r^n connecting entry: the cone over
    jordan_power_map(F, n)."""
    if n < 1:
        raise DegreeError("jordan blocks have size at least 1")
    return cone(jordan_power_map(F, n))


def jordan_n_triangle(F, n):
    """jordan(F)<-2n> -> jordan(F) -> jordan_n(F) -> with its maps."""
    g = jordan_power_map(F, n)
    into, out = cone_maps(g)
    return into.dst, Triangle(g, into, out)


def jordan_tower(F, n, m):
    """The maps jordan_n(F)<-2m> -> jordan_{n+m}(F) -> jordan_m(F), with
    the connecting map to the shifted first term."""
    P = F.P
    S = P.S
    Jn = jordan_n(F, n)
    Jm = jordan_n(F, m)
    Jnm = jordan_n(F, n + m)
    A = Jn.twist(-2 * m)
    half = len(F.cells)
    first = {}
    second = {}
    third = {}
    for i, (o, c, t) in enumerate(F.cells):
        first[(i, i)] = {_id_key(P, o, a=m): S.one}
        first[(i + half, i + half)] = {_id_key(P, o): S.one}
        second[(i, i)] = {_id_key(P, o): S.one}
        second[(i + half, i + half)] = {_id_key(P, o, a=n): S.one}
        third[(i, i + half)] = {_id_key(P, o): S.one}
    f = ChainMap(A, Jnm, 0, 0, first, check=False)
    g = ChainMap(Jnm, Jm, 0, 0, second, check=False)
    h = ChainMap(Jm, A, 1, 0, third, check=False)
    f.require_closed()
    g.require_closed()
    h.require_closed()
    return Triangle(f, g, h)


# ---------------------------------------------------------------------------
# Monodromy.


def monodromy(F):
    """The monodromy map N: F -> F<2>; r times the identity in the
    monodromic flavor, minus the exterior part of the differential in the
    constructible one."""
    P = F.P
    if F.flavor == "mon":
        entries = {}
        for i, (o, c, t) in enumerate(F.cells):
            entries[(i, i)] = {_id_key(P, o, a=1): P.S.one}
        return ChainMap(F, F, 0, 2, entries, check=False)
    if F.flavor == "con":
        d0, d1 = _split_e(F.delta)
        N = ChainMap(F, F, 0, 2, _negate(P.S, d1), check=False)
        N.require_closed()
        return N
    raise FlavorError("equivariant objects carry no monodromy")


# ---------------------------------------------------------------------------
# The coinvariants adjunction.


def free_monodromic(F):
    """mon after forget; the left<->right adjoint of coi in one step."""
    return mon(forget(F))


def coi_adjunction(F):
    """Counit and unit for coi left adjoint to mon-after-forget.

    For monodromic F: the unit F -> mon(forget(coi F)) is [id; B] where
    the differential of F splits as d0 + r*B, and the counit lives on
    coi(F).  For equivariant F: the counit coi(mon(forget F)) -> F is
    [id, 0], and the unit lives on mon(forget F).  Both triangle
    identities are checked exactly.
    """
    if F.flavor == "mon":
        C = coi(F)
        eta = _adjunction_unit(F)
        eps = _adjunction_counit(C)
        left = eps.compose(coi_map(eta))
        if left != identity_map(C):
            raise DggError("triangle identity failed on the coinvariants side")
        right = mon_map(eps).compose(_adjunction_unit(free_monodromic(C)))
        if right != identity_map(free_monodromic(C)):
            raise DggError("triangle identity failed on the monodromic side")
        return NaturalWitness("coi -| mon after forget",
                              {"unit": eta, "counit": eps})
    if F.flavor == "eqv":
        eps = _adjunction_counit(F)
        G = free_monodromic(F)
        eta = _adjunction_unit(G)
        left = _adjunction_counit(coi(G)).compose(coi_map(eta))
        if left != identity_map(coi(G)):
            raise DggError("triangle identity failed on the coinvariants side")
        right = mon_map(eps).compose(eta)
        if right != identity_map(G):
            raise DggError("triangle identity failed on the monodromic side")
        return NaturalWitness("coi -| mon after forget",
                              {"unit": eta, "counit": eps})
    raise FlavorError("the adjunction connects monodromic and equivariant objects")


def _adjunction_unit(F):
    """eta: F -> mon(forget(coi F)) for monodromic F."""
    G = free_monodromic(coi(F))
    P = F.P
    S = P.S
    off = len(F.cells)
    _, B = _split_r(F.delta)
    entries = {}
    for i, (o, c, t) in enumerate(F.cells):
        entries[(i, i)] = {_id_key(P, o): S.one}
    for (k, l), terms in B.items():
        for key, c in terms.items():
            _add_term(entries, (k + off, l), key, c, S)
    eta = ChainMap(F, G, 0, 0, entries, check=False)
    eta.require_closed()
    return eta


def _adjunction_counit(F):
    """eps: coi(mon(forget F)) -> F for equivariant F."""
    C = coi(free_monodromic(F))
    P = F.P
    entries = {}
    for i, (o, c, t) in enumerate(F.cells):
        entries[(i, i)] = {_id_key(P, o): P.S.one}
    eps = ChainMap(C, F, 0, 0, entries, check=False)
    eps.require_closed()
    return eps


# ---------------------------------------------------------------------------
# Collapse to the plain-coefficients presentation.


def _single_gen_drop(ring, poly, what):
    """Index of the generator a unit multiple of which the polynomial is;
    None for the zero polynomial."""
    if poly.is_zero():
        return None
    if len(poly.terms) != 1:
        raise FreeError("%s is not a unit times one generator" % what)
    (exps, c), = poly.terms.items()
    if sum(exps) != 1 or not ring.S.is_unit(c):
        raise FreeError("%s is not a unit times one generator" % what)
    return exps.index(1)


def _drop_poly(poly, ring2, drop):
    terms = {}
    for exps, c in poly.terms.items():
        if exps[drop]:
            continue
        terms[exps[:drop] + exps[drop + 1:]] = c
    return Poly(ring2, terms)


def collapse_presentation(P):
    """Base-change a presentation along xi -> 0: drop the generator xi is
    a unit multiple of (globally and in each stratum algebra) and send it
    to zero everywhere.  Returns P itself when nothing acts."""
    drop = _single_gen_drop(P.ring, P.xi, "xi element of %r" % P.name)
    hdrops = {}
    for st in P.strata:
        hring = st.hring(P.S)
        hd = _single_gen_drop(hring, st.hxi(P.S),
                              "stratum %r xi element" % st.sid)
        hdrops[st.sid] = hd
    subs = [(o, collapse_presentation(o.pres)) for o in P.filtration]
    if drop is None and all(h is None for h in hdrops.values()) \
            and all(s2 is o.pres for o, s2 in subs):
        return P
    gens2 = [g for i, g in enumerate(P.ring.gens) if i != drop]
    ring2 = PolyRing(P.S, gens2)
    if drop is None:
        ring2 = P.ring
        conv = lambda p: p
    else:
        conv = lambda p: _drop_poly(p, ring2, drop)
    strata2 = []
    for st in P.strata:
        hd = hdrops[st.sid]
        hgens2 = [g for i, g in enumerate(st.hgens) if i != hd]
        hring2 = PolyRing(P.S, hgens2)
        strata2.append(Stratum(st.sid, st.dim, st.closure, hgens2,
                               hring2.zero().to_json()))
    comp2 = {}
    for key, rules in P.comp.items():
        out = []
        for poly, name in rules:
            p2 = conv(poly)
            if not p2.is_zero():
                out.append((p2, name))
        comp2[key] = out
    filtration2 = []
    for o, sub2 in subs:
        sdrop = _single_gen_drop(o.pres.ring, o.pres.xi, "xi")
        if sdrop is None:
            sconv = lambda p: p
        else:
            sring2 = sub2.ring
            sconv = lambda p, _r=sring2, _d=sdrop: _drop_poly(p, _r, _d)
        basis_map2 = {}
        for amb, rules in o.basis_map.items():
            basis_map2[amb] = [(sconv(p), n) for p, n in rules
                               if not sconv(p).is_zero()]
        action2 = {}
        for (g, bn), rules in o.gen_action.items():
            if drop is not None and g == P.ring.gens[drop][0]:
                continue
            action2[(g, bn)] = [(sconv(p), n) for p, n in rules
                                if not sconv(p).is_zero()]
        filtration2.append(OpenDecl(o.name, o.strata, sub2, dict(o.obj_map),
                                    basis_map2, action2))
    return Presentation(
        P.name + "|k0", P.S, ring2, ring2.zero(), strata2,
        dict(P.objects),
        {k: list(v) for k, v in P.homs.items()},
        comp2, dict(P.identity), dict(P.dual_obj), dict(P.dual_basis),
        filtration2, None)


def collapse_nonequivariant(F):
    """Send xi and xb to zero: the image of a constructible object over
    the plain-coefficients presentation."""
    if F.flavor == "eqv":
        F = forget(F)
    if F.flavor != "con":
        raise FlavorError(
            "collapse consumes constructible objects, got %s" % F.flavor)
    if not F.P.is_r_free():
        raise FreeError("presentation %r is not r-free" % F.P.name)
    P = F.P
    kP = collapse_presentation(P)
    drop = _single_gen_drop(P.ring, P.xi, "xi element")
    delta = {}
    for (k, l), terms in F.delta.items():
        for (a, e, exps, b), c in terms.items():
            if e or exps[drop]:
                continue
            _add_term(delta, (k, l),
                      (a, e, exps[:drop] + exps[drop + 1:], b), c, kP.S)
    return DggObject(kP, "eqv", F.cells, delta)


# ---------------------------------------------------------------------------
# Diagonal comparison solver.


def match_diagonal(A, B):
    """Chain isomorphism A -> B acting by a unit times the identity on
    cells matched up by (object, shift, twist); None when the entry
    matrices do not line up that way.

    Cells are paired by equal labels, in order within each label class.
    The units are solved by propagation along nonzero entries (the
    relation is u_k * dA[k,l] = dB[sk,sl] * u_l) and the resulting map
    and its inverse are both verified closed.
    """
    if A.flavor != B.flavor or A.P.name != B.P.name:
        return None
    if sorted(A.cells) != sorted(B.cells):
        return None
    S = A.P.S
    slots = {}
    for j, cell in enumerate(B.cells):
        slots.setdefault(cell, []).append(j)
    sigma = []
    taken = {}
    for cell in A.cells:
        i = taken.get(cell, 0)
        taken[cell] = i + 1
        sigma.append(slots[cell][i])
    n = len(A.cells)
    inv_sigma = {s: i for i, s in enumerate(sigma)}
    pairs = set(A.delta)
    for (bk, bl) in B.delta:
        pairs.add((inv_sigma[bk], inv_sigma[bl]))
    edges = {i: [] for i in range(n)}
    for (k, l) in pairs:
        at = A.delta.get((k, l), {})
        bt = B.delta.get((sigma[k], sigma[l]), {})
        if not at or not bt:
            return None
        if set(at) != set(bt):
            return None
        ratio = None
        for key, ca in at.items():
            try:
                r = S.div(bt[key], ca)
            except (ValueError, ZeroDivisionError):
                return None
            if ratio is None:
                ratio = r
            elif ratio != r:
                return None
        if not S.is_unit(ratio):
            return None
        # u_k = ratio * u_l
        edges[l].append((k, ratio))
        edges[k].append((l, S.inv(ratio)))
    units = [None] * n
    for root in range(n):
        if units[root] is not None:
            continue
        units[root] = S.one
        queue = [root]
        while queue:
            l = queue.pop()
            for k, ratio in edges[l]:
                want = S.mul(ratio, units[l])
                if units[k] is None:
                    units[k] = want
                    queue.append(k)
                elif units[k] != want:
                    return None
    entries = {}
    inv_entries = {}
    P = A.P
    for i, (o, c, t) in enumerate(A.cells):
        u = units[i]
        if not S.is_unit(u):
            return None
        entries[(sigma[i], i)] = {_id_key(P, o): u}
        inv_entries[(i, sigma[i])] = {_id_key(P, o): S.inv(u)}
    w = ChainMap(A, B, 0, 0, entries, check=False)
    winv = ChainMap(B, A, 0, 0, inv_entries, check=False)
    if not w.is_closed() or not winv.is_closed():
        return None
    return w, winv


# ---------------------------------------------------------------------------
# Triangulation witnesses for mon.


def mon_shift_witness(F):
    """Chain isomorphism mon(F[1]) -> mon(F)[1]: identity on the first
    block, minus identity on the second."""
    if F.flavor == "eqv":
        F = forget(F)
    A = mon(F.shift(1))
    B = mon(F).shift(1)
    pair = match_diagonal(A, B)
    if pair is None:
        raise DggError("mon did not commute with the shift up to cell signs")
    w, winv = pair
    return NaturalWitness("mon(F[1]) = mon(F)[1]", {"iso": w, "inverse": winv})


def mon_cone_witness(f):
    """Chain isomorphism mon(cone(f)) -> cone(mon(f)): a block
    permutation with one sign."""
    A = mon(cone(f))
    B = cone(mon_map(f))
    pair = match_diagonal(A, B)
    if pair is None:
        raise DggError("mon did not commute with the cone up to cell signs")
    w, winv = pair
    return NaturalWitness("mon(cone f) = cone(mon f)", {"iso": w, "inverse": winv})
