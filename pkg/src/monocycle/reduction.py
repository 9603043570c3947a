"""Gaussian elimination, layer peeling, and normal forms over one stratum.

Every rewrite in this module hands back the rewritten object together with
an explicit two-sided homotopy equivalence, so a caller can transport maps
across the rewrite and re-verify the claim without trusting the rewriter.
"""

from .complexes import (
    ChainMap, ClosednessError, CurvatureError, DggError, DggObject,
    FlavorError, Homotopy, LiftError, ModuleError, cocone, compose_entries,
    cone, find_homotopy, generator, hom_basis, identity_map, matrix_compose,
    shift_map, zero_object,
)
from .functors import FreeError, match_diagonal, mon, mon_cone_witness, mon_map
from .scalars import solve_exact


class EmptyError(DggError):
    """Raised when a peeling step is asked for on an object with no cells."""


class FaithfulnessError(DggError):
    """Raised when a map refuses to descend along mon."""


def _idkey(P, obj, a=0):
    return (a, 0, (0,) * P.ring.n, P.identity[obj])


def _neg_terms(S, terms):
    return {key: S.neg(c) for key, c in terms.items()}


def _scale_terms(S, terms, c):
    out = {}
    for key, v in terms.items():
        w = S.mul(v, c)
        if not S.is_zero(w):
            out[key] = w
    return out


def _acc_terms(S, out, terms):
    for key, c in terms.items():
        v = S.add(out.get(key, S.zero), c)
        if S.is_zero(v):
            out.pop(key, None)
        else:
            out[key] = v


def _connect(f, g, candidates=()):
    """A verified homotopy between f and g, trying candidate entry dicts
    before falling back to the linear solver."""
    if f.entries == g.entries:
        return Homotopy(f, g, {})
    for cand in candidates:
        h = Homotopy(f, g, cand)
        try:
            return h.verify()
        except ClosednessError:
            pass
    h = find_homotopy(f, g)
    if not h:
        raise DggError("maps expected to be homotopic are not")
    return h


# ---------------------------------------------------------------------------
# Equivalences.


class Equivalence:
    """A two-sided homotopy equivalence.

    fwd: F -> G and back: G -> F, with homotopies h_src connecting
    back . fwd to id_F and h_dst connecting fwd . back to id_G.
    """

    def __init__(self, fwd, back, h_src, h_dst):
        self.fwd = fwd
        self.back = back
        self.h_src = h_src
        self.h_dst = h_dst

    @property
    def src(self):
        return self.fwd.src

    @property
    def dst(self):
        return self.fwd.dst

    def verify(self):
        self.fwd.require_closed()
        self.back.require_closed()
        round_src = self.back.compose(self.fwd)
        round_dst = self.fwd.compose(self.back)
        f1, g1 = self.h_src.connects
        if f1.entries != round_src.entries or g1.entries != identity_map(self.src).entries:
            raise DggError("source homotopy connects the wrong pair")
        f2, g2 = self.h_dst.connects
        if f2.entries != round_dst.entries or g2.entries != identity_map(self.dst).entries:
            raise DggError("target homotopy connects the wrong pair")
        self.h_src.verify()
        self.h_dst.verify()
        return self

    @staticmethod
    def identity(F):
        i = identity_map(F)
        return Equivalence(i, i, Homotopy(i.compose(i), i, {}),
                           Homotopy(i.compose(i), i, {}))

    @staticmethod
    def from_iso(fwd, back):
        """Wrap a strict isomorphism pair; compositions are re-verified
        and connected by (preferably empty) homotopies."""
        fwd.require_closed()
        back.require_closed()
        return Equivalence(
            fwd, back,
            _connect(back.compose(fwd), identity_map(fwd.src)),
            _connect(fwd.compose(back), identity_map(fwd.dst)))

    def then(self, other):
        """This equivalence followed by other (src of other = dst of self)."""
        if other.src is not self.dst and other.src.cells != self.dst.cells:
            raise ModuleError("equivalences do not chain")
        fwd = other.fwd.compose(self.fwd)
        back = self.back.compose(other.back)
        cand_src = self.back.compose(other.h_src).compose(self.fwd).add(self.h_src)
        h_src = _connect(back.compose(fwd), identity_map(self.src),
                         [cand_src.entries])
        cand_dst = other.fwd.compose(self.h_dst).compose(other.back).add(other.h_dst)
        h_dst = _connect(fwd.compose(back), identity_map(other.dst),
                         [cand_dst.entries])
        return Equivalence(fwd, back, h_src, h_dst)

    def inverse(self):
        return Equivalence(self.back, self.fwd, self.h_dst, self.h_src)

    def shift(self, m):
        fwd = shift_map(self.fwd, m)
        back = shift_map(self.back, m)
        cs = shift_map(self.h_src, m).entries
        cd = shift_map(self.h_dst, m).entries
        S = self.fwd.src.P.S
        neg = lambda mat: {kl: _neg_terms(S, t) for kl, t in mat.items()}
        h_src = _connect(back.compose(fwd), identity_map(fwd.src), [cs, neg(cs)])
        h_dst = _connect(fwd.compose(back), identity_map(fwd.dst), [cd, neg(cd)])
        return Equivalence(fwd, back, h_src, h_dst)


def _exact_equiv(X, Y):
    """The identity equivalence between two equal presentations of the
    same object (same cells, same differential)."""
    if X.cells != Y.cells or X.delta != Y.delta:
        raise DggError("objects are not literally equal")
    P = X.P
    ent = {(i, i): {_idkey(P, o): P.S.one} for i, (o, c, t) in enumerate(X.cells)}
    fwd = ChainMap(X, Y, 0, 0, ent, check=False)
    back = ChainMap(Y, X, 0, 0, dict(ent), check=False)
    return Equivalence(fwd, back,
                       Homotopy(back.compose(fwd), identity_map(X), {}),
                       Homotopy(fwd.compose(back), identity_map(Y), {}))


# ---------------------------------------------------------------------------
# Contractible-pair cancellation.


def _unit_id_entry(F, k, l):
    """The coefficient when delta[(k, l)] is a single identity term with a
    unit coefficient, else None."""
    terms = F.delta.get((k, l))
    if not terms or len(terms) != 1:
        return None
    P = F.P
    ((a, e, exps, b), c), = terms.items()
    if a or e or any(exps):
        return None
    if b != P.identity.get(F.cells[k][0]):
        return None
    return c if P.S.is_unit(c) else None


def _find_unit(F):
    for kl in sorted(F.delta):
        if _unit_id_entry(F, kl[0], kl[1]) is not None:
            return kl
    return None


def eliminate_pair(F, k, l):
    """Cancel the contractible pair joined by the unit entry delta[(k, l)].

    Returns (reduced object, Equivalence F ~ reduced).  The projection and
    inclusion carry the usual one-column corrections and the pair of cells
    disappears; everything is re-verified before returning.
    """
    u = _unit_id_entry(F, k, l)
    if u is None:
        raise ModuleError(
            "delta entry (%d, %d) is not a unit multiple of an identity" % (k, l))
    P = F.P
    S = P.S
    n = len(F.cells)
    keep = [i for i in range(n) if i != k and i != l]
    pos = {old: new for new, old in enumerate(keep)}
    uinv = {_idkey(P, F.cells[k][0]): S.inv(u)}

    col = {i: F.delta[(i, l)] for i in keep if (i, l) in F.delta}
    row = {j: F.delta[(k, j)] for j in keep if (k, j) in F.delta}

    delta = {}
    for (i, j), terms in F.delta.items():
        if i in pos and j in pos:
            delta[(pos[i], pos[j])] = dict(terms)
    for j, bj in row.items():
        ub = compose_entries(P, -1, uinv, 1, bj)
        for i, ci in col.items():
            corr = compose_entries(P, 1, ci, 0, ub)
            tgt = delta.setdefault((pos[i], pos[j]), {})
            _acc_terms(S, tgt, _neg_terms(S, corr))
            if not tgt:
                del delta[(pos[i], pos[j])]
    cells = [F.cells[i] for i in keep]
    G = DggObject(P, F.flavor, cells, delta)

    proj = {(pos[i], i): {_idkey(P, o): S.one}
            for i, (o, c, t) in enumerate(F.cells) if i in pos}
    for i, ci in col.items():
        terms = _neg_terms(S, compose_entries(P, 1, ci, -1, uinv))
        if terms:
            proj[(pos[i], k)] = terms
    inc = {(i, pos[i]): {_idkey(P, o): S.one}
           for i, (o, c, t) in enumerate(F.cells) if i in pos}
    for j, bj in row.items():
        terms = _neg_terms(S, compose_entries(P, -1, uinv, 1, bj))
        if terms:
            inc[(l, pos[j])] = terms
    p = ChainMap(F, G, 0, 0, proj, check=False)
    i_ = ChainMap(G, F, 0, 0, inc, check=False)
    p.require_closed()
    i_.require_closed()
    if p.compose(i_).entries != identity_map(G).entries:
        raise DggError("cancellation retraction failed to split")
    h_cand = {(l, k): {next(iter(uinv)): S.neg(S.inv(u))}}
    h_src = _connect(i_.compose(p), identity_map(F), [h_cand])
    h_dst = Homotopy(p.compose(i_), identity_map(G), {})
    return G, Equivalence(p, i_, h_src, h_dst)


# ---------------------------------------------------------------------------
# Minimization.


class ReductionTrace:
    """Record of the elementary moves taking src to dst, with the composite
    two-sided equivalence."""

    def __init__(self, src, dst, moves, equivalence):
        self.src = src
        self.dst = dst
        self.moves = moves
        self.equivalence = equivalence

    def replay(self, F=None):
        """Re-run the recorded moves and return the result (checked
        against dst when starting from src)."""
        cur = self.src if F is None else F
        for mv in self.moves:
            kind = mv["kind"]
            if kind == "cancel":
                k, l = mv["pair"]
                if (cur.cells[k], cur.cells[l]) != mv["cells"]:
                    raise DggError("trace does not match the object")
                cur, _ = eliminate_pair(cur, k, l)
            elif kind == "replace":
                cur, _ = _replace_column(cur, mv["col"], mv["vec"])
            elif kind == "swap":
                cur, _ = _permute(cur, mv["order"])
            elif kind == "split":
                pass
            else:
                raise DggError("unknown move kind %r" % kind)
        if F is None and (cur.cells != self.dst.cells or cur.delta != self.dst.delta):
            raise DggError("replay did not reproduce the recorded output")
        return cur

    def verify(self):
        self.equivalence.verify()
        return self

    def summary(self):
        kinds = {}
        for mv in self.moves:
            kinds[mv["kind"]] = kinds.get(mv["kind"], 0) + 1
        inner = ", ".join("%d %s" % (kinds[k], k) for k in sorted(kinds)) or "no moves"
        return "%d cells -> %d cells (%s)" % (
            len(self.src.cells), len(self.dst.cells), inner)


def minimize(F):
    """Cancel unit identity entries until none remain.

    Returns (minimal object, ReductionTrace)."""
    cur = F
    eq = Equivalence.identity(F)
    moves = []
    while True:
        hit = _find_unit(cur)
        if hit is None:
            break
        k, l = hit
        moves.append({"kind": "cancel", "pair": (k, l),
                      "cells": (cur.cells[k], cur.cells[l])})
        cur, step = eliminate_pair(cur, k, l)
        eq = eq.then(step)
    return cur, ReductionTrace(F, cur, moves, eq)


# ---------------------------------------------------------------------------
# Layer peeling.


def _layer(cell):
    return cell[1] - cell[2]


def peel_top(F):
    """Split off the top total-degree layer.

    Returns (top, rest, f) with f: rest[-1] -> top and cone(f) equal to F
    after canonical reordering.  The top layer carries no differential and
    receives no arrows from outside beyond the connecting map, which the
    degree bookkeeping forces.
    """
    if F.flavor not in ("eqv", "con"):
        raise FlavorError("peeling needs a one-sided flavor, not %r" % F.flavor)
    if not F.cells:
        raise EmptyError("cannot peel an object with no cells")
    lmax = max(_layer(cell) for cell in F.cells)
    topidx = [i for i, cell in enumerate(F.cells) if _layer(cell) == lmax]
    restidx = [i for i, cell in enumerate(F.cells) if _layer(cell) != lmax]
    tset = set(topidx)
    tpos = {old: new for new, old in enumerate(topidx)}
    rpos = {old: new for new, old in enumerate(restidx)}
    rest_delta = {}
    corner = {}
    for (i, j), terms in F.delta.items():
        if j in tset:
            raise CurvatureError(
                "cell %d %r of the top layer supports a differential" % (j, F.cells[j]))
        if i in tset:
            corner[(tpos[i], rpos[j])] = dict(terms)
        else:
            rest_delta[(rpos[i], rpos[j])] = dict(terms)
    P = F.P
    top = DggObject(P, F.flavor, [F.cells[i] for i in topidx], {})
    rest = DggObject(P, F.flavor, [F.cells[i] for i in restidx], rest_delta)
    f = ChainMap(rest.shift(-1), top, 0, 0, corner, check=False)
    f.require_closed()
    if cone(f).canonical() != F.canonical():
        raise CurvatureError("peeled layers failed to reassemble")
    return top, rest, f


# ---------------------------------------------------------------------------
# Basis changes.


def _replace_column(F, j, vec):
    """Change basis so that slot j holds the vector vec = {i: terms}.

    vec[j] must be a unit multiple of the identity.  Returns
    (object in the new basis, Equivalence)."""
    P = F.P
    S = P.S
    n = len(F.cells)
    head = vec.get(j)
    if head is None or len(head) != 1:
        raise ModuleError("replacement vector needs an identity head at %d" % j)
    ((a, e, exps, b), c), = head.items()
    if a or e or any(exps) or b != P.identity.get(F.cells[j][0]) or not S.is_unit(c):
        raise ModuleError("replacement vector head at %d is not a unit identity" % j)
    cinv = S.inv(c)
    U = {(i, i): {_idkey(P, o): S.one} for i, (o, cc, tt) in enumerate(F.cells)
         if i != j}
    for i, terms in vec.items():
        if terms:
            U[(i, j)] = dict(terms)
    Uinv = {(i, i): {_idkey(P, o): S.one} for i, (o, cc, tt) in enumerate(F.cells)
            if i != j}
    Uinv[(j, j)] = {_idkey(P, F.cells[j][0]): cinv}
    for i, terms in vec.items():
        if i == j:
            continue
        t = _scale_terms(S, _neg_terms(S, terms), cinv)
        if t:
            Uinv[(i, j)] = t
    delta = matrix_compose(P, 0, Uinv, 1, matrix_compose(P, 1, F.delta, 0, U))
    G = DggObject(P, F.flavor, list(F.cells), delta)
    fwd = ChainMap(F, G, 0, 0, Uinv, check=False)
    back = ChainMap(G, F, 0, 0, U, check=False)
    fwd.require_closed()
    back.require_closed()
    if back.compose(fwd).entries != identity_map(F).entries:
        raise DggError("basis change is not invertible")
    return G, Equivalence(fwd, back,
                          Homotopy(back.compose(fwd), identity_map(F), {}),
                          Homotopy(fwd.compose(back), identity_map(G), {}))


def _permute(F, order):
    """Reindex cells so that new position p holds old cell order[p]."""
    P = F.P
    if sorted(order) != list(range(len(F.cells))):
        raise ModuleError("not a permutation of the cells")
    inv = {old: new for new, old in enumerate(order)}
    cells = [F.cells[i] for i in order]
    delta = {(inv[i], inv[j]): dict(t) for (i, j), t in F.delta.items()}
    G = DggObject(P, F.flavor, cells, delta)
    fwd = ChainMap(F, G, 0, 0,
                   {(inv[i], i): {_idkey(P, o): P.S.one}
                    for i, (o, c, t) in enumerate(F.cells)}, check=False)
    back = ChainMap(G, F, 0, 0,
                    {(i, inv[i]): {_idkey(P, o): P.S.one}
                     for i, (o, c, t) in enumerate(F.cells)}, check=False)
    return G, Equivalence(fwd, back,
                          Homotopy(back.compose(fwd), identity_map(F), {}),
                          Homotopy(fwd.compose(back), identity_map(G), {}))


# ---------------------------------------------------------------------------
# The one-stratum decomposition.


class Decomposition:
    """Cone tree exhibiting a one-stratum object as iterated extensions of
    twisted free monodromic generators."""

    def __init__(self, src, normal, equivalence, leaves, moves):
        self.src = src
        self.normal = normal
        self.equivalence = equivalence
        self.leaves = leaves
        self.moves = moves

    def blocks(self):
        return len(self.leaves)

    def leaf(self, k):
        o, c, t = self.leaves[k]
        return mon(generator(self.src.P, "con", o, c, t))

    def suffix(self, k):
        """The normal form truncated to blocks k and later."""
        base = 2 * k
        cells = self.normal.cells[base:]
        delta = {(i - base, j - base): dict(t)
                 for (i, j), t in self.normal.delta.items()
                 if i >= base and j >= base}
        return DggObject(self.normal.P, "mon", cells, delta)

    def connecting(self, k):
        """The map whose cone glues block k onto the later blocks."""
        base = 2 * k
        src = self.suffix(k + 1).shift(-1)
        entries = {}
        for (i, j), t in self.normal.delta.items():
            if base <= i < base + 2 and j >= base + 2:
                entries[(i - base, j - base - 2)] = dict(t)
        f = ChainMap(src, self.leaf(k), 0, 0, entries, check=False)
        f.require_closed()
        return f

    def verify(self):
        self.equivalence.verify()
        for k in range(self.blocks()):
            got = cone(self.connecting(k))
            want = self.suffix(k)
            if got.cells != want.cells or got.delta != want.delta:
                raise DggError("cone tree does not reassemble at block %d" % k)
        return self

    def summary(self):
        return "%d cells -> %d leaves %s" % (
            len(self.src.cells), self.blocks(),
            [tuple(l) for l in self.leaves])


def _xi_data(P):
    """(generator index, exponent tuple, unit coefficient) of xi, which
    must be a unit multiple of a single degree-2 generator."""
    xi = P.xi
    if xi.is_zero():
        raise FreeError("xi acts by zero on presentation %r" % P.name)
    if len(xi.terms) != 1:
        raise FreeError("xi of %r is not a single generator" % P.name)
    (exps, c), = xi.terms.items()
    if sum(exps) != 1 or P.ring.mono_degree(exps) != 2:
        raise FreeError("xi of %r is not a degree-2 generator" % P.name)
    if not P.S.is_unit(c):
        raise FreeError("xi of %r has a non-unit coefficient" % P.name)
    return exps.index(1), exps, c


def decompose_single_stratum(F):
    """Run the rank recursion over one stratum.

    The pivot is the active cell of maximal total degree (lowest index on
    ties).  Its differential column, divided by the loop coefficient, either
    has a unit head one step up (split off a generator block) or a unit
    against xi one step down (split off a contractible block).  Returns a
    Decomposition; structural violations raise naming the offending cell.
    """
    P = F.P
    S = P.S
    if F.flavor != "mon":
        raise FlavorError("decomposition applies to the loop-equivariant flavor")
    if len(P.strata) != 1:
        raise ModuleError("decomposition needs a one-stratum presentation")
    _, xi_exps, xi_unit = _xi_data(P)
    for (src, dst), basis in P.homs.items():
        extra = [b for b, d in basis if b != P.identity.get(src) or d != 0]
        if extra:
            raise ModuleError(
                "hom basis %r is not freely generated by the identity" % extra[0])

    cur = F
    eq = Equivalence.identity(F)
    moves = []
    leaves = []
    done = 0

    def record(mv):
        moves.append(mv)

    while done < len(cur.cells):
        active = list(range(done, len(cur.cells)))
        piv = max(active, key=lambda i: (_layer(cur.cells[i]), -i))
        obj, cp, tp = cur.cells[piv]
        col = {}
        for i in active:
            if i == piv:
                continue
            terms = cur.delta.get((i, piv))
            if terms:
                col[i] = terms
        d1 = {}
        d2p = {}
        for i, terms in col.items():
            oi, ci, ti = cur.cells[i]
            for (a, e, exps, b), c in terms.items():
                if a < 1:
                    raise CurvatureError(
                        "cell %d %r: entry from the pivot is not divisible "
                        "by the loop coefficient" % (i, cur.cells[i]))
            if (ci, ti) == (cp + 1, tp + 2):
                d1[i] = next(iter(terms.values()))
            elif (ci, ti) == (cp - 1, tp):
                c = terms.get((1, 0, xi_exps, P.identity[obj]))
                if c is not None:
                    d2p[i] = S.div(c, xi_unit)

        unit1 = [i for i in sorted(d1) if S.is_unit(d1[i])]
        if unit1:
            i2 = unit1[0]
            vec = {}
            for i, terms in col.items():
                vec[i] = {(a - 1, e, exps, b): c
                          for (a, e, exps, b), c in terms.items()}
            record({"kind": "replace", "col": i2, "vec": vec})
            cur, step = _replace_column(cur, i2, vec)
            eq = eq.then(step)
            want_r = {(i2, piv): {_idkey(P, obj, a=1): S.one}}
            got_r = {(i, piv): cur.delta[(i, piv)]
                     for i in active if (i, piv) in cur.delta}
            if got_r != want_r:
                raise CurvatureError(
                    "cell %d %r: pivot column did not reduce to the loop "
                    "coefficient" % (piv, cur.cells[piv]))
            want_xi = {(piv, i2): {(0, 0, xi_exps, P.identity[obj]): xi_unit}}
            got_xi = {(i, i2): cur.delta[(i, i2)]
                      for i in active if (i, i2) in cur.delta}
            if got_xi != want_xi:
                raise CurvatureError(
                    "cell %d %r: partner column is not xi times the pivot"
                    % (i2, cur.cells[i2]))
            order = list(range(done)) + [i2, piv] + \
                [i for i in active if i not in (i2, piv)]
            record({"kind": "swap", "order": order})
            cur, step = _permute(cur, order)
            eq = eq.then(step)
            leaves.append((obj, cp + 1, tp + 2))
            record({"kind": "split", "leaf": (obj, cp + 1, tp + 2)})
            done += 2
        else:
            unit2 = [i for i in sorted(d2p) if S.is_unit(d2p[i])]
            if not unit2:
                raise CurvatureError(
                    "cell %d %r: differential column has no unit head in "
                    "either direction" % (piv, cur.cells[piv]))
            i2 = unit2[0]
            avec = {}
            for i, bi in d2p.items():
                if S.is_zero(bi):
                    continue
                for m in active:
                    terms = cur.delta.get((m, i))
                    if terms:
                        tgt = avec.setdefault(m, {})
                        _acc_terms(S, tgt, _scale_terms(S, terms, bi))
            avec = {m: t for m, t in avec.items() if t}
            head = avec.get(piv, {})
            e1 = head.get(_idkey(P, obj))
            if len(head) != 1 or e1 is None or not S.is_unit(e1):
                raise CurvatureError(
                    "cell %d %r: the contractible partner does not hit the "
                    "pivot by a unit" % (piv, cur.cells[piv]))
            record({"kind": "replace", "col": piv, "vec": avec})
            cur, step = _replace_column(cur, piv, avec)
            eq = eq.then(step)
            a2vec = {i: {_idkey(P, cur.cells[i][0]): bi}
                     for i, bi in d2p.items() if not S.is_zero(bi)}
            record({"kind": "replace", "col": i2, "vec": a2vec})
            cur, step = _replace_column(cur, i2, a2vec)
            eq = eq.then(step)
            if _unit_id_entry(cur, piv, i2) is None:
                raise CurvatureError(
                    "cell %d %r: contractible block failed to normalize"
                    % (i2, cur.cells[i2]))
            record({"kind": "cancel", "pair": (piv, i2),
                    "cells": (cur.cells[piv], cur.cells[i2])})
            cur, step = eliminate_pair(cur, piv, i2)
            eq = eq.then(step)

    for b, (o, c, t) in enumerate(leaves):
        i = 2 * b
        want = mon(generator(P, "con", o, c, t))
        if cur.cells[i] != want.cells[0] or cur.cells[i + 1] != want.cells[1]:
            raise CurvatureError("block %d does not match its leaf cells" % b)
        if cur.delta.get((i + 1, i)) != want.delta.get((1, 0)) or \
                cur.delta.get((i, i + 1)) != want.delta.get((0, 1)):
            raise CurvatureError("block %d does not match its leaf arrows" % b)
    for (i, j) in cur.delta:
        if i // 2 > j // 2:
            raise CurvatureError(
                "cell %d %r: normal form has a backward arrow" % (j, cur.cells[j]))
        if i // 2 == j // 2 and abs(i - j) != 1:
            raise CurvatureError(
                "cell %d %r: normal form has an arrow inside a block" % (j, cur.cells[j]))
    return Decomposition(F, cur, eq, leaves, moves)


# ---------------------------------------------------------------------------
# Descending maps along mon.


def _unmon(M):
    """The one-sided object A with mon(A) literally equal to M."""
    if M.flavor != "mon":
        raise FlavorError("only loop-equivariant objects split this way")
    P = M.P
    S = P.S
    n2 = len(M.cells)
    if n2 % 2:
        raise ModuleError("odd cell count cannot be a mon image")
    n = n2 // 2
    for i in range(n):
        o, c, t = M.cells[i]
        if M.cells[n + i] != (o, c - 1, t - 2):
            raise ModuleError("cell %d has no shifted partner" % i)
    delta = {}
    for (k, l), terms in M.delta.items():
        if k < n and l < n:
            delta.setdefault((k, l), {})
            _acc_terms(S, delta[(k, l)], terms)
            if not delta[(k, l)]:
                del delta[(k, l)]
        elif k < n <= l:
            t = dict(terms)
            if k == l - n:
                rkey = _idkey(P, M.cells[k][0], a=1)
                if t.get(rkey) == S.one:
                    del t[rkey]
                else:
                    raise ModuleError("cell %d is missing its loop arrow" % k)
            for (a, e, exps, b), c in t.items():
                if e:
                    raise ModuleError("unexpected exterior part in a mon image")
                tgt = delta.setdefault((k, l - n), {})
                _acc_terms(S, tgt, {(a, 1, exps, b): c})
                if not tgt:
                    del delta[(k, l - n)]
    A = DggObject(P, "con", M.cells[:n], delta)
    got = mon(A)
    if got.cells != M.cells or got.delta != M.delta:
        raise ModuleError("object is not in the image of mon on the nose")
    return A


def mon_preimage_map(g, src_pre=None, dst_pre=None):
    """Descend g: mon(A) -> mon(B)<n>[m] to f: A -> B<n>[m].

    Solves the joint linear system mon(f) - g = d(h), d(f) = 0 exactly and
    returns (f, homotopy connecting mon(f) to g).  Inconsistency raises
    FaithfulnessError."""
    A = src_pre if src_pre is not None else _unmon(g.src)
    B = dst_pre if dst_pre is not None else _unmon(g.dst)
    g.require_closed()
    MA, MB = mon(A), mon(B)
    if MA.cells != g.src.cells or MB.cells != g.dst.cells:
        raise ModuleError("endpoints do not match the given descents")
    P = A.P
    S = P.S
    m, nn = g.m, g.n
    fslots = hom_basis(A, B, m, -nn)
    hslots = hom_basis(MA, MB, m - 1, -nn)
    rows1 = hom_basis(MA, MB, m, -nn)
    rows2 = hom_basis(A, B, m + 1, -nn)
    idx1 = {mono: i for i, mono in enumerate(rows1)}
    idx2 = {mono: i for i, mono in enumerate(rows2)}
    nrows = len(rows1) + len(rows2)
    cols = []
    for (k, l, key) in fslots:
        funit = ChainMap(A, B, m, nn, {(k, l): {key: S.one}}, check=False)
        colv = [S.zero] * nrows
        for (k2, l2), terms in mon_map(funit).entries.items():
            for key2, c in terms.items():
                colv[idx1[(k2, l2, key2)]] = c
        for (k2, l2), terms in funit.differential().entries.items():
            for key2, c in terms.items():
                colv[len(rows1) + idx2[(k2, l2, key2)]] = c
        cols.append(colv)
    for (k, l, key) in hslots:
        hunit = ChainMap(MA, MB, m - 1, nn, {(k, l): {key: S.one}}, check=False)
        colv = [S.zero] * nrows
        for (k2, l2), terms in hunit.differential().entries.items():
            for key2, c in terms.items():
                colv[idx1[(k2, l2, key2)]] = S.neg(c)
        cols.append(colv)
    mat = [[cols[j][i] for j in range(len(cols))] for i in range(nrows)]
    rhs = [S.zero] * nrows
    for (k, l), terms in g.entries.items():
        for key, c in terms.items():
            rhs[idx1[(k, l, key)]] = c
    x, cert = solve_exact(S, mat, rhs)
    if x is None:
        raise FaithfulnessError(
            "map does not descend along mon (%d-dim obstruction)" % len(cert))
    fent = {}
    for i, c in enumerate(x[:len(fslots)]):
        if c == 0:
            continue
        k, l, key = fslots[i]
        fent.setdefault((k, l), {})[key] = c
    hent = {}
    for i, c in enumerate(x[len(fslots):]):
        if c == 0:
            continue
        k, l, key = hslots[i]
        hent.setdefault((k, l), {})[key] = c
    f = ChainMap(A, B, m, nn, fent, check=False)
    f.require_closed()
    lift = mon_map(f)
    glue = ChainMap(g.src, g.dst, m, nn, lift.entries, check=False)
    hom = Homotopy(glue, g, hent)
    hom.verify()
    return f, hom


# ---------------------------------------------------------------------------
# Block equivalences between cones sharing a diagonal.


def _anchored_map(X, Y, fixed, free_pred):
    """A closed degree-(0,0) map X -> Y extending the fixed entries by
    solving for entries in the free region."""
    S = X.P.S
    cand = ChainMap(X, Y, 0, 0, fixed, check=False)
    if cand.is_closed():
        return cand
    slots = [s for s in hom_basis(X, Y, 0, 0) if free_pred(s[0], s[1])]
    rows = hom_basis(X, Y, 1, 0)
    idx = {mono: i for i, mono in enumerate(rows)}
    cols = []
    for (k, l, key) in slots:
        unit = ChainMap(X, Y, 0, 0, {(k, l): {key: S.one}}, check=False)
        colv = [S.zero] * len(rows)
        for (k2, l2), terms in unit.differential().entries.items():
            for key2, c in terms.items():
                colv[idx[(k2, l2, key2)]] = c
        cols.append(colv)
    rhs = [S.zero] * len(rows)
    for (k, l), terms in cand.differential().entries.items():
        for key, c in terms.items():
            rhs[idx[(k, l, key)]] = S.neg(c)
    mat = [[cols[j][i] for j in range(len(cols))] for i in range(len(rows))]
    x, _ = solve_exact(S, mat, rhs)
    if x is None:
        raise LiftError("no closed completion of the anchored map")
    entries = {kl: dict(t) for kl, t in fixed.items()}
    for i, c in enumerate(x):
        if c == 0:
            continue
        k, l, key = slots[i]
        tgt = entries.setdefault((k, l), {})
        _acc_terms(S, tgt, {key: c})
        if not tgt:
            del entries[(k, l)]
    out = ChainMap(X, Y, 0, 0, entries, check=False)
    out.require_closed()
    return out


def _certify(u, v):
    """Package mutually quasi-inverse closed maps as an Equivalence."""
    return Equivalence(
        u, v,
        _connect(v.compose(u), identity_map(u.src)),
        _connect(u.compose(v), identity_map(v.src)))


def _block_equiv(X, Y, fixed_fwd, pred_fwd, fixed_back, pred_back):
    u = _anchored_map(X, Y, fixed_fwd, pred_fwd)
    v = _anchored_map(Y, X, fixed_back, pred_back)
    return _certify(u, v)


def _diag_entries(P, cells, rows_off=0, cols_off=0):
    return {(rows_off + i, cols_off + i): {_idkey(P, o): P.S.one}
            for i, (o, c, t) in enumerate(cells)}


def _offset_entries(mat, rows_off, cols_off):
    return {(k + rows_off, l + cols_off): dict(t) for (k, l), t in mat.items()}


def _cone_homotopic(f, g):
    """Equivalence cone(f) ~ cone(g) for homotopic closed maps f, g with
    the same endpoints, fixing the identity on both blocks."""
    C1, C2 = cone(f), cone(g)
    P = f.src.P
    off = len(f.dst.cells)
    diag = _diag_entries(P, C1.cells)
    pred = lambda k, l: k < off <= l
    return _block_equiv(C1, C2, diag, pred, dict(diag), pred)


def _cone_precompose(f, u):
    """Equivalence cone(f . u.fwd) ~ cone(f) along an equivalence u of
    the sources."""
    C1 = cone(f.compose(u.fwd))
    C2 = cone(f)
    P = f.src.P
    off = len(f.dst.cells)
    fwd = _diag_entries(P, f.dst.cells)
    fwd.update(_offset_entries(shift_map(u.fwd, 1).entries, off, off))
    back = _diag_entries(P, f.dst.cells)
    back.update(_offset_entries(shift_map(u.back, 1).entries, off, off))
    pred1 = lambda k, l: k < off <= l
    return _block_equiv(C1, C2, fwd, pred1, back, pred1)


def _cocone_homotopic(f, g):
    C1, C2 = cocone(f), cocone(g)
    P = f.src.P
    off = len(f.dst.cells)
    diag = _diag_entries(P, C1.cells)
    pred = lambda k, l: k < off <= l
    return _block_equiv(C1, C2, diag, pred, dict(diag), pred)


def _cocone_precompose(f, u):
    """Equivalence cocone(f . u.fwd) ~ cocone(f)."""
    C1 = cocone(f.compose(u.fwd))
    C2 = cocone(f)
    P = f.src.P
    sB = f.dst.shift(-1)
    off = len(sB.cells)
    fwd = _diag_entries(P, sB.cells)
    fwd.update(_offset_entries(u.fwd.entries, off, off))
    back = _diag_entries(P, sB.cells)
    back.update(_offset_entries(u.back.entries, off, off))
    pred = lambda k, l: k < off <= l
    return _block_equiv(C1, C2, fwd, pred, back, pred)


def _cocone_postcompose(f, v):
    """Equivalence cocone(v.fwd . f) ~ cocone(f) along an equivalence v of
    the targets."""
    C1 = cocone(v.fwd.compose(f))
    C2 = cocone(f)
    P = f.src.P
    off1 = len(v.dst.cells)
    off2 = len(f.dst.cells)
    fwd = _offset_entries(shift_map(v.back, -1).entries, 0, 0)
    fwd.update(_diag_entries(P, f.src.cells, off2, off1))
    back = _offset_entries(shift_map(v.fwd, -1).entries, 0, 0)
    back.update(_diag_entries(P, f.src.cells, off1, off2))
    predf = lambda k, l: k < off2 and l >= off1
    predb = lambda k, l: k < off1 and l >= off2
    return _block_equiv(C1, C2, fwd, predf, back, predb)


def _mon_cone_equiv(g):
    wit = mon_cone_witness(g)
    return Equivalence.from_iso(wit.maps["iso"], wit.maps["inverse"])


def _mon_cocone_equiv(g):
    """Equivalence mon(cocone(g)) ~ cocone(mon_map(g)).

    Both sides carry the same cells but interleave the formal copies
    differently, so the matching is a fixed block permutation; the
    shifted-target copies pick up a sign.
    """
    A = mon(cocone(g))
    B = cocone(mon_map(g))
    P = g.src.P
    S = P.S
    ns = len(g.src.cells)
    nt = len(g.dst.cells)
    fwd = {}
    back = {}
    for i, (o, c, t) in enumerate(A.cells):
        if i < nt:
            j, sgn = i, S.one
        elif i < nt + ns:
            j, sgn = i + nt, S.one
        elif i < 2 * nt + ns:
            j, sgn = i - ns, S.neg(S.one)
        else:
            j, sgn = i, S.one
        fwd[(j, i)] = {_idkey(P, o): sgn}
        back[(i, j)] = {_idkey(P, o): sgn}
    return Equivalence.from_iso(ChainMap(A, B, 0, 0, fwd, check=False),
                                ChainMap(B, A, 0, 0, back, check=False))


def _mon_shift_equiv(F, m):
    """Equivalence mon(F[m]) ~ mon(F)[m] by diagonal matching."""
    pair = match_diagonal(mon(F.shift(m)), mon(F).shift(m))
    if pair is None:
        raise DggError("mon did not commute with the shift up to cell signs")
    return Equivalence.from_iso(pair[0], pair[1])


# ---------------------------------------------------------------------------
# Preimages of objects under mon.


def _preimage_single(F):
    dec = decompose_single_stratum(F)
    P = F.P
    nb = dec.blocks()
    if nb == 0:
        G = zero_object(P, "con")
        w = _exact_equiv(mon(G), dec.normal)
    else:
        o, c, t = dec.leaves[nb - 1]
        G = generator(P, "con", o, c, t)
        w = _exact_equiv(mon(G), dec.suffix(nb - 1))
        for k in reversed(range(nb - 1)):
            fk = dec.connecting(k)
            w1 = w.shift(-1)
            sh = _mon_shift_equiv(G, -1)
            phi = w1.fwd.compose(sh.fwd)
            g_in = fk.compose(phi)
            Lk = generator(P, "con", *dec.leaves[k])
            g0, hom0 = mon_preimage_map(g_in, src_pre=G.shift(-1), dst_pre=Lk)
            e1 = _mon_cone_equiv(g0)
            e2 = _cone_homotopic(mon_map(g0), g_in)
            psi = sh.then(w1)
            e3 = _cone_precompose(fk, psi)
            G = cone(g0)
            w = e1.then(e2).then(e3)
            suf = dec.suffix(k)
            if w.dst.cells != suf.cells or w.dst.delta != suf.delta:
                raise DggError("cone tree landed off the normal form")
            w = w.then(_exact_equiv(w.dst, suf))
    return G, w.then(dec.equivalence.inverse())


def _transport_equiv(eq, push):
    """Apply an entrywise relabeling functor (push: ChainMap -> ChainMap)
    to a whole equivalence."""
    fwd = push(eq.fwd)
    back = push(eq.back)
    hs = push(eq.h_src)
    hd = push(eq.h_dst)
    h_src = _connect(back.compose(fwd), identity_map(fwd.src), [hs.entries])
    h_dst = _connect(fwd.compose(back), identity_map(fwd.dst), [hd.entries])
    return Equivalence(fwd, back, h_src, h_dst)


def _open_anchored(rec, O, X, Y, known):
    """A closed map u: X -> Y whose restriction to the open part is
    homotopic to the known map; solved jointly with the homotopy."""
    S = X.P.S
    XU = rec.j_restrict(X, O)
    YU = rec.j_restrict(Y, O)
    if known.src.cells != XU.cells or known.dst.cells != YU.cells:
        raise ModuleError("anchor does not live on the restrictions")
    uslots = hom_basis(X, Y, 0, 0)
    hslots = hom_basis(XU, YU, -1, 0)
    rows1 = hom_basis(X, Y, 1, 0)
    rows2 = hom_basis(XU, YU, 0, 0)
    idx1 = {mono: i for i, mono in enumerate(rows1)}
    idx2 = {mono: i for i, mono in enumerate(rows2)}
    nrows = len(rows1) + len(rows2)
    cols = []
    for (k, l, key) in uslots:
        unit = ChainMap(X, Y, 0, 0, {(k, l): {key: S.one}}, check=False)
        colv = [S.zero] * nrows
        for (k2, l2), terms in unit.differential().entries.items():
            for key2, c in terms.items():
                colv[idx1[(k2, l2, key2)]] = c
        ru = rec.j_restrict_map(unit, O)
        for (k2, l2), terms in ru.entries.items():
            for key2, c in terms.items():
                colv[len(rows1) + idx2[(k2, l2, key2)]] = c
        cols.append(colv)
    for (k, l, key) in hslots:
        hunit = ChainMap(XU, YU, -1, 0, {(k, l): {key: S.one}}, check=False)
        colv = [S.zero] * nrows
        for (k2, l2), terms in hunit.differential().entries.items():
            for key2, c in terms.items():
                colv[len(rows1) + idx2[(k2, l2, key2)]] = S.neg(c)
        cols.append(colv)
    rhs = [S.zero] * nrows
    for (k, l), terms in known.entries.items():
        for key, c in terms.items():
            rhs[len(rows1) + idx2[(k, l, key)]] = c
    mat = [[cols[j][i] for j in range(len(cols))] for i in range(nrows)]
    x, _ = solve_exact(S, mat, rhs)
    if x is None:
        raise LiftError("no closed map matches the open anchor")
    entries = {}
    for i, c in enumerate(x[:len(uslots)]):
        if c == 0:
            continue
        k, l, key = uslots[i]
        entries.setdefault((k, l), {})[key] = c
    u = ChainMap(X, Y, 0, 0, entries, check=False)
    u.require_closed()
    return u


def _match_over_open(rec, O, X, Y, anchor):
    """Equivalence X ~ Y between extension-by-zero representatives,
    anchored by an equivalence of their open restrictions."""
    u = _open_anchored(rec, O, X, Y, anchor.fwd)
    v = _open_anchored(rec, O, Y, X, anchor.back)
    return _certify(u, v)


def _preimage_multi(F):
    from . import recollement as rec
    P = F.P
    z = P.order[0]
    restids = P.order[1:]
    O = P.open_by_strata(restids)
    if O is None:
        raise LiftError(
            "no declared open complement of stratum %r to recurse into" % z)
    FU = rec.j_restrict(F, O)
    AU, wU = mon_preimage_object(FU)
    sup = rec.i_upper_star(F, [z])
    pur = rec.support_purify(sup)
    if pur.purified is None:
        raise LiftError("closed part did not purify: %s" % pur.report)
    AZ, wZ = mon_preimage_object(pur.purified)
    AZC = rec.i_push(AZ, P)
    wC = _transport_equiv(wZ, lambda m: rec.i_push_map(m, P))
    MA = mon(AZC)
    if MA.cells != wC.src.cells or MA.delta != wC.src.delta:
        raise DggError("mon did not commute with the closed relabeling")
    wC = _exact_equiv(MA, wC.src).then(wC).then(pur.equivalence)

    BU = rec.j_shriek(AU, P)
    MBU = mon(BU)
    RB = rec.j_restrict(MBU, O)
    MAU = mon(AU)
    if RB.cells != MAU.cells or RB.delta != MAU.delta:
        raise DggError("mon did not commute with the open restriction")
    Fm = sup.plus
    RF = rec.j_restrict(Fm, O)
    if RF.cells != FU.cells or RF.delta != FU.delta:
        raise DggError("the supported replacement moved the open part")
    wF = _match_over_open(rec, O, MBU, Fm, wU)

    out = sup.triangle.out
    shB = _mon_shift_equiv(BU, 1)
    psi = wF.shift(1).inverse().then(shB.inverse())
    g_total = psi.fwd.compose(out).compose(wC.fwd)
    c0, hom0 = mon_preimage_map(g_total, src_pre=AZC, dst_pre=BU.shift(1))
    G = cocone(c0)

    m1 = _mon_cocone_equiv(c0)
    m2 = _cocone_homotopic(mon_map(c0), g_total)
    m3a = _cocone_postcompose(out.compose(wC.fwd), psi)
    m3b = _cocone_precompose(out, wC)
    CF = cocone(out)
    offm = len(Fm.cells)
    pfix = {}
    for (k, l), terms in sup.triangle.base.entries.items():
        pfix[(k, l)] = _neg_terms(P.S, terms)
    for i, (o, c, t) in enumerate(F.cells):
        pfix[(i, offm + i)] = {_idkey(P, o): P.S.one}
    ifix = {(offm + i, i): {_idkey(P, o): P.S.one}
            for i, (o, c, t) in enumerate(F.cells)}
    nf = len(F.cells)
    predf = lambda k, l: l < offm or l >= offm + nf
    predb = lambda k, l: k < offm or k >= offm + nf
    m4 = _block_equiv(CF, F, pfix, predf, ifix, predb)
    w = m1.then(m2).then(m3a).then(m3b).then(m4)
    return G, w


def mon_preimage_object(F):
    """An object G in the one-sided flavor with mon(G) equivalent to F,
    together with the equivalence."""
    if F.flavor != "mon":
        raise FlavorError("preimages are taken of loop-equivariant objects")
    P = F.P
    for st in P.strata:
        if st.hxi(P.S).is_zero():
            raise FreeError(
                "stratum %r has xi = 0; the loop functor is not full there"
                % st.sid)
    if len(P.strata) == 1:
        return _preimage_single(F)
    return _preimage_multi(F)


def mon_preimage_glued(F, O, AU):
    """Preimage of F when its restriction to the declared open O is already
    the loop block of a known one-sided object AU.  Only the complementary
    closed strata need an invertible loop class; AU supplies the open part
    directly, so no decomposition happens there."""
    from . import recollement as rec
    if F.flavor != "mon":
        raise FlavorError("preimages are taken of loop-equivariant objects")
    P = F.P
    oset = set(O.strata)
    zs = [s for s in P.order if s not in oset]
    if not zs:
        raise LiftError("the declared open covers every stratum; nothing to glue")
    for st in P.strata:
        if st.sid in oset:
            continue
        if st.hxi(P.S).is_zero():
            raise FreeError(
                "stratum %r has xi = 0; the loop functor is not full there"
                % st.sid)
    FU = rec.j_restrict(F, O)
    MAU = mon(AU)
    if MAU.cells != FU.cells or MAU.delta != FU.delta:
        raise DggError(
            "the open part of the object is not the loop block of the "
            "supplied open preimage")
    wU = _exact_equiv(MAU, FU)
    sup = rec.i_upper_star(F, zs)
    pur = rec.support_purify(sup)
    if pur.purified is None:
        raise LiftError("closed part did not purify: %s" % pur.report)
    AZ, wZ = mon_preimage_object(pur.purified)
    AZC = rec.i_push(AZ, P)
    wC = _transport_equiv(wZ, lambda m: rec.i_push_map(m, P))
    MA = mon(AZC)
    if MA.cells != wC.src.cells or MA.delta != wC.src.delta:
        raise DggError("mon did not commute with the closed relabeling")
    wC = _exact_equiv(MA, wC.src).then(wC).then(pur.equivalence)

    BU = rec.j_shriek(AU, P)
    MBU = mon(BU)
    RB = rec.j_restrict(MBU, O)
    if RB.cells != MAU.cells or RB.delta != MAU.delta:
        raise DggError("mon did not commute with the open restriction")
    Fm = sup.plus
    RF = rec.j_restrict(Fm, O)
    if RF.cells != FU.cells or RF.delta != FU.delta:
        raise DggError("the supported replacement moved the open part")
    wF = _match_over_open(rec, O, MBU, Fm, wU)

    out = sup.triangle.out
    shB = _mon_shift_equiv(BU, 1)
    psi = wF.shift(1).inverse().then(shB.inverse())
    g_total = psi.fwd.compose(out).compose(wC.fwd)
    c0, hom0 = mon_preimage_map(g_total, src_pre=AZC, dst_pre=BU.shift(1))
    G = cocone(c0)

    m1 = _mon_cocone_equiv(c0)
    m2 = _cocone_homotopic(mon_map(c0), g_total)
    m3a = _cocone_postcompose(out.compose(wC.fwd), psi)
    m3b = _cocone_precompose(out, wC)
    CF = cocone(out)
    offm = len(Fm.cells)
    pfix = {}
    for (k, l), terms in sup.triangle.base.entries.items():
        pfix[(k, l)] = _neg_terms(P.S, terms)
    for i, (o, c, t) in enumerate(F.cells):
        pfix[(i, offm + i)] = {_idkey(P, o): P.S.one}
    ifix = {(offm + i, i): {_idkey(P, o): P.S.one}
            for i, (o, c, t) in enumerate(F.cells)}
    nf = len(F.cells)
    predf = lambda k, l: l < offm or l >= offm + nf
    predb = lambda k, l: k < offm or k >= offm + nf
    m4 = _block_equiv(CF, F, pfix, predf, ifix, predb)
    w = m1.then(m2).then(m3a).then(m3b).then(m4)
    return G, w
