"""Finite presentations of stratified parity data.

A presentation packages:

  * an exact coefficient ring (F_p, Q or Z_(p)),
  * a global polynomial coefficient algebra A on named generators of even
    diagonal bidegree, with a distinguished degree-(2,2) element xi_image
    through which the equivariant parameter acts,
  * finitely many strata with closure order, dimensions and their own
    cohomology algebras,
  * one normalized parity object per stratum, with finite free A-module
    bases for all Hom modules, a composition table, and a duality
    anti-involution,
  * declared open subsets, each carrying its own restricted presentation
    together with restriction maps and the module action of the ambient
    generators on the restricted bases,
  * optionally a weight datum splitting the strata into a closed part and
    its open complement.

Everything downstream (complexes, functors, recollement, the nearby-cycle
pipeline) computes inside the data recorded here.
"""

import json

from .scalars import Scalars, solve_exact


class PolyRing:
    """Commutative polynomials on generators of even diagonal bidegree."""

    def __init__(self, S, gens):
        self.S = S
        self.gens = [(str(n), int(d)) for n, d in gens]
        names = [n for n, _ in self.gens]
        if len(set(names)) != len(names):
            raise ValueError("duplicate generator names")
        self.index = {n: i for i, (n, _) in enumerate(self.gens)}

    def __eq__(self, other):
        return isinstance(other, PolyRing) and self.S == other.S and self.gens == other.gens

    @property
    def n(self):
        return len(self.gens)

    def zero(self):
        return Poly(self, {})

    def one(self):
        return self.scalar(self.S.one)

    def scalar(self, c):
        c = self.S.el(c)
        if c == 0:
            return Poly(self, {})
        return Poly(self, {(0,) * self.n: c})

    def gen(self, name, power=1):
        e = [0] * self.n
        e[self.index[name]] = power
        return Poly(self, {tuple(e): self.S.one})

    def mono_degree(self, exps):
        return sum(e * d for e, (_, d) in zip(exps, self.gens))

    def monomials(self, degree):
        """All exponent tuples of the given diagonal degree."""
        out = []

        def rec(i, rem, acc):
            if i == self.n:
                if rem == 0:
                    out.append(tuple(acc))
                return
            _, d = self.gens[i]
            e = 0
            while e * d <= rem:
                rec(i + 1, rem - e * d, acc + [e])
                e += 1

        if degree >= 0:
            rec(0, degree, [])
        return out


class Poly:
    __slots__ = ("ring", "terms")

    def __init__(self, ring, terms):
        self.ring = ring
        self.terms = terms

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, Poly) and self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        S = self.ring.S
        out = dict(self.terms)
        for k, v in other.terms.items():
            w = S.add(out.get(k, S.zero), v)
            if w == 0:
                out.pop(k, None)
            else:
                out[k] = w
        return Poly(self.ring, out)

    def __neg__(self):
        S = self.ring.S
        return Poly(self.ring, {k: S.neg(v) for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        S = self.ring.S
        if not isinstance(other, Poly):
            return self.scale(other)
        out = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                w = S.add(out.get(k, S.zero), S.mul(v1, v2))
                if w == 0:
                    out.pop(k, None)
                else:
                    out[k] = w
        return Poly(self.ring, out)

    def scale(self, c):
        S = self.ring.S
        c = S.el(c)
        if c == 0:
            return self.ring.zero()
        return Poly(self.ring, {k: S.mul(v, c) for k, v in self.terms.items()})

    def degree(self):
        """Common diagonal degree of all terms; None if 0 or inhomogeneous."""
        degs = {self.ring.mono_degree(k) for k in self.terms}
        if len(degs) == 1:
            return degs.pop()
        return None

    def subst(self, images, target):
        """Evaluate on images[i] in the target ring (gen i -> images[i])."""
        out = target.zero()
        for exps, c in self.terms.items():
            term = target.scalar(c)
            for e, img in zip(exps, images):
                for _ in range(e):
                    term = term * img
            out = out + term
        return out

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for exps in sorted(self.terms):
            word = []
            for e, (n, _) in zip(exps, self.ring.gens):
                if e == 1:
                    word.append(n)
                elif e > 1:
                    word.append("%s^%d" % (n, e))
            mono = "*".join(word) or "1"
            bits.append("%s*%s" % (self.terms[exps], mono))
        return " + ".join(bits)

    def to_json(self):
        S = self.ring.S
        return [list(k) + [S.el_to_json(v)] for k, v in sorted(self.terms.items())]

    @staticmethod
    def from_json(ring, data):
        out = ring.zero()
        for row in data:
            exps, c = tuple(row[:-1]), row[-1]
            out = out + Poly(ring, {exps: ring.S.el(c)})
        return out


class Stratum:
    def __init__(self, sid, dim, closure, hgens, hxi_json):
        self.sid = sid
        self.dim = dim
        self.closure = list(closure)  # strata ids contained in the closure, self included
        self.hgens = [(str(n), int(d)) for n, d in hgens]
        self.hxi_json = hxi_json  # xi element of H_s, as raw poly data

    def hring(self, S):
        return PolyRing(S, self.hgens)

    def hxi(self, S):
        return Poly.from_json(self.hring(S), self.hxi_json)


class OpenDecl:
    """A declared open subset with its restricted presentation and maps."""

    def __init__(self, name, strata, pres, obj_map, basis_map, gen_action):
        self.name = name
        self.strata = list(strata)
        self.pres = pres
        self.obj_map = dict(obj_map)  # ambient object -> restricted object or None
        self.basis_map = dict(basis_map)  # ambient basis name -> [(Poly, name)]
        self.gen_action = dict(gen_action)  # (ambient gen, restricted name) -> [(Poly, name)]

    def restrict_terms(self, terms):
        """Image of an ambient module element [(Poly, name)] under restriction."""
        pres = self.pres
        out = {}
        for poly, name in terms:
            base = self.basis_map.get(name)
            if base is None:
                continue
            for exps, c in poly.terms.items():
                cur = [(p.scale(c), n) for p, n in base]
                for e, (gname, _) in zip(exps, poly.ring.gens):
                    for _ in range(e):
                        cur = self._act_once(gname, cur)
                for p, n in cur:
                    _acc(out, n, p)
        return _normalize(out)

    def _act_once(self, gname, terms):
        out = {}
        for poly, name in terms:
            for p2, n2 in self.gen_action.get((gname, name), []):
                _acc(out, n2, p2 * poly)
        return _normalize(out)


def _acc(out, name, poly):
    if name in out:
        out[name] = out[name] + poly
    else:
        out[name] = poly


def _normalize(out):
    return [(p, n) for n, p in sorted(out.items()) if not p.is_zero()]


class FDatum:
    def __init__(self, x0, x_eta, weight):
        self.x0 = list(x0)
        self.x_eta = list(x_eta)
        self.weight = int(weight)


class Presentation:
    def __init__(self, name, S, ring, xi, strata, objects, homs, comp, identity,
                 dual_obj, dual_basis, filtration=(), f_datum=None):
        self.name = name
        self.S = S
        self.ring = ring
        self.xi = xi
        self.strata = list(strata)
        self.objects = dict(objects)  # stratum id -> object name
        self.homs = {k: list(v) for k, v in homs.items()}  # (src,dst) -> [(name, deg)]
        self.comp = dict(comp)  # (g, f) -> [(Poly, name)]
        self.identity = dict(identity)  # object -> its identity basis name
        self.dual_obj = dict(dual_obj)
        self.dual_basis = dict(dual_basis)  # name -> (scalar, name)
        self.filtration = list(filtration)
        self.f_datum = f_datum
        self._index()

    def _index(self):
        self.stratum_of = {o: s for s, o in self.objects.items()}
        self.stratum_by_id = {st.sid: st for st in self.strata}
        self.order = [st.sid for st in self.strata]
        self.basis_info = {}
        for (src, dst), basis in self.homs.items():
            for name, deg in basis:
                self.basis_info[name] = (src, dst, deg)
        self.id_names = set(self.identity.values())

    # -- structural helpers ---------------------------------------------

    def obj_list(self):
        return [self.objects[s] for s in self.order]

    def hom_basis(self, src, dst):
        return self.homs.get((src, dst), [])

    def is_r_free(self):
        return not self.xi.is_zero()

    def is_r_trivial(self):
        return self.xi.is_zero()

    def compose_names(self, g, f):
        """g after f, both basis names; returns [(Poly, name)]."""
        if f in self.id_names:
            return [(self.ring.one(), g)]
        if g in self.id_names:
            return [(self.ring.one(), f)]
        return self.comp.get((g, f), [])

    def compose_terms(self, gterms, fterms):
        out = {}
        for pg, g in gterms:
            for pf, f in fterms:
                for ph, h in self.compose_names(g, f):
                    _acc(out, h, pg * pf * ph)
        return _normalize(out)

    def dual_terms(self, terms):
        out = {}
        for poly, name in terms:
            c, dname = self.dual_basis[name]
            _acc(out, dname, poly.scale(c))
        return _normalize(out)

    def open_by_name(self, name):
        for o in self.filtration:
            if o.name == name:
                return o
        raise KeyError("no declared open named %r in %r" % (name, self.name))

    def open_by_strata(self, strata):
        want = set(strata)
        for o in self.filtration:
            if set(o.strata) == want:
                return o
        return None

    def eta_open(self):
        if self.f_datum is None:
            raise ValueError("presentation %r has no weight datum" % (self.name,))
        o = self.open_by_strata(self.f_datum.x_eta)
        if o is None:
            raise ValueError("generic open of %r is not declared" % (self.name,))
        return o

    # -- closed restriction ---------------------------------------------

    def closed_sub(self, keep):
        """The presentation induced on a downward-closed set of strata.

        Hom tables survive verbatim; declared opens intersect down to the
        kept strata (empty intersections are dropped).
        """
        keep = [s for s in self.order if s in set(keep)]
        keepset = set(keep)
        for s in keepset:
            for t in self.stratum_by_id[s].closure:
                if t not in keepset:
                    raise ValueError("strata %r are not closed in %r" % (keep, self.name))
        objs = {s: self.objects[s] for s in keep}
        alive = set(objs.values())
        homs = {}
        for (src, dst), basis in self.homs.items():
            if src in alive and dst in alive:
                homs[(src, dst)] = list(basis)
        names = {n for b in homs.values() for n, _ in b}
        comp = {}
        for (g, f), res in self.comp.items():
            if g in names and f in names:
                comp[(g, f)] = [(p, h) for p, h in res if h in names or p.is_zero()]
        filtration = []
        for o in self.filtration:
            inter = [s for s in o.strata if s in keepset]
            if not inter or len(inter) == len(keep):
                continue
            sub = o.pres.closed_sub(inter)
            sub_alive = {on for on in sub.objects.values()}
            sub_names = set(sub.basis_info)
            obj_map = {}
            for amb, res in o.obj_map.items():
                if amb in alive:
                    obj_map[amb] = res if res in sub_alive else None
            basis_map = {}
            for amb, img in o.basis_map.items():
                if amb in names:
                    basis_map[amb] = [(_repoly(p, sub.ring), n) for p, n in img if n in sub_names]
            gen_action = {}
            for (g, bn), img in o.gen_action.items():
                if bn in sub_names:
                    gen_action[(g, bn)] = [(_repoly(p, sub.ring), n) for p, n in img if n in sub_names]
            filtration.append(OpenDecl(o.name, inter, sub, obj_map, basis_map, gen_action))
        fd = None
        if self.f_datum is not None:
            x0 = [s for s in self.f_datum.x0 if s in keepset]
            xe = [s for s in self.f_datum.x_eta if s in keepset]
            if x0 and xe:
                fd = FDatum(x0, xe, self.f_datum.weight)
        return Presentation(
            "%s|%s" % (self.name, "+".join(keep)), self.S, self.ring, self.xi,
            [self.stratum_by_id[s] for s in keep], objs, homs, comp,
            {o: self.identity[o] for o in alive},
            {o: self.dual_obj[o] for o in alive},
            {n: self.dual_basis[n] for n in names},
            filtration, fd)

    def stratum_presentation(self, sid):
        """The one-stratum presentation with coefficient algebra H_s."""
        st = self.stratum_by_id[sid]
        hr = st.hring(self.S)
        obj = self.objects[sid]
        idname = self.identity[obj]
        return Presentation(
            "%s@%s" % (self.name, sid), self.S, hr, st.hxi(self.S),
            [st], {sid: obj}, {(obj, obj): [(idname, 0)]}, {},
            {obj: idname}, {obj: obj}, {idname: (self.S.one, idname)}, [], None)

    def home_open(self, sid):
        """A declared open where the stratum is closed (used for j_s pulls).

        Returns None when the stratum is closed in the whole space (the
        ambient presentation itself then serves).
        """
        closure_here = set(self.stratum_by_id[sid].closure)
        if closure_here == {sid}:
            return None
        best = None
        for o in self.filtration:
            if sid in o.strata and closure_here.intersection(o.strata) == {sid}:
                if best is None or len(o.strata) < len(best.strata):
                    best = o
        if best is None:
            raise ValueError("no declared open isolates stratum %r" % (sid,))
        return best

    # -- validation ------------------------------------------------------

    def validate(self):
        """Full consistency check; returns a list of problem strings."""
        bad = []
        self._validate_ring(bad)
        self._validate_strata(bad)
        self._validate_homs(bad)
        self._validate_comp(bad)
        self._validate_duality(bad)
        for o in self.filtration:
            self._validate_open(o, bad)
        self._validate_fdatum(bad)
        return bad

    def _validate_ring(self, bad):
        for n, d in self.ring.gens:
            if d <= 0 or d % 2:
                bad.append("coefficient generator %s has odd degree %d" % (n, d))
        if not self.xi.is_zero() and self.xi.degree() != 2:
            bad.append("xi_image is not of degree (2,2)")

    def _validate_strata(self, bad):
        seen = set()
        pos = {s: i for i, s in enumerate(self.order)}
        for st in self.strata:
            if st.sid in seen:
                bad.append("duplicate stratum id %r" % st.sid)
            seen.add(st.sid)
            if st.sid not in st.closure:
                bad.append("stratum %r missing from its own closure" % st.sid)
            for t in st.closure:
                if t not in pos:
                    bad.append("closure of %r mentions unknown stratum %r" % (st.sid, t))
                    continue
                if t != st.sid:
                    if pos[t] >= pos[st.sid]:
                        bad.append("stratum order does not refine closure at %r < %r" % (t, st.sid))
                    if self.stratum_by_id[t].dim >= st.dim:
                        bad.append("closure stratum %r has dimension >= %r" % (t, st.sid))
                    for u in self.stratum_by_id[t].closure:
                        if u not in st.closure:
                            bad.append("closure of %r is not transitive (%r)" % (st.sid, u))
            for n, d in st.hgens:
                if d <= 0 or d % 2:
                    bad.append("H_%s generator %s has odd degree" % (st.sid, n))
            hxi = st.hxi(self.S)
            if not hxi.is_zero() and hxi.degree() != 2:
                bad.append("H_%s xi element is not of degree 2" % st.sid)
        if set(self.objects) != seen:
            bad.append("objects and strata do not match up")

    def _validate_homs(self, bad):
        names = []
        for (src, dst), basis in self.homs.items():
            if src not in self.stratum_of or dst not in self.stratum_of:
                bad.append("hom module (%s,%s) mentions unknown object" % (src, dst))
            for name, deg in basis:
                names.append(name)
                if deg < 0:
                    bad.append("basis %s has negative degree" % name)
        if len(set(names)) != len(names):
            bad.append("basis names are not globally unique")
        for obj, idname in self.identity.items():
            info = self.basis_info.get(idname)
            if info != (obj, obj, 0):
                bad.append("identity of %s is not a degree-0 endomorphism basis element" % obj)

    def _validate_comp(self, bad):
        for (g, f), res in self.comp.items():
            gi = self.basis_info.get(g)
            fi = self.basis_info.get(f)
            if gi is None or fi is None:
                bad.append("composition (%s,%s) mentions unknown basis" % (g, f))
                continue
            if fi[1] != gi[0]:
                bad.append("composition (%s,%s) is not composable" % (g, f))
                continue
            if g in self.id_names or f in self.id_names:
                bad.append("composition table must not list identity pairs (%s,%s)" % (g, f))
            for poly, h in res:
                hi = self.basis_info.get(h)
                if hi is None or hi[0] != fi[0] or hi[1] != gi[1]:
                    bad.append("composition (%s,%s) lands in the wrong module" % (g, f))
                    continue
                d = poly.degree()
                if not poly.is_zero() and gi[2] + fi[2] != hi[2] + d:
                    bad.append("composition (%s,%s) is not degree-additive" % (g, f))
        # every composable non-identity pair must be covered (possibly by zero)
        for f, (fs, fd, _) in self.basis_info.items():
            if f in self.id_names:
                continue
            for g, (gs, gd, _) in self.basis_info.items():
                if g in self.id_names or gs != fd:
                    continue
                if (g, f) not in self.comp:
                    bad.append("composition (%s,%s) is undeclared" % (g, f))
        # associativity
        for f, (fs, fd, _) in self.basis_info.items():
            for g, (gs, gd, _) in self.basis_info.items():
                if gs != fd:
                    continue
                for h, (hs, hd, _) in self.basis_info.items():
                    if hs != gd:
                        continue
                    left = self.compose_terms([(self.ring.one(), h)],
                                              self.compose_names(g, f))
                    right = self.compose_terms(self.compose_names(h, g),
                                               [(self.ring.one(), f)])
                    if left != right:
                        bad.append("associativity fails on (%s,%s,%s)" % (h, g, f))

    def _validate_duality(self, bad):
        for o, do in self.dual_obj.items():
            if self.dual_obj.get(do) != o:
                bad.append("object duality is not an involution at %s" % o)
            if self.stratum_of.get(do) != self.stratum_of.get(o):
                bad.append("object duality moves %s off its stratum" % o)
        for n, (c, dn) in self.dual_basis.items():
            c2, n2 = self.dual_basis.get(dn, (None, None))
            if n2 != n or self.S.mul(c, c2) != self.S.one:
                bad.append("basis duality is not an involution at %s" % n)
            src, dst, deg = self.basis_info[n]
            info2 = self.basis_info.get(dn)
            if info2 != (self.dual_obj[dst], self.dual_obj[src], deg):
                bad.append("dual of %s is in the wrong module" % n)
        for (g, f) in self.comp:
            fs, _, _ = self.basis_info[f]
            _, gd, _ = self.basis_info[g]
            left = self.dual_terms(self.compose_names(g, f))
            right = self.compose_terms(self.dual_terms([(self.ring.one(), f)]),
                                       self.dual_terms([(self.ring.one(), g)]))
            if left != right:
                bad.append("duality is not an anti-homomorphism on (%s,%s)" % (g, f))

    def _validate_open(self, o, bad):
        tag = "open %s" % o.name
        pset = set(self.order)
        oset = set(o.strata)
        if not oset <= pset:
            bad.append("%s mentions unknown strata" % tag)
            return
        # openness: anything having a member of O in its closure is in O
        for s in oset:
            for t in self.order:
                if s in self.stratum_by_id[t].closure and t not in oset:
                    bad.append("%s is not open (misses %r above %r)" % (tag, t, s))
        sub = o.pres
        subobjs = set(sub.objects.values())
        for s in oset:
            if s not in sub.stratum_by_id:
                bad.append("%s restricted data misses stratum %r" % (tag, s))
        for amb, res in o.obj_map.items():
            samb = self.stratum_of.get(amb)
            if samb is None:
                bad.append("%s object map mentions unknown object %s" % (tag, amb))
                continue
            if (samb in oset) != (res is not None):
                bad.append("%s object map disagrees with the strata at %s" % (tag, amb))
            if res is not None and res not in subobjs:
                bad.append("%s object map lands outside the restricted data" % tag)
        for name, (src, dst, deg) in self.basis_info.items():
            rs, rd = o.obj_map.get(src), o.obj_map.get(dst)
            if rs is None or rd is None:
                if name in o.basis_map:
                    bad.append("%s restricts %s whose endpoints die" % (tag, name))
                continue
            img = o.basis_map.get(name)
            if img is None:
                bad.append("%s does not restrict basis %s" % (tag, name))
                continue
            for poly, n2 in img:
                i2 = sub.basis_info.get(n2)
                if i2 is None or (i2[0], i2[1]) != (rs, rd):
                    bad.append("%s restriction of %s lands in the wrong module" % (tag, name))
                elif not poly.is_zero() and poly.degree() + i2[2] != deg:
                    bad.append("%s restriction of %s is not degree-preserving" % (tag, name))
        for (gname, bn), img in o.gen_action.items():
            if gname not in self.ring.index or bn not in sub.basis_info:
                bad.append("%s generator action mentions unknown data (%s,%s)" % (tag, gname, bn))
        gd = dict(self.ring.gens)
        for gname in self.ring.index:
            for bn, (bs, bdst, bdeg) in sub.basis_info.items():
                img = o.gen_action.get((gname, bn), [])
                for poly, n2 in img:
                    i2 = sub.basis_info.get(n2)
                    if i2 is None or (i2[0], i2[1]) != (bs, bdst):
                        bad.append("%s action of %s leaves the module at %s" % (tag, gname, bn))
                    elif not poly.is_zero() and poly.degree() + i2[2] != bdeg + gd[gname]:
                        bad.append("%s action of %s is not degree-correct at %s" % (tag, gname, bn))
        # generator actions must commute pairwise
        for g1 in self.ring.index:
            for g2 in self.ring.index:
                if g1 >= g2:
                    continue
                for bn in sub.basis_info:
                    one = sub.ring.one()
                    a = o._act_once(g2, o._act_once(g1, [(one, bn)]))
                    b = o._act_once(g1, o._act_once(g2, [(one, bn)]))
                    if a != b:
                        bad.append("%s actions of %s and %s do not commute at %s" % (tag, g1, g2, bn))
        # action must be central for the restricted composition
        for bn1, (s1, d1, _) in sub.basis_info.items():
            for bn2, (s2, d2, _) in sub.basis_info.items():
                if s2 != d1:
                    continue
                for gname in self.ring.index:
                    one = sub.ring.one()
                    left = sub.compose_terms(o._act_once(gname, [(one, bn2)]), [(one, bn1)])
                    mid = o._act_once(gname, sub.compose_terms([(one, bn2)], [(one, bn1)]))
                    right = sub.compose_terms([(one, bn2)], o._act_once(gname, [(one, bn1)]))
                    if left != mid or mid != right:
                        bad.append("%s action of %s is not central on (%s,%s)" % (tag, gname, bn2, bn1))
        # xi compatibility: ambient xi acts as the restricted xi multiplies
        for name, (src, dst, deg) in self.basis_info.items():
            if o.obj_map.get(src) is None or o.obj_map.get(dst) is None:
                continue
            if name not in o.basis_map:
                continue
            lhs = o.restrict_terms([(self.xi, name)])
            rhs = _merge([(sub.xi * p, n) for p, n in o.basis_map[name]])
            if lhs != rhs:
                bad.append("%s does not intertwine xi at %s" % (tag, name))
        # functoriality of composition, including collapses through dead strata
        for f, (fs, fd, _) in self.basis_info.items():
            for g, (gs, gd, _) in self.basis_info.items():
                if gs != fd:
                    continue
                if o.obj_map.get(fs) is None or o.obj_map.get(gd) is None:
                    continue
                through = self.compose_names(g, f)
                lhs = o.restrict_terms(through)
                if o.obj_map.get(fd) is None:
                    if lhs:
                        bad.append("%s composite (%s,%s) survives a dead stratum" % (tag, g, f))
                    continue
                rhs = sub.compose_terms(o.restrict_terms([(self.ring.one(), g)]),
                                        o.restrict_terms([(self.ring.one(), f)]))
                if lhs != rhs:
                    bad.append("%s breaks composition on (%s,%s)" % (tag, g, f))
        # identity must restrict to identity
        for obj, idname in self.identity.items():
            if o.obj_map.get(obj) is None:
                continue
            img = o.basis_map.get(idname, [])
            want = [(sub.ring.one(), sub.identity[o.obj_map[obj]])]
            if img != want:
                bad.append("%s does not preserve the identity of %s" % (tag, obj))
        # per-degree surjectivity onto the restricted bases
        for (rs, rd), basis in sub.homs.items():
            amb_pairs = [(src, dst) for (src, dst) in self.homs
                         if o.obj_map.get(src) == rs and o.obj_map.get(dst) == rd]
            for bn, bdeg in basis:
                if not self._surjective_onto(o, amb_pairs, bn, bdeg):
                    bad.append("%s restriction misses %s" % (tag, bn))
        bad.extend("%s: %s" % (tag, line) for line in sub.validate())

    def _surjective_onto(self, o, amb_pairs, bn, bdeg):
        sub = o.pres
        target = []
        for (src, dst) in amb_pairs:
            for name, deg in self.homs[(src, dst)]:
                for exps in self.ring.monomials(bdeg - deg):
                    poly = Poly(self.ring, {exps: self.S.one})
                    target.append(o.restrict_terms([(poly, name)]))
        # build the matrix of images against the restricted monomial basis
        cols = []
        coords = {}
        for img in target:
            col = {}
            for poly, n2 in img:
                d2 = sub.basis_info[n2][2]
                for exps, c in poly.terms.items():
                    key = (n2, exps)
                    coords.setdefault(key, len(coords))
                    col[key] = c
            cols.append(col)
        want_key = (bn, (0,) * sub.ring.n)
        coords.setdefault(want_key, len(coords))
        A = [[self.S.zero] * len(cols) for _ in range(len(coords))]
        for j, col in enumerate(cols):
            for key, c in col.items():
                A[coords[key]][j] = c
        b = [self.S.zero] * len(coords)
        b[coords[want_key]] = self.S.one
        x, cert = solve_exact(self.S, A, b)
        return x is not None

    def _validate_fdatum(self, bad):
        fd = self.f_datum
        if fd is None:
            return
        if sorted(fd.x0 + fd.x_eta) != sorted(self.order):
            bad.append("weight datum does not partition the strata")
            return
        if not self.S.is_unit(self.S.el(fd.weight)):
            bad.append("weight %d is not invertible in %r" % (fd.weight, self.S))
        o = self.open_by_strata(fd.x_eta)
        if o is None:
            bad.append("generic part of the weight datum is not a declared open")
            return
        if not o.pres.xi.is_zero():
            bad.append("generic open fails to be monodromy-trivial")
        try:
            z = self.closed_sub(fd.x0)
        except ValueError:
            bad.append("special part of the weight datum is not closed")
            return
        if z.xi.is_zero():
            bad.append("special part fails to be monodromy-free")

    # -- serialization ---------------------------------------------------

    def to_json(self):
        out = {
            "name": self.name,
            "coeff": self.S.to_json(),
            "coeff_gens": [[n, d] for n, d in self.ring.gens],
            "xi_image": self.xi.to_json(),
            "strata": [{
                "id": st.sid, "dim": st.dim, "closure_leq": list(st.closure),
                "H_basis": [[n, d] for n, d in st.hgens], "xi_image": st.hxi_json,
            } for st in self.strata],
            "objects": {s: self.objects[s] for s in self.order},
            "homs": [{"src": src, "dst": dst,
                      "basis": [[n, d] for n, d in self.homs[(src, dst)]]}
                     for (src, dst) in sorted(self.homs)],
            "comp": [{"g": g, "f": f,
                      "result": [[p.to_json(), n] for p, n in self.comp[(g, f)]]}
                     for (g, f) in sorted(self.comp)],
            "identity": dict(sorted(self.identity.items())),
            "duality": {
                "objects": dict(sorted(self.dual_obj.items())),
                "basis": {n: [self.S.el_to_json(c), dn]
                          for n, (c, dn) in sorted(self.dual_basis.items())},
            },
            "filtration": [{
                "name": o.name,
                "open_set": list(o.strata),
                "object_map": dict(sorted(o.obj_map.items())),
                "hom_map": {n: [[p.to_json(), m] for p, m in img]
                            for n, img in sorted(o.basis_map.items())},
                "gen_action": self._action_json(o),
                "presentation": o.pres.to_json(),
            } for o in self.filtration],
        }
        if self.f_datum is not None:
            out["f_datum"] = {"x0": list(self.f_datum.x0),
                              "x_eta": list(self.f_datum.x_eta),
                              "weight": self.f_datum.weight}
        return out

    def _action_json(self, o):
        by_gen = {}
        for (g, bn), img in sorted(o.gen_action.items()):
            by_gen.setdefault(g, {})[bn] = [[p.to_json(), m] for p, m in img]
        return by_gen

    @staticmethod
    def from_json(data):
        S = Scalars.from_json(data["coeff"])
        ring = PolyRing(S, [tuple(x) for x in data["coeff_gens"]])
        xi = Poly.from_json(ring, data["xi_image"])
        strata = [Stratum(d["id"], d["dim"], d["closure_leq"],
                          [tuple(x) for x in d["H_basis"]], d["xi_image"])
                  for d in data["strata"]]
        objects = dict(data["objects"])
        homs = {(h["src"], h["dst"]): [tuple(b) for b in h["basis"]] for h in data["homs"]}
        comp = {(c["g"], c["f"]): [(Poly.from_json(ring, p), n) for p, n in c["result"]]
                for c in data["comp"]}
        dual_obj = dict(data["duality"]["objects"])
        dual_basis = {n: (S.el(c), dn) for n, (c, dn) in data["duality"]["basis"].items()}
        filtration = []
        for od in data["filtration"]:
            sub = Presentation.from_json(od["presentation"])
            basis_map = {n: [(Poly.from_json(sub.ring, p), m) for p, m in img]
                         for n, img in od["hom_map"].items()}
            gen_action = {}
            for g, per in od["gen_action"].items():
                for bn, img in per.items():
                    gen_action[(g, bn)] = [(Poly.from_json(sub.ring, p), m) for p, m in img]
            filtration.append(OpenDecl(od["name"], od["open_set"], sub,
                                       od["object_map"], basis_map, gen_action))
        fd = None
        if "f_datum" in data:
            fd = FDatum(data["f_datum"]["x0"], data["f_datum"]["x_eta"], data["f_datum"]["weight"])
        return Presentation(data["name"], S, ring, xi, strata, objects, homs, comp,
                            data["identity"], dual_obj, dual_basis, filtration, fd)

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


def _merge(pairs):
    out = {}
    for p, n in pairs:
        _acc(out, n, p)
    return [(p, n) for n, p in sorted(out.items()) if not p.is_zero()]


def _repoly(p, ring):
    return Poly(ring, dict(p.terms))


# ---------------------------------------------------------------------------
# Builtins.


def builtin(name, S=None):
    """One of the stock presentations: point, A1_Gm, A1_minus_0, A2_product."""
    if S is None:
        S = Scalars("Q")
    if name == "point":
        return _build_point(S)
    if name == "A1_minus_0":
        return _build_a1_minus_0(S)
    if name == "A1_Gm":
        return _build_a1(S)
    if name == "A2_product":
        return _build_a2(S)
    raise KeyError("unknown builtin %r" % (name,))


BUILTIN_NAMES = ("point", "A1_Gm", "A1_minus_0", "A2_product")


def _build_point(S):
    ring = PolyRing(S, [("xi", 2)])
    xi = ring.gen("xi")
    st = Stratum("pt", 0, ["pt"], [("xi", 2)], xi.to_json())
    return Presentation("point", S, ring, xi, [st], {"pt": "Ept"},
                        {("Ept", "Ept"): [("id0", 0)]}, {}, {"Ept": "id0"},
                        {"Ept": "Ept"}, {"id0": (S.one, "id0")}, [], None)


def _build_a1_minus_0(S):
    ring = PolyRing(S, [])
    st = Stratum("X1", 1, ["X1"], [], [])
    return Presentation("A1_minus_0", S, ring, ring.zero(), [st], {"X1": "E1"},
                        {("E1", "E1"): [("id1", 0)]}, {}, {"E1": "id1"},
                        {"E1": "E1"}, {"id1": (S.one, "id1")}, [], None)


def _build_a1(S):
    ring = PolyRing(S, [("xi", 2)])
    xi = ring.gen("xi")
    pt = Stratum("pt", 0, ["pt"], [("xi", 2)], xi.to_json())
    x1 = Stratum("X1", 1, ["pt", "X1"], [], [])
    homs = {
        ("Ept", "Ept"): [("id0", 0)],
        ("E1", "E1"): [("id1", 0)],
        ("E1", "Ept"): [("eps", 1)],
        ("Ept", "E1"): [("eta", 1)],
    }
    comp = {
        ("eps", "eta"): [(xi, "id0")],
        ("eta", "eps"): [(xi, "id1")],
    }
    sub = _build_a1_minus_0(S)
    sub.name = "A1_Gm|X1"
    open_x1 = OpenDecl(
        "X1", ["X1"], sub,
        {"Ept": None, "E1": "E1"},
        {"id1": [(sub.ring.one(), "id1")]},
        {("xi", "id1"): []})
    return Presentation(
        "A1_Gm", S, ring, xi, [pt, x1], {"pt": "Ept", "X1": "E1"}, homs, comp,
        {"Ept": "id0", "E1": "id1"}, {"Ept": "Ept", "E1": "E1"},
        {"id0": (S.one, "id0"), "id1": (S.one, "id1"),
         "eps": (S.one, "eta"), "eta": (S.one, "eps")},
        [open_x1], FDatum(["pt"], ["X1"], 1))


def _build_a2_u(S):
    ring = PolyRing(S, [])
    st = Stratum("U", 2, ["U"], [], [])
    return Presentation("A2|U", S, ring, ring.zero(), [st], {"U": "EU"},
                        {("EU", "EU"): [("idU", 0)]}, {}, {"EU": "idU"},
                        {"EU": "EU"}, {"idU": (S.one, "idU")}, [], None)


def _a2_stratum(which, S):
    hpt = PolyRing(S, [("a", 2), ("b", 2)])
    hline = PolyRing(S, [("a", 2)])
    a2 = {"pt": Stratum("pt", 0, ["pt"], [("a", 2), ("b", 2)], hpt.gen("a").to_json()),
          "X1": Stratum("X1", 1, ["X1"], [("a", 2)], hline.gen("a").to_json()),
          "X2": Stratum("X2", 1, ["X2"], [("a", 2)], hline.gen("a").to_json()),
          "U": Stratum("U", 2, ["U"], [], [])}
    return a2[which]


def _build_a2_vside(S, side):
    """V1 = U + X2 (side 2) or V2 = U + X1 (side 1)."""
    ring = PolyRing(S, [("a", 2)])
    a = ring.gen("a")
    sid = "X%d" % side
    obj = "E%d" % side
    eps = "eps%dU" % side
    eta = "eta%dU" % side
    ids = "id%d" % side
    st = _a2_stratum(sid, S)
    stU = _a2_stratum("U", S)
    stU.closure = [sid, "U"]
    homs = {
        (obj, obj): [(ids, 0)],
        ("EU", "EU"): [("idU", 0)],
        ("EU", obj): [(eps, 1)],
        (obj, "EU"): [(eta, 1)],
    }
    comp = {
        (eps, eta): [(a, ids)],
        (eta, eps): [(a, "idU")],
    }
    sub = _build_a2_u(S)
    open_u = OpenDecl(
        "U", ["U"], sub,
        {obj: None, "EU": "EU"},
        {"idU": [(sub.ring.one(), "idU")]},
        {("a", "idU"): []})
    return Presentation(
        "A2|V1" if side == 2 else "A2|V2",
        S, ring, a, [st, stU], {sid: obj, "U": "EU"}, homs, comp,
        {obj: ids, "EU": "idU"}, {obj: obj, "EU": "EU"},
        {ids: (S.one, ids), "idU": (S.one, "idU"), eps: (S.one, eta), eta: (S.one, eps)},
        [open_u], None)


def _build_a2_v(S):
    """V = the complement of the origin: strata X1, X2, U over k[a]."""
    ring = PolyRing(S, [("a", 2)])
    a = ring.gen("a")
    one = ring.one()
    st1 = _a2_stratum("X1", S)
    st2 = _a2_stratum("X2", S)
    stU = _a2_stratum("U", S)
    stU.closure = ["X1", "X2", "U"]
    homs = {
        ("E1", "E1"): [("id1", 0)],
        ("E2", "E2"): [("id2", 0)],
        ("EU", "EU"): [("idU", 0), ("bU", 2)],
        ("EU", "E1"): [("eps1U", 1)],
        ("E1", "EU"): [("eta1U", 1)],
        ("EU", "E2"): [("eps2U", 1)],
        ("E2", "EU"): [("eta2U", 1)],
    }
    z = []
    comp = {
        ("bU", "bU"): [(a, "bU")],
        ("eps1U", "eta1U"): [(a, "id1")],
        ("eta1U", "eps1U"): [(a, "idU"), (-one, "bU")],
        ("eps2U", "eta2U"): [(a, "id2")],
        ("eta2U", "eps2U"): [(one, "bU")],
        ("eps1U", "bU"): z,
        ("bU", "eta1U"): z,
        ("eps2U", "bU"): [(a, "eps2U")],
        ("bU", "eta2U"): [(a, "eta2U")],
        ("eps2U", "eta1U"): z,
        ("eps1U", "eta2U"): z,
    }
    v1 = _build_a2_vside(S, 2)
    v2 = _build_a2_vside(S, 1)
    subu = _build_a2_u(S)
    a_v1 = v1.ring.gen("a")
    a_v2 = v2.ring.gen("a")
    one1 = v1.ring.one()
    one2 = v2.ring.one()
    open_u = OpenDecl(
        "U", ["U"], subu,
        {"E1": None, "E2": None, "EU": "EU"},
        {"idU": [(subu.ring.one(), "idU")], "bU": []},
        {("a", "idU"): []})
    open_v1 = OpenDecl(
        "V1", ["X2", "U"], v1,
        {"E1": None, "E2": "E2", "EU": "EU"},
        {"id2": [(one1, "id2")], "idU": [(one1, "idU")], "bU": [(a_v1, "idU")],
         "eps2U": [(one1, "eps2U")], "eta2U": [(one1, "eta2U")]},
        {("a", "id2"): [(a_v1, "id2")], ("a", "idU"): [(a_v1, "idU")],
         ("a", "eps2U"): [(a_v1, "eps2U")], ("a", "eta2U"): [(a_v1, "eta2U")]})
    open_v2 = OpenDecl(
        "V2", ["X1", "U"], v2,
        {"E1": "E1", "E2": None, "EU": "EU"},
        {"id1": [(one2, "id1")], "idU": [(one2, "idU")], "bU": [],
         "eps1U": [(one2, "eps1U")], "eta1U": [(one2, "eta1U")]},
        {("a", "id1"): [(a_v2, "id1")], ("a", "idU"): [(a_v2, "idU")],
         ("a", "eps1U"): [(a_v2, "eps1U")], ("a", "eta1U"): [(a_v2, "eta1U")]})
    return Presentation(
        "A2|V", S, ring, a, [st1, st2, stU],
        {"X1": "E1", "X2": "E2", "U": "EU"}, homs, comp,
        {"E1": "id1", "E2": "id2", "EU": "idU"},
        {"E1": "E1", "E2": "E2", "EU": "EU"},
        {"id1": (S.one, "id1"), "id2": (S.one, "id2"), "idU": (S.one, "idU"),
         "bU": (S.one, "bU"),
         "eps1U": (S.one, "eta1U"), "eta1U": (S.one, "eps1U"),
         "eps2U": (S.one, "eta2U"), "eta2U": (S.one, "eps2U")},
        [open_u, open_v1, open_v2], None)


def _build_a2(S):
    ring = PolyRing(S, [("a", 2), ("b", 2)])
    a = ring.gen("a")
    b = ring.gen("b")
    one = ring.one()
    amb = a - b
    pt = _a2_stratum("pt", S)
    x1 = _a2_stratum("X1", S)
    x1.closure = ["pt", "X1"]
    x2 = _a2_stratum("X2", S)
    x2.closure = ["pt", "X2"]
    u = _a2_stratum("U", S)
    u.closure = ["pt", "X1", "X2", "U"]
    homs = {
        ("Ept", "Ept"): [("id0", 0)],
        ("E1", "E1"): [("id1", 0)],
        ("E2", "E2"): [("id2", 0)],
        ("EU", "EU"): [("idU", 0)],
        ("E1", "Ept"): [("eps1", 1)],
        ("Ept", "E1"): [("eta1", 1)],
        ("E2", "Ept"): [("eps2", 1)],
        ("Ept", "E2"): [("eta2", 1)],
        ("EU", "E1"): [("eps1U", 1)],
        ("E1", "EU"): [("eta1U", 1)],
        ("EU", "E2"): [("eps2U", 1)],
        ("E2", "EU"): [("eta2U", 1)],
        ("EU", "Ept"): [("epsU", 2)],
        ("Ept", "EU"): [("etaU", 2)],
        ("E1", "E2"): [("th21", 2)],
        ("E2", "E1"): [("th12", 2)],
    }
    comp = {
        ("eps1", "eta1"): [(b, "id0")],
        ("eta1U", "eta1"): [(one, "etaU")],
        ("th21", "eta1"): [(b, "eta2")],
        ("eps2", "eta2"): [(amb, "id0")],
        ("eta2U", "eta2"): [(one, "etaU")],
        ("th12", "eta2"): [(amb, "eta1")],
        ("eps1U", "etaU"): [(amb, "eta1")],
        ("eps2U", "etaU"): [(b, "eta2")],
        ("epsU", "etaU"): [(b * amb, "id0")],
        ("eta1", "eps1"): [(b, "id1")],
        ("eta2", "eps1"): [(one, "th21")],
        ("etaU", "eps1"): [(b, "eta1U")],
        ("eps1U", "eta1U"): [(amb, "id1")],
        ("eps2U", "eta1U"): [(one, "th21")],
        ("epsU", "eta1U"): [(amb, "eps1")],
        ("eps2", "th21"): [(amb, "eps1")],
        ("eta2U", "th21"): [(b, "eta1U")],
        ("th12", "th21"): [(b * amb, "id1")],
        ("eta2", "eps2"): [(amb, "id2")],
        ("eta1", "eps2"): [(one, "th12")],
        ("etaU", "eps2"): [(amb, "eta2U")],
        ("eps2U", "eta2U"): [(b, "id2")],
        ("eps1U", "eta2U"): [(one, "th12")],
        ("epsU", "eta2U"): [(b, "eps2")],
        ("eps1", "th12"): [(b, "eps2")],
        ("eta1U", "th12"): [(amb, "eta2U")],
        ("th21", "th12"): [(b * amb, "id2")],
        ("eps1", "eps1U"): [(one, "epsU")],
        ("eta1U", "eps1U"): [(amb, "idU")],
        ("th21", "eps1U"): [(amb, "eps2U")],
        ("eps2", "eps2U"): [(one, "epsU")],
        ("eta2U", "eps2U"): [(b, "idU")],
        ("th12", "eps2U"): [(b, "eps1U")],
        ("eta1", "epsU"): [(b, "eps1U")],
        ("eta2", "epsU"): [(amb, "eps2U")],
        ("etaU", "epsU"): [(b * amb, "idU")],
    }
    pu = _build_a2_u(S)
    pv1 = _build_a2_vside(S, 2)
    pv2 = _build_a2_vside(S, 1)
    pv = _build_a2_v(S)
    open_u = OpenDecl(
        "U", ["U"], pu,
        {"Ept": None, "E1": None, "E2": None, "EU": "EU"},
        {"idU": [(pu.ring.one(), "idU")]},
        {("a", "idU"): [], ("b", "idU"): []})
    a1r = pv1.ring.gen("a")
    one1 = pv1.ring.one()
    open_v1 = OpenDecl(
        "V1", ["X2", "U"], pv1,
        {"Ept": None, "E1": None, "E2": "E2", "EU": "EU"},
        {"id2": [(one1, "id2")], "idU": [(one1, "idU")],
         "eps2U": [(one1, "eps2U")], "eta2U": [(one1, "eta2U")]},
        {("a", "id2"): [(a1r, "id2")], ("a", "idU"): [(a1r, "idU")],
         ("a", "eps2U"): [(a1r, "eps2U")], ("a", "eta2U"): [(a1r, "eta2U")],
         ("b", "id2"): [(a1r, "id2")], ("b", "idU"): [(a1r, "idU")],
         ("b", "eps2U"): [(a1r, "eps2U")], ("b", "eta2U"): [(a1r, "eta2U")]})
    a2r = pv2.ring.gen("a")
    one2 = pv2.ring.one()
    open_v2 = OpenDecl(
        "V2", ["X1", "U"], pv2,
        {"Ept": None, "E1": "E1", "E2": None, "EU": "EU"},
        {"id1": [(one2, "id1")], "idU": [(one2, "idU")],
         "eps1U": [(one2, "eps1U")], "eta1U": [(one2, "eta1U")]},
        {("a", "id1"): [(a2r, "id1")], ("a", "idU"): [(a2r, "idU")],
         ("a", "eps1U"): [(a2r, "eps1U")], ("a", "eta1U"): [(a2r, "eta1U")],
         ("b", "id1"): [], ("b", "idU"): [], ("b", "eps1U"): [], ("b", "eta1U"): []})
    av = pv.ring.gen("a")
    onev = pv.ring.one()
    open_v = OpenDecl(
        "V", ["X1", "X2", "U"], pv,
        {"Ept": None, "E1": "E1", "E2": "E2", "EU": "EU"},
        {"id1": [(onev, "id1")], "id2": [(onev, "id2")], "idU": [(onev, "idU")],
         "eps1U": [(onev, "eps1U")], "eta1U": [(onev, "eta1U")],
         "eps2U": [(onev, "eps2U")], "eta2U": [(onev, "eta2U")],
         "th21": [], "th12": []},
        {("a", "id1"): [(av, "id1")], ("a", "id2"): [(av, "id2")],
         ("a", "idU"): [(av, "idU")], ("a", "bU"): [(av, "bU")],
         ("a", "eps1U"): [(av, "eps1U")], ("a", "eta1U"): [(av, "eta1U")],
         ("a", "eps2U"): [(av, "eps2U")], ("a", "eta2U"): [(av, "eta2U")],
         ("b", "id1"): [], ("b", "id2"): [(av, "id2")],
         ("b", "idU"): [(onev, "bU")], ("b", "bU"): [(av, "bU")],
         ("b", "eps1U"): [], ("b", "eta1U"): [],
         ("b", "eps2U"): [(av, "eps2U")], ("b", "eta2U"): [(av, "eta2U")]})
    return Presentation(
        "A2_product", S, ring, a, [pt, x1, x2, u],
        {"pt": "Ept", "X1": "E1", "X2": "E2", "U": "EU"}, homs, comp,
        {"Ept": "id0", "E1": "id1", "E2": "id2", "EU": "idU"},
        {"Ept": "Ept", "E1": "E1", "E2": "E2", "EU": "EU"},
        {"id0": (S.one, "id0"), "id1": (S.one, "id1"),
         "id2": (S.one, "id2"), "idU": (S.one, "idU"),
         "eps1": (S.one, "eta1"), "eta1": (S.one, "eps1"),
         "eps2": (S.one, "eta2"), "eta2": (S.one, "eps2"),
         "eps1U": (S.one, "eta1U"), "eta1U": (S.one, "eps1U"),
         "eps2U": (S.one, "eta2U"), "eta2U": (S.one, "eps2U"),
         "epsU": (S.one, "etaU"), "etaU": (S.one, "epsU"),
         "th21": (S.one, "th12"), "th12": (S.one, "th21")},
        [open_u, open_v1, open_v2, open_v],
        FDatum(["pt", "X1", "X2"], ["U"], 1))
