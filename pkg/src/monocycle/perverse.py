"""Perverse bounds, decided stratum by stratum.

An object satisfies the lower perversity bound at level a exactly when,
on every stratum, the shrieked pullback receives no nonzero maps from
shifted heart generators in degrees below a.  The upper bound is the
Verdier-dual condition.  Since the aisle is generated from the listed
objects by extensions and upward shifts, generator vanishing suffices.

Every Hom test here is exact: for a fixed shift the twists that could
carry a nonzero map are pinned by the entry bookkeeping (one slot per
basis element and monomial), so the scan ranges over a finite list that
is complete by construction, not a truncation.
"""

from .complexes import (DggError, FlavorError, IndeterminateError, cone,
                        generator, hom_space, identity_map)
from .recollement import (ScopeError, i_upper_shriek, i_upper_star, j_restrict,
                          j_shriek, j_star, support_purify)
from .reduction import minimize


class PerversityError(DggError):
    pass


def _window_flavor(F):
    if F.flavor not in ("eqv", "con"):
        raise FlavorError(
            "the perverse window is defined in the equivariant and "
            "constructible flavors, not %r" % F.flavor)


def heart_generators(P, flavor):
    """Generators of the heart over a one-stratum presentation.

    The free generator is the presentation generator in bidegree (0, 0);
    over the p-local integers the cone on multiplication by the
    uniformizer joins it.  Twists are scanned by the callers, not listed
    here.
    """
    if len(P.strata) != 1:
        raise ScopeError("heart generators live on a single stratum")
    if flavor not in ("eqv", "con"):
        raise FlavorError("no heart in flavor %r" % flavor)
    G = generator(P, flavor, P.objects[P.order[0]])
    out = [G]
    w = P.S.varpi
    if w:
        out.append(cone(identity_map(G).scale(w)))
    return out


class PervGenerators:
    """The heart generator families of every stratum of a presentation.

    families maps stratum id to the list of generators over that
    stratum's own one-stratum presentation (reached the same way the
    membership scan pulls objects back: cut to the closure, then
    restrict to the declared open around the stratum).
    """

    def __init__(self, P, flavor):
        self.P = P
        self.flavor = flavor
        self.families = {}
        for st in P.strata:
            self.families[st.sid] = heart_generators(
                _stratum_site(P, st.sid), flavor)

    def all_objects(self):
        out = []
        for sid in self.P.order:
            out.extend(self.families[sid])
        return out


def _stratum_site(P, sid):
    """The one-stratum presentation the pullback to sid lands in."""
    st = P.stratum_by_id[sid]
    closure = [s for s in P.order if s in set(st.closure)]
    site = P
    if len(closure) != len(P.order):
        site = P.closed_sub(closure)
    if len(site.strata) == 1:
        return site
    O = site.open_by_strata([sid])
    if O is None:
        raise IndeterminateError(
            "no declared open isolates stratum %r inside %r"
            % (sid, site.name))
    return O.pres


def stratum_pullback(F, sid, lower=True):
    """Pull F back to the stratum sid, with shrieks (lower=True) or
    stars.

    Cuts to the closure of the stratum first (supported part from below
    or above, then purification onto the closed sub-presentation) and
    restricts to the declared open around the stratum afterwards.  A
    purification that leaves cells outside the closure raises
    IndeterminateError."""
    P = F.P
    st = P.stratum_by_id[sid]
    closure = [s for s in P.order if s in set(st.closure)]
    cur = F
    if len(closure) != len(P.order):
        sup = i_upper_shriek(F, closure) if lower else i_upper_star(F, closure)
        pur = support_purify(sup)
        if pur.purified is None:
            raise IndeterminateError(
                "the part of the object over the closure of %r did not "
                "localize: %s" % (sid, pur.report))
        cur = pur.purified
    if len(cur.P.strata) == 1:
        return cur
    O = cur.P.open_by_strata([sid])
    if O is None:
        raise IndeterminateError(
            "no declared open isolates stratum %r inside %r"
            % (sid, cur.P.name))
    return j_restrict(cur, O)


def _twist_slots(G, Fs, m):
    """Twists n for which Hom(G<n>[-m], Fs) could have a nonzero entry
    monomial; complete because the entry bidegree pins the twist per
    basis-element class.
    """
    con = Fs.flavor == "con"
    out = set()
    P = Fs.P
    for (ol, cl, tl) in G.cells:
        for (ok, ck, tk) in Fs.cells:
            if not P.homs.get((ol, ok)):
                continue
            base = (ck - cl) - (tk - tl)
            out.add(base - m)
            if con:
                out.add(base - m - 1)
    return sorted(out)


def _shift_floor(G, Fs):
    """No Hom below this shift: entry degrees dominate the shift drop."""
    P = Fs.P
    floor = None
    for (ol, cl, tl) in G.cells:
        for (ok, ck, tk) in Fs.cells:
            if not P.homs.get((ol, ok)):
                continue
            dc = ck - cl
            if floor is None or dc < floor:
                floor = dc
    return floor


def _scan_nonzero(src, dst, m):
    for n in _twist_slots(src, dst, m):
        if hom_space(src, dst, m, n) != (0, []):
            return True
    return False


def _vanishing_below(Fs, a):
    """True when no heart generator maps nontrivially into Fs shifted
    below a.  Lower shifts of the generators stay in the lower coaisle,
    and their extensions inherit the vanishing, so this decides the
    bound."""
    if not Fs.cells:
        return True
    for G in heart_generators(Fs.P, Fs.flavor):
        floor = _shift_floor(G, Fs)
        if floor is None:
            continue
        for m in range(floor, a):
            if _scan_nonzero(G, Fs, m):
                return False
    return True


def _vanishing_above(Fs, a):
    """True when Fs maps nontrivially to no heart generator shifted
    above a.  The entry bookkeeping caps the shifts that can carry a
    map out of Fs, so the scan is finite on this side as well."""
    if not Fs.cells:
        return True
    top = max(c for _, c, _ in Fs.cells)
    for G in heart_generators(Fs.P, Fs.flavor):
        cap = top - min(c for _, c, _ in G.cells)
        for m in range(a + 1, cap + 1):
            if _scan_nonzero(Fs, G, -m):
                return False
    return True


def perverse_ge(F, a):
    """True when F lies in degrees >= a of the perverse window."""
    _window_flavor(F)
    for sid in F.P.order:
        Fs, _ = minimize(stratum_pullback(F, sid, lower=True))
        if not _vanishing_below(Fs, a):
            return False
    return True


def perverse_le(F, a):
    """True when F lies in degrees <= a of the perverse window.

    Tested directly on starred pullbacks.  Conjugating the lower test
    by duality gives the same answer over a field but misplaces the
    uniformizer cones over the p-local integers, so the direct scan is
    the definition here."""
    _window_flavor(F)
    for sid in F.P.order:
        Fs, _ = minimize(stratum_pullback(F, sid, lower=False))
        if not _vanishing_above(Fs, a):
            return False
    return True


def is_perverse(F):
    return perverse_ge(F, 0) and perverse_le(F, 0)


def _first_degree(Fs):
    """The smallest shift with a nonzero Hom from a heart generator into
    the (nonzero, minimal) stratum object Fs."""
    best = None
    cap = max(c for _, c, _ in Fs.cells) + 2
    for G in heart_generators(Fs.P, Fs.flavor):
        floor = _shift_floor(G, Fs)
        if floor is None:
            continue
        hi = cap - min(c for _, c, _ in G.cells)
        for m in range(floor, hi + 1):
            if best is not None and m >= best:
                break
            if _scan_nonzero(G, Fs, m):
                best = m
                break
    if best is None:
        raise IndeterminateError(
            "no generator Hom found below the cell span of a nonzero "
            "stratum object")
    return best


def _last_degree(Fs):
    """The largest shift with a nonzero Hom out of the (nonzero,
    minimal) stratum object Fs to a heart generator."""
    best = None
    top = max(c for _, c, _ in Fs.cells)
    floor = min(c for _, c, _ in Fs.cells) - 2
    for G in heart_generators(Fs.P, Fs.flavor):
        cap = top - min(c for _, c, _ in G.cells)
        for m in range(cap, floor - 1, -1):
            if best is not None and m <= best:
                break
            if _scan_nonzero(Fs, G, -m):
                best = m
                break
    if best is None:
        raise IndeterminateError(
            "no generator Hom found above the cell span of a nonzero "
            "stratum object")
    return best


def stratum_windows(F):
    """Per-stratum perverse intervals (lo, hi); sides where the pullback
    vanishes are None."""
    _window_flavor(F)
    out = {}
    for sid in F.P.order:
        Fsh, _ = minimize(stratum_pullback(F, sid, lower=True))
        Fst, _ = minimize(stratum_pullback(F, sid, lower=False))
        lo = _first_degree(Fsh) if Fsh.cells else None
        hi = _last_degree(Fst) if Fst.cells else None
        out[sid] = (lo, hi)
    return out


def perverse_degrees(F):
    """The smallest window (lo, hi) with F in degrees >= lo and <= hi;
    None when F minimizes away."""
    M, _ = minimize(F)
    if not M.cells:
        return None
    rows = stratum_windows(M)
    los = [lo for lo, hi in rows.values() if lo is not None]
    his = [hi for lo, hi in rows.values() if hi is not None]
    if not los or not his:
        raise IndeterminateError(
            "a nonzero object whose stratum pullbacks all vanish")
    return (min(los), max(his))


class JExactReport:
    """Outcome of testing both extensions from the generic open for
    t-exactness, one row per supplied input."""

    def __init__(self, presentation, rows):
        self.presentation = presentation
        self.rows = rows

    @property
    def passed(self):
        checked = [r for r in self.rows if r["perverse"]]
        return bool(checked) and all(r["exact"] for r in checked)

    def to_json(self):
        return {"presentation": self.presentation,
                "passed": self.passed,
                "rows": [dict(r) for r in self.rows]}

    def lines(self):
        out = ["extension exactness over %s: %s"
               % (self.presentation, "pass" if self.passed else "FAIL")]
        for r in self.rows:
            if not r["perverse"]:
                out.append("  %s: skipped (input not perverse)" % r["input"])
                continue
            out.append("  %s: lower %s  upper %s  %s"
                       % (r["input"], list(r["shriek_window"]),
                          list(r["star_window"]),
                          "ok" if r["exact"] else "FAIL"))
        return out


def check_j_exactness(P, inputs=None):
    """Push test objects from the declared generic open into P by both
    extensions and report their perverse windows; exact means every
    window is [0, 0].

    inputs is a list of (label, object over the generic open); the heart
    generators of the generic open are used when omitted.  Inputs that
    are not perverse are flagged and skipped, never failed.
    """
    O = P.eta_open()
    sub = O.pres
    if inputs is None:
        gens = heart_generators(sub, "eqv")
        names = ["free generator", "uniformizer cone"]
        inputs = list(zip(names, gens))
    rows = []
    for label, G in inputs:
        if G.P.name != sub.name:
            raise ScopeError(
                "input %r lives over %r, not the generic open %r"
                % (label, G.P.name, sub.name))
        if not is_perverse(G):
            rows.append({"input": label, "perverse": False,
                         "shriek_window": None, "star_window": None,
                         "exact": None})
            continue
        win_sh = perverse_degrees(j_shriek(G, P))
        win_st = perverse_degrees(j_star(G, P))
        rows.append({"input": label, "perverse": True,
                     "shriek_window": win_sh, "star_window": win_st,
                     "exact": win_sh == (0, 0) and win_st == (0, 0)})
    return JExactReport(P.name, rows)
