"""Nearby cycles, the maximal extension, and vanishing cycles.

The three pipelines share one backbone: deform the input over the
generic open by the loop block, extend across the whole space from
both sides, cut to the zero locus, descend out of the loop-equivariant
flavor, and minimize.  The monodromy rides along as the loop
coefficient and comes out as the odd part of the minimized
differential.

Results carry their own evidence: triangle comparisons against
independently computed models, homotopy witnesses for the stated
composite identities, and the per-presentation exactness report for
the two extension functors (that exactness enters the perversity
statements as a hypothesis and is never assumed silently).
"""

from .complexes import (ChainMap, DggError, DggObject, FlavorError,
                        IndeterminateError, Triangle, cocone, cocone_maps,
                        cone, cone_maps, cone_triangle, direct_sum,
                        find_homotopy, hom_basis, identity_map, shift_map,
                        twist_map)
from .scalars import solve_exact
from .functors import forget, jordan, match_diagonal, mon, monodromy
from .perverse import PerversityError, check_j_exactness, is_perverse, \
    perverse_degrees
from .recollement import (ScopeError, SupportedObject, i_push, i_push_map,
                          i_upper_shriek, i_upper_star, j_restrict, j_shriek,
                          j_star, shriek_to_star, support_purify)
from .reduction import minimize, mon_preimage_object
from . import reduction
from . import recollement


class WitnessError(DggError):
    pass


def _eta_setup(F, P):
    O = P.eta_open()
    if F.P.name != O.pres.name:
        raise ScopeError(
            "the input lives over %r, not the generic open %r of %r"
            % (F.P.name, O.pres.name, P.name))
    if not O.pres.is_r_trivial():
        raise FlavorError("the generic open is not loop-trivial")
    zset = set(P.f_datum.x0)
    x0 = [s for s in P.order if s in zset]
    return O, x0


def _purify_or_die(sup, stage):
    pur = support_purify(sup)
    if pur.purified is None:
        raise IndeterminateError(
            "%s did not localize onto the zero locus: %s"
            % (stage, pur.report))
    return pur


def _reify(f):
    """Present a map of twist degree n as a plain map into the twisted
    target."""
    if f.n == 0:
        return f
    return ChainMap(f.src, f.dst.twist(f.n), f.m, 0, f.entries, check=False)


def _pair_cells(MX, MY, what):
    """Bijection matching cells of equal label, in order within each
    label class."""
    pools = {}
    for j, cell in enumerate(MY.cells):
        pools.setdefault(cell, []).append(j)
    taken = {}
    sigma = {}
    for i, cell in enumerate(MX.cells):
        pool = pools.get(cell, [])
        at = taken.get(cell, 0)
        if at >= len(pool):
            raise DggError("%s: cell inventories differ at %r" % (what, cell))
        sigma[i] = pool[at]
        taken[cell] = at + 1
    if len(MX.cells) != len(MY.cells):
        raise DggError("%s: cell inventories differ in size" % what)
    return sigma


def _anchored_map(MX, MY, sigma, what):
    """Closed map MX -> MY restricting to the identity on the matched
    diagonal, found by linear solve over the remaining slots."""
    P = MX.P
    S = P.S
    anchor = {}
    pinned = set()
    for i, (obj, c, t) in enumerate(MX.cells):
        key = (0, 0, (0,) * P.ring.n, P.identity[obj])
        anchor[(sigma[i], i)] = {key: S.one}
        pinned.add((sigma[i], i, key))
    base = ChainMap(MX, MY, 0, 0, anchor, check=False)
    slots = [s for s in hom_basis(MX, MY, 0, 0) if s not in pinned]
    rows = hom_basis(MX, MY, 1, 0)
    idx = {mono: i for i, mono in enumerate(rows)}
    cols = []
    for (k, l, key) in slots:
        unit = ChainMap(MX, MY, 0, 0, {(k, l): {key: S.one}}, check=False)
        colv = [S.zero] * len(rows)
        for (k2, l2), terms in unit.differential().entries.items():
            for key2, c in terms.items():
                colv[idx[(k2, l2, key2)]] = c
        cols.append(colv)
    rhs = [S.zero] * len(rows)
    for (k2, l2), terms in base.differential().entries.items():
        for key2, c in terms.items():
            rhs[idx[(k2, l2, key2)]] = S.neg(c)
    mat = [[cols[j][i] for j in range(len(cols))] for i in range(len(rows))]
    x, _ = solve_exact(S, mat, rhs)
    if x is None:
        raise DggError("%s: no closed identification exists" % what)
    entries = {kl: dict(t) for kl, t in anchor.items()}
    for i, c in enumerate(x):
        if c == 0:
            continue
        k, l, key = slots[i]
        cur = entries.setdefault((k, l), {})
        cur[key] = S.add(cur.get(key, S.zero), c)
    f = ChainMap(MX, MY, 0, 0, entries, check=False)
    f.require_closed()
    return f


def _left_inverse(f, what):
    """Closed g with g . f homotopic to the identity, solved jointly
    with the homotopy."""
    MX, MY = f.src, f.dst
    S = MX.P.S
    gslots = hom_basis(MY, MX, 0, 0)
    hslots = hom_basis(MX, MX, -1, 0)
    rows_cl = hom_basis(MY, MX, 1, 0)
    rows_eq = hom_basis(MX, MX, 0, 0)
    idx_cl = {mono: i for i, mono in enumerate(rows_cl)}
    idx_eq = {mono: i for i, mono in enumerate(rows_eq)}
    nrows = len(rows_cl) + len(rows_eq)
    cols = []
    for (k, l, key) in gslots:
        unit = ChainMap(MY, MX, 0, 0, {(k, l): {key: S.one}}, check=False)
        colv = [S.zero] * nrows
        for (k2, l2), terms in unit.differential().entries.items():
            for key2, c in terms.items():
                colv[idx_cl[(k2, l2, key2)]] = c
        for (k2, l2), terms in unit.compose(f).entries.items():
            for key2, c in terms.items():
                colv[len(rows_cl) + idx_eq[(k2, l2, key2)]] = c
        cols.append(colv)
    for (k, l, key) in hslots:
        hunit = ChainMap(MX, MX, -1, 0, {(k, l): {key: S.one}}, check=False)
        colv = [S.zero] * nrows
        for (k2, l2), terms in hunit.differential().entries.items():
            for key2, c in terms.items():
                colv[len(rows_cl) + idx_eq[(k2, l2, key2)]] = S.neg(c)
        cols.append(colv)
    rhs = [S.zero] * nrows
    for (k2, l2), terms in identity_map(MX).entries.items():
        for key2, c in terms.items():
            rhs[len(rows_cl) + idx_eq[(k2, l2, key2)]] = c
    mat = [[cols[j][i] for j in range(len(cols))] for i in range(nrows)]
    x, _ = solve_exact(S, mat, rhs)
    if x is None:
        raise DggError("%s: the identification is not invertible" % what)
    entries = {}
    for i, c in enumerate(x[:len(gslots)]):
        if c == 0:
            continue
        k, l, key = gslots[i]
        entries.setdefault((k, l), {})[key] = c
    g = ChainMap(MY, MX, 0, 0, entries, check=False)
    g.require_closed()
    return g


def _identify(X, Y, what):
    """Mutually inverse chain maps X -> Y -> X found through minimal
    models; raises when the models are not equivalent."""
    MX, trX = minimize(X)
    MY, trY = minimize(Y)
    md = match_diagonal(MX, MY)
    if md is not None:
        w, winv = md
    else:
        sigma = _pair_cells(MX, MY, what)
        w = _anchored_map(MX, MY, sigma, what)
        winv = _left_inverse(w, what)
        if not find_homotopy(w.compose(winv), identity_map(MY)):
            raise DggError("%s: one-sided inverse only" % what)
    fwd = trY.equivalence.back.compose(w).compose(trX.equivalence.fwd)
    back = trX.equivalence.back.compose(winv).compose(trY.equivalence.fwd)
    return fwd, back


def _require_homotopy(f, g, what):
    h = find_homotopy(f, g)
    if not h:
        raise DggError("%s: the maps are not homotopic (certificate found)"
                       % what)
    return h


def _require_null(f, what):
    h = find_homotopy(f)
    if not h:
        raise DggError("%s: the composite is not null-homotopic" % what)
    return h


def _glue_signed(src, dst, base, signed, what):
    """Closed (0,0) map assembled from a fixed block and a correction
    block whose sign convention is found by search (a global sign and
    an optional flip on odd exterior keys)."""
    S = src.P.S
    for esign in (False, True):
        for sgn in (S.one, S.neg(S.one)):
            ent = {kl: dict(t) for kl, t in base.items()}
            for (k, l), terms in signed.items():
                cur = ent.setdefault((k, l), {})
                for key, c in terms.items():
                    cc = S.mul(c, sgn)
                    if esign and key[1] % 2 == 1:
                        cc = S.neg(cc)
                    cur[key] = cc
            f = ChainMap(src, dst, 0, 0, ent, check=False)
            if f.is_closed():
                return f
    raise WitnessError("no sign arrangement closes %s" % what)


def totalize_three_term(dm, dp, h=None):
    """Realize a three-term complex of objects as a single object.

    dm and dp are composable chain maps whose composite is
    null-homotopic; h witnesses that (omit it when the composite is
    zero on the nose).  The result is graded by the three inputs, with
    the outer terms shifted one step toward the middle, glued along
    dm, dp, and the witness."""
    if (dm.m, dm.n) != (0, 0) or (dp.m, dp.n) != (0, 0):
        raise WitnessError("totalization takes plain degree maps")
    if dp.src.cells != dm.dst.cells:
        raise WitnessError("the two maps do not compose")
    comp = dp.compose(dm)
    if h is None:
        if not comp.is_zero():
            raise WitnessError(
                "the composite is nonzero and no witness was given")
        hent = {}
    else:
        if h.differential().entries != comp.entries:
            raise WitnessError("the witness does not bound the composite")
        hent = h.entries
    K = cone(dm)
    off = len(dm.dst.cells)
    base = {kl: dict(t) for kl, t in dp.entries.items()}
    signed = {(k, l + off): dict(t) for (k, l), t in hent.items()}
    q = _glue_signed(K, dp.dst, base, signed, "the totalization gluing")
    return cocone(q)


class NearbyOutput:
    """Nearby cycles with monodromy and the two defining triangles.

    psi lives over the closed sub-presentation of the zero locus; n is
    the monodromy psi -> psi<2>.  tri_star realizes psi -> psi<2> ->
    star_model (the starred boundary restriction of the plain input)
    and tri_shriek realizes shriek_model -> psi -> psi<2>.  agreement
    holds the independently computed shrieked-route object with the
    matching isomorphism; nilpotence is the least k with n^k
    null-homotopic; n_refutation certifies n itself is not (None when
    it is)."""

    def __init__(self, psi, n, tri_star, star_model, tri_shriek,
                 shriek_model, agreement, nilpotence, n_refutation,
                 exactness):
        self.psi = psi
        self.n = n
        self.tri_star = tri_star
        self.star_model = star_model
        self.tri_shriek = tri_shriek
        self.shriek_model = shriek_model
        self.agreement = agreement
        self.nilpotence = nilpotence
        self.n_refutation = n_refutation
        self.exactness = exactness


def _nilpotence(N00, spread_bound):
    cur = N00
    k = 1
    first = find_homotopy(cur)
    if first:
        return 1, None
    refut = first
    while k < spread_bound:
        cur = twist_map(N00, 2 * k).compose(cur)
        k += 1
        if find_homotopy(cur):
            return k, refut
    raise DggError(
        "monodromy power %d is not null-homotopic within the twist bound"
        % k)


def psi(F, P, report=None):
    """Nearby cycles of an equivariant object on the generic open.

    Pipeline: loop-block deformation, starred extension, supported part
    over the zero locus, purification, descent out of the
    loop-equivariant flavor, untwist, minimize.  The shrieked route is
    computed as well and the two answers are matched."""
    if F.flavor != "eqv":
        raise FlavorError(
            "nearby cycles take an equivariant input on the generic open")
    O, x0 = _eta_setup(F, P)
    if report is None:
        report = check_j_exactness(P)
    JF = jordan(F)

    TJ = j_star(JF, P)
    pur = _purify_or_die(i_upper_star(TJ, x0), "the starred extension")
    A, _w = mon_preimage_object(pur.purified)
    Psi, _tr = minimize(A.twist(-2))
    N = monodromy(Psi)

    BJ = j_shriek(JF, P)
    purW = _purify_or_die(i_upper_shriek(BJ, x0), "the shrieked extension")
    A2, _w2 = mon_preimage_object(purW.purified)
    Psi2, _tr2 = minimize(A2.twist(-2).shift(1))
    md = match_diagonal(Psi, Psi2)
    if md is None:
        raise DggError("the two defining routes for nearby cycles disagree")

    Fc = forget(F)
    star_model = _purify_or_die(
        i_upper_star(j_star(Fc, P), x0),
        "the starred boundary of the plain input").purified
    shriek_model = _purify_or_die(
        i_upper_shriek(j_shriek(Fc, P), x0),
        "the shrieked boundary of the plain input").purified

    N00 = _reify(N)
    C, tri0 = cone_triangle(N00)
    fwdC, backC = _identify(C, star_model, "the starred triangle model")
    tri_star = Triangle(N00, fwdC.compose(tri0.into), tri0.out.compose(backC))

    D = cocone(N00)
    projD, incD = cocone_maps(N00)
    fwdW, backW = _identify(shriek_model, D, "the shrieked triangle model")
    w_map = projD.compose(fwdW)
    out_sh = shift_map(backW.compose(incD), 1)
    tri_shriek = Triangle(w_map, N00, out_sh)

    if Psi.cells:
        spread = (max(t for _, _, t in Psi.cells)
                  - min(t for _, _, t in Psi.cells)) // 2 + 1
    else:
        spread = 1
    nil, refut = _nilpotence(N00, spread)

    return NearbyOutput(Psi, N, tri_star, star_model, tri_shriek,
                        shriek_model, (Psi2, md), nil, refut, report)


class MaxExtOutput:
    """The maximal extension with its four structure maps.

    xi is constructible over the whole presentation.  tri_shriek
    realizes (shrieked extension -> xi -> pushed psi<2>), tri_star
    realizes (pushed psi -> xi -> starred extension).  canonical is
    the comparison map between the two extensions; canonical_exact
    says whether alpha_plus . alpha_minus equals it on the nose
    (canonical_witness holds the homotopy otherwise).  n_witness
    connects beta_minus . beta_plus to the pushed monodromy.
    oct_witnesses are the two cone re-identifications behind the
    octahedron bookkeeping."""

    def __init__(self, xi, alpha_minus, alpha_plus, beta_minus, beta_plus,
                 tri_shriek, tri_star, canonical, canonical_exact,
                 canonical_witness, n_witness, oct_witnesses, psi_output,
                 exactness, open_exact):
        self.xi = xi
        self.alpha_minus = alpha_minus
        self.alpha_plus = alpha_plus
        self.beta_minus = beta_minus
        self.beta_plus = beta_plus
        self.tri_shriek = tri_shriek
        self.tri_star = tri_star
        self.canonical = canonical
        self.canonical_exact = canonical_exact
        self.canonical_witness = canonical_witness
        self.n_witness = n_witness
        self.oct_witnesses = oct_witnesses
        self.psi_output = psi_output
        self.exactness = exactness
        self.open_exact = open_exact


def xi(F, P, psi_out=None, report=None):
    """The maximal extension of a perverse equivariant object on the
    generic open: cone of the monodromy from the shrieked to the
    starred loop-block extension, descended and minimized."""
    if F.flavor != "eqv":
        raise FlavorError(
            "the maximal extension takes an equivariant input on the "
            "generic open")
    O, x0 = _eta_setup(F, P)
    if not is_perverse(F):
        raise PerversityError("the maximal extension needs a perverse input")
    if psi_out is None:
        psi_out = psi(F, P, report=report)
    report = psi_out.exactness

    JF = jordan(F)
    BJ = j_shriek(JF, P)
    NB = ChainMap(BJ.twist(-2), BJ, 0, 0, monodromy(BJ).entries,
                  check=False)
    NB.require_closed()
    s2s = shriek_to_star(JF, P)
    Nhat = s2s.compose(NB)
    Xihat = cone(Nhat)
    Fc = forget(F)
    Graw, _wpre = reduction.mon_preimage_glued(Xihat, O, Fc)
    Xi, _trXi = minimize(Graw)

    Bc = j_shriek(Fc, P)
    Tc = j_star(Fc, P)
    RXi = j_restrict(Xi, O)
    open_exact = RXi.cells == Fc.cells and RXi.delta == Fc.delta
    if open_exact:
        alpha_minus = recollement.adjunction_counit(Xi, O)
        alpha_plus = recollement.adjunction_unit(Xi, O)
    else:
        ufwd, uback = _identify(Fc, RXi, "the open part of the extension")
        alpha_minus = reduction._open_anchored(recollement, O, Bc, Xi, ufwd)
        alpha_plus = reduction._open_anchored(recollement, O, Xi, Tc, uback)

    canonical = shriek_to_star(Fc, P)
    comp = alpha_plus.compose(alpha_minus)
    canonical_exact = comp.entries == canonical.entries
    canonical_witness = None
    if not canonical_exact:
        canonical_witness = _require_homotopy(
            comp, canonical, "the composite of the two structure maps "
            "against the canonical one")

    PPsi = i_push(psi_out.psi, P)
    PPsi2 = i_push(psi_out.psi.twist(2), P)
    PN = i_push_map(_reify(psi_out.n), P)

    Cm = cone(alpha_minus)
    into_m, out_m = cone_maps(alpha_minus)
    fwd_m, back_m = _identify(Cm, PPsi2, "the shrieked-side gluing model")
    beta_minus = fwd_m.compose(into_m)
    tri_shriek = Triangle(alpha_minus, beta_minus, out_m.compose(back_m))

    Cp = cocone(alpha_plus)
    proj_p, inc_p = cocone_maps(alpha_plus)
    fwd_p, back_p = _identify(PPsi, Cp, "the starred-side gluing model")
    beta_plus = proj_p.compose(fwd_p)
    tri_star = Triangle(beta_plus, alpha_plus,
                        shift_map(back_p.compose(inc_p), 1))

    n_witness = _require_homotopy(
        beta_minus.compose(beta_plus), PN,
        "the boundary composite against the monodromy")
    _require_null(beta_minus.compose(alpha_minus),
                  "consecutive maps of the shrieked triangle")
    _require_null(alpha_plus.compose(beta_plus),
                  "consecutive maps of the starred triangle")

    oct_a = _identify(cone(NB), j_shriek(mon(Fc), P),
                      "the shrieked cap of the octahedron")
    pure_star = _purify_or_die(
        i_upper_star(j_star(JF, P), x0),
        "the starred cap of the octahedron")
    oct_b = _identify(cone(s2s), i_push(pure_star.purified, P),
                      "the starred cap of the octahedron")

    return MaxExtOutput(Xi, alpha_minus, alpha_plus, beta_minus, beta_plus,
                        tri_shriek, tri_star, canonical, canonical_exact,
                        canonical_witness, n_witness, (oct_a, oct_b),
                        psi_out, report, open_exact)


class VanCycOutput:
    """Vanishing cycles with the canonical and variation maps.

    phi lives over the closed sub-presentation of the zero locus.
    tri_can realizes (psi -> phi -> starred restriction of the input)
    and tri_var realizes (shrieked restriction -> phi -> psi<2>).
    n_witness connects var . can to the monodromy.  totalization is
    the realized three-term object before purification."""

    def __init__(self, phi, can, var, tri_can, tri_var, star_model,
                 shriek_model, n_witness, totalization, psi_output,
                 xi_output, exactness):
        self.phi = phi
        self.can = can
        self.var = var
        self.tri_can = tri_can
        self.tri_var = tri_var
        self.star_model = star_model
        self.shriek_model = shriek_model
        self.n_witness = n_witness
        self.totalization = totalization
        self.psi_output = psi_output
        self.xi_output = xi_output
        self.exactness = exactness


def _as_equivariant(F):
    for terms in F.delta.values():
        for key in terms:
            if key[1]:
                raise PerversityError(
                    "the generic part carries exterior entries and is not "
                    "in the equivariant image")
    return DggObject(F.P, "eqv", list(F.cells),
                     {kl: dict(t) for kl, t in F.delta.items()})


def phi(F):
    """Vanishing cycles of a constructible object whose generic part is
    equivariant perverse.

    Realizes the three-term display (shrieked extension of the generic
    part, maximal extension plus the input, starred extension), checks
    the generic part of the realization is acyclic, purifies onto the
    zero locus, and reads off can and var from the gluing columns.
    Perversity of the output is checked, not assumed."""
    if F.flavor != "con":
        raise FlavorError(
            "vanishing cycles take a constructible input on the total space")
    P = F.P
    O, x0 = _eta_setup_total(P)
    FU = j_restrict(F, O)
    Feq = _as_equivariant(FU)
    if not is_perverse(F):
        raise PerversityError("the input is not perverse")
    if not is_perverse(Feq):
        raise PerversityError("the generic part is not perverse")
    report = check_j_exactness(P)
    psi_out = psi(Feq, P, report=report)
    xi_out = xi(Feq, P, psi_out=psi_out, report=report)

    Bc = j_shriek(FU, P)
    Tc = j_star(FU, P)
    gamma_minus = recollement.adjunction_counit(F, O)
    gamma_plus = recollement.adjunction_unit(F, O)
    Xi = xi_out.xi
    C0 = direct_sum(Xi, F)
    offX = len(Xi.cells)

    dm_ent = {kl: dict(t) for kl, t in xi_out.alpha_minus.entries.items()}
    for (k, l), terms in gamma_minus.entries.items():
        dm_ent[(k + offX, l)] = dict(terms)
    dm = ChainMap(Bc, C0, 0, 0, dm_ent, check=False)
    dm.require_closed()

    S = P.S
    dp_ent = {kl: dict(t) for kl, t in xi_out.alpha_plus.entries.items()}
    for (k, l), terms in gamma_plus.entries.items():
        dp_ent[(k, l + offX)] = {key: S.neg(c) for key, c in terms.items()}
    dp = ChainMap(C0, Tc, 0, 0, dp_ent, check=False)
    dp.require_closed()

    comp = dp.compose(dm)
    h = None
    if not comp.is_zero():
        h = find_homotopy(comp)
        if not h:
            raise WitnessError(
                "the two composites to the starred extension differ by "
                "more than a homotopy")
    tot = totalize_three_term(dm, dp, h)

    cu = j_restrict(tot, O)
    cert = find_homotopy(identity_map(cu))
    if not cert:
        raise PerversityError(
            "the generic part of the realized three-term complex is not "
            "acyclic")
    pur = _purify_or_die(SupportedObject(tot, None, None, x0, cert, O),
                         "the realized three-term complex")
    Phi = pur.purified
    wdeg = perverse_degrees(Phi)
    if Phi.cells and wdeg != (0, 0):
        raise PerversityError(
            "the vanishing cycles came out in perverse degrees %r" % (wdeg,))

    nT = len(Tc.cells)
    PPsi = i_push(psi_out.psi, P)
    PPsi2 = i_push(psi_out.psi.twist(2), P)

    h2 = _require_null(xi_out.alpha_plus.compose(xi_out.beta_plus),
                       "the canonical column composite")
    base = {(nT + k, l): dict(t)
            for (k, l), t in xi_out.beta_plus.entries.items()}
    signed = {kl: dict(t) for kl, t in h2.entries.items()}
    can_hat = _glue_signed(PPsi, tot, base, signed, "the canonical column")
    can_push = pur.equivalence.back.compose(can_hat)
    can = ChainMap(psi_out.psi, Phi, 0, 0,
                   {kl: dict(t) for kl, t in can_push.entries.items()},
                   check=False)
    can.require_closed()

    h3 = _require_null(xi_out.beta_minus.compose(xi_out.alpha_minus),
                       "the variation column composite")
    base = {(k, nT + l): dict(t)
            for (k, l), t in xi_out.beta_minus.entries.items()}
    signed = {(k, nT + len(C0.cells) + l): dict(t)
              for (k, l), t in h3.entries.items()}
    var_hat = _glue_signed(tot, PPsi2, base, signed, "the variation column")
    var_push = var_hat.compose(pur.equivalence.fwd)
    var = ChainMap(Phi, psi_out.psi.twist(2), 0, 0,
                   {kl: dict(t) for kl, t in var_push.entries.items()},
                   check=False)
    var.require_closed()

    n_witness = _require_homotopy(var.compose(can), _reify(psi_out.n),
                                  "var after can against the monodromy")

    star_model = _purify_or_die(i_upper_star(F, x0),
                                "the starred restriction of the input"
                                ).purified
    shriek_model = _purify_or_die(i_upper_shriek(F, x0),
                                  "the shrieked restriction of the input"
                                  ).purified
    Cc = cone(can)
    into_c, out_c = cone_maps(can)
    fwd_c, back_c = _identify(Cc, star_model, "the canonical triangle model")
    tri_can = Triangle(can, fwd_c.compose(into_c), out_c.compose(back_c))

    Cv = cocone(var)
    proj_v, inc_v = cocone_maps(var)
    fwd_v, back_v = _identify(shriek_model, Cv, "the variation triangle model")
    tri_var = Triangle(proj_v.compose(fwd_v), var,
                       shift_map(back_v.compose(inc_v), 1))

    return VanCycOutput(Phi, can, var, tri_can, tri_var, star_model,
                        shriek_model, n_witness, tot, psi_out, xi_out,
                        report)


def _eta_setup_total(P):
    O = P.eta_open()
    zset = set(P.f_datum.x0)
    x0 = [s for s in P.order if s in zset]
    return O, x0
