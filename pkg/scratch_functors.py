import sys
sys.path.insert(0, "src")

from monocycle.presentation import builtin
from monocycle.complexes import (
    DggObject, ChainMap, generator, identity_map, find_homotopy, Homotopy,
    Refutation, hom_space, cone, maps_equal_up_to_homotopy, object_str,
)
from monocycle import functors as FU

P = builtin("A1_Gm")

# golden objects
def gm_der():
    cells = [("E1", 0, 0), ("Ept", 0, -1)]
    one = P.S.one
    delta = {(1, 0): {(0, 0, (0,), "eps"): one}}
    return DggObject(P, "eqv", cells, delta)

def con_der():
    cells = [("Ept", 0, 1), ("E1", 0, 0), ("Ept", 0, -1)]
    S = P.S
    delta = {
        (1, 0): {(0, 0, (0,), "eta"): S.one},
        (2, 1): {(0, 0, (0,), "eps"): S.one},
        (2, 0): {(0, 1, (0,), "id0"): S.neg(S.one)},
    }
    return DggObject(P, "con", cells, delta)

def mon_der1():
    cells = [("E1", 0, 0), ("Ept", 0, -1)]
    S = P.S
    delta = {
        (1, 0): {(0, 0, (0,), "eps"): S.one},
        (0, 1): {(1, 0, (0,), "eta"): S.one},
    }
    return DggObject(P, "mon", cells, delta)

G = gm_der(); C = con_der(); M1 = mon_der1()

# 1. mon(con-der) = mon-der2
M2 = FU.mon(C)
print("mon(con-der) cells:", M2.cells)
exp_cells = [("Ept", 0, 1), ("E1", 0, 0), ("Ept", 0, -1),
             ("Ept", -1, -1), ("E1", -1, -2), ("Ept", -1, -3)]
assert M2.cells == exp_cells, M2.cells
S = P.S
exp_delta = {
    (1, 0): {(0, 0, (0,), "eta"): S.one},
    (2, 1): {(0, 0, (0,), "eps"): S.one},
    (4, 3): {(0, 0, (0,), "eta"): S.neg(S.one)},
    (5, 4): {(0, 0, (0,), "eps"): S.neg(S.one)},
    (2, 3): {(0, 0, (0,), "id0"): S.neg(S.one)},
    (0, 3): {(1, 0, (0,), "id0"): S.one},
    (1, 4): {(1, 0, (0,), "id1"): S.one},
    (2, 5): {(1, 0, (0,), "id0"): S.one},
    (3, 0): {(0, 0, (1,), "id0"): S.one},
    (4, 1): {(0, 0, (1,), "id1"): S.one},
    (5, 2): {(0, 0, (1,), "id0"): S.one},
}
assert M2.delta == exp_delta, (M2.delta, exp_delta)
print("  mon-der2 entry-for-entry OK")

# 2. verdier on the goldens
DG = FU.verdier(G)
print("D(gm-der):", object_str(DG))
assert FU.verdier(DG) == G
DC = FU.verdier(C)
assert FU.verdier(DC) == C
DM = FU.verdier(M1)
assert FU.verdier(DM) == M1
print("  DD = id on all three goldens")
# D(gm-der): cells (E1,0,0)* -> (E1,0,0), (Ept,0,1); entry eta at (0,1)
assert DG.cells == [("E1", 0, 0), ("Ept", 0, 1)]
assert DG.delta == {(0, 1): {(0, 0, (0,), "eta"): S.one}}
print("  D(gm-der) is the eta-shaped two-cell object")

# 3. coi / inv
CM = FU.coi(M1)
assert CM.flavor == "eqv"
assert CM.delta == {(1, 0): {(0, 0, (0,), "eps"): S.one}}
w = FU.inv_coi_witness(M1)
print("  inv = coi<2>[-1] witnessed:", w)

# 4. monodromy
N = FU.monodromy(C)
assert N.entries == {(2, 0): {(0, 0, (0,), "id0"): S.one}}
NM = FU.monodromy(FU.mon(C))
h = find_homotopy(FU.mon_map(N), NM)
assert isinstance(h, Homotopy), h
h.verify()
print("  mon(-d1) ~ r id via homotopy with entries:", h.entries)

# N on mon-der1 is essential
r1 = find_homotopy(FU.monodromy(M1))
assert isinstance(r1, Refutation), r1
print("  N on mon-der1 refuted null-homotopic:", r1)

# 5. coi adjunction both ways
wit = FU.coi_adjunction(M1)
print("  adjunction witness (mon input):", wit)
wit2 = FU.coi_adjunction(G)
print("  adjunction witness (eqv input):", wit2)

# 6. mon shift/cone witnesses
ws = FU.mon_shift_witness(C)
print("  mon shift witness entries:", ws.maps["iso"].entries)
eps_map = ChainMap(generator(P, "con", "E1"),
                   generator(P, "con", "Ept", -1, -1), 0, 0,
                   {(0, 0): {(0, 0, (0,), "eps"): S.one}})
wc = FU.mon_cone_witness(eps_map)
print("  mon cone witness OK")
# the paper's square: witness o mon(into) == into' and out' o witness == monshift o mon(out)
from monocycle.complexes import cone_maps
into, out = cone_maps(eps_map)
minto, mout = FU.mon_map(into), FU.mon_map(out)
into2, out2 = cone_maps(FU.mon_map(eps_map))
wmap = wc.maps["iso"]
assert wmap.compose(minto) == into2
lhs = out2.compose(wmap)
F1 = eps_map.src
wsh = FU.mon_shift_witness(F1)
rhs = wsh.maps["iso"].compose(mout)
assert lhs == rhs, (lhs.entries, rhs.entries)
print("  mon-tri square commutes exactly")

# 7. mon/dual q-map
wq = FU.mon_dual_witness(C)
print("  q-map entries:", wq.maps["iso"].entries)

# 8. jordan over A1_minus_0
Q = builtin("A1_minus_0")
kk = generator(Q, "eqv", "E1")
J = FU.jordan(kk)
for n, want in [(0, 1), (2, 1), (4, 1), (-2, 0), (1, 0), (3, 0)]:
    rk, tor = hom_space(J, J, 0, n)
    assert (rk, tor) == (want, []), (n, rk, tor)
print("  End(J(kbar)) has the divided-power ranks")
# spec's mon-der1 ranks over A1_Gm
for n, want in [(0, 1), (2, 1), (4, 1), (6, 1), (8, 1), (10, 1),
                (-2, 0), (-4, 0), (1, 0), (3, 0)]:
    rk, tor = hom_space(M1, M1, 0, n)
    assert (rk, tor) == (want, []), (n, rk, tor)
print("  End(mon-der1) matches the R-dual ranks")

# jordan_n
J1 = FU.jordan_n(kk, 1)
assert J1 == FU.mon(FU.forget(kk)), (J1.cells, J1.delta)
print("  J_1 = mon(forget) on the nose")
assert FU.coi(J) == kk
tri = FU.jordan_tower(kk, 1, 1)
comp = tri.into.compose(tri.base) if hasattr(tri, "into") else None
f, g, h = tri.base, tri.into, tri.out
gf = g.compose(f)
assert maps_equal_up_to_homotopy(gf, ChainMap(gf.src, gf.dst, 0, 0, {}, check=False))
print("  jordan tower maps closed; composite null-homotopic")
# J_n duality: J_n(DF) = (D J_n F)<2-2n>
for n in (1, 2, 3):
    A = FU.jordan_n(FU.verdier(kk), n)
    B = FU.verdier(FU.jordan_n(kk, n)).twist(2 - 2 * n)
    pair = FU.match_diagonal(A, B)
    assert pair is not None, n
print("  jordan_n duality comparison witnessed")
A = FU.jordan(FU.verdier(kk))
B = FU.verdier(FU.jordan(kk)).twist(2).shift(-1)
assert FU.match_diagonal(A, B) is not None
print("  jordan duality comparison witnessed")

# 9. collapse
kP = FU.collapse_presentation(P)
print("  collapsed presentation:", kP.name, kP.ring.gens,
      [ (st.sid, st.hgens) for st in kP.strata ])
probs = kP.validate()
assert probs == [], probs
KC = FU.collapse_nonequivariant(C)
assert KC.flavor == "eqv"
assert KC.cells == C.cells
assert KC.delta == {(1, 0): {(0, 0, (), "eta"): S.one},
                    (2, 1): {(0, 0, (), "eps"): S.one}}, KC.delta
print("  collapse(con-der) drops the exterior entry")
M1C = FU.collapse_nonequivariant(FU.coi(M1).shift(0) if False else FU.forget(FU.coi(M1)))
print("  collapse of coi image fine:", M1C.delta)

A2 = builtin("A2_product")
kA2 = FU.collapse_presentation(A2)
probs = kA2.validate()
assert probs == [], probs
print("  collapsed A2 validates")

# 10. mon full faithfulness ranks
for (m, n) in [(0, 0), (1, -2), (0, 2), (1, 0), (2, -2)]:
    a = hom_space(C, C, m, n)
    b = hom_space(FU.mon(C), FU.mon(C), m, n)
    assert a == b, (m, n, a, b)
eg = generator(P, "con", "E1")
ep = generator(P, "con", "Ept")
for (m, n) in [(0, 0), (1, -1), (0, -2), (1, 1), (2, 0)]:
    a = hom_space(eg, ep, m, n)
    b = hom_space(FU.mon(eg), FU.mon(ep), m, n)
    assert a == b, (m, n, a, b)
print("  mon faithful on sampled hom ranks")

# 11. forget commutes with cones
fe = ChainMap(gm_der(), gm_der(), 0, 0,
              {(0, 0): {(0, 0, (0,), "id1"): S.one},
               (1, 1): {(0, 0, (0,), "id0"): S.one}})
assert FU.forget(cone(fe)) == cone(ChainMap(FU.forget(fe.src), FU.forget(fe.dst),
                                            0, 0, fe.entries))
print("  forget commutes with cone")

print("ALL FUNCTOR SMOKE CHECKS PASSED")
