"""Smoke checks for recollement.py: restriction, extension, supported parts."""

from monocycle.presentation import builtin
from monocycle.scalars import Scalars
from monocycle.complexes import (
    ChainMap, DggObject, cone, find_homotopy, generator, hom_space,
    identity_map, zero_object,
)
from monocycle.functors import mon, verdier
from monocycle.reduction import minimize, mon_preimage_object
from monocycle import recollement as rec


def idk(P, obj, a=0):
    return (a, 0, (0,) * P.ring.n, P.identity[obj])


def build_a1_goldens(P):
    S = P.S
    one = S.one
    gmder = DggObject(P, "eqv", [("E1", 0, 0), ("Ept", 0, -1)],
                      {(1, 0): {(0, 0, (0,), "eps"): one}})
    conder = DggObject(P, "con",
                       [("Ept", 0, 1), ("E1", 0, 0), ("Ept", 0, -1)],
                       {(1, 0): {(0, 0, (0,), "eta"): one},
                        (2, 1): {(0, 0, (0,), "eps"): one},
                        (2, 0): {(0, 1, (0,), "id0"): S.neg(one)}})
    return gmder, conder


def same_object(F, G):
    FC = F.canonical()
    GC = G.canonical()
    return FC.cells == GC.cells and FC.delta == GC.delta


def check_restrict_goldens():
    P = builtin("A1_Gm")
    OX1 = P.open_by_name("X1")
    gmder, conder = build_a1_goldens(P)
    R = rec.j_restrict(gmder, OX1)
    assert R.cells == [("E1", 0, 0)]
    assert R.delta == {}
    Rc = rec.j_restrict(conder, OX1)
    assert Rc.cells == [("E1", 0, 0)]
    assert Rc.delta == {}
    M = mon(conder)
    RM = rec.j_restrict(M, OX1)
    MR = mon(Rc)
    assert RM.cells == MR.cells and RM.delta == MR.delta
    print("restrict goldens ok")


def check_extension_shape():
    P = builtin("A1_Gm")
    OX1 = P.open_by_name("X1")
    S = P.S
    FU = generator(OX1.pres, "eqv", "E1")
    G = rec.extend_over_closed_stratum(FU, P, OX1)
    assert G.cells == [("E1", 0, 0), ("Ept", 0, 1)]
    assert G.delta == {(0, 1): {(0, 0, (0,), "eta"): S.one}}
    back = rec.j_restrict(G, OX1)
    assert back.cells == FU.cells and back.delta == FU.delta
    print("extension shape ok")


def check_shriek_golden():
    P = builtin("A1_Gm")
    OX1 = P.open_by_name("X1")
    gmder, conder = build_a1_goldens(P)
    FU = generator(OX1.pres, "eqv", "E1")
    J = rec.j_shriek(FU, P)
    RJ = rec.j_restrict(J, OX1)
    assert RJ.cells == FU.cells and RJ.delta == FU.delta
    MJ, _ = minimize(J)
    assert same_object(MJ, gmder)
    Js = rec.j_star(FU, P)
    MS, _ = minimize(Js)
    assert same_object(MS, verdier(gmder))
    s2s = rec.shriek_to_star(FU, P)
    s2s.require_closed()
    assert s2s.src.cells == J.cells and s2s.dst.cells == Js.cells
    print("extension by zero goldens ok")


def check_shriek_con_mon():
    P = builtin("A1_Gm")
    OX1 = P.open_by_name("X1")
    FU = generator(OX1.pres, "con", "E1")
    J = rec.j_shriek(FU, P)
    MJ, _ = minimize(J)
    assert sorted(MJ.cells) == [("E1", 0, 0), ("Ept", 0, -1)]
    MU = mon(FU)
    JM = rec.j_shriek(MU, P)
    RJ = rec.j_restrict(JM, OX1)
    assert RJ.cells == MU.cells and RJ.delta == MU.delta
    MJM, _ = minimize(JM)
    MMJ = mon(MJ)
    for m in (-1, 0, 1):
        for n in (-2, -1, 0, 1, 2):
            assert hom_space(MJM, MJM, m, n) == hom_space(MMJ, MMJ, m, n)
    print("con and mon extension ok")


def check_push_and_supported():
    P = builtin("A1_Gm")
    OX1 = P.open_by_name("X1")
    Ppt = P.closed_sub(["pt"])
    Gz = generator(Ppt, "eqv", "Ept", 1, 2)
    C = rec.i_push(Gz, P)
    assert rec.j_restrict(C, OX1).cells == []
    sky = generator(P, "eqv", "Ept", 1, 2)
    sup = rec.i_upper_star(sky, ["pt"])
    assert sup.verify()
    pur = rec.support_purify(sup)
    assert pur.purified is not None
    assert same_object(pur.purified, Gz)
    pur.equivalence.verify()
    gmder, conder = build_a1_goldens(P)
    sup2 = rec.i_upper_star(gmder, ["pt"])
    assert sup2.verify()
    pur2 = rec.support_purify(sup2)
    assert pur2.purified is not None and pur2.purified.cells == []
    sup3 = rec.i_upper_star(conder, ["pt"])
    assert sup3.verify()
    pur3 = rec.support_purify(sup3)
    assert pur3.purified is not None
    for m in (-1, 0, 1, 2):
        for n in (-2, 0, 2):
            assert hom_space(sup3.plus, C, m, n) == (0, [])
    sup4 = rec.i_upper_shriek(conder, ["pt"])
    assert sup4.verify()
    whole = rec.i_upper_star(conder, ["pt", "X1"])
    assert whole.obj.cells == conder.cells and whole.obj.delta == conder.delta
    try:
        rec.i_upper_star(conder, ["X1"])
        raise AssertionError("open union accepted as closed")
    except rec.ScopeError:
        pass
    print("pushforward and supported parts ok")


def check_counit_mon():
    P = builtin("A1_Gm")
    _, conder = build_a1_goldens(P)
    M = mon(conder)
    sup = rec.i_upper_star(M, ["pt"])
    assert sup.verify()
    pur = rec.support_purify(sup)
    assert pur.purified is not None
    print("mon supported part ok")


def check_preimage_zero_fiber():
    P2 = builtin("A2_product")
    PZ = P2.closed_sub(["pt", "X1", "X2"])
    S = PZ.S
    zeros = (0, 0)
    for con0 in (generator(PZ, "con", "E1", 0, 0),
                 generator(PZ, "con", "Ept", 1, 2),
                 generator(PZ, "con", "E2", -1, 1)):
        F = mon(con0)
        A, w = mon_preimage_object(F)
        w.verify()
        MA = mon(A)
        assert w.src.cells == MA.cells and w.src.delta == MA.delta
        assert w.dst.cells == F.cells and w.dst.delta == F.delta
        MAm, _ = minimize(A)
        assert same_object(MAm, con0)
    f = ChainMap(generator(PZ, "con", "E1", 0, 0),
                 generator(PZ, "con", "Ept", -1, -1), 0, 0,
                 {(0, 0): {(0, 0, zeros, "eps1"): S.one}})
    f.require_closed()
    C3 = cone(f)
    F3 = mon(C3)
    A3, w3 = mon_preimage_object(F3)
    w3.verify()
    M3, _ = minimize(A3)
    for m in (-1, 0, 1):
        for n in (-2, -1, 0, 1, 2):
            assert hom_space(M3, M3, m, n) == hom_space(C3, C3, m, n)
    print("zero fiber preimages ok")


def main():
    check_restrict_goldens()
    check_extension_shape()
    check_shriek_golden()
    check_shriek_con_mon()
    check_push_and_supported()
    check_counit_mon()
    check_preimage_zero_fiber()
    print("ALL RECOLLEMENT SMOKE CHECKS PASSED")


if __name__ == "__main__":
    main()
