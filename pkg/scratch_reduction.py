"""Smoke checks for reduction.py: minimize, peel, decompose, preimages."""

from monocycle.presentation import builtin
from monocycle.scalars import Scalars
from monocycle.complexes import (
    ChainMap, CurvatureError, DggObject, cone, direct_sum, generator,
    hom_space, identity_map, maps_equal_up_to_homotopy, zero_object,
)
from monocycle.functors import mon, mon_map, monodromy
from monocycle.reduction import (
    Decomposition, EmptyError, Equivalence, decompose_single_stratum,
    eliminate_pair, minimize, mon_preimage_map, mon_preimage_object,
    peel_top, _permute, _replace_column,
)


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


def check_minimize_cone_id():
    P = builtin("A1_Gm")
    gmder, conder = build_a1_goldens(P)
    monder1 = mon(gmder)
    for F in (gmder, conder, monder1):
        C = cone(identity_map(F))
        M, tr = minimize(C)
        assert M.cells == [], (F.flavor, M.cells)
        tr.verify()
        R = tr.replay()
        assert R.cells == [] and R.delta == {}
        assert len(tr.moves) == len(F.cells)
        M2, tr2 = minimize(M)
        assert M2.cells == [] and tr2.moves == []
    print("ok minimize: cone(id) collapses for eqv, con, mon")


def check_minimize_keeps_hom():
    P = builtin("A1_Gm")
    gmder, conder = build_a1_goldens(P)
    F = direct_sum(conder, cone(identity_map(conder)))
    M, tr = minimize(F)
    assert M.cells == conder.cells
    tr.verify()
    for (m, n) in ((0, 0), (1, 0), (0, 2)):
        assert hom_space(M, conder, m, n) == hom_space(F, conder, m, n), (m, n)
    print("ok minimize: direct summand survives with hom spaces intact")


def check_minimize_mixed_block():
    P = builtin("point")
    S = P.S
    M0 = DggObject(P, "mon", [("Ept", 1, 0), ("Ept", 0, 0)],
                   {(0, 1): {idk(P, "Ept"): S.one},
                    (1, 0): {(1, 0, (1,), "id0"): S.one}})
    M, tr = minimize(M0)
    assert M.cells == []
    tr.verify()
    print("ok minimize: contractible loop block collapses")


def check_peel():
    P = builtin("A1_Gm")
    _, conder = build_a1_goldens(P)
    top, rest, f = peel_top(conder)
    assert top.cells == [("Ept", 0, -1)]
    assert rest.cells == [("Ept", 0, 1), ("E1", 0, 0)]
    assert f.entries, "connecting map should be nonzero"
    top2, rest2, f2 = peel_top(rest)
    assert top2.cells == [("E1", 0, 0)]
    top3, rest3, f3 = peel_top(rest2)
    assert rest3.cells == [] and f3.entries == {}
    try:
        peel_top(rest3)
        raise AssertionError("peel of the empty object should fail")
    except EmptyError:
        pass
    g = generator(P, "con", "Ept", 2, 5)
    tg, rg, fg = peel_top(g)
    assert tg.cells == g.cells and rg.cells == []
    print("ok peel_top: layer tower of the three-cell object")


def check_decompose_generator():
    P = builtin("point")
    for (c, t) in ((0, 0), (1, 3), (-2, 2)):
        F = mon(generator(P, "con", "Ept", c, t))
        dec = decompose_single_stratum(F)
        assert dec.leaves == [("Ept", c, t)], dec.leaves
        dec.verify()
        assert dec.normal.cells == F.cells and dec.normal.delta == F.delta
    print("ok decompose: a free block is its own leaf")


def check_decompose_zero():
    P = builtin("point")
    dec = decompose_single_stratum(zero_object(P, "mon"))
    assert dec.blocks() == 0
    dec.verify()
    print("ok decompose: empty object, no leaves")


def check_decompose_sum_invariance():
    P = builtin("point")
    S = P.S
    F1 = mon(generator(P, "con", "Ept", 0, 0))
    F2 = mon(generator(P, "con", "Ept", 1, 3))
    F3 = mon(generator(P, "con", "Ept", 2, 2))
    F = direct_sum(direct_sum(F1, F2), F3)
    want = sorted([("Ept", 0, 0), ("Ept", 1, 3), ("Ept", 2, 2)])
    base = decompose_single_stratum(F)
    assert sorted(base.leaves) == want
    base.verify()
    orders = [[2, 3, 0, 1, 4, 5], [4, 5, 2, 3, 0, 1], [1, 0, 3, 2, 5, 4],
              [5, 4, 3, 2, 1, 0], [0, 2, 4, 1, 3, 5]]
    for order in orders:
        G, _ = _permute(F, order)
        dec = decompose_single_stratum(G)
        assert sorted(dec.leaves) == want, (order, dec.leaves)
        dec.equivalence.verify()
    print("ok decompose: leaf multiset survives %d reorderings" % len(orders))


def check_decompose_conjugated():
    P = builtin("point")
    S = P.S
    F1 = mon(generator(P, "con", "Ept", 0, 0))
    F2 = mon(generator(P, "con", "Ept", 2, 2))
    F = direct_sum(F1, F2)
    G, _ = _replace_column(F, 2, {2: {idk(P, "Ept"): S.one},
                                  0: {(0, 0, (1,), "id0"): S.el(3)}})
    G, _ = _replace_column(G, 1, {1: {idk(P, "Ept"): S.neg(S.one)}})
    dec = decompose_single_stratum(G)
    assert sorted(dec.leaves) == [("Ept", 0, 0), ("Ept", 2, 2)], dec.leaves
    dec.verify()
    tr_cur = dec.src
    for mv in dec.moves:
        if mv["kind"] == "cancel":
            tr_cur, _ = eliminate_pair(tr_cur, *mv["pair"])
        elif mv["kind"] == "replace":
            tr_cur, _ = _replace_column(tr_cur, mv["col"], mv["vec"])
        elif mv["kind"] == "swap":
            tr_cur, _ = _permute(tr_cur, mv["order"])
    assert tr_cur.cells == dec.normal.cells and tr_cur.delta == dec.normal.delta
    print("ok decompose: conjugated double block, moves replay")


def mk_branch_object(S):
    """M0 block glued to a free block so that the pivot column shows a
    coefficient of 2 in the upward direction."""
    P = builtin("point", S)
    one = S.one
    cells = [("Ept", 1, 0), ("Ept", 0, 0), ("Ept", 2, 2), ("Ept", 1, 0)]
    delta = {(0, 1): {idk(P, "Ept"): one},
             (1, 0): {(1, 0, (1,), "id0"): one},
             (3, 2): {(0, 0, (1,), "id0"): one},
             (2, 3): {(1, 0, (0,), "id0"): one}}
    M = DggObject(P, "mon", cells, delta)
    G, _ = _replace_column(M, 0, {0: {idk(P, "Ept"): one},
                                  3: {idk(P, "Ept"): S.el(2)}})
    return G


def check_decompose_branches():
    for S, label in ((Scalars("Q"), "Q"), (Scalars("Zloc", 2), "Z_(2)")):
        G = mk_branch_object(S)
        dec = decompose_single_stratum(G)
        assert dec.leaves == [("Ept", 2, 2)], (label, dec.leaves)
        dec.verify()
        kinds = [mv["kind"] for mv in dec.moves]
        if label == "Q":
            assert kinds.index("split") < kinds.index("cancel"), kinds
        else:
            assert kinds.index("cancel") < kinds.index("split"), kinds
        print("ok decompose over %s: leaf (Ept, 2, 2) via %s" % (label, kinds))


def check_preimage_map_roundtrip():
    P = builtin("point")
    S = P.S
    A = generator(P, "con", "Ept", 0, 0)
    B = generator(P, "con", "Ept", 1, 0)
    f0 = ChainMap(A, B, 1, 0, {(0, 0): {idk(P, "Ept"): S.one}})
    f, h = mon_preimage_map(mon_map(f0))
    assert maps_equal_up_to_homotopy(f, f0)
    f2 = ChainMap(A, A, 2, -2, {(0, 0): {(0, 0, (1,), "id0"): S.el(5)}})
    g2, h2 = mon_preimage_map(mon_map(f2))
    assert maps_equal_up_to_homotopy(g2, f2)
    print("ok mon_preimage_map: round trips on generator maps")


def check_preimage_map_monodromy():
    P = builtin("A1_Gm")
    S = P.S
    _, conder = build_a1_goldens(P)
    N = monodromy(mon(conder))
    f, h = mon_preimage_map(N, src_pre=conder, dst_pre=conder)
    want = ChainMap(conder, conder, 0, 2, {(2, 0): {(0, 0, (0,), "id0"): S.one}})
    assert maps_equal_up_to_homotopy(f, want)
    got = monodromy(conder)
    assert maps_equal_up_to_homotopy(f, got)
    print("ok mon_preimage_map: loop monodromy descends to minus the "
          "exterior differential")


def check_preimage_object_single():
    P = builtin("point")
    S = P.S
    A = generator(P, "con", "Ept", 0, 0)
    G, w = mon_preimage_object(mon(A))
    w.verify()
    assert G.cells == A.cells
    B = generator(P, "con", "Ept", -2, -2)
    f0 = ChainMap(A, B, 0, 0, {(0, 0): {(0, 0, (1,), "id0"): S.one}})
    C = cone(f0)
    F = mon(C)
    G2, w2 = mon_preimage_object(F)
    w2.verify()
    assert w2.dst.cells == F.cells
    assert sorted(G2.cells) == sorted(C.cells), (G2.cells, C.cells)
    M2 = mon(G2)
    assert w2.src.cells == M2.cells and w2.src.delta == M2.delta
    G3, w3 = mon_preimage_object(mon(G2))
    w3.verify()
    assert sorted(G3.cells) == sorted(G2.cells)
    print("ok mon_preimage_object: generator and two-cell cone round trip")


def check_preimage_object_branchy():
    for S in (Scalars("Q"), Scalars("Zloc", 2)):
        G = mk_branch_object(S)
        A, w = mon_preimage_object(G)
        w.verify()
        assert len(A.cells) == 1 and A.cells[0] == ("Ept", 2, 2), A.cells
    print("ok mon_preimage_object: mixed block reduces to one generator")


def main():
    check_minimize_cone_id()
    check_minimize_keeps_hom()
    check_minimize_mixed_block()
    check_peel()
    check_decompose_generator()
    check_decompose_zero()
    check_decompose_sum_invariance()
    check_decompose_conjugated()
    check_decompose_branches()
    check_preimage_map_roundtrip()
    check_preimage_map_monodromy()
    check_preimage_object_single()
    check_preimage_object_branchy()
    print("ALL REDUCTION SMOKE CHECKS PASSED")


if __name__ == "__main__":
    main()
