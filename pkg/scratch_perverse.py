import time

from monocycle.complexes import (DggObject, FlavorError, generator, hom_space,
                                 zero_object)
from monocycle.functors import forget, verdier
from monocycle.perverse import (PervGenerators, check_j_exactness,
                                heart_generators, is_perverse, perverse_degrees,
                                perverse_ge, perverse_le, stratum_pullback,
                                stratum_windows)
from monocycle.presentation import builtin
from monocycle.recollement import j_shriek, j_star, j_restrict
from monocycle.scalars import Scalars


def build_a1(S):
    return builtin("A1_Gm", S)


def build_a2(S):
    return builtin("A2_product", S)


def gmder(P):
    return DggObject(P, "eqv",
                     [("E1", 0, 0), ("Ept", 0, -1)],
                     {(1, 0): {(0, 0, (0,), "eps"): 1}})


def conder(P):
    return DggObject(P, "con",
                     [("Ept", 0, 1), ("E1", 0, 0), ("Ept", 0, -1)],
                     {(1, 0): {(0, 0, (0,), "eta"): 1},
                      (2, 1): {(0, 0, (0,), "eps"): 1},
                      (2, 0): {(0, 1, (0,), "id0"): -1}})


def check_heart_members():
    for kind, p in (("F", 5), ("Zloc", 3)):
        S = Scalars(kind, p)
        P = build_a1(S)
        for flavor in ("eqv", "con"):
            for obj in ("E1", "Ept"):
                G = generator(P, flavor, obj)
                assert perverse_ge(G, 0), (kind, flavor, obj)
                assert not perverse_ge(G, 1), (kind, flavor, obj)
                assert perverse_le(G, 0), (kind, flavor, obj)
                assert not perverse_le(G, -1), (kind, flavor, obj)
                assert perverse_degrees(G) == (0, 0), (kind, flavor, obj)
                assert perverse_degrees(G.twist(4)) == (0, 0)
                sh = G.shift(1)
                assert perverse_ge(sh, 0) == perverse_ge(G, 1)
                assert perverse_ge(sh, -1)
                assert perverse_degrees(sh) == (-1, -1)
        assert perverse_degrees(zero_object(P, "eqv")) is None
    print("heart members ok")


def check_flavor_guard():
    S = Scalars("F", 7)
    P = build_a1(S)
    G = generator(P, "mon", "E1")
    for fn in (lambda: perverse_ge(G, 0), lambda: perverse_le(G, 0),
               lambda: perverse_degrees(G)):
        try:
            fn()
        except FlavorError:
            pass
        else:
            raise AssertionError("mon flavor slipped through")
    print("flavor guard ok")


def check_goldens_a1():
    S = Scalars("F", 5)
    P = build_a1(S)
    g = gmder(P)
    assert perverse_degrees(g) == (0, 0), perverse_degrees(g)
    c = conder(P)
    assert perverse_degrees(c) == (0, 0), perverse_degrees(c)
    assert is_perverse(forget(g))
    w = stratum_windows(g)
    print("  gmder stratum windows:", w)
    print("a1 goldens ok")


def check_j_exactness_reports():
    for name, builder in (("A1_Gm", build_a1), ("A2_product", build_a2)):
        for kind, p in (("F", 5), ("Zloc", 3)):
            S = Scalars(kind, p)
            P = builder(S)
            t0 = time.time()
            rep = check_j_exactness(P)
            dt = time.time() - t0
            for line in rep.lines():
                print("  " + line)
            assert rep.passed, (name, kind)
            print("  %s/%s in %.1fs" % (name, kind, dt))
    print("j-exactness ok")


def check_extension_perversity():
    S = Scalars("F", 5)
    P = build_a1(S)
    O = P.eta_open()
    G1 = generator(O.pres, "eqv", "E1")
    js = j_star(G1, P)
    assert perverse_ge(js, 0)
    assert perverse_degrees(js) == (0, 0)
    jb = j_shriek(G1, P)
    assert perverse_degrees(jb) == (0, 0)
    print("extension perversity ok")


def check_a2_generators():
    S = Scalars("F", 5)
    P = build_a2(S)
    for obj in ("EU", "E1", "E2", "Ept"):
        G = generator(P, "eqv", obj)
        assert perverse_degrees(G) == (0, 0), (obj, perverse_degrees(G))
    w = stratum_windows(generator(P, "eqv", "E1"))
    print("  E1 stratum windows:", w)
    print("a2 generators ok")


def check_skips():
    S = Scalars("F", 5)
    P = build_a1(S)
    O = P.eta_open()
    bad = generator(O.pres, "eqv", "E1").shift(1)
    rep = check_j_exactness(P, inputs=[("shifted", bad)])
    assert not rep.rows[0]["perverse"]
    assert not rep.passed
    print("skip row ok")


def check_ff_ranks():
    S = Scalars("F", 5)
    P = build_a1(S)
    F = gmder(P)
    G = generator(P, "eqv", "E1")
    for n in range(-3, 4):
        a = hom_space(F, G, 0, n)
        b = hom_space(forget(F), forget(G), 0, n)
        assert a == b, (n, a, b)
        a = hom_space(G, F, 0, n)
        b = hom_space(forget(G), forget(F), 0, n)
        assert a == b, (n, a, b)
    print("forgetful rank agreement ok")


def check_generator_container():
    S = Scalars("Zloc", 3)
    P = build_a2(S)
    pg = PervGenerators(P, "eqv")
    assert sorted(pg.families) == sorted(P.order)
    for sid, fam in pg.families.items():
        assert len(fam) == 2
        for G in fam:
            assert len(G.P.strata) == 1
    assert len(pg.all_objects()) == 8
    print("generator container ok")


def main():
    t0 = time.time()
    check_heart_members()
    check_flavor_guard()
    check_goldens_a1()
    check_extension_perversity()
    check_a2_generators()
    check_skips()
    check_ff_ranks()
    check_generator_container()
    check_j_exactness_reports()
    print("ALL PERVERSE SMOKE CHECKS PASSED in %.1fs" % (time.time() - t0))


if __name__ == "__main__":
    main()
