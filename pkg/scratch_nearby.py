"""Smoke checks for the nearby/maximal-extension/vanishing pipelines."""

import time

from monocycle.complexes import (ChainMap, cone, cocone, find_homotopy,
                                 generator, zero_map, zero_object)
from monocycle.functors import forget, match_diagonal, verdier
from monocycle.nearby import (phi, psi, totalize_three_term, xi)
from monocycle.presentation import builtin
from monocycle.recollement import j_shriek
from monocycle.reduction import minimize


def show(F, label):
    C = F.canonical()
    print("  %s over %s flavor %s" % (label, C.P.name, C.flavor))
    for i, cell in enumerate(C.cells):
        print("    cell %d: %r" % (i, cell))
    for kl in sorted(C.delta):
        print("    delta %r: %r" % (kl, C.delta[kl]))
    return C


def tri_nulls(tri, label):
    a = find_homotopy(tri.into.compose(tri.base))
    b = find_homotopy(tri.out.compose(tri.into))
    assert a, "%s: into after base not null" % label
    assert b, "%s: out after into not null" % label


def check_a1_psi():
    t0 = time.time()
    P = builtin("A1_Gm")
    O = P.eta_open()
    F = generator(O.pres, "eqv", "E1")
    out = psi(F, P)
    C = show(out.psi, "A1 psi")
    assert C.cells == [("Ept", 0, -1)], C.cells
    assert not C.delta
    assert out.n.is_zero()
    assert out.nilpotence == 1
    assert out.n_refutation is None
    assert out.exactness.passed
    Psi2, md = out.agreement
    assert md is not None
    tri_nulls(out.tri_star, "a1 tri_star")
    tri_nulls(out.tri_shriek, "a1 tri_shriek")
    print("a1 psi ok (%.1fs)" % (time.time() - t0))
    return P, O, F, out


def check_a1_xi(P, O, F, psi_out):
    t0 = time.time()
    out = xi(F, P, psi_out=psi_out)
    X = show(out.xi, "A1 xi")
    assert X.cells == [("Ept", 0, 1), ("E1", 0, 0), ("Ept", 0, -1)], X.cells
    print("  canonical_exact:", out.canonical_exact,
          "open_exact:", out.open_exact)
    assert out.n_witness
    tri_nulls(out.tri_shriek, "a1 xi tri_shriek")
    tri_nulls(out.tri_star, "a1 xi tri_star")
    VX = minimize(verdier(out.xi))[0]
    assert match_diagonal(VX, out.xi.canonical()) is not None or \
        match_diagonal(VX.canonical(), out.xi.canonical()) is not None
    print("a1 xi ok (%.1fs)" % (time.time() - t0))
    return out


def check_a1_phi():
    t0 = time.time()
    P = builtin("A1_Gm")
    F = generator(P, "con", "E1")
    out = phi(F)
    C = show(out.phi, "A1 phi (intermediate extension)")
    assert out.n_witness
    tri_nulls(out.tri_can, "a1 phi tri_can")
    tri_nulls(out.tri_var, "a1 phi tri_var")
    print("a1 phi ok (%.1fs)" % (time.time() - t0))
    return out


def check_a1_phi_degenerate():
    t0 = time.time()
    P = builtin("A1_Gm")
    O = P.eta_open()
    Fo = forget(generator(O.pres, "eqv", "E1"))
    F2 = minimize(j_shriek(Fo, P))[0]
    out = phi(F2)
    C = show(out.phi, "A1 phi (extension by zero)")
    assert out.n_witness
    tri_nulls(out.tri_can, "a1 phi deg tri_can")
    tri_nulls(out.tri_var, "a1 phi deg tri_var")
    md = match_diagonal(out.phi.canonical(), out.psi_output.psi.canonical())
    print("  phi matches psi:", md is not None)
    print("a1 phi degenerate ok (%.1fs)" % (time.time() - t0))


def check_phi_dual(out):
    t0 = time.time()
    P = builtin("A1_Gm")
    F = generator(P, "con", "E1")
    FD = minimize(verdier(F))[0]
    print("  dual input cells:", FD.canonical().cells)
    outD = phi(FD)
    A = minimize(verdier(out.phi))[0].canonical()
    B = outD.phi.canonical()
    if not A.cells and not B.cells:
        print("  both duals empty: exchanged trivially")
    else:
        assert match_diagonal(A, B) is not None, (A.cells, B.cells)
    print("phi dual ok (%.1fs)" % (time.time() - t0))


def check_a2_psi():
    t0 = time.time()
    P = builtin("A2_product")
    O = P.eta_open()
    F = generator(O.pres, "eqv", "EU")
    out = psi(F, P)
    C = show(out.psi, "A2 psi")
    assert [cell for cell in C.cells] == [
        ("Ept", 0, 0), ("E1", 0, -1), ("E2", 0, -1), ("Ept", 0, -2)], C.cells
    assert out.n_refutation is not None
    assert not out.n.is_zero()
    assert out.nilpotence == 2
    assert out.exactness.passed
    tri_nulls(out.tri_star, "a2 tri_star")
    tri_nulls(out.tri_shriek, "a2 tri_shriek")
    print("a2 psi ok (%.1fs)" % (time.time() - t0))


def check_totalize_degenerate():
    P = builtin("A1_Gm")
    F = generator(P, "con", "E1")
    G = generator(P, "con", "Ept", -1, -1)
    f = ChainMap(F, G, 0, 0,
                 {(0, 0): {(0, 0, (0,), "eps"): P.S.one}}, check=False)
    f.require_closed()
    Z = zero_object(P, "con")
    dm = zero_map(Z, F)
    tot = totalize_three_term(dm, f)
    ref = cocone(f)
    assert tot.cells == ref.cells, (tot.cells, ref.cells)
    sh = cone(f).shift(-1)
    assert sorted(tot.cells) == sorted(sh.cells)
    print("totalize degenerate ok")


def main():
    t0 = time.time()
    check_totalize_degenerate()
    P, O, F, psi_out = check_a1_psi()
    xi_out = check_a1_xi(P, O, F, psi_out)
    phi_out = check_a1_phi()
    check_phi_dual(phi_out)
    check_a1_phi_degenerate()
    check_a2_psi()
    print("ALL NEARBY SMOKE CHECKS PASSED in %.1fs" % (time.time() - t0))


if __name__ == "__main__":
    main()
