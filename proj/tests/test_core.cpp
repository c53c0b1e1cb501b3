#include "doctest.h"

#include "drw/block.hpp"
#include "drw/galois_ring.hpp"

#include <random>

using namespace drw;

namespace {

FieldElt random_field(int p, int r, std::mt19937& rng) {
    std::uniform_int_distribution<int> d(0, p - 1);
    FieldElt x = FieldElt::zero(p, r);
    for (auto& c : x.c) c = d(rng);
    return x;
}

WittScalar random_witt(int p, int r, int m, std::mt19937& rng) {
    WittScalar w = WittScalar::zero(p, r, m);
    for (auto& a : w.a) a = random_field(p, r, rng);
    return w;
}

std::vector<Block> sample_blocks(int p, int r) {
    return {make_unit_w(p, r),        make_residue_k(p, r),     make_dalphap(p, r),
            make_domino(p, r, -2),    make_domino(p, r, -1),    make_domino(p, r, 0),
            make_domino(p, r, 2),     make_dieudonne(p, r, 1, 1), make_dieudonne(p, r, 2, 1),
            make_dieudonne(p, r, 1, 2)};
}

// H tensored down to coefficients mod p^ml
TGM reduce_coefficients(const TGM& H, int ml) {
    TGM out = H;
    out.m = ml;
    const Zpm R(H.p, ml);
    for (auto& pc : out.pieces) {
        for (auto& o : pc.mod.orders) o = std::min(o, ml);
        pc.F.mat = mat_reduce(pc.F.mat, R);
        pc.V.mat = mat_reduce(pc.V.mat, R);
        pc.D.mat = mat_reduce(pc.D.mat, R);
        if (pc.T.rows) pc.T = mat_reduce(pc.T, R);
    }
    return out;
}

bool has_identity(const std::vector<Violation>& vs, const std::string& what) {
    for (const auto& v : vs)
        if (v.identity == what) return true;
    return false;
}

}  // namespace

TEST_CASE("Galois ring matches Witt vectors") {
    std::mt19937 rng(7);
    for (auto [p, r, m] : {std::tuple{2, 2, 3}, {3, 2, 2}, {2, 3, 2}, {5, 2, 2}}) {
        GaloisRing gr(p, r, m);
        CHECK(mat_mul(gr.sigma_matrix(), gr.sigma_inv_matrix(), gr.ring()) == Mat::identity(r));
        for (int it = 0; it < 60; ++it) {
            auto a = random_witt(p, r, m, rng), b = random_witt(p, r, m, rng);
            auto A = gr.from_witt(a), B = gr.from_witt(b);
            CHECK(gr.from_witt(witt_add(a, b)) == gr.add(A, B));
            CHECK(gr.from_witt(witt_mul(a, b)) == gr.mul(A, B));
            CHECK(gr.from_witt(frobenius(a)) == gr.sigma(A));
            CHECK(gr.sigma_inv(gr.sigma(A)) == A);
            CHECK(gr.residue(A) == a.a[0]);
        }
        auto w = random_field(p, r, rng);
        auto tw = gr.teichmuller(w);
        CHECK(gr.from_witt(teichmuller(w, m)) == tw);
    }
}

TEST_CASE("truncation sizes") {
    TGM u = truncate(make_domino(2, 1, 0), 1, 3);
    CHECK(u.klength(0) == 3);
    CHECK(u.klength(1) == 3);

    // Fil^1 of W is p W, so W/Fil^1 is k whatever m is
    TGM w = truncate(make_unit_w(3), 2, 1);
    CHECK(w.length(0) == 1);
    CHECK(truncate(make_unit_w(3), 2, 2).length(0) == 2);
    CHECK(truncate(make_unit_w(3), 2, 5).length(0) == 2);

    for (int m = 1; m <= 3; ++m)
        for (int n = 1; n <= 3; ++n) {
            TGM a = truncate(make_dalphap(2), m, n);
            CHECK(a.lo == 0);
            CHECK(a.hi() == 0);
            CHECK(a.length(0) == 1);
            CHECK(a.at(0).F.mat.is_zero());
            CHECK(a.at(0).V.mat.is_zero());
        }

    // r multiplies lengths, not k-dimensions
    TGM u3 = truncate(make_domino(2, 3, 0), 1, 3);
    CHECK(u3.length(0) == 9);
    CHECK(u3.klength(0) == 3);
}

TEST_CASE("E_{1/2} Frobenius matrix") {
    TGM e = truncate(make_dieudonne(3, 1, 1, 1), 4, 8);
    REQUIRE(e.gens(0) == 2);
    Mat F(2, 2);
    F(0, 1) = 3;
    F(1, 0) = 1;
    CHECK(e.at(0).F.mat == F);
    CHECK(make_dieudonne(3, 1, 1, 1).name() == "E_{1/2}");
    CHECK(make_dieudonne(3, 1, 1, 1).free_rank == 2);
    CHECK_THROWS_AS(make_dieudonne(3, 1, 2, 2), BlockError);
}

TEST_CASE("block metadata") {
    Block u = make_domino(2, 1, 0);
    REQUIRE(u.domino);
    CHECK(u.domino->at(0) == 1);
    CHECK(u.coeur == "0");
    Block e = make_dieudonne(2, 1, 2, 1);
    REQUIRE(e.slopes.size() == 1);
    CHECK(e.slopes[0].slope == Rational(1, 3));
    CHECK(e.slopes[0].mult == 3);
    CHECK(make_unit_w(2).slopes[0].slope == Rational(0));
    CHECK(make_dalphap(2).coeur_torsion);
}

TEST_CASE("constructors satisfy the relations") {
    for (int r = 1; r <= 3; ++r)
        for (int p : {2, 3}) {
            if (r == 3 && p == 3) continue;
            for (const auto& b : sample_blocks(p, r))
                for (int m = 1; m <= 3; ++m)
                    for (int n = 1; n <= 4; ++n) {
                        auto vs = check_relations(truncate(b, m, n));
                        INFO(b.name(), " p=", p, " r=", r, " m=", m, " n=", n);
                        CHECK(vs.empty());
                    }
        }
}

TEST_CASE("mutations are caught") {
    SUBCASE("one d column of U_0 zeroed") {
        TGM u = truncate(make_domino(2, 1, 0), 1, 4);
        CHECK(check_relations(u).empty());
        // d(V^2) = dV^2 is lost, but F d V (V^1) = F dV^2 still gives dV^1
        u.at(0).D.mat(2, 2) = 0;
        auto vs = check_relations(u);
        CHECK_FALSE(vs.empty());
        for (const auto& v : vs) CHECK(v.identity == "FdV = d");
    }
    SUBCASE("all of d zeroed is still a module") {
        TGM u = truncate(make_domino(2, 1, 0), 1, 4);
        u.at(0).D.mat = Mat(u.gens(1), u.gens(0));
        CHECK(check_relations(u).empty());
    }
    SUBCASE("E_{1/2} with F and V swapped") {
        for (int r = 1; r <= 3; ++r) {
            TGM e = truncate(make_dieudonne(2, r, 1, 1), 3, 6);
            std::swap(e.at(0).F.mat, e.at(0).V.mat);
            auto vs = check_relations(e);
            INFO("r=", r);
            CHECK_FALSE(has_identity(vs, "FV = p"));
            CHECK_FALSE(has_identity(vs, "VF = p"));
            CHECK(has_identity(vs, "F a = sigma(a) F") == (r >= 3));
        }
    }
    SUBCASE("FV = p broken") {
        TGM w = truncate(make_unit_w(3), 3, 3);
        w.at(0).F.mat(0, 0) = 2;
        CHECK(has_identity(check_relations(w), "FV = p"));
    }
}

TEST_CASE("transitions commute and are onto") {
    for (int r : {1, 2})
        for (const auto& b : sample_blocks(2, r))
            for (int m = 1; m <= 2; ++m)
                for (int n = 1; n <= 3; ++n)
                    for (auto [dm, dn] : {std::pair{0, 1}, {1, 0}, {1, 1}}) {
                        TGM H = truncate(b, m + dm, n + dn), L = truncate(b, m, n);
                        GradedMats t = transition(b, m + dm, n + dn, m, n);
                        INFO(b.name(), " r=", r, " m=", m, " n=", n, " step=", dm, dn);
                        std::string why;
                        CHECK_MESSAGE(is_morphism(t, reduce_coefficients(H, m), L, &why), why);
                        const Zpm R(2, m);
                        for (int g = L.lo; g <= L.hi(); ++g) {
                            if (!L.gens(g)) continue;
                            REQUIRE(t.count(g));
                            CHECK(sub_length(L.at(g).mod, t.at(g), R) == L.length(g));
                        }
                    }
}

TEST_CASE("standard filtration") {
    TGM u = truncate(make_domino(2, 1, 0), 1, 4);
    const Zpm R(2, 1);
    CHECK(sub_length(u.at(0).mod, fil(u, 0).at(0), R) == 4);
    CHECK(sub_length(u.at(0).mod, fil(u, 1).at(0), R) == 3);
    // V kills grading 1 mod p, so Fil^1 there is dV^1, dV^2, dV^3
    CHECK(sub_length(u.at(1).mod, fil(u, 1).at(1), R) == 3);
    CHECK(sub_length(u.at(1).mod, fil(u, 2).at(1), R) == 2);
    int prev = 1 << 20;
    for (int s = 0; s <= 4; ++s) {
        int len = sub_length(u.at(0).mod, fil(u, s).at(0), R);
        CHECK(len <= prev);
        prev = len;
    }
    TGM a = truncate(make_dalphap(2), 2, 3);
    CHECK(sub_length(a.at(0).mod, fil(a, 1).at(0), Zpm(2, 2)) == 0);
    CHECK_THROWS(fil(a, 4));
}

TEST_CASE("custom finite-length block") {
    // W_2 with F = 1, V = p, d = 0
    CustomModule c;
    c.gens = {{0, 2, "x"}};
    c.F = {{0, 0, 1}};
    c.V = {{0, 0, 2}};
    Block b = make_custom(2, 1, c);
    TGM t = truncate(b, 3, 1);
    CHECK(t.length(0) == 1);
    TGM t2 = truncate(b, 3, 4);
    CHECK(t2.length(0) == 2);
    CHECK(check_relations(t2).empty());
    GradedMats tr = transition(b, 3, 4, 2, 2);
    CHECK(is_morphism(tr, reduce_coefficients(t2, 2), truncate(b, 2, 2)));

    CustomModule bad = c;
    bad.D = {{0, 0, 1}};
    CHECK_THROWS_AS(truncate(make_custom(2, 1, bad), 2, 2), BlockError);
}

TEST_CASE("formal objects") {
    FormalObject x = direct_sum(single(make_unit_w(2)), single(make_domino(2, 1, -1), 1, -1));
    FormalObject y = shift(shift(x, 1, 0), -1, 0);
    REQUIRE(y.items.size() == x.items.size());
    for (std::size_t k = 0; k < x.items.size(); ++k) {
        CHECK(y.items[k].gshift == x.items[k].gshift);
        CHECK(y.items[k].cshift == x.items[k].cshift);
    }
    CHECK(describe(direct_sum(x, FormalObject{})) == describe(x));
    CHECK(describe(x) == "W + U_-1(1)[-1]");
    CHECK_THROWS(direct_sum(x, single(make_unit_w(3))));

    // B(i) has its grading g piece at g - i
    TGM t = truncate_degree(single(make_unit_w(2), -1, 0), 0, 2, 2);
    CHECK(t.lo == 1);
    CHECK(t.length(1) == 2);
    TGM d1 = truncate_degree(x, 1, 1, 3);
    CHECK(d1.lo == -1);
    CHECK(d1.klength(-1) == 3);
}
