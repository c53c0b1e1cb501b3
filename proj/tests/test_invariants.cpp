#include "doctest.h"

#include "drw/invariants.hpp"

#include <algorithm>
#include <random>

using namespace drw;

namespace {

int at(const IntGrid& g, int i, int j) {
    auto it = g.find({i, j});
    return it == g.end() ? 0 : it->second;
}

Rational at(const RatGrid& g, int i, int j) {
    auto it = g.find({i, j});
    return it == g.end() ? Rational(0) : it->second;
}

FormalObject projective_space(int p, int n) {
    FormalObject x{p, 1, {}};
    for (int i = 0; i <= n; ++i) x = direct_sum(x, single(make_unit_w(p), -i, -i));
    return x;
}

// W + D(alpha_p) in degree 2 + U_0 in degree 3, twisted by the ladder W(-n)[-n]
FormalObject twisted_balphap(int p, int ladder) {
    FormalObject base = single(make_unit_w(p));
    base = direct_sum(base, single(make_dalphap(p), 0, -2));
    base = direct_sum(base, single(make_domino(p, 1, 0), 0, -3));
    FormalObject out{p, 1, {}};
    for (int n = 0; n <= ladder; ++n) out = direct_sum(out, shift(base, -n, -n));
    return out;
}

// cofactor determinant over Z, reduced mod q at the end
std::int64_t det_int(const std::vector<std::vector<std::int64_t>>& A) {
    const std::size_t n = A.size();
    if (n == 0) return 1;
    if (n == 1) return A[0][0];
    std::int64_t s = 0;
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<std::vector<std::int64_t>> minor;
        for (std::size_t r = 1; r < n; ++r) {
            std::vector<std::int64_t> row;
            for (std::size_t k = 0; k < n; ++k)
                if (k != c) row.push_back(A[r][k]);
            minor.push_back(row);
        }
        s += (c % 2 ? -1 : 1) * A[0][c] * det_int(minor);
    }
    return s;
}

Block random_block(std::mt19937& rng, int p) {
    switch (rng() % 6) {
        case 0: return make_unit_w(p);
        case 1: return make_residue_k(p);
        case 2: return make_dalphap(p);
        case 3: return make_domino(p, 1, static_cast<int>(rng() % 5) - 2);
        case 4: return make_dieudonne(p, 1, 1, 1);
        default: return rng() % 2 ? make_dieudonne(p, 1, 2, 1) : make_dieudonne(p, 1, 1, 2);
    }
}

}  // namespace

TEST_CASE("heart of basic blocks") {
    CHECK(coeur(make_domino(2, 1, 0), 0).is_zero());
    auto hd = coeur(make_dalphap(2), 0);
    CHECK(hd.mod.length() == 1);
    CHECK(hd.free_rank == 0);
    CHECK(hd.F.is_zero());
    CHECK(hd.V.is_zero());
    auto he = coeur(make_dieudonne(2, 1, 1, 1), 0);
    CHECK(he.free_rank == 2);
    CHECK(he.torsion_length == 0);
}

TEST_CASE("domino numbers") {
    for (int p : {2, 3})
        for (int t = -2; t <= 2; ++t) {
            CHECK(domino_number(make_domino(p, 1, t), 0) == 1);
            CHECK(domino_number(make_domino(p, 1, t), 1) == 0);
        }
    CHECK(domino_number(make_dieudonne(2, 1, 1, 1), 0) == 0);
    CHECK(domino_number(make_dalphap(3), 0) == 0);
}

TEST_CASE("newton slopes") {
    auto e12 = coeur(make_dieudonne(2, 1, 1, 1), 0).slopes;
    REQUIRE(e12.size() == 1);
    CHECK(e12[0] == SlopeMult{Rational(1, 2), 2});
    auto e13 = coeur(make_dieudonne(3, 1, 2, 1), 0).slopes;
    REQUIRE(e13.size() == 1);
    CHECK(e13[0] == SlopeMult{Rational(1, 3), 3});
    auto w = coeur(make_unit_w(5), 0).slopes;
    REQUIRE(w.size() == 1);
    CHECK(w[0] == SlopeMult{Rational(0), 1});
}

TEST_CASE("newton polygon of explicit polynomials") {
    const Zpm R(2, 8);
    // x^2 - 2
    auto s = newton_polygon({R.norm(-2), 0, 1}, R);
    REQUIRE(s.size() == 1);
    CHECK(s[0] == SlopeMult{Rational(1, 2), 2});
    // (x - 1)(x - 4) = x^2 - 5x + 4: slopes 0 and 2
    s = newton_polygon({4, R.norm(-5), 1}, R);
    REQUIRE(s.size() == 2);
    CHECK(s[0] == SlopeMult{Rational(0), 1});
    CHECK(s[1] == SlopeMult{Rational(2), 1});
}

TEST_CASE("property: charpoly agrees with a cofactor determinant") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        const int p = trial % 2 ? 3 : 2;
        const Zpm R(p, 4);
        const int n = 1 + static_cast<int>(rng() % 4);
        Mat A(n, n);
        for (auto& x : A.a) x = rng() % R.q;
        auto cp = charpoly(A, R);
        REQUIRE(cp.size() == static_cast<std::size_t>(n + 1));
        CHECK(cp[n] == 1);
        // evaluate det(xI - A) at several integer points
        for (std::int64_t x0 = -2; x0 <= 2; ++x0) {
            std::vector<std::vector<std::int64_t>> B(n, std::vector<std::int64_t>(n));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) B[i][j] = (i == j ? x0 : 0) - A(i, j);
            std::int64_t val = 0, pw = 1;
            for (int k = 0; k <= n; ++k) {
                val = R.add(val, R.mul(cp[k], R.norm(pw)));
                pw *= x0;
            }
            CHECK(val == R.norm(det_int(B)));
        }
    }
}

TEST_CASE("R_1 tensor of small blocks") {
    auto da = r1_tensor(single(make_dalphap(2)));
    CHECK(at(da.length, 1, -2) == 1);
    CHECK(at(da.length, 0, -1) == 1);
    CHECK(at(da.length, 1, -1) == 1);
    CHECK(at(da.length, 0, 0) == 1);
    int total = 0;
    for (auto& [c, v] : da.length) total += v;
    CHECK(total == 4);

    // F is bijective on W, so H^-1 vanishes and only H^0 = k survives
    auto w = r1_tensor(single(make_unit_w(3)));
    CHECK(at(w.length, 0, 0) == 1);
    CHECK(at(w.length, 1, -1) == 0);
    CHECK(at(w.length, 1, -2) == 0);
}

TEST_CASE("R_n tensor of W is W_n") {
    for (int n = 1; n <= 4; ++n) {
        auto t = rn_tensor(make_unit_w(2), n);
        CHECK(at(t.length, 0, 0) == n);
        int total = 0;
        for (auto& [c, v] : t.length) total += v;
        CHECK(total == n);
    }
}

TEST_CASE("Hodge numbers of U_0") {
    auto h = hodge_numbers(single(make_domino(2, 1, 0)));
    CHECK(at(h, 0, 0) == 1);
    CHECK(at(h, 1, 0) == 1);
    CHECK(at(h, 1, -2) == 1);
    CHECK(at(h, 2, -2) == 1);
    CHECK(at(h, 1, -1) == 0);
}

TEST_CASE("Hodge-Witt numbers of U_0 and of points") {
    auto t = compute_invariants(single(make_domino(3, 1, 0)));
    CHECK(t.hw(0, 0) == Rational(1));
    CHECK(t.hw(1, -1) == Rational(-2));
    CHECK(t.hw(2, -2) == Rational(1));
    CHECK(t.T.at({0, 0}) == 1);

    auto w = compute_invariants(single(make_unit_w(2)));
    CHECK(at(w.m, 0, 0) == Rational(1));
    auto w11 = compute_invariants(single(make_unit_w(2), -1, -1));
    CHECK(at(w11.m, 1, 1) == Rational(1));
    auto da = compute_invariants(single(make_dalphap(2), 0, -2));
    for (auto& [c, v] : da.m) CHECK(v == Rational(0));
}

TEST_CASE("slope numbers of E_1/2 split across the diagonal") {
    auto m = slope_numbers(single(make_dieudonne(2, 1, 1, 1)));
    CHECK(at(m, 0, 0) == Rational(1));
    CHECK(at(m, 1, -1) == Rational(1));
}

TEST_CASE("projective space") {
    for (int n = 1; n <= 5; ++n) {
        auto t = compute_invariants(projective_space(2, n));
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                CHECK(t.hw(i, j) == Rational(i == j ? 1 : 0));
                CHECK(t.hodge(i, j) == (i == j ? 1 : 0));
            }
        for (int k = 0; k <= 2 * n; ++k) CHECK(t.betti[k] == (k % 2 == 0 ? 1 : 0));
        CHECK(mazur_ogus_check(t).pass);
        CHECK(ekedahl_check(t).pass);
        for (auto& c : newton_hodge_check(t)) CHECK_MESSAGE(c.pass, c.detail);
    }
    auto t4 = compute_invariants(projective_space(3, 4));
    auto s = symmetry_check(t4, 4, 8);
    CHECK(s.hodge_ok);
    CHECK(s.serre_ok);
}

TEST_CASE("totalization") {
    auto w = totalize(single(make_unit_w(2)));
    CHECK(w.betti[0] == 1);
    auto da = totalize(single(make_dalphap(2), 0, -2));
    for (auto& [n, b] : da.betti) CHECK(b == 0);
    REQUIRE(da.torsion.count(2));
    CHECK(da.torsion[2] == std::vector<int>{1});
    auto e = totalize(single(make_dieudonne(2, 1, 1, 1), 0, -1));
    CHECK(e.betti[1] == 2);
}

TEST_CASE("Crew's formula on examples") {
    auto u = compute_invariants(single(make_domino(2, 1, 0)));
    auto c0 = crew_check(u, 0);
    CHECK(c0.pass);
    CHECK(c0.witt == Rational(1));
    auto c1 = crew_check(u, 1);
    CHECK(c1.pass);
    CHECK(c1.hodge == Rational(2));
    auto d = crew_check(compute_invariants(single(make_dalphap(2))), 0);
    CHECK(d.pass);
    CHECK(d.hodge == Rational(0));
}

TEST_CASE("twisted B alpha_p table") {
    auto t = compute_invariants(twisted_balphap(2, 3));
    const std::map<Cell, int> expect = {{{0, 0}, 1}, {{1, 1}, 1}, {{2, 1}, 1}, {{0, 3}, 1}, {{1, 2}, -2}};
    for (int i = 0; i <= 3; ++i)
        for (int j = 0; i + j <= 3; ++j) {
            auto it = expect.find({i, j});
            CHECK_MESSAGE(t.hw(i, j) == Rational(it == expect.end() ? 0 : it->second), i, ",", j);
        }
    auto ek = ekedahl_check(t);
    CHECK(ek.pass);
    CHECK(std::find(ek.equal.begin(), ek.equal.end(), Cell{0, 3}) != ek.equal.end());
    auto s = symmetry_check(t, 4, 3);
    CHECK(at(s.hodge_delta, 0, 3) == Rational(1));
    auto low = symmetry_check(t, 4, 2);
    CHECK(low.hodge_ok);
    for (auto& c : crew_all(t)) CHECK(c.pass);
}

TEST_CASE("property: invariants are additive over random sums") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const int p = trial % 3 == 0 ? 3 : 2;
        FormalObject x{p, 1, {}};
        const int k = 1 + static_cast<int>(rng() % 3);
        std::vector<InvariantTable> parts;
        for (int s = 0; s < k; ++s) {
            auto part = single(random_block(rng, p), static_cast<int>(rng() % 5) - 2, static_cast<int>(rng() % 5) - 2);
            parts.push_back(compute_invariants(part));
            x = direct_sum(x, part);
        }
        auto whole = compute_invariants(x);
        RatGrid sum_hw;
        IntGrid sum_h, sum_T;
        for (auto& t : parts) {
            for (auto& [c, v] : t.hW) sum_hw[c] += v;
            for (auto& [c, v] : t.h) sum_h[c] += v;
            for (auto& [c, v] : t.T) sum_T[c] += v;
        }
        for (auto& [c, v] : sum_hw) CHECK(whole.hw(c.first, c.second) == v);
        for (auto& [c, v] : sum_h) CHECK(whole.hodge(c.first, c.second) == v);
        for (auto& [c, v] : sum_T) CHECK(at(whole.T, c.first, c.second) == v);
        // formula identity
        auto recomputed = hodge_witt_from_parts(whole.m, whole.T);
        for (auto& [c, v] : recomputed) CHECK(whole.hw(c.first, c.second) == v);
        for (auto& c : crew_all(whole)) CHECK(c.pass);
    }
}

TEST_CASE("block metadata matches computed hearts and dominoes") {
    for (int p : {2, 3}) {
        std::vector<Block> blocks = {make_unit_w(p), make_residue_k(p), make_dalphap(p), make_domino(p, 1, -1),
                                     make_domino(p, 1, 2), make_dieudonne(p, 1, 1, 1), make_dieudonne(p, 1, 2, 1)};
        for (auto& b : blocks) {
            auto h = coeur(b, 0);
            CHECK(h.free_rank == b.free_rank);
            if (b.free_rank > 0) CHECK(h.slopes == b.slopes);
            if (b.domino)
                for (int g = b.grade_lo; g <= b.grade_hi; ++g) {
                    auto it = b.domino->find(g);
                    CHECK(domino_number(b, g) == (it == b.domino->end() ? 0 : it->second));
                }
        }
    }
}

TEST_CASE("JSON and markdown output") {
    auto t = compute_invariants(single(make_dieudonne(2, 1, 1, 1)));
    auto j = to_json(t);
    CHECK(j["p"] == 2);
    CHECK(j["hW"]["0,0"] == 1);
    CHECK(j["m"]["1,-1"] == 1);
    CHECK(j["newton"]["0"][0][0] == "1/2");
    CHECK(rational_str(Rational(-3, 6)) == "-1/2");
    CHECK(rational_json(Rational(4, 2)) == 2);
    auto md = hw_markdown(compute_invariants(projective_space(2, 2)).hW, 2);
    CHECK(md.find('|') != std::string::npos);
    CHECK(j.dump() == to_json(compute_invariants(single(make_dieudonne(2, 1, 1, 1)))).dump());
}
