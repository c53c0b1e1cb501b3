#include "doctest.h"

#include "drw/balphap.hpp"

using namespace drw;

namespace {

int hw_int(const InvariantTable& t, int i, int j) {
    const Rational v = t.hw(i, j);
    REQUIRE(v.denominator() == 1);
    return static_cast<int>(v.numerator());
}

}  // namespace

TEST_CASE("Kunneth tables of elliptic curves") {
    const int p = 3;
    const auto E = elliptic_tilde_h(p);
    const auto EE = kunneth_tilde_h({E, E});
    CHECK(describe(EE.at(0)) == "W");
    CHECK(describe(EE.at(1)) == "E_{1/2} + E_{1/2}");
    CHECK(describe(EE.at(2)) == "W(-1)[1] + E_{1/2}*E_{1/2} + W(-1)[1]");
    const auto EEE = kunneth_tilde_h({E, E, E});
    CHECK(describe(EEE.at(0)) == "W");
    CHECK(EEE.at(1).size() == 3);
    CHECK_FALSE(EEE.count(7));
}

TEST_CASE("alternating face maps compose to zero") {
    for (int p : {2, 3})
        for (int row : {0, 1}) {
            auto r = row01_alternating_maps(row, p, 2, 5, 6);
            CHECK(r.columns.size() == 6);
            CHECK(composites_vanish(r));
            for (std::size_t c = 0; c < r.maps.size(); ++c) CHECK(is_morphism(r.maps[c], r.columns[c], r.columns[c + 1]));
        }
}

TEST_CASE("E_2 rows 0 and 1") {
    for (int p : {2, 3, 5}) {
        CAPTURE(p);
        const SSPage page = e2_rows01(p, 3, 6);
        CHECK(page.cells.at({0, 0}).name == "W");
        CHECK(page.cells.at({1, 1}).name == "D(alpha_p)");
        for (auto c : {Cell{1, 0}, Cell{2, 0}, Cell{3, 0}, Cell{0, 1}, Cell{2, 1}, Cell{3, 1}})
            CHECK(page.cells.at(c).name == "0");
    }
}

TEST_CASE("E_2 row 2: sub and quotient complexes") {
    const int p = 2;
    const Row2 r = row2_e2(p, 3, 6);
    CHECK(r.reassembles);
    CHECK(r.sub_h1.name == "U_-1");
    CHECK(r.sub_h2.name == "U_1");
    CHECK(r.quot_h0.name == "0");
    CHECK(r.quot_h1.name == "k");
    CHECK(r.e2_02_zero);
    CHECK(describe(r.left) == describe(single(make_domino(p, 1, -1))));
    CHECK(describe(r.right) == describe(single(make_residue_k(p), -1, 1)));
    // T^0 = 1 and T^1 = 0 whatever the extension class
    CHECK(r.T_nonsplit == r.T_split);
    int t0 = 0, t1 = 0;
    for (const auto& [c, v] : r.T_nonsplit) {
        if (c.first == 0) t0 += v;
        if (c.first == 1) t1 += v;
    }
    CHECK(t0 == 1);
    CHECK(t1 == 0);
}

TEST_CASE("extension policies") {
    const auto nonsplit = resolve_extension(ExtensionPolicy::PaperNonsplit, 3);
    CHECK(nonsplit.cell.name == "U_0");
    CHECK(nonsplit.cone_certified);
    CHECK_FALSE(nonsplit.counterfactual);
    CHECK(nonsplit.provenance.find("recorded fact") == 0);
    const auto split = resolve_extension(ExtensionPolicy::Split, 3);
    CHECK(split.counterfactual);
    CHECK(split.cell.object.items.size() == 2);
    CHECK(parse_policy("split") == ExtensionPolicy::Split);
    CHECK(parse_policy("paper-nonsplit") == ExtensionPolicy::PaperNonsplit);
    CHECK_THROWS_AS(parse_policy("maybe"), BalphapError);
}

TEST_CASE("tables and the BG_m twist") {
    const int p = 2;
    const auto pt = twist_bgm(point_table(p));
    CHECK(pt.cells.size() == 4);
    for (int n = 0; n <= 3; ++n) CHECK(pt.cells.at({n, n}).name == (n ? "W(" + std::to_string(-n) + ")" : "W"));

    const Report r = counterexample_report({p, 3, 6});
    CHECK(r.base.cells.at({0, 0}).name == "W");
    CHECK(r.base.cells.at({0, 2}).name == "D(alpha_p)");
    CHECK(r.base.cells.at({0, 3}).name == "U_0");
    CHECK(r.base.cells.size() == 3);
    CHECK(r.twisted.cells.at({1, 1}).name == "W(-1)");
    CHECK(r.twisted.cells.at({1, 3}).name == "D(alpha_p)(-1)");

    CHECK_THROWS_AS(counterexample_report({p, 3, 6, ExtensionPolicy::PaperNonsplit, 5}), NotCertifiedError);
    BalphapTable deep = point_table(p, 4);
    CHECK_THROWS_AS(twist_bgm(deep), NotCertifiedError);
}

TEST_CASE("counterexample grid") {
    for (int p : {2, 3, 5}) {
        CAPTURE(p);
        const Report r = counterexample_report({p, 3, 6});
        const auto& t = r.invariants;
        for (int i = 0; i <= 3; ++i)
            for (int j = 0; i + j <= 3; ++j) {
                CAPTURE(i);
                CAPTURE(j);
                int expect = 0;
                if ((i == 0 && j == 0) || (i == 1 && j == 1) || (i == 2 && j == 1) || (i == 0 && j == 3)) expect = 1;
                if (i == 1 && j == 2) expect = -2;
                CHECK(hw_int(t, i, j) == expect);
            }
        CHECK(r.crew_pass);
        CHECK(r.symmetry_le2);
        CHECK(r.asymmetry_pass);
        CHECK(r.checks_pass());
        const auto j = r.json();
        CHECK(j["table"] == nlohmann::json({{"0,0", "W"}, {"1,1", "W(-1)"}, {"0,2", "D(alpha_p)"}, {"0,3", "U_0"}}));
        CHECK(j["mode"] == "paper-nonsplit");
        CHECK_FALSE(j.contains("watermark"));
    }
}

TEST_CASE("split mode changes the structure but not the grid") {
    const int p = 3;
    const Report a = counterexample_report({p, 3, 6});
    const Report b = counterexample_report({p, 3, 6, ExtensionPolicy::Split});
    CHECK(a.json()["hW"] == b.json()["hW"]);
    CHECK(a.invariants.T == b.invariants.T);
    CHECK(a.json()["table"]["0,3"] != b.json()["table"]["0,3"]);
    CHECK(b.json()["watermark"] == "counterfactual");
    CHECK(b.markdown().find("counterfactual") != std::string::npos);
}

TEST_CASE("reports agree across truncations") {
    const auto a = counterexample_report({2, 3, 6}).json();
    const auto b = counterexample_report({2, 4, 9}).json();
    for (const char* k : {"table", "hW", "checks", "e2", "row2"}) CHECK(a[k] == b[k]);
}
