// One line per acceptance criterion; exit status is the number of failures.
#include "drw/balphap.hpp"
#include "drw/hom.hpp"
#include "drw/invariants.hpp"
#include "drw/star.hpp"
#include "drw/witt.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace drw;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::ostringstream note;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) note << "first failure: " << what << "; ";
        pass = pass && ok;
    }
};

long ipow(long b, int e) {
    long r = 1;
    while (e-- > 0) r *= b;
    return r;
}

FormalObject projective_space(int p, int n) {
    FormalObject x{p, 1, {}};
    for (int i = 0; i <= n; ++i) x = direct_sum(x, single(make_unit_w(p), -i, -i));
    return x;
}

int expected_grid(int i, int j) {
    if ((i == 0 && j == 0) || (i == 1 && j == 1) || (i == 2 && j == 1) || (i == 0 && j == 3)) return 1;
    if (i == 1 && j == 2) return -2;
    return 0;
}

bool cellwise_le(const InvariantTable& t) {
    std::set<Cell> cells;
    for (const auto& [c, v] : t.hW) cells.insert(c);
    for (const auto& [c, v] : t.h) cells.insert(c);
    for (const auto& c : cells)
        if (t.hw(c.first, c.second) > Rational(t.hodge(c.first, c.second))) return false;
    return true;
}

// W_2 as a finite-length module: F = 1, V = p
Block custom_w2(int p) {
    CustomModule c;
    c.gens = {{0, 2, "e"}};
    c.F = {{0, 0, 1}};
    c.V = {{0, 0, p}};
    return make_custom(p, 1, c);
}

Block random_block(std::mt19937& rng, int p) {
    switch (rng() % 7) {
        case 0: return make_unit_w(p);
        case 1: return make_residue_k(p);
        case 2: return make_dalphap(p);
        case 3: return make_domino(p, 1, static_cast<int>(rng() % 5) - 2);
        case 4: return make_dieudonne(p, 1, 1, 1);
        case 5: return rng() % 2 ? make_dieudonne(p, 1, 2, 1) : make_dieudonne(p, 1, 1, 2);
        default: return custom_w2(p);
    }
}

void counterexample_grid(Outcome& o) {
    double worst = 0;
    for (int p : {2, 3, 5}) {
        const auto t0 = Clock::now();
        const Report r = counterexample_report({p, 8, 16});
        const double s = seconds_since(t0);
        worst = std::max(worst, s);
        o.require(s < 10, "p=" + std::to_string(p) + " took " + std::to_string(s) + " s");
        for (int i = 0; i <= 3; ++i)
            for (int j = 0; i + j <= 3; ++j)
                o.require(r.invariants.hw(i, j) == Rational(expected_grid(i, j)),
                          "p=" + std::to_string(p) + " cell " + std::to_string(i) + "," + std::to_string(j));
    }
    o.note << "p in {2,3,5} at (8,16), slowest " << worst << " s";
}

void e2_cells(Outcome& o) {
    for (int p : {2, 3, 5}) {
        const std::string tag = "p=" + std::to_string(p) + " ";
        const SSPage page = e2_rows01(p, 4, 8);
        o.require(page.cells.at({0, 0}).name == "W", tag + "E2^{0,0}");
        o.require(page.cells.at({1, 1}).name == "D(alpha_p)", tag + "E2^{1,1}");
        const Row2 r = row2_e2(p, 4, 8);
        o.require(r.e2_02_zero, tag + "E2^{0,2}");
        o.require(r.sub_h1.name == "U_-1", tag + "sub");
        o.require(r.quot_h1.name == "k", tag + "quotient");
        o.require(describe(r.left) == "U_-1", tag + "SES left");
        o.require(describe(r.right) == describe(single(make_residue_k(p), -1, 1)), tag + "SES right");
        const Extension e = resolve_extension(ExtensionPolicy::PaperNonsplit, p);
        o.require(e.cell.name == "U_0", tag + "E2^{1,2}");
        o.require(e.cone_certified, tag + "cone of the nonzero class");
    }
    o.note << "E2^{0,0}=W, E2^{1,1}=D(alpha_p), E2^{0,2}=0, E2^{1,2}=U_0 from U_-1 and k(-1)[1]";
}

void derived_sweep(Outcome& o) {
    int runs = 0;
    for (int p : {2, 3, 5})
        for (int m = 2; m <= 3; ++m)
            for (int n = 4; n <= 12; ++n) {
                const DerivedStar d = derived_star(make_dieudonne(p, 1, 1, 1), make_dalphap(p), m, n);
                const std::string tag = "p=" + std::to_string(p) + " (" + std::to_string(m) + "," + std::to_string(n) + ")";
                o.require(d.h_minus1.name == "U_-1", tag + " H^-1=" + d.h_minus1.name);
                o.require(d.h0.name == "U_1", tag + " H^0=" + d.h0.name);
                ++runs;
            }
    o.note << runs << " truncations, H^-1=U_-1 and H^0=U_1";
}

void crew_suite(Outcome& o) {
    std::mt19937 rng(20261019);
    int objects = 0, columns = 0;
    for (; objects < 60; ++objects) {
        const int p = objects % 3 == 0 ? 3 : 2;
        FormalObject x{p, 1, {}};
        const int k = 1 + static_cast<int>(rng() % 4);
        for (int s = 0; s < k; ++s)
            x = direct_sum(x, single(random_block(rng, p), static_cast<int>(rng() % 5) - 2,
                                     static_cast<int>(rng() % 5) - 2));
        const InvariantTable t = compute_invariants(x);
        for (const auto& c : crew_all(t)) {
            ++columns;
            o.require(c.pass, describe(x) + " column " + std::to_string(c.i));
        }
    }
    o.note << objects << " random objects, " << columns << " columns";
}

void domino_additivity(Outcome& o) {
    for (int p : {2, 3}) {
        const ConeResult c = cone_or_extension(FieldElt::one(p, 1), 1, 5);
        o.require(c.iso.has_value() && is_iso(*c.iso, c.model, c.cone), "cone of k(-1) -> U_-1 is U_0");
        const IntGrid mid = domino_numbers(single(make_domino(p, 1, -1)));
        const IntGrid sub = domino_numbers(single(make_residue_k(p), -1, 0));
        const IntGrid quo = domino_numbers(c.object);
        std::map<int, int> tm, ts, tq;
        for (const auto& [cell, v] : mid) tm[cell.first] += v;
        for (const auto& [cell, v] : sub) ts[cell.first] += v;
        for (const auto& [cell, v] : quo) tq[cell.first] += v;
        o.require(tm[0] > 0, "U_-1 carries a domino");
        for (int i = -2; i <= 3; ++i)
            o.require(tm[i] == ts[i] + tq[i], "p=" + std::to_string(p) + " T^" + std::to_string(i));
    }
    o.note << "T^i(U_-1) = T^i(k(-1)) + T^i(U_0) on the certified cone";
}

void ekedahl(Outcome& o) {
    int fixtures = 0;
    auto run = [&](const InvariantTable& t, const std::string& name) {
        ++fixtures;
        o.require(ekedahl_check(t).pass, name + " ekedahl_check");
        o.require(cellwise_le(t), name + " cellwise");
    };
    for (int p : {2, 3})
        for (int n = 1; n <= 5; ++n) run(compute_invariants(projective_space(p, n)), "P^" + std::to_string(n));
    for (int p : {2, 3, 5}) {
        run(compute_invariants(table_object(twist_bgm(point_table(p)))), "BG_m");
        run(counterexample_report({p, 8, 16}).invariants, "counterexample");
    }
    o.note << fixtures << " fixtures: P^1..P^5, BG_m truncated, counterexample";
}

void symmetry(Outcome& o) {
    for (int p : {2, 3}) {
        const SymmetryResult s = symmetry_check(compute_invariants(projective_space(p, 4)), 4, 8);
        o.require(s.hodge_ok && s.serre_ok, "P^4");
    }
    for (int p : {2, 3, 5}) {
        const InvariantTable t = counterexample_report({p, 8, 16}).invariants;
        o.require(symmetry_check(t, 4, 2).hodge_ok, "counterexample i+j<=2");
        const Rational diff = t.hw(0, 3) - t.hw(3, 0);
        o.require(diff == Rational(1), "h_W^{0,3} - h_W^{3,0} = " + rational_str(diff));
    }
    o.note << "P^4 symmetric; counterexample symmetric for i+j<=2, (0,3) vs (3,0) differ by 1";
}

void mazur_ogus(Outcome& o) {
    std::vector<InvariantTable> fixtures;
    for (int p : {2, 3})
        for (int n = 1; n <= 5; ++n) {
            fixtures.push_back(compute_invariants(projective_space(p, n)));
            o.require(mazur_ogus_check(fixtures.back()).pass, "Mazur-Ogus on P^" + std::to_string(n));
        }
    for (int p : {2, 3}) {
        fixtures.push_back(compute_invariants(table_object(twist_bgm(point_table(p)))));
        fixtures.push_back(counterexample_report({p, 8, 16}).invariants);
        FormalObject slopes{p, 1, {}};
        slopes = direct_sum(slopes, single(make_dieudonne(p, 1, 1, 1), 0, -1));
        slopes = direct_sum(slopes, single(make_dieudonne(p, 1, 2, 1), 0, -2));
        slopes = direct_sum(slopes, single(make_dieudonne(p, 1, 1, 2), -1, -1));
        fixtures.push_back(compute_invariants(slopes));
    }
    int polygons = 0;
    for (const auto& t : fixtures)
        for (const auto& c : newton_hodge_check(t)) {
            ++polygons;
            o.require(c.pass, c.detail);
        }
    o.note << fixtures.size() << " fixtures, " << polygons << " polygon comparisons";
}

void star_oracle(Outcome& o) {
    int pairs = 0;
    for (int p : {2, 3, 5}) {
        const std::vector<Block> blocks = {make_unit_w(p),          make_residue_k(p),        make_dalphap(p),
                                           make_domino(p, 1, 0),    make_domino(p, 1, -1),    make_domino(p, 1, 1),
                                           make_dieudonne(p, 1, 1, 1), make_dieudonne(p, 1, 1, 2),
                                           make_dieudonne(p, 1, 2, 1)};
        const TGM W = truncate(make_unit_w(p), 3, 8);
        for (const auto& a : blocks) {
            const TGM M = truncate(a, 3, 8);
            for (const auto& b : blocks) {
                const TGM N = truncate(b, 3, 8);
                if (!frobenius_bijective(N)) continue;
                const StarPresentation P = star_presentation(M, N);
                const TGM C = star_frobenius_bijective(M, N);
                o.require(same_presentation(C, P.module, star_comparison(P, C)), a.name() + " * " + b.name());
                ++pairs;
            }
            const StarPresentation U = star_presentation(M, W);
            o.require(same_presentation(M, U.module, star_unit_map(U, M)), "unit law for " + a.name());
        }
    }
    o.note << pairs << " closed-form pairs and the unit law at (3,8)";
}

void witt_arithmetic(Outcome& o) {
    const auto t0 = Clock::now();
    auto to_residue = [](const WittScalar& x) {
        const int p = x.p, m = x.m();
        const long mod = ipow(p, m);
        long acc = 0;
        for (int i = 0; i < m; ++i) {
            long t = x.a[i].c[0] == 0 ? 0 : 1;
            for (long e = 0; t && e < ipow(p, m - 1); ++e) t = t * x.a[i].c[0] % mod;
            acc = (acc + ipow(p, i) * t) % mod;
        }
        return acc;
    };
    for (int p : {2, 3})
        for (int m = 1; m <= 3; ++m) {
            std::vector<WittScalar> all;
            for (long code = 0; code < ipow(p, m); ++code) {
                WittScalar w = WittScalar::zero(p, 1, m);
                for (long c = code, i = 0; i < m; ++i, c /= p) w.a[i] = FieldElt::from_int(p, 1, c % p);
                all.push_back(w);
            }
            const long mod = ipow(p, m);
            std::vector<bool> seen(mod, false);
            for (const auto& x : all) seen[to_residue(x)] = true;
            o.require(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }), "bijection");
            for (const auto& x : all)
                for (const auto& y : all) {
                    const long rx = to_residue(x), ry = to_residue(y);
                    o.require(to_residue(witt_add(x, y)) == (rx + ry) % mod, "addition");
                    o.require(to_residue(witt_mul(x, y)) == rx * ry % mod, "multiplication");
                }
        }
    std::mt19937 rng(7);
    struct Params {
        int p, r, m;
    };
    int cases = 0;
    for (auto [p, r, m] : {Params{2, 1, 3}, Params{3, 1, 3}, Params{2, 2, 3}, Params{3, 2, 2}, Params{2, 3, 2}}) {
        const WittScalar pw = witt_from_int(p, r, m, p);
        std::uniform_int_distribution<int> d(0, p - 1);
        auto rnd = [&] {
            WittScalar w = WittScalar::zero(p, r, m);
            for (auto& a : w.a)
                for (auto& c : a.c) c = d(rng);
            return w;
        };
        for (int k = 0; k < 500; ++k, ++cases) {
            const WittScalar x = rnd(), y = rnd();
            o.require(frobenius(verschiebung(x)) == witt_mul(pw, x), "FV = p");
            o.require(verschiebung(frobenius(x)) == witt_mul(pw, x), "VF = p");
            o.require(frobenius(witt_mul(x, y)) == witt_mul(frobenius(x), frobenius(y)), "F multiplicative");
            // V is sigma^{-1}-semilinear: V(F(x) y) = x V(y)
            o.require(verschiebung(witt_mul(frobenius(x), y)) == witt_mul(x, verschiebung(y)), "V semilinear");
        }
    }
    const double s = seconds_since(t0);
    o.require(s < 5, "runtime " + std::to_string(s) + " s");
    o.note << "exhaustive p in {2,3}, m <= 3; " << cases << " random cases; " << s << " s";
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
        {"counterexample grid", counterexample_grid},
        {"E2 cells and extension", e2_cells},
        {"derived star sweep", derived_sweep},
        {"Crew formula on random objects", crew_suite},
        {"domino additivity", domino_additivity},
        {"Ekedahl inequality", ekedahl},
        {"symmetry suite", symmetry},
        {"Mazur-Ogus and polygons", mazur_ogus},
        {"star oracle equivalence", star_oracle},
        {"Witt arithmetic", witt_arithmetic},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        const auto t0 = Clock::now();
        try {
            criteria[k].second(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << k + 1 << ". " << criteria[k].first << "  (" << o.note.str()
                  << ", " << seconds_since(t0) << " s)" << std::endl;
    }
    return failures;
}
