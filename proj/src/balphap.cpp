#include "drw/balphap.hpp"

#include "drw/hom.hpp"

#include <sstream>

namespace drw {

ExtensionPolicy parse_policy(const std::string& s) {
    if (s == "paper-nonsplit" || s == "nonsplit") return ExtensionPolicy::PaperNonsplit;
    if (s == "split") return ExtensionPolicy::Split;
    throw BalphapError("unknown extension policy '" + s + "' (expected paper-nonsplit or split)");
}

const char* policy_name(ExtensionPolicy p) { return p == ExtensionPolicy::Split ? "split" : "paper-nonsplit"; }

// ---------------------------------------------------------------- Kunneth

namespace {

std::string shift_suffix(int gshift, int cshift) {
    std::string s;
    if (gshift) s += "(" + std::to_string(gshift) + ")";
    if (cshift) s += "[" + std::to_string(cshift) + "]";
    return s;
}

}  // namespace

std::string Term::name() const {
    std::string s;
    for (std::size_t i = 0; i < factors.size(); ++i) s += (i ? "*" : "") + factors[i].name();
    if (factors.size() > 1 && (gshift || cshift)) s = "(" + s + ")";
    return s + shift_suffix(gshift, cshift);
}

bool Term::operator==(const Term& o) const {
    return factors == o.factors && gshift == o.gshift && cshift == o.cshift;
}

std::string describe(const std::vector<Term>& terms) {
    if (terms.empty()) return "0";
    std::string s;
    for (std::size_t i = 0; i < terms.size(); ++i) s += (i ? " + " : "") + terms[i].name();
    return s;
}

DegreeTable elliptic_tilde_h(int p) {
    return {{0, {Term{{make_unit_w(p)}, 0, 0}}},
            {1, {Term{{make_dieudonne(p, 1, 1, 1)}, 0, 0}}},
            {2, {Term{{make_unit_w(p)}, -1, 1}}}};
}

namespace {

Term star_terms(const Term& a, const Term& b) {
    Term t;
    for (const auto* x : {&a, &b})
        for (const auto& f : x->factors) {
            if (f.r != 1) throw StarError("star of blocks: implemented for r = 1 only");
            if (f.kind != BlockKind::UnitW) t.factors.push_back(f);
        }
    if (!a.factors.empty() && !b.factors.empty() && a.factors.front().p != b.factors.front().p)
        throw StarError("star of blocks: primes differ");
    if (t.factors.empty()) t.factors.push_back(a.factors.empty() ? b.factors.front() : a.factors.front());
    t.gshift = a.gshift + b.gshift;
    t.cshift = a.cshift + b.cshift;
    return t;
}

}  // namespace

DegreeTable kunneth_tilde_h(const std::vector<DegreeTable>& factors) {
    if (factors.empty()) return {};
    DegreeTable acc = factors.front();
    for (std::size_t k = 1; k < factors.size(); ++k) {
        DegreeTable next;
        for (const auto& [i, xs] : acc)
            for (const auto& [j, ys] : factors[k])
                for (const auto& x : xs)
                    for (const auto& y : ys) next[i + j].push_back(star_terms(x, y));
        acc = std::move(next);
    }
    return acc;
}

// ---------------------------------------------------------------- rows 0 and 1

namespace {

// coefficient a + b g of a block entry, g the pullback along the isogeny
struct Coef {
    int a = 0;
    int b = 0;
};

/* Alternating sum of pullbacks along f_0..f_n : A^n x B -> A^{n-1} x B on
 * H~^1, as an (n+1) x n matrix (coordinates a_0..a_{n-1}, b). */
std::vector<std::vector<Coef>> face_pullbacks(int n) {
    std::vector<std::vector<Coef>> M(n + 1, std::vector<Coef>(n));
    const int b_in = n - 1, b_out = n;
    for (int i = 0; i <= n; ++i) {
        const int s = i % 2 ? -1 : 1;
        auto add = [&](int out, int in, int a, int g) {
            M[out][in].a += s * a;
            M[out][in].b += s * g;
        };
        for (int k = 0; k < n - 1; ++k) {
            if (i == 0) {
                add(k + 1, k, 1, 0);
            } else if (i < n) {
                if (k < i - 1) add(k, k, 1, 0);
                if (k == i - 1) {
                    add(k, k, 1, 0);
                    add(k + 1, k, 1, 0);
                }
                if (k > i - 1) add(k + 1, k, 1, 0);
            } else {
                add(k, k, 1, 0);
            }
        }
        add(b_out, b_in, 1, 0);
        if (i == n) add(n - 1, b_in, 0, 1);
    }
    return M;
}

TGM copies(const TGM& base, int k) {
    TGM out;
    for (int i = 0; i < k; ++i) out = direct_sum(out, base);
    return out;
}

Mat block_map(const std::vector<std::vector<Coef>>& C, const Mat& g, int bg, const Zpm& R) {
    const int rows = static_cast<int>(C.size()), cols = rows ? static_cast<int>(C[0].size()) : 0;
    Mat M(rows * bg, cols * bg);
    for (int o = 0; o < rows; ++o)
        for (int i = 0; i < cols; ++i) {
            const Coef c = C[o][i];
            for (int x = 0; x < bg; ++x)
                for (int y = 0; y < bg; ++y) {
                    std::int64_t v = (x == y ? c.a : 0) + c.b * (g.rows ? g(x, y) : 0);
                    M(o * bg + x, i * bg + y) = R.norm(v);
                }
        }
    return M;
}

Mat block_diag_copies(const Mat& A, int k) {
    Mat out;
    for (int i = 0; i < k; ++i) out = i ? block_diag(out, A) : A;
    return out;
}

Block row_block(int row, int p) { return row == 0 ? make_unit_w(p) : make_dieudonne(p, 1, 1, 1); }

int row_coords(int row, int column) { return row == 0 ? 1 : column + 1; }

/* Cohomology at one column: kernels are taken at the higher truncation and
 * pushed down, which discards kernel elements that only exist because of
 * the truncation. */
TGM stable_cohomology(const TGM& lo, const GradedMats* d_in_lo, const TGM& hi, const TGM* next_hi,
                      const GradedMats* d_out_hi, const GradedMats& trans) {
    const Zpm Rl = lo.ring(), Rh = hi.ring();
    GradedMats img, kern;
    for (int g = lo.lo; g <= lo.hi(); ++g) {
        const int gl = lo.gens(g), gh = hi.gens(g);
        img[g] = d_in_lo && d_in_lo->count(g) ? d_in_lo->at(g) : Mat(gl, 0);
        Mat K = Mat::identity(gh);
        if (d_out_hi && next_hi && next_hi->gens(g) && d_out_hi->count(g))
            K = map_kernel(d_out_hi->at(g), hi.at(g).mod, next_hi->at(g).mod, Rh);
        auto t = trans.find(g);
        kern[g] = t != trans.end() && gh ? mat_mul(t->second, K, Rl) : Mat(gl, 0);
    }
    auto Q = quotient(lo, img);
    GradedMats sub;
    for (const auto& [g, K] : kern) sub[g] = mat_mul(Q.proj[g], K, Rl);
    return submodule(Q.target, sub);
}

Block block_by_name(int p, const std::string& name) {
    std::vector<Block> cands{make_unit_w(p), make_residue_k(p), make_dalphap(p)};
    for (int t = -3; t <= 3; ++t) cands.push_back(make_domino(p, 1, t));
    for (auto [i, j] : {std::pair{1, 1}, {1, 2}, {2, 1}}) cands.push_back(make_dieudonne(p, 1, i, j));
    for (const auto& b : cands)
        if (b.name() == name) return b;
    throw PipelineUnstableError("no block named " + name);
}

CellEntry cell_of(const Identified& id, int p, const std::string& what) {
    if (id.status != Identification::Identified)
        throw PipelineUnstableError(what + ": could not identify the computed module");
    if (id.name == "0") return {"0", FormalObject{p, 1, {}}};
    return {id.name, single(block_by_name(p, id.name))};
}

}  // namespace

AlternatingRow row01_alternating_maps(int row, int p, int m, int n, int ncolumns) {
    if (row != 0 && row != 1) throw BalphapError("alternating maps: only rows 0 and 1 are built");
    AlternatingRow out;
    out.row = row;
    const TGM base = truncate(row_block(row, p), m, n);
    const Zpm R = base.ring();
    for (int c = 0; c < ncolumns; ++c) out.columns.push_back(copies(base, row_coords(row, c)));
    for (int c = 0; c + 1 < ncolumns; ++c) {
        std::vector<std::vector<Coef>> C;
        if (row == 0) {
            int s = 0;
            for (int i = 0; i <= c + 1; ++i) s += i % 2 ? -1 : 1;
            C = {{Coef{s, 0}}};
        } else {
            C = face_pullbacks(c + 1);
        }
        GradedMats d;
        for (int g = base.lo; g <= base.hi(); ++g) {
            const int bg = base.gens(g);
            if (!bg) continue;
            d[g] = block_map(C, row == 1 ? base.at(g).F.mat : Mat(), bg, R);
        }
        out.maps.push_back(d);
    }
    return out;
}

bool composites_vanish(const AlternatingRow& row) {
    for (std::size_t c = 0; c + 1 < row.maps.size(); ++c) {
        const TGM& tgt = row.columns[c + 2];
        const Zpm R = tgt.ring();
        for (const auto& [g, d0] : row.maps[c]) {
            auto it = row.maps[c + 1].find(g);
            if (it == row.maps[c + 1].end()) continue;
            const Mat dd = mat_mul(it->second, d0, R);
            for (int j = 0; j < dd.cols; ++j)
                if (!tgt.at(g).mod.is_zero_vec(dd.col(j), R)) return false;
        }
    }
    return true;
}

SSPage e2_rows01(int p, int m, int n) {
    SSPage page;
    page.columns = 4;
    page.rows = 2;
    const int ncol = page.columns + 1;
    for (int row = 0; row <= 1; ++row) {
        const AlternatingRow lo = row01_alternating_maps(row, p, m, n, ncol);
        const AlternatingRow hi = row01_alternating_maps(row, p, m + 2, n + 2, ncol);
        if (!composites_vanish(lo)) throw BalphapError("alternating maps do not compose to zero");
        const GradedMats t1 = transition(row_block(row, p), m + 2, n + 2, m, n);
        for (int c = 0; c < page.columns; ++c) {
            GradedMats trans;
            for (const auto& [g, T] : t1) trans[g] = block_diag_copies(T, row_coords(row, c));
            const TGM H = stable_cohomology(lo.columns[c], c ? &lo.maps[c - 1] : nullptr, hi.columns[c],
                                            &hi.columns[c + 1], &hi.maps[c], trans);
            page.cells[{c, row}] = cell_of(identify(H), p, "E_2 cell");
        }
    }
    return page;
}

// ---------------------------------------------------------------- row 2

Row2 row2_e2(int p, int m, int n) {
    Row2 out;
    const Block E = make_dieudonne(p, 1, 1, 1), W = make_unit_w(p);
    const Term EE{{E, E}, 0, 0}, Wt{{W}, -1, 1};
    out.A = {Wt};
    out.B = {EE, Wt};
    out.C = {EE};
    out.sub_B = {EE};
    out.sub_C = {EE};
    out.quot_A = {Wt};
    out.quot_B = {Wt};
    {
        std::vector<Term> b = out.sub_B, c = out.sub_C;
        b.insert(b.end(), out.quot_B.begin(), out.quot_B.end());
        out.reassembles = out.A == out.quot_A && b == out.B && c == out.C;
    }

    // id * F on E * E has the cohomology of E * D(alpha_p), one degree up
    const DerivedStar d = derived_star(E, make_dalphap(p), m, n);
    out.sub_h1 = d.h_minus1;
    out.sub_h2 = d.h0;

    // -p on W, kernel computed one level up
    const TGM Wlo = truncate(W, m, n), Whi = truncate(W, m + 2, n + 2);
    GradedMats mp_lo, mp_hi;
    for (int g = Wlo.lo; g <= Wlo.hi(); ++g) {
        mp_lo[g] = mat_scale(Mat::identity(Wlo.gens(g)), -p, Wlo.ring());
        mp_hi[g] = mat_scale(Mat::identity(Whi.gens(g)), -p, Whi.ring());
    }
    const GradedMats trans = transition(W, m + 2, n + 2, m, n);
    out.quot_h0 = identify(stable_cohomology(Wlo, nullptr, Whi, &Whi, &mp_hi, trans));
    out.quot_h1 = identify(stable_cohomology(Wlo, &mp_lo, Whi, nullptr, nullptr, trans));

    // E_2^{0,2} sits between H^0 of the subcomplex (zero in column 0) and
    // the kernel of -p
    out.e2_02_zero = out.quot_h0.status == Identification::Identified && out.quot_h0.name == "0";

    const CellEntry sub1 = cell_of(out.sub_h1, p, "subcomplex H^1");
    const CellEntry sub2 = cell_of(out.sub_h2, p, "subcomplex H^2");
    const CellEntry q1 = cell_of(out.quot_h1, p, "quotient H^1");
    if (q1.name == "0" || q1.object.items.size() != 1) throw PipelineUnstableError("cokernel of -p is not a block");
    out.left = sub1.object;
    out.right = shift(q1.object, -1, 1);
    out.connecting = "connecting map " + describe(out.right) + " -> " + sub2.name +
                     " vanishes: source in cohomological degree -1, target in degree 0, and negative Ext "
                     "between modules is zero";
    out.T_nonsplit = domino_numbers(single(make_domino(p, 1, 0)));
    out.T_split = domino_numbers(direct_sum(out.left, out.right));
    return out;
}

// ---------------------------------------------------------------- extension

Extension resolve_extension(ExtensionPolicy policy, int p) {
    Extension e;
    e.policy = policy;
    if (policy == ExtensionPolicy::PaperNonsplit) {
        e.cell = {"U_0", single(make_domino(p, 1, 0))};
        e.provenance =
            "recorded fact: the extension 0 -> U_-1 -> E_2^{1,2} -> k(-1)[1] -> 0 is non-split "
            "(imported from the Hodge cohomology of B alpha_p, not computed here)";
        const ConeResult c = cone_or_extension(FieldElt::one(p, 1), 2, 5);
        e.cone_certified = !c.split && c.iso.has_value();
    } else {
        e.cell = {"U_-1 + k(-1)[1]", direct_sum(single(make_domino(p, 1, -1)), single(make_residue_k(p), -1, 1))};
        e.provenance = "zero extension class assumed";
        e.counterfactual = true;
    }
    return e;
}

// ---------------------------------------------------------------- tables

namespace {

void add_cell(CellTable& t, Cell c, const CellEntry& e) {
    if (e.name == "0") return;
    auto it = t.find(c);
    if (it == t.end()) {
        t[c] = e;
        return;
    }
    it->second.name += " + " + e.name;
    it->second.object = direct_sum(it->second.object, e.object);
}

std::string twisted_name(const std::string& name, int n) {
    if (!n) return name;
    const bool compound = name.find(' ') != std::string::npos;
    return (compound ? "(" + name + ")" : name) + "(" + std::to_string(-n) + ")";
}

}  // namespace

BalphapTable assemble_balphap_table(const SSPage& rows01, const Row2& row2, const Extension& ext, int degree_bound) {
    if (degree_bound > 3)
        throw NotCertifiedError("degree bound " + std::to_string(degree_bound) +
                                " not certified by pipeline: rows >= 3 of the spectral sequence are not computed");
    if (!row2.e2_02_zero) throw PipelineUnstableError("E_2^{0,2} did not vanish");
    const int p = ext.cell.object.p;
    BalphapTable t;
    t.degree_bound = degree_bound;
    // every differential from or into the cells below lands in a zero cell, so
    // degree j collects the E_2 cells with column + row = j
    const DegreeTable col0 = elliptic_tilde_h(p);
    for (int j = 0; j <= degree_bound; ++j) {
        for (const auto& [cell, e] : rows01.cells)
            if (cell.first + cell.second == j) add_cell(t.cells, {0, j}, e);
        if (j == 3) {
            add_cell(t.cells, {0, j}, ext.cell);
            // E_1^{0,3} = H~^3 of a curve
            if (col0.count(3)) throw BalphapError("unexpected H~^3 of the curve");
        }
    }
    return t;
}

BalphapTable twist_bgm(const BalphapTable& base) {
    if (base.degree_bound > 3) throw NotCertifiedError("degree bound above 3 not certified by pipeline");
    BalphapTable t;
    t.degree_bound = base.degree_bound;
    for (int n = 0; n <= base.degree_bound; ++n)
        for (const auto& [c, e] : base.cells)
            add_cell(t.cells, {c.first + n, c.second + n}, {twisted_name(e.name, n), e.object});
    return t;
}

BalphapTable point_table(int p, int degree_bound) {
    BalphapTable t;
    t.degree_bound = degree_bound;
    t.cells[{0, 0}] = {"W", single(make_unit_w(p))};
    return t;
}

FormalObject table_object(const BalphapTable& t) {
    FormalObject x;
    bool first = true;
    for (const auto& [c, e] : t.cells) {
        if (first) {
            x.p = e.object.p;
            x.r = e.object.r;
            first = false;
        }
        x = direct_sum(x, shift(e.object, -c.first, -c.second));
    }
    return x;
}

// ---------------------------------------------------------------- report

Report counterexample_report(const ReportOptions& opt) {
    if (opt.degree_bound > 3)
        throw NotCertifiedError("degree bound " + std::to_string(opt.degree_bound) + " not certified by pipeline");
    Report rep;
    rep.opt = opt;
    rep.rows01 = e2_rows01(opt.p, opt.m, opt.n);
    rep.row2 = row2_e2(opt.p, opt.m, opt.n);
    rep.extension = resolve_extension(opt.policy, opt.p);
    rep.base = assemble_balphap_table(rep.rows01, rep.row2, rep.extension, opt.degree_bound);
    rep.twisted = twist_bgm(rep.base);
    rep.invariants = compute_invariants(table_object(rep.twisted));

    rep.crew = crew_all(rep.invariants);
    rep.crew_pass = true;
    for (const auto& c : rep.crew) rep.crew_pass = rep.crew_pass && c.pass;
    rep.symmetry_le2 = true;
    for (int i = 0; i <= 2; ++i)
        for (int j = 0; i + j <= 2; ++j) rep.symmetry_le2 = rep.symmetry_le2 && rep.invariants.hw(i, j) == rep.invariants.hw(j, i);
    rep.asymmetry_deg3 = rep.invariants.hw(0, 3) - rep.invariants.hw(3, 0);
    rep.asymmetry_pass = rep.asymmetry_deg3 == Rational(1);
    return rep;
}

namespace {

std::string key(const Cell& c) { return std::to_string(c.first) + "," + std::to_string(c.second); }

}  // namespace

nlohmann::json Report::json() const {
    using nlohmann::json;
    json j;
    j["mode"] = policy_name(opt.policy);
    j["degree_bound"] = opt.degree_bound;
    j["truncation"] = {{"p", opt.p}, {"m", opt.m}, {"n", opt.n}};
    json table = json::object();
    for (const auto& [c, e] : twisted.cells)
        if (c.first + c.second <= opt.degree_bound) table[key(c)] = e.name;
    j["table"] = table;
    json hw = json::object();
    for (int i = 0; i <= opt.degree_bound; ++i)
        for (int k = 0; i + k <= opt.degree_bound; ++k) hw[key({i, k})] = rational_json(invariants.hw(i, k));
    j["hW"] = hw;
    j["checks"] = {{"crew", crew_pass}, {"symmetry_le2", symmetry_le2}, {"asymmetry_deg3", asymmetry_pass}};
    json crew_cols = json::object();
    for (const auto& c : crew)
        crew_cols[std::to_string(c.i)] = {{"witt", rational_json(c.witt)}, {"hodge", rational_json(c.hodge)}, {"pass", c.pass}};
    j["crew_columns"] = crew_cols;
    j["asymmetry"] = {{"hW_0_3", rational_json(invariants.hw(0, 3))},
                      {"hW_3_0", rational_json(invariants.hw(3, 0))},
                      {"difference", rational_json(asymmetry_deg3)}};
    json e2 = json::object();
    for (const auto& [c, e] : rows01.cells) e2[key(c)] = e.name;
    e2["0,2"] = row2.e2_02_zero ? "0" : "nonzero";
    e2["1,2"] = extension.cell.name;
    j["e2"] = e2;
    j["row2"] = {{"subcomplex", {{"H1", row2.sub_h1.name}, {"H2", row2.sub_h2.name}}},
                 {"quotient", {{"H0", row2.quot_h0.name}, {"H1", row2.quot_h1.name}}},
                 {"ses", "0 -> " + describe(row2.left) + " -> E_2^{1,2} -> " + describe(row2.right) + " -> 0"},
                 {"connecting", row2.connecting},
                 {"reassembles", row2.reassembles}};
    j["extension"] = {{"policy", policy_name(extension.policy)},
                      {"provenance", extension.provenance},
                      {"cone_certified", extension.cone_certified}};
    if (extension.counterfactual) j["watermark"] = "counterfactual";
    return j;
}

std::string Report::markdown() const {
    std::ostringstream os;
    if (extension.counterfactual) os << "> **counterfactual report**: " << extension.provenance << "\n\n";
    os << "# Hodge-Witt cohomology, total degree <= " << opt.degree_bound << "\n\n";
    os << "mode `" << policy_name(opt.policy) << "`, p = " << opt.p << ", m = " << opt.m << ", n = " << opt.n
       << "\n\n";
    os << "| (i, j) | H^j(i) |\n|---|---|\n";
    for (const auto& [c, e] : twisted.cells)
        if (c.first + c.second <= opt.degree_bound) os << "| " << key(c) << " | " << e.name << " |\n";
    os << "\n## h_W\n\n" << hw_markdown(invariants.hW, opt.degree_bound) << "\n";
    os << "## checks\n\n";
    os << "- Crew columns: " << (crew_pass ? "pass" : "FAIL") << "\n";
    os << "- symmetry for i + j <= 2: " << (symmetry_le2 ? "pass" : "FAIL") << "\n";
    os << "- h_W^{0,3} - h_W^{3,0} = " << rational_str(asymmetry_deg3) << " (" << (asymmetry_pass ? "pass" : "FAIL")
       << ")\n\n";
    os << "extension: " << extension.provenance << "\n";
    return os.str();
}

}  // namespace drw
