#include "drw/block.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace drw {

const char* kind_name(BlockKind k) {
    switch (k) {
        case BlockKind::UnitW: return "UnitW";
        case BlockKind::ResidueK: return "ResidueK";
        case BlockKind::DAlphaP: return "DAlphaP";
        case BlockKind::Domino: return "Domino";
        case BlockKind::Dieudonne: return "Dieudonne";
        case BlockKind::FiniteLength: return "FiniteLength";
    }
    return "?";
}

std::string Block::name() const {
    switch (kind) {
        case BlockKind::UnitW: return "W";
        case BlockKind::ResidueK: return "k";
        case BlockKind::DAlphaP: return "D(alpha_p)";
        case BlockKind::Domino: return "U_" + std::to_string(t);
        case BlockKind::Dieudonne: return "E_{" + std::to_string(j) + "/" + std::to_string(i + j) + "}";
        case BlockKind::FiniteLength: return "custom";
    }
    return "?";
}

bool Block::operator==(const Block& o) const {
    if (kind != o.kind || p != o.p || r != o.r) return false;
    if (kind == BlockKind::Domino) return t == o.t;
    if (kind == BlockKind::Dieudonne) return i == o.i && j == o.j;
    if (kind == BlockKind::FiniteLength) return custom == o.custom;
    return true;
}

namespace {

void check_pr(int p, int r) {
    if (p < 2) throw BlockError("p must be a prime >= 2");
    if (r < 1 || r > 4) throw BlockError("field degree r must be in [1, 4]");
}

Block base(BlockKind k, int p, int r) {
    check_pr(p, r);
    Block b;
    b.kind = k;
    b.p = p;
    b.r = r;
    return b;
}

struct WGen {
    std::string label;
    int order;
};

/* W-level builder: per grading generators and integer matrices. */
struct WBuilder {
    int p, m, n;
    std::map<int, std::vector<WGen>> gens;
    std::map<int, std::map<std::pair<int, int>, long>> F, V, D;

    int add(int g, std::string label, int order) {
        gens[g].push_back({std::move(label), order});
        return static_cast<int>(gens[g].size()) - 1;
    }

    TGM build() const {
        const Zpm R(p, m);
        int lo = 0, hi = 0;
        bool first = true;
        for (const auto& [g, v] : gens) {
            if (v.empty()) continue;
            lo = first ? g : std::min(lo, g);
            hi = first ? g : std::max(hi, g);
            first = false;
        }
        TGM M = make_tgm(p, 1, m, n, lo, hi);
        if (first) {
            M.pieces.clear();
            return M;
        }
        auto count = [&](int g) {
            auto it = gens.find(g);
            return it == gens.end() ? 0 : static_cast<int>(it->second.size());
        };
        for (int g = lo; g <= hi; ++g) {
            auto& pc = M.at(g);
            const int k = count(g);
            pc.F.mat = Mat(k, k);
            pc.V.mat = Mat(k, k);
            pc.D.mat = Mat(count(g + 1), k);
            if (k) {
                for (const auto& w : gens.at(g)) {
                    pc.mod.orders.push_back(w.order);
                    pc.labels.push_back(w.label);
                }
            }
            auto fill = [&](const std::map<int, std::map<std::pair<int, int>, long>>& src, Mat& dst) {
                auto it = src.find(g);
                if (it == src.end()) return;
                for (const auto& [rc, v] : it->second) dst(rc.first, rc.second) = R.norm(v);
            };
            fill(F, pc.F.mat);
            fill(V, pc.V.mat);
            if (g < hi) fill(D, pc.D.mat);
        }
        return M;
    }
};

TGM domino_wlevel(const Block& b, int m, int n) {
    WBuilder w{b.p, m, n, {}, {}, {}, {}};
    for (int a = 0; a < n; ++a) w.add(0, "V^" + std::to_string(a), 1);
    const int t = b.t;
    std::map<int, int> dv;  // exponent -> index
    for (int e = t; e < n; ++e) dv[e] = w.add(1, "dV^" + std::to_string(e), 1);
    for (int a = 0; a + 1 < n; ++a) w.V[0][{a + 1, a}] = 1;
    for (int a = std::max(0, t); a < n; ++a) w.D[0][{dv.at(a), a}] = 1;
    for (int e = t + 1; e < n; ++e) w.F[1][{dv.at(e - 1), dv.at(e)}] = 1;
    return w.build();
}

TGM dieudonne_wlevel(const Block& b, int m, int n) {
    const int L = b.i + b.j, j = b.j;
    WBuilder w{b.p, m, n, {}, {}, {}, {}};
    std::vector<int> idx(L, -1);
    for (int l = 0; l < L; ++l) {
        int ord = 0;
        for (int s = 1; s <= n; ++s)
            if (((l - s) % L + L) % L >= j) ++ord;
        ord = std::min(ord, m);
        if (ord == 0) continue;
        std::string label = b.kind == BlockKind::UnitW ? "1" : "c" + std::to_string(l);
        idx[l] = w.add(0, label, ord);
    }
    for (int k = 0; k < L; ++k) {
        if (idx[k] < 0) continue;
        int kv = (k + 1) % L, kf = (k - 1 + L) % L;
        if (idx[kv] >= 0) w.V[0][{idx[kv], idx[k]}] = k >= j ? b.p : 1;
        if (idx[kf] >= 0) w.F[0][{idx[kf], idx[k]}] = (k >= 1 && k <= j) ? b.p : 1;
    }
    return w.build();
}

TGM custom_ambient(const Block& b, int m, int n) {
    const auto& c = *b.custom;
    WBuilder w{b.p, m, n, {}, {}, {}, {}};
    std::vector<int> local(c.gens.size());
    for (std::size_t a = 0; a < c.gens.size(); ++a) {
        const auto& g = c.gens[a];
        std::string label = g.label.empty() ? "g" + std::to_string(a) : g.label;
        local[a] = w.add(g.grading, label, std::min(g.order, m));
    }
    auto put = [&](const std::vector<CustomModule::Entry>& es,
                   std::map<int, std::map<std::pair<int, int>, long>>& dst, bool degree_one) {
        for (const auto& e : es) {
            const auto& gr = c.gens.at(e.row);
            const auto& gc = c.gens.at(e.col);
            if (gr.grading != gc.grading + (degree_one ? 1 : 0))
                throw BlockError("custom entry does not respect the grading");
            dst[gc.grading][{local[e.row], local[e.col]}] += e.value;
        }
    };
    put(c.F, w.F, false);
    put(c.V, w.V, false);
    put(c.D, w.D, true);
    return w.build();
}

TGMQuotient custom_truncation(const Block& b, int m, int n) {
    TGM amb = restrict_scalars(custom_ambient(b, m, n), b.r);
    return quotient(amb, fil(amb, n));
}

TGM wlevel(const Block& b, int m, int n) {
    WBuilder w{b.p, m, n, {}, {}, {}, {}};
    switch (b.kind) {
        case BlockKind::UnitW:
        case BlockKind::Dieudonne: return dieudonne_wlevel(b, m, n);
        case BlockKind::ResidueK:
            w.add(0, "1", 1);
            w.F[0][{0, 0}] = 1;
            return w.build();
        case BlockKind::DAlphaP:
            w.add(0, "1", 1);
            return w.build();
        case BlockKind::Domino: return domino_wlevel(b, m, n);
        case BlockKind::FiniteLength: break;
    }
    throw BlockError("no W-level description");
}

}  // namespace

Block make_unit_w(int p, int r) {
    Block b = base(BlockKind::UnitW, p, r);
    b.i = 1;
    b.j = 0;
    b.slopes = {{Rational(0), 1}};
    b.domino = std::map<int, int>{};
    b.free_rank = 1;
    b.coeur_torsion = false;
    b.coeur = "W";
    return b;
}

Block make_residue_k(int p, int r) {
    Block b = base(BlockKind::ResidueK, p, r);
    b.domino = std::map<int, int>{};
    b.coeur = "k (F bijective, V = 0)";
    return b;
}

Block make_dalphap(int p, int r) {
    Block b = base(BlockKind::DAlphaP, p, r);
    b.domino = std::map<int, int>{};
    b.coeur = "k (F = V = 0)";
    return b;
}

Block make_domino(int p, int r, int t) {
    Block b = base(BlockKind::Domino, p, r);
    b.t = t;
    b.domino = std::map<int, int>{{0, 1}};
    b.coeur = "0";
    b.grade_hi = 1;
    return b;
}

Block make_dieudonne(int p, int r, int i, int j) {
    if (i < 1 || j < 0) throw BlockError("Dieudonne(i, j) needs i >= 1, j >= 0");
    if (std::gcd(i, j) != 1) throw BlockError("Dieudonne(i, j): i and j must be coprime");
    Block b = base(BlockKind::Dieudonne, p, r);
    b.i = i;
    b.j = j;
    b.slopes = {{Rational(j, i + j), i + j}};
    b.domino = std::map<int, int>{};
    b.free_rank = i + j;
    b.coeur_torsion = false;
    b.coeur = b.name();
    return b;
}

Block make_custom(int p, int r, CustomModule spec) {
    Block b = base(BlockKind::FiniteLength, p, r);
    if (spec.gens.empty()) throw BlockError("custom module needs generators");
    int lo = spec.gens[0].grading, hi = lo;
    for (const auto& g : spec.gens) {
        if (g.order < 1) throw BlockError("custom generator order must be >= 1");
        lo = std::min(lo, g.grading);
        hi = std::max(hi, g.grading);
    }
    const int nidx = static_cast<int>(spec.gens.size());
    for (const auto* es : {&spec.F, &spec.V, &spec.D})
        for (const auto& e : *es)
            if (e.row < 0 || e.row >= nidx || e.col < 0 || e.col >= nidx)
                throw BlockError("custom entry index out of range");
    b.grade_lo = lo;
    b.grade_hi = hi;
    b.custom = std::make_shared<const CustomModule>(std::move(spec));
    b.coeur = "computed";
    return b;
}

TGM restrict_scalars(const TGM& w, int r) {
    TGM out = w;
    out.r = r;
    if (r == 1) {
        for (auto& pc : out.pieces) pc.T = Mat();
        return out;
    }
    GaloisRing gr(w.p, r, w.m);
    const Zpm R(w.p, w.m);
    const Mat& S = gr.sigma_matrix();
    const Mat& Si = gr.sigma_inv_matrix();
    const Mat C = gr.mult_matrix(gr.gen());
    const Mat I = Mat::identity(r);
    for (std::size_t k = 0; k < w.pieces.size(); ++k) {
        const auto& src = w.pieces[k];
        auto& dst = out.pieces[k];
        dst.mod.orders.clear();
        dst.labels.clear();
        for (int a = 0; a < src.gens(); ++a)
            for (int e = 0; e < r; ++e) {
                dst.mod.orders.push_back(src.mod.orders[a]);
                if (static_cast<int>(src.labels.size()) == src.gens())
                    dst.labels.push_back(src.labels[a] + (e ? "*t^" + std::to_string(e) : ""));
            }
        dst.F.mat = kron(src.F.mat, S, R);
        dst.V.mat = kron(src.V.mat, Si, R);
        dst.D.mat = kron(src.D.mat, I, R);
        dst.T = kron(Mat::identity(src.gens()), C, R);
    }
    return out;
}

TGM truncate(const Block& b, int m, int n) {
    if (m < 1 || n < 1) throw BlockError("truncation needs m, n >= 1");
    if (b.kind == BlockKind::FiniteLength) {
        TGM t = custom_truncation(b, m, n).target;
        t.n = n;
        return t;
    }
    return restrict_scalars(wlevel(b, m, n), b.r);
}

GradedMats transition(const Block& b, int mh, int nh, int ml, int nl) {
    if (mh < ml || nh < nl) throw BlockError("transition must go down in (m, n)");
    const Zpm Rl(b.p, ml);
    GradedMats out;
    if (b.kind == BlockKind::FiniteLength) {
        auto hi = custom_truncation(b, mh, nh);
        auto lo = custom_truncation(b, ml, nl);
        for (const auto& [g, sect] : hi.sect) {
            auto it = lo.proj.find(g);
            if (it == lo.proj.end()) continue;
            Mat red = mat_reduce(sect, Rl);
            Mat t = mat_mul(it->second, red, Rl);
            const auto& tgt = lo.target.at(g).mod;
            for (int j = 0; j < t.cols; ++j) t.set_col(j, tgt.normalize(t.col(j), Rl));
            out[g] = t;
        }
        return out;
    }
    TGM H = truncate(b, mh, nh), L = truncate(b, ml, nl);
    for (int g = H.lo; g <= H.hi(); ++g) {
        Mat t(L.gens(g), H.gens(g));
        if (L.has(g)) {
            const auto& hl = H.at(g).labels;
            const auto& ll = L.at(g).labels;
            for (int a = 0; a < static_cast<int>(ll.size()); ++a) {
                auto it = std::find(hl.begin(), hl.end(), ll[a]);
                if (it == hl.end()) throw BlockError("transition: missing label " + ll[a]);
                t(a, static_cast<int>(it - hl.begin())) = 1;
            }
        }
        out[g] = t;
    }
    return out;
}

FormalObject single(const Block& b, int gshift, int cshift) {
    FormalObject x;
    x.p = b.p;
    x.r = b.r;
    x.items.push_back({b, gshift, cshift});
    return x;
}

FormalObject shift(const FormalObject& x, int i, int j) {
    FormalObject y = x;
    for (auto& s : y.items) {
        s.gshift += i;
        s.cshift += j;
    }
    return y;
}

FormalObject direct_sum(const FormalObject& x, const FormalObject& y) {
    if (x.empty()) return y;
    if (y.empty()) return x;
    if (x.p != y.p || x.r != y.r) throw BlockError("direct_sum: parameter mismatch");
    FormalObject z = x;
    z.items.insert(z.items.end(), y.items.begin(), y.items.end());
    return z;
}

std::string describe(const Summand& s) {
    std::ostringstream os;
    os << s.block.name();
    if (s.gshift) os << "(" << s.gshift << ")";
    if (s.cshift) os << "[" << s.cshift << "]";
    return os.str();
}

std::string describe(const FormalObject& x) {
    if (x.empty()) return "0";
    std::string out;
    for (std::size_t k = 0; k < x.items.size(); ++k) {
        if (k) out += " + ";
        out += describe(x.items[k]);
    }
    return out;
}

TGM truncate_degree(const FormalObject& x, int degree, int m, int n) {
    TGM acc;
    acc.p = x.p;
    acc.r = x.r;
    acc.m = m;
    acc.n = n;
    for (const auto& s : x.items) {
        if (-s.cshift != degree) continue;
        TGM t = shift_grading(truncate(s.block, m, n), s.gshift);
        acc = acc.pieces.empty() ? t : direct_sum(acc, t);
    }
    return acc;
}

}  // namespace drw
