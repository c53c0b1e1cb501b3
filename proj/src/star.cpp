#include "drw/star.hpp"

#include "drw/module.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <sstream>
#include <tuple>

namespace drw {

namespace {

using Vec = std::vector<std::int64_t>;

void require_r1(const TGM& M, const char* what) {
    if (M.r != 1) throw StarError(std::string(what) + ": implemented for r = 1 only");
}

Vec unit(int n, int i) {
    Vec v(n, 0);
    v[i] = 1;
    return v;
}

Mat fmat(const TGM& X, int g) { return X.has(g) ? X.at(g).F.mat : Mat(0, 0); }
Mat vmat(const TGM& X, int g) { return X.has(g) ? X.at(g).V.mat : Mat(0, 0); }

// d: X^g -> X^{g+1}, always gens(g+1) x gens(g)
Mat dmat_full(const TGM& X, int g) {
    const int r = X.gens(g + 1), c = X.gens(g);
    if (!r || !c) return Mat(r, c);
    Mat d = X.dmat(g);
    return d.rows == r && d.cols == c ? d : Mat(r, c);
}

Vec apply(const Mat& A, const Vec& v, const Zpm& R) {
    if (A.rows == 0 || v.empty()) return Vec(A.rows, 0);
    return mat_vec(A, v, R);
}

Vec apply_pow(const Mat& A, Vec v, int e, const Zpm& R) {
    for (int k = 0; k < e; ++k) v = apply(A, v, R);
    return v;
}

// per-grading column accumulator
struct Acc {
    std::map<int, Vec> v;
    void add(int g, int pos, std::int64_t c, int size, const Zpm& R) {
        auto& x = v[g];
        if (x.empty()) x.assign(size, 0);
        x[pos] = R.add(x[pos], c);
    }
};

}  // namespace

// ---------------------------------------------------------------- presentation

int StarPresentation::grading(const StarSymbol& s) const {
    return s.ga + s.gb + (s.kind == StarSymbol::dV ? 1 : 0);
}

int StarPresentation::index(const StarSymbol& s) const {
    auto it = symbols.find(grading(s));
    if (it == symbols.end()) return -1;
    const auto& v = it->second;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const auto& t = v[k];
        if (t.kind == s.kind && t.s == s.s && t.ga == s.ga && t.ia == s.ia && t.gb == s.gb && t.ib == s.ib)
            return static_cast<int>(k);
    }
    return -1;
}

StarPresentation star_presentation(const TGM& M, const TGM& N, const StarOptions& opt) {
    require_r1(M, "star");
    require_r1(N, "star");
    if (M.p != N.p || M.m != N.m) throw StarError("star: parameter mismatch");
    const int n = std::min(M.n, N.n);
    const Zpm R(M.p, M.m);
    StarPresentation P;
    if (M.pieces.empty() || N.pieces.empty()) {
        P.ambient = P.module = make_tgm(M.p, 1, M.m, n, 0, 0);
        return P;
    }
    const int lo = M.lo + N.lo, hi = M.hi() + N.hi() + 1;

    using Key = std::tuple<int, int, int, int, int, int>;
    std::map<Key, std::pair<int, int>> where;
    std::map<int, std::vector<int>> orders;
    for (int g = lo; g <= hi; ++g) {
        auto& syms = P.symbols[g];
        auto push_pairs = [&](StarSymbol::Kind kind, int s, int total) {
            for (int ga = M.lo; ga <= M.hi(); ++ga) {
                const int gb = total - ga;
                for (int ia = 0; ia < M.gens(ga); ++ia)
                    for (int ib = 0; ib < N.gens(gb); ++ib) {
                        StarSymbol sym{kind, s, ga, ia, gb, ib};
                        where[{kind, s, ga, ia, gb, ib}] = {g, static_cast<int>(syms.size())};
                        syms.push_back(sym);
                        orders[g].push_back(std::min(M.at(ga).mod.orders[ia], N.at(gb).mod.orders[ib]));
                    }
            }
        };
        push_pairs(StarSymbol::Gen, 0, g);
        for (int s = 1; s < n; ++s) push_pairs(StarSymbol::V, s, g);
        for (int s = 1; s < n; ++s) push_pairs(StarSymbol::dV, s, g - 1);
        if (static_cast<int>(syms.size()) > opt.max_generators)
            throw StarError("star: truncation overflow (" + std::to_string(syms.size()) + " generators in grading " +
                            std::to_string(g) + ")");
    }
    auto size = [&](int g) { return static_cast<int>(P.symbols[g].size()); };

    // adds c * Kind_s(a, y) for a vector y in N^{gb}; V_0 means Gen, dV_0 means d(a * y)
    std::function<void(Acc&, StarSymbol::Kind, int, int, int, int, const Vec&, std::int64_t)> add_right;
    std::function<void(Acc&, StarSymbol::Kind, int, int, const Vec&, int, int, std::int64_t)> add_left;
    auto add_sym = [&](Acc& acc, StarSymbol::Kind kind, int s, int ga, int ia, int gb, int ib, std::int64_t c) {
        if (c % R.q == 0) return;
        if (kind == StarSymbol::V && s == 0) kind = StarSymbol::Gen;
        if (kind != StarSymbol::Gen && s >= n) return;
        if (kind == StarSymbol::dV && s == 0) {
            // d(a * b) = da * b + (-1)^{ga} a * db
            const Mat dA = dmat_full(M, ga), dB = dmat_full(N, gb);
            for (int a2 = 0; a2 < dA.rows; ++a2)
                if (dA(a2, ia)) add_right(acc, StarSymbol::Gen, 0, ga + 1, a2, gb, unit(N.gens(gb), ib), R.mul(c, dA(a2, ia)));
            const std::int64_t sg = ga % 2 ? -1 : 1;
            for (int b2 = 0; b2 < dB.rows; ++b2)
                if (dB(b2, ib)) {
                    auto it = where.find({StarSymbol::Gen, 0, ga, ia, gb + 1, b2});
                    if (it != where.end())
                        acc.add(it->second.first, it->second.second, R.mul(R.norm(sg * c), dB(b2, ib)), size(it->second.first), R);
                }
            return;
        }
        auto it = where.find({kind, kind == StarSymbol::Gen ? 0 : s, ga, ia, gb, ib});
        if (it == where.end()) return;
        acc.add(it->second.first, it->second.second, c, size(it->second.first), R);
    };
    add_right = [&](Acc& acc, StarSymbol::Kind kind, int s, int ga, int ia, int gb, const Vec& y, std::int64_t c) {
        for (int ib = 0; ib < static_cast<int>(y.size()); ++ib)
            if (y[ib]) add_sym(acc, kind, s, ga, ia, gb, ib, R.mul(c, y[ib]));
    };
    add_left = [&](Acc& acc, StarSymbol::Kind kind, int s, int ga, const Vec& x, int gb, int ib, std::int64_t c) {
        for (int ia = 0; ia < static_cast<int>(x.size()); ++ia)
            if (x[ia]) add_sym(acc, kind, s, ga, ia, gb, ib, R.mul(c, x[ia]));
    };

    // ambient operators
    P.ambient = make_tgm(M.p, 1, M.m, n, lo, hi);
    for (int g = lo; g <= hi; ++g) {
        auto& pc = P.ambient.at(g);
        pc.mod.orders = orders[g];
        const int k = size(g);
        pc.F.mat = Mat(k, k);
        pc.V.mat = Mat(k, k);
        pc.D.mat = Mat(g < hi ? size(g + 1) : 0, k);
        for (int j = 0; j < k; ++j) {
            const StarSymbol& s = P.symbols[g][j];
            const Vec ea = unit(M.gens(s.ga), s.ia), eb = unit(N.gens(s.gb), s.ib);
            Acc f, v, d;
            switch (s.kind) {
                case StarSymbol::Gen: {
                    const Vec fa = apply(fmat(M, s.ga), ea, R), fb = apply(fmat(N, s.gb), eb, R);
                    for (int a2 = 0; a2 < static_cast<int>(fa.size()); ++a2)
                        if (fa[a2]) add_right(f, StarSymbol::Gen, 0, s.ga, a2, s.gb, fb, fa[a2]);
                    add_sym(v, StarSymbol::V, 1, s.ga, s.ia, s.gb, s.ib, 1);
                    add_sym(d, StarSymbol::dV, 0, s.ga, s.ia, s.gb, s.ib, 1);
                    break;
                }
                case StarSymbol::V:
                    add_sym(f, StarSymbol::V, s.s - 1, s.ga, s.ia, s.gb, s.ib, M.p);
                    add_sym(v, StarSymbol::V, s.s + 1, s.ga, s.ia, s.gb, s.ib, 1);
                    add_sym(d, StarSymbol::dV, s.s, s.ga, s.ia, s.gb, s.ib, 1);
                    break;
                case StarSymbol::dV:
                    add_sym(f, StarSymbol::dV, s.s - 1, s.ga, s.ia, s.gb, s.ib, 1);
                    add_sym(v, StarSymbol::dV, s.s + 1, s.ga, s.ia, s.gb, s.ib, M.p);
                    break;
            }
            auto put = [&](Mat& X, Acc& acc, int tg) {
                auto it = acc.v.find(tg);
                if (it != acc.v.end() && X.rows) X.set_col(j, it->second);
            };
            put(pc.F.mat, f, g);
            put(pc.V.mat, v, g);
            if (g < hi) put(pc.D.mat, d, g + 1);
        }
    }

    // relation generators, then saturation under F, V, d
    std::map<int, SpanBuilder> span;
    std::map<int, std::deque<Vec>> work;
    for (int g = lo; g <= hi; ++g) {
        span.emplace(g, SpanBuilder(R, size(g)));
        for (int j = 0; j < size(g); ++j) {
            Vec e(size(g), 0);
            e[j] = R.ppow(orders[g][j]);
            if (e[j]) work[g].push_back(e);
        }
    }
    for (int ga = M.lo; ga <= M.hi(); ++ga)
        for (int gb = N.lo; gb <= N.hi(); ++gb)
            for (int ia = 0; ia < M.gens(ga); ++ia)
                for (int ib = 0; ib < N.gens(gb); ++ib) {
                    const Vec ea = unit(M.gens(ga), ia), eb = unit(N.gens(gb), ib);
                    const Vec fb = apply(fmat(N, gb), eb, R), va = apply(vmat(M, ga), ea, R);
                    const Vec fa = apply(fmat(M, ga), ea, R), vb = apply(vmat(N, gb), eb, R);
                    for (int s = 1; s <= n; ++s) {
                        // V^s(a * Fb) = V^{s-1}(Va * b)
                        Acc r1;
                        add_right(r1, StarSymbol::V, s, ga, ia, gb, fb, 1);
                        add_left(r1, StarSymbol::V, s - 1, ga, va, gb, ib, R.q - 1);
                        // V^s(Fa * b) = V^{s-1}(a * Vb)
                        Acc r2;
                        add_left(r2, StarSymbol::V, s, ga, fa, gb, ib, 1);
                        add_right(r2, StarSymbol::V, s - 1, ga, ia, gb, vb, R.q - 1);
                        for (auto* acc : {&r1, &r2})
                            for (auto& [g, v] : acc->v) work[g].push_back(v);
                    }
                }
    bool busy = true;
    while (busy) {
        busy = false;
        for (int g = lo; g <= hi; ++g) {
            auto& q = work[g];
            while (!q.empty()) {
                Vec v = std::move(q.front());
                q.pop_front();
                if (!span.at(g).insert(v)) continue;
                busy = true;
                // F maps the relation span into p times itself, so V and d suffice;
                // F would also propagate the depth cutoff downwards
                const auto& pc = P.ambient.at(g);
                work[g].push_back(mat_vec(pc.V.mat, v, R));
                if (g < hi && pc.D.mat.rows) work[g + 1].push_back(mat_vec(pc.D.mat, v, R));
            }
        }
    }
    GradedMats rel;
    for (int g = lo; g <= hi; ++g) {
        auto rows = span.at(g).rows();
        Mat G(size(g), static_cast<int>(rows.size()));
        for (int c = 0; c < G.cols; ++c) G.set_col(c, rows[c]);
        rel[g] = G;
    }
    auto Q = quotient(P.ambient, rel);
    P.module = Q.target;
    P.proj = Q.proj;
    P.sect = Q.sect;
    return P;
}

TGM star(const Block& a, const Block& b, int m, int n, const StarOptions& opt) {
    return star_presentation(truncate(a, m, n), truncate(b, m, n), opt).module;
}

// ---------------------------------------------------------------- closed form

bool frobenius_bijective(const TGM& N) {
    const Zpm R = N.ring();
    for (int g = N.lo; g <= N.hi(); ++g) {
        const auto& pc = N.at(g);
        if (!pc.gens()) continue;
        if (map_image_length(pc.F.mat, pc.mod, R) != pc.mod.length()) return false;
    }
    return true;
}

TGM star_frobenius_bijective(const TGM& M, const TGM& N) {
    require_r1(M, "star");
    require_r1(N, "star");
    if (!frobenius_bijective(N)) throw StarError("closed form inapplicable: F is not bijective on the second factor");
    const int n = std::min(M.n, N.n);
    const Zpm R(M.p, M.m);
    const int lo = M.lo + N.lo, hi = M.hi() + N.hi() + 1;
    TGM T = make_tgm(M.p, 1, M.m, n, lo, hi);

    std::map<int, Mat> Finv;
    for (int g = N.lo; g <= N.hi(); ++g) {
        const auto& pc = N.at(g);
        Mat inv(pc.gens(), pc.gens());
        for (int b = 0; b < pc.gens(); ++b) {
            auto x = map_preimage(pc.F.mat, pc.mod, unit(pc.gens(), b), R);
            if (!x) throw StarError("closed form inapplicable: F is not bijective on the second factor");
            inv.set_col(b, pc.mod.normalize(*x, R));
        }
        Finv[g] = inv;
    }
    using Key = std::tuple<int, int, int, int>;
    std::map<Key, std::pair<int, int>> where;
    std::map<int, std::vector<Key>> basis;
    for (int g = lo; g <= hi; ++g)
        for (int ga = M.lo; ga <= M.hi(); ++ga) {
            const int gb = g - ga;
            for (int ia = 0; ia < M.gens(ga); ++ia)
                for (int ib = 0; ib < N.gens(gb); ++ib) {
                    where[{ga, ia, gb, ib}] = {g, static_cast<int>(basis[g].size())};
                    basis[g].push_back({ga, ia, gb, ib});
                    T.at(g).mod.orders.push_back(std::min(M.at(ga).mod.orders[ia], N.at(gb).mod.orders[ib]));
                }
        }
    auto add_tensor = [&](Acc& acc, int ga, const Vec& x, int gb, const Vec& y, std::int64_t c) {
        for (int ia = 0; ia < static_cast<int>(x.size()); ++ia) {
            if (!x[ia]) continue;
            for (int ib = 0; ib < static_cast<int>(y.size()); ++ib) {
                if (!y[ib]) continue;
                auto it = where.find({ga, ia, gb, ib});
                if (it == where.end()) continue;
                acc.add(it->second.first, it->second.second, R.mul(c, R.mul(x[ia], y[ib])),
                        static_cast<int>(basis[it->second.first].size()), R);
            }
        }
    };
    for (int g = lo; g <= hi; ++g) {
        auto& pc = T.at(g);
        const int k = static_cast<int>(basis[g].size());
        pc.F.mat = Mat(k, k);
        pc.V.mat = Mat(k, k);
        pc.D.mat = Mat(g < hi ? static_cast<int>(basis[g + 1].size()) : 0, k);
        for (int j = 0; j < k; ++j) {
            auto [ga, ia, gb, ib] = basis[g][j];
            const Vec ea = unit(M.gens(ga), ia), eb = unit(N.gens(gb), ib);
            Acc f, v, d;
            add_tensor(f, ga, apply(fmat(M, ga), ea, R), gb, apply(fmat(N, gb), eb, R), 1);
            add_tensor(v, ga, apply(vmat(M, ga), ea, R), gb, apply(Finv[gb], eb, R), 1);
            add_tensor(d, ga + 1, apply(dmat_full(M, ga), ea, R), gb, eb, 1);
            add_tensor(d, ga, ea, gb + 1, apply(dmat_full(N, gb), eb, R), ga % 2 ? R.q - 1 : 1);
            if (f.v.count(g)) pc.F.mat.set_col(j, pc.mod.normalize(f.v[g], R));
            if (v.v.count(g)) pc.V.mat.set_col(j, pc.mod.normalize(v.v[g], R));
            if (g < hi && d.v.count(g + 1)) pc.D.mat.set_col(j, T.at(g + 1).mod.normalize(d.v[g + 1], R));
        }
    }
    return T;
}

GradedMats star_comparison(const StarPresentation& P, const TGM& closed) {
    GradedMats f;
    const Zpm R = P.module.ring();
    for (int g = closed.lo; g <= closed.hi(); ++g) {
        const int k = closed.gens(g);
        Mat X(P.module.gens(g), k);
        int j = 0;
        auto it = P.symbols.find(g);
        if (it != P.symbols.end())
            for (std::size_t pos = 0; pos < it->second.size() && j < k; ++pos)
                if (it->second[pos].kind == StarSymbol::Gen) {
                    X.set_col(j, P.module.at(g).mod.normalize(P.proj.at(g).col(static_cast<int>(pos)), R));
                    ++j;
                }
        f[g] = X;
    }
    return f;
}

GradedMats star_unit_map(const StarPresentation& P, const TGM& M) {
    GradedMats f;
    const Zpm R = P.module.ring();
    for (int g = M.lo; g <= M.hi(); ++g) {
        Mat X(P.module.has(g) ? P.module.gens(g) : 0, M.gens(g));
        for (int a = 0; a < M.gens(g); ++a) {
            const int pos = P.index(StarSymbol{StarSymbol::Gen, 0, g, a, 0, 0});
            if (pos < 0) throw StarError("unit map: second factor is not W");
            X.set_col(a, P.module.at(g).mod.normalize(P.proj.at(g).col(pos), R));
        }
        f[g] = X;
    }
    return f;
}

GradedMats star_swap(const StarPresentation& MN, const StarPresentation& NM) {
    GradedMats f;
    const Zpm R = MN.module.ring();
    for (const auto& [g, syms] : MN.symbols) {
        if (!MN.module.has(g)) continue;
        const int rows = NM.module.has(g) ? NM.module.gens(g) : 0;
        Mat S(rows, static_cast<int>(syms.size()));
        for (std::size_t j = 0; j < syms.size(); ++j) {
            const auto& s = syms[j];
            StarSymbol t{s.kind, s.s, s.gb, s.ib, s.ga, s.ia};
            const int pos = NM.index(t);
            if (pos < 0 || !rows) continue;
            const std::int64_t sign = (s.ga * s.gb) % 2 ? R.q - 1 : 1;
            S.set_col(static_cast<int>(j), mat_vec(mat_scale(NM.proj.at(g), sign, R), unit(NM.ambient.gens(g), pos), R));
        }
        Mat X = rows ? mat_mul(S, MN.sect.at(g), R) : Mat(0, MN.module.gens(g));
        for (int c = 0; c < X.cols; ++c) X.set_col(c, NM.module.at(g).mod.normalize(X.col(c), R));
        f[g] = X;
    }
    return f;
}

bool same_presentation(const TGM& A, const TGM& B, const GradedMats& f) {
    const int lo = std::min(A.lo, B.lo), hi = std::max(A.hi(), B.hi());
    for (int g = lo; g <= hi; ++g) {
        auto oa = A.has(g) ? A.at(g).mod.orders : std::vector<int>{};
        auto ob = B.has(g) ? B.at(g).mod.orders : std::vector<int>{};
        std::erase(oa, 0);
        std::erase(ob, 0);
        std::sort(oa.begin(), oa.end());
        std::sort(ob.begin(), ob.end());
        if (oa != ob) return false;
    }
    return is_iso(f, A, B);
}

std::map<int, int> r1_quotient_dims(const TGM& M) {
    std::map<int, int> out;
    if (M.pieces.empty()) return out;
    const Zpm R = M.ring();
    auto F1 = fil(M, std::min(1, M.n));
    for (int g = M.lo; g <= M.hi(); ++g) {
        const auto& mod = M.at(g).mod;
        const int len = mod.length() - (F1[g].cols ? sub_length(mod, F1[g], R) : 0);
        if (len) out[g] = len / M.r;
    }
    return out;
}

// ---------------------------------------------------------------- bands

const char* band_name(BandKind k) {
    switch (k) {
        case BandKind::V: return "V";
        case BandKind::F: return "F";
        case BandKind::dV: return "dV";
        case BandKind::Fd: return "Fd";
    }
    return "?";
}

namespace {

bool band_ok(BandKind k, int i, int n, int f) {
    if (k == BandKind::V || k == BandKind::dV) return i >= 1 && i < n;
    return i >= 0 && i < f;
}

int band_shift(BandKind k) { return k == BandKind::dV || k == BandKind::Fd ? 1 : 0; }

}  // namespace

int StarWithR::position(BandKind k, int index, int ngrading, int nindex) const {
    auto it = layout.find(ngrading + band_shift(k));
    if (it == layout.end()) return -1;
    const auto& v = it->second;
    for (std::size_t j = 0; j < v.size(); ++j)
        if (v[j].kind == k && v[j].index == index && v[j].ngrading == ngrading && v[j].nindex == nindex)
            return static_cast<int>(j);
    return -1;
}

namespace {

struct BandBuilder {
    const TGM& N;
    StarWithR& S;
    Zpm R;
    std::map<std::tuple<int, int, int, int>, int> pos;

    void add(Acc& acc, BandKind k, int i, int g, const Vec& x, std::int64_t c) const {
        if (!band_ok(k, i, S.n, S.fdepth) || c % R.q == 0 || x.empty()) return;
        const int G = g + band_shift(k);
        if (!S.layout.count(G)) return;
        const int size = static_cast<int>(S.layout.at(G).size());
        for (int b = 0; b < static_cast<int>(x.size()); ++b) {
            if (!x[b]) continue;
            auto it = pos.find({static_cast<int>(k), i, g, b});
            if (it != pos.end()) acc.add(G, it->second, R.mul(c, x[b]), size, R);
        }
    }
};

}  // namespace

StarWithR star_with_R(const TGM& N, int n, int fdepth, bool completed) {
    require_r1(N, "star_with_R");
    StarWithR S;
    S.n = n;
    S.fdepth = fdepth;
    S.completed = completed;
    S.bands = {{BandKind::V, 1, n - 1, 0, completed},
               {BandKind::F, 0, fdepth - 1, 0, false},
               {BandKind::dV, 1, n - 1, 1, completed},
               {BandKind::Fd, 0, fdepth - 1, 1, false}};
    const Zpm R = N.ring();
    S.module = make_tgm(N.p, 1, N.m, n, N.lo, N.hi() + 1);
    BandBuilder B{N, S, R, {}};
    for (int G = N.lo; G <= N.hi() + 1; ++G) {
        auto& lay = S.layout[G];
        for (BandKind k : {BandKind::V, BandKind::F, BandKind::dV, BandKind::Fd}) {
            const int g = G - band_shift(k);
            if (!N.has(g)) continue;
            const int i0 = k == BandKind::V || k == BandKind::dV ? 1 : 0;
            const int i1 = k == BandKind::V || k == BandKind::dV ? n - 1 : fdepth - 1;
            for (int i = i0; i <= i1; ++i)
                for (int b = 0; b < N.gens(g); ++b) {
                    B.pos[{static_cast<int>(k), i, g, b}] = static_cast<int>(lay.size());
                    lay.push_back({k, i, g, b});
                    S.module.at(G).mod.orders.push_back(N.at(g).mod.orders[b]);
                }
        }
    }
    const std::int64_t p = N.p, mone = R.q - 1;
    for (int G = N.lo; G <= N.hi() + 1; ++G) {
        auto& pc = S.module.at(G);
        const int k = static_cast<int>(S.layout[G].size());
        const int k1 = G < N.hi() + 1 ? static_cast<int>(S.layout[G + 1].size()) : 0;
        pc.F.mat = Mat(k, k);
        pc.V.mat = Mat(k, k);
        pc.D.mat = Mat(k1, k);
        for (int j = 0; j < k; ++j) {
            const auto c = S.layout[G][j];
            const int g = c.ngrading, i = c.index;
            const Vec e = unit(N.gens(g), c.nindex);
            const Vec de = apply(dmat_full(N, g), e, R);
            Acc F, V, D;
            switch (c.kind) {
                case BandKind::V:
                    if (i >= 2) B.add(F, BandKind::V, i - 1, g, e, p);
                    else B.add(F, BandKind::F, 0, g, e, p);
                    B.add(V, BandKind::V, i + 1, g, e, 1);
                    B.add(D, BandKind::dV, i, g, e, 1);
                    break;
                case BandKind::F:
                    B.add(F, BandKind::F, i + 1, g, apply(fmat(N, g), e, R), 1);
                    if (i >= 1) B.add(V, BandKind::F, i - 1, g, apply(vmat(N, g), e, R), 1);
                    else B.add(V, BandKind::V, 1, g, e, 1);
                    B.add(D, BandKind::Fd, i, g, e, R.ppow(i));
                    B.add(D, BandKind::F, i, g + 1, de, 1);
                    break;
                case BandKind::dV:
                    if (i >= 2) {
                        B.add(F, BandKind::dV, i - 1, g, e, 1);
                    } else {
                        B.add(F, BandKind::Fd, 0, g, e, 1);
                        B.add(F, BandKind::F, 0, g + 1, de, 1);
                    }
                    B.add(V, BandKind::dV, i + 1, g, e, p);
                    break;
                case BandKind::Fd:
                    B.add(F, BandKind::Fd, i + 1, g, apply(fmat(N, g), e, R), 1);
                    if (i >= 1) {
                        B.add(V, BandKind::Fd, i - 1, g, apply(vmat(N, g), e, R), 1);
                    } else {
                        B.add(V, BandKind::dV, 1, g, e, p);
                        B.add(V, BandKind::V, 1, g + 1, de, mone);
                    }
                    B.add(D, BandKind::Fd, i, g + 1, de, mone);
                    break;
            }
            if (F.v.count(G)) pc.F.mat.set_col(j, pc.mod.normalize(F.v[G], R));
            if (V.v.count(G)) pc.V.mat.set_col(j, pc.mod.normalize(V.v[G], R));
            if (k1 && D.v.count(G + 1)) pc.D.mat.set_col(j, S.module.at(G + 1).mod.normalize(D.v[G + 1], R));
        }
    }
    return S;
}

// ---------------------------------------------------------------- identification

namespace {

// isomorphism invariants that avoid Hom: lengths of M, VM, dM and pM per grading
std::vector<int> fingerprint(const TGM& M, int lo, int hi) {
    const Zpm R = M.ring();
    std::vector<int> out;
    for (int g = lo; g <= hi; ++g) {
        if (!M.has(g) || M.gens(g) == 0) {
            out.insert(out.end(), {0, 0, 0, 0});
            continue;
        }
        const Piece& pc = M.at(g);
        out.push_back(pc.mod.length());
        out.push_back(pc.V.mat.cols ? sub_length(pc.mod, pc.V.mat, R) : 0);
        out.push_back(M.has(g + 1) && M.gens(g + 1) && pc.D.mat.cols ? sub_length(M.at(g + 1).mod, pc.D.mat, R) : 0);
        Mat pm = Mat::identity(pc.gens());
        for (int j = 0; j < pm.rows; ++j) pm(j, j) = M.p % R.q;
        out.push_back(sub_length(pc.mod, pm, R));
    }
    return out;
}

}  // namespace

Identified identify(const TGM& M) {
    Identified out;
    out.module = M;
    if (M.pieces.empty() || M.total_length() == 0) {
        out.status = Identification::Identified;
        out.name = "0";
        return out;
    }
    std::vector<Block> cands;
    for (int t = -3; t <= 3; ++t) cands.push_back(make_domino(M.p, 1, t));
    cands.push_back(make_unit_w(M.p));
    cands.push_back(make_residue_k(M.p));
    cands.push_back(make_dalphap(M.p));
    for (auto [i, j] : {std::pair{1, 1}, {1, 2}, {2, 1}}) cands.push_back(make_dieudonne(M.p, 1, i, j));
    for (const auto& b : cands)
        for (int depth = std::max(1, M.n - 2); depth <= M.n + 1; ++depth) {
            TGM model = truncate(b, M.m, depth);
            model.n = M.n;
            bool same = true;
            for (int g = std::min(M.lo, model.lo); g <= std::max(M.hi(), model.hi()) && same; ++g)
                same = M.length(g) == model.length(g);
            if (!same) continue;
            TGM a = model, c = M;
            const int lo = std::min(a.lo, c.lo), hi = std::max(a.hi(), c.hi());
            if (fingerprint(a, lo, hi) != fingerprint(c, lo, hi)) continue;
            widen(a, lo, hi);
            widen(c, lo, hi);
            if (find_iso(a, c)) {
                out.status = Identification::Identified;
                out.name = b.name();
                out.depth = depth;
                return out;
            }
        }
    out.name = "unidentified";
    return out;
}

// ---------------------------------------------------------------- derived

std::string DerivedStar::summary() const { return "H^-1: " + h_minus1.name + ", H^0: " + h0.name; }

DerivedStar derived_star(const Block& E, const Block& N, int m, int n) {
    if (E.kind != BlockKind::Dieudonne) throw StarError("derived star: first factor must be a Dieudonne block");
    if (E.r != 1 || N.r != 1) throw StarError("derived star: implemented for r = 1 only");
    const int a = E.i, b = E.j;
    const int nb = n + 3;
    const int f = nb + 2 * (m + a + b) + 2;
    const TGM Nt = truncate(N, m, nb);
    const Zpm R(N.p, m);
    StarWithR S = star_with_R(Nt, nb, f);
    const TGM& B = S.module;

    BandBuilder BB{Nt, S, R, {}};
    for (const auto& [G, lay] : S.layout)
        for (std::size_t j = 0; j < lay.size(); ++j)
            BB.pos[{static_cast<int>(lay[j].kind), lay[j].index, lay[j].ngrading, lay[j].nindex}] = static_cast<int>(j);

    auto vec_in = [&](Acc& acc, int G) {
        auto it = acc.v.find(G);
        return it != acc.v.end() ? it->second : Vec(B.gens(G), 0);
    };
    // image of 1 * e under right multiplication by F^a - V^b
    auto phi_unit = [&](int g, const Vec& e) {
        Acc acc;
        BB.add(acc, BandKind::F, a, g, e, 1);
        if (b == 0) BB.add(acc, BandKind::F, 0, g, e, R.q - 1);
        else BB.add(acc, BandKind::V, b, g, apply_pow(fmat(Nt, g), e, b, R), R.q - 1);
        return vec_in(acc, g);
    };

    std::map<int, Mat> Phi;
    std::map<int, std::vector<int>> keep;
    for (int G = B.lo; G <= B.hi(); ++G) {
        const auto& lay = S.layout[G];
        Mat X(B.gens(G), static_cast<int>(lay.size()));
        for (std::size_t j = 0; j < lay.size(); ++j) {
            const auto c = lay[j];
            const int g = c.ngrading, i = c.index;
            const Vec e = unit(Nt.gens(g), c.nindex);
            Vec col;
            bool inside = true;
            switch (c.kind) {
                case BandKind::F: {
                    inside = i + a < f;
                    Acc acc;
                    BB.add(acc, BandKind::F, i + a, g, e, 1);
                    if (i >= b) BB.add(acc, BandKind::F, i - b, g, e, R.norm(-R.ppow(b)));
                    else BB.add(acc, BandKind::V, b - i, g, apply_pow(fmat(Nt, g), e, b - i, R), R.norm(-R.ppow(i)));
                    col = vec_in(acc, G);
                    break;
                }
                case BandKind::Fd: {
                    inside = i + a < f;
                    Acc acc;
                    BB.add(acc, BandKind::Fd, i + a, g, e, R.ppow(a));
                    if (i >= b) {
                        BB.add(acc, BandKind::Fd, i - b, g, e, R.q - 1);
                    } else {
                        const int k = b - i;
                        BB.add(acc, BandKind::dV, k, g, apply_pow(fmat(Nt, g), e, k, R), R.q - 1);
                        const Vec fde = apply_pow(fmat(Nt, g + 1), apply(dmat_full(Nt, g), e, R), k, R);
                        BB.add(acc, BandKind::V, k, g + 1, fde, 1);
                    }
                    col = vec_in(acc, G);
                    break;
                }
                case BandKind::V:
                    col = apply_pow(B.at(G).V.mat, phi_unit(g, e), i, R);
                    break;
                case BandKind::dV: {
                    const Vec v = apply_pow(B.at(g).V.mat, phi_unit(g, e), i, R);
                    col = apply(dmat_full(B, g), v, R);
                    break;
                }
            }
            // boundary columns lose their top F band term; they still count
            // towards the image, where that band is zero, but not the kernel
            if (inside) keep[G].push_back(static_cast<int>(j));
            X.set_col(static_cast<int>(j), B.at(G).mod.normalize(col, R));
        }
        Phi[G] = X;
    }

    // pass to depth n and read off kernel and cokernel
    auto Q = quotient(B, fil(B, n));
    TGM Bn = Q.target;
    Bn.n = n;
    GradedMats kern_n, img_n;
    for (int G = B.lo; G <= B.hi(); ++G) {
        const auto& cols = keep[G];
        Mat src(B.gens(G), static_cast<int>(cols.size()));
        Presented srcmod;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            src.set_col(static_cast<int>(c), Phi[G].col(cols[c]));
            srcmod.orders.push_back(B.at(G).mod.orders[cols[c]]);
        }
        const Mat K = map_kernel(src, srcmod, B.at(G).mod, R);
        Mat Kb(B.gens(G), K.cols);
        for (int c = 0; c < K.cols; ++c)
            for (std::size_t r = 0; r < cols.size(); ++r) Kb(cols[r], c) = K(static_cast<int>(r), c);
        kern_n[G] = mat_mul(Q.proj[G], Kb, R);
        // the deepest F bands are hit from beyond the cutoff (or are p-adically
        // zero), so they are dropped from the cokernel
        Mat img = Phi[G];
        for (std::size_t j = 0; j < S.layout[G].size(); ++j) {
            const auto& c = S.layout[G][j];
            if ((c.kind != BandKind::F && c.kind != BandKind::Fd) || c.index < f - a - b) continue;
            Mat u(B.gens(G), 1);
            u(static_cast<int>(j), 0) = 1;
            img = hcat(img, u);
        }
        img_n[G] = mat_mul(Q.proj[G], img, R);
    }
    GradedMats incl;
    TGM H1 = submodule(Bn, kern_n, &incl);
    TGM H0 = quotient(Bn, img_n).target;
    trim(H1);
    trim(H0);

    DerivedStar out;
    out.m = m;
    out.n = n;
    out.h_minus1 = identify(H1);
    out.h0 = identify(H0);

    // band support of the kernel
    std::map<std::pair<int, int>, std::pair<int, int>> ranges;
    for (const auto& [G, Kn] : kern_n) {
        const Mat lift = mat_mul(Q.sect[G], Kn, R);
        for (int c = 0; c < lift.cols; ++c)
            for (int r = 0; r < lift.rows; ++r) {
                if (!B.at(G).mod.normalize(lift.col(c), R)[r]) continue;
                const auto& co = S.layout[G][r];
                const auto key = std::pair{G, static_cast<int>(co.kind)};
                auto it = ranges.find(key);
                if (it == ranges.end()) ranges[key] = {co.index, co.index};
                else it->second = {std::min(it->second.first, co.index), std::max(it->second.second, co.index)};
            }
    }
    for (const auto& [key, rg] : ranges) {
        std::ostringstream os;
        os << "grading " << key.first << ": " << band_name(static_cast<BandKind>(key.second)) << "^" << rg.first
           << ".." << rg.second;
        out.kernel_bands.push_back(os.str());
    }
    return out;
}

}  // namespace drw
