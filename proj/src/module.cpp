#include "drw/module.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace drw {

Twist compose(Twist a, Twist b) {
    if (a == Twist::Id) return b;
    if (b == Twist::Id) return a;
    if (a != b) return Twist::Id;
    throw LinalgError("twist exponent outside {-1, 0, 1}");
}

const Piece& TGM::at(int i) const {
    if (!has(i)) throw std::out_of_range("grading outside module range");
    return pieces[static_cast<std::size_t>(i - lo)];
}

Piece& TGM::at(int i) {
    if (!has(i)) throw std::out_of_range("grading outside module range");
    return pieces[static_cast<std::size_t>(i - lo)];
}

int TGM::total_length() const {
    int s = 0;
    for (const auto& pc : pieces) s += pc.mod.length();
    return s;
}

Mat TGM::dmat(int i) const {
    if (!has(i)) return Mat(gens(i + 1), 0);
    const Mat& D = at(i).D.mat;
    if (D.rows != gens(i + 1) || D.cols != gens(i)) return Mat(gens(i + 1), gens(i));
    return D;
}

namespace {

Piece empty_piece() {
    Piece pc;
    pc.F.mat = Mat(0, 0);
    pc.V.mat = Mat(0, 0);
    pc.D.mat = Mat(0, 0);
    return pc;
}

Mat mat_pow(const Mat& A, int e, const Zpm& R) {
    Mat out = Mat::identity(A.rows);
    for (int i = 0; i < e; ++i) out = mat_mul(A, out, R);
    return out;
}

// span of relations of N^g plus extra columns
SpanBuilder span_with(const Presented& N, const Mat* extra, const Zpm& R) {
    SpanBuilder sb(R, N.gens());
    for (int i = 0; i < N.gens(); ++i) {
        std::vector<std::int64_t> e(N.gens(), 0);
        e[i] = R.ppow(N.orders[i]);
        if (e[i]) sb.insert(e);
    }
    if (extra)
        for (int j = 0; j < extra->cols; ++j) sb.insert(extra->col(j));
    return sb;
}

std::vector<std::int64_t> unit(int n, int j) {
    std::vector<std::int64_t> e(n, 0);
    e[j] = 1;
    return e;
}

}  // namespace

TGM make_tgm(int p, int r, int m, int n, int lo, int hi) {
    TGM M;
    M.p = p;
    M.r = r;
    M.m = m;
    M.n = n;
    M.lo = lo;
    for (int i = lo; i <= hi; ++i) M.pieces.push_back(empty_piece());
    return M;
}

void widen(TGM& M, int lo, int hi) {
    if (M.pieces.empty()) {
        M.lo = lo;
        for (int i = lo; i <= hi; ++i) M.pieces.push_back(empty_piece());
        return;
    }
    while (M.lo > lo) {
        M.pieces.insert(M.pieces.begin(), empty_piece());
        M.lo--;
        // D from the new grading into the old lowest one
        M.pieces.front().D.mat = Mat(M.pieces[1].gens(), 0);
    }
    while (M.hi() < hi) {
        M.pieces.back().D.mat = Mat(0, M.pieces.back().gens());
        M.pieces.push_back(empty_piece());
    }
}

void trim(TGM& M) {
    while (!M.pieces.empty() && M.pieces.back().gens() == 0) M.pieces.pop_back();
    while (!M.pieces.empty() && M.pieces.front().gens() == 0) {
        M.pieces.erase(M.pieces.begin());
        M.lo++;
    }
    if (!M.pieces.empty()) {
        auto& last = M.pieces.back();
        last.D.mat = Mat(0, last.gens());
    }
}

GradedMats fil(const TGM& M, int s) {
    if (s < 0 || s > M.n) throw std::out_of_range("filtration index out of range");
    const Zpm R = M.ring();
    GradedMats out;
    for (int i = M.lo; i <= M.hi(); ++i) {
        const int g = M.gens(i);
        if (s == 0) {
            out[i] = Mat::identity(g);
            continue;
        }
        Mat gens = mat_pow(M.at(i).V.mat, s, R);
        if (M.has(i - 1) && M.gens(i - 1) > 0) {
            Mat dv = mat_mul(M.dmat(i - 1), mat_pow(M.at(i - 1).V.mat, s, R), R);
            gens = hcat(gens, dv);
        }
        if (gens.rows != g) gens = Mat(g, 0);
        out[i] = gens;
    }
    return out;
}

TGMQuotient quotient(const TGM& M, const GradedMats& sub) {
    const Zpm R = M.ring();
    TGMQuotient Q;
    Q.target = make_tgm(M.p, M.r, M.m, M.n, M.lo, M.hi());
    std::map<int, QuotientData> qd;
    for (int i = M.lo; i <= M.hi(); ++i) {
        auto it = sub.find(i);
        Mat g = it != sub.end() ? it->second : Mat(M.gens(i), 0);
        qd[i] = drw::quotient(M.at(i).mod, g, R);
        Q.proj[i] = qd[i].proj;
        Q.sect[i] = qd[i].sect;
    }
    for (int i = M.lo; i <= M.hi(); ++i) {
        const auto& src = M.at(i);
        auto& dst = Q.target.at(i);
        const auto& q = qd[i];
        dst.mod = q.target;
        dst.F.mat = mat_mul(mat_mul(q.proj, src.F.mat, R), q.sect, R);
        dst.V.mat = mat_mul(mat_mul(q.proj, src.V.mat, R), q.sect, R);
        if (M.r > 1) dst.T = mat_mul(mat_mul(q.proj, src.T, R), q.sect, R);
        if (M.has(i + 1))
            dst.D.mat = mat_mul(mat_mul(qd[i + 1].proj, M.dmat(i), R), q.sect, R);
        else
            dst.D.mat = Mat(0, q.target.gens());
        for (int a = 0; a < dst.F.mat.rows; ++a) {
            dst.F.mat.set_col(a, dst.mod.normalize(dst.F.mat.col(a), R));
            dst.V.mat.set_col(a, dst.mod.normalize(dst.V.mat.col(a), R));
        }
    }
    return Q;
}

TGM submodule(const TGM& M, const GradedMats& gens, GradedMats* incl) {
    if (M.r != 1) throw std::invalid_argument("submodule: r = 1 only");
    const Zpm R = M.ring();
    TGM K = make_tgm(M.p, M.r, M.m, M.n, M.lo, M.hi());
    std::map<int, Mat> G;
    std::map<int, Presented> free;
    std::map<int, QuotientData> qd;
    std::map<int, Mat> inc;
    const GradedMats slack = M.n >= 1 ? fil(M, M.n - 1) : GradedMats{};
    for (int i = M.lo; i <= M.hi(); ++i) {
        auto it = gens.find(i);
        G[i] = it != gens.end() && it->second.cols ? it->second : Mat(M.gens(i), 0);
        free[i].orders.assign(G[i].cols, M.m);
        const Mat rel = map_kernel(G[i], free[i], M.at(i).mod, R);
        qd[i] = drw::quotient(free[i], rel, R);
        inc[i] = mat_mul(G[i], qd[i].sect, R);
        K.at(i).mod = qd[i].target;
    }
    // expresses v in grading i through the generators, optionally modulo Fil^{n-1}
    auto express = [&](int i, const std::vector<std::int64_t>& v, bool loose) {
        Mat A = G[i];
        if (loose) {
            auto it = slack.find(i);
            if (it != slack.end() && it->second.cols) A = hcat(A, it->second);
        }
        auto x = map_preimage(A, M.at(i).mod, v, R);
        if (!x) throw std::runtime_error("submodule: generators are not stable");
        x->resize(G[i].cols);
        return mat_vec(qd[i].proj, *x, R);
    };
    for (int i = M.lo; i <= M.hi(); ++i) {
        const int k = K.gens(i);
        auto& pc = K.at(i);
        pc.F.mat = Mat(k, k);
        pc.V.mat = Mat(k, k);
        const int k1 = K.has(i + 1) ? K.gens(i + 1) : 0;
        pc.D.mat = Mat(k1, k);
        for (int j = 0; j < k; ++j) {
            const auto col = inc[i].col(j);
            pc.F.mat.set_col(j, pc.mod.normalize(express(i, mat_vec(M.at(i).F.mat, col, R), true), R));
            pc.V.mat.set_col(j, pc.mod.normalize(express(i, mat_vec(M.at(i).V.mat, col, R), false), R));
            if (k1) pc.D.mat.set_col(j, K.at(i + 1).mod.normalize(express(i + 1, mat_vec(M.dmat(i), col, R), false), R));
        }
    }
    if (incl) *incl = inc;
    return K;
}

TGM shift_grading(const TGM& M, int a) {
    TGM out = M;
    out.lo = M.lo - a;
    return out;
}

TGM direct_sum(const TGM& A, const TGM& B) {
    if (A.pieces.empty()) return B;
    if (B.pieces.empty()) return A;
    if (A.p != B.p || A.r != B.r || A.m != B.m || A.n != B.n)
        throw std::invalid_argument("direct_sum: parameter mismatch");
    const int lo = std::min(A.lo, B.lo), hi = std::max(A.hi(), B.hi());
    TGM S = make_tgm(A.p, A.r, A.m, A.n, lo, hi);
    for (int i = lo; i <= hi; ++i) {
        auto& dst = S.at(i);
        const int ga = A.gens(i), gb = B.gens(i);
        auto get = [](const TGM& X, int i, int which) -> Mat {
            if (!X.has(i)) return Mat(0, 0);
            const auto& pc = X.at(i);
            if (which == 0) return pc.F.mat;
            if (which == 1) return pc.V.mat;
            return pc.T;
        };
        dst.mod.orders.clear();
        if (A.has(i)) dst.mod.orders = A.at(i).mod.orders;
        if (B.has(i)) dst.mod.orders.insert(dst.mod.orders.end(), B.at(i).mod.orders.begin(), B.at(i).mod.orders.end());
        dst.F.mat = block_diag(ga ? get(A, i, 0) : Mat(0, 0), gb ? get(B, i, 0) : Mat(0, 0));
        dst.V.mat = block_diag(ga ? get(A, i, 1) : Mat(0, 0), gb ? get(B, i, 1) : Mat(0, 0));
        if (A.r > 1) dst.T = block_diag(ga ? get(A, i, 2) : Mat(0, 0), gb ? get(B, i, 2) : Mat(0, 0));
        Mat da = A.has(i) ? A.dmat(i) : Mat(A.gens(i + 1), 0);
        Mat db = B.has(i) ? B.dmat(i) : Mat(B.gens(i + 1), 0);
        if (da.rows != A.gens(i + 1)) da = Mat(A.gens(i + 1), ga);
        if (db.rows != B.gens(i + 1)) db = Mat(B.gens(i + 1), gb);
        dst.D.mat = block_diag(da, db);
        std::vector<std::string> la = A.has(i) ? A.at(i).labels : std::vector<std::string>{};
        std::vector<std::string> lb = B.has(i) ? B.at(i).labels : std::vector<std::string>{};
        if (static_cast<int>(la.size()) == ga && static_cast<int>(lb.size()) == gb) {
            dst.labels = la;
            dst.labels.insert(dst.labels.end(), lb.begin(), lb.end());
        }
    }
    return S;
}

Mat twisted_scalar(const TGM& M, int i, Twist tw) {
    const Zpm R = M.ring();
    const Mat& T = M.at(i).T;
    const int g = M.gens(i);
    if (M.r == 1 || tw == Twist::Id) return T;
    GaloisRing gr(M.p, M.r, M.m);
    auto c = tw == Twist::Sigma ? gr.sigma(gr.gen()) : gr.sigma_inv(gr.gen());
    Mat out(g, g), tk = Mat::identity(g);
    for (int k = 0; k < M.r; ++k) {
        out = mat_add(out, mat_scale(tk, c[k], R), R);
        tk = mat_mul(T, tk, R);
    }
    return out;
}

std::vector<Violation> check_relations(const TGM& M) {
    std::vector<Violation> out;
    const Zpm R = M.ring();
    const GradedMats filF = fil(M, std::max(0, M.n - 1));
    auto report = [&](const char* what, int i, std::vector<std::int64_t> w) {
        out.push_back({what, i, std::move(w)});
    };
    for (int i = M.lo; i <= M.hi(); ++i) {
        const auto& pc = M.at(i);
        const int g = pc.gens();
        if (pc.F.mat.rows != g || pc.F.mat.cols != g || pc.V.mat.rows != g || pc.V.mat.cols != g) {
            report("shape", i, {});
            continue;
        }
        const Mat& Fi = filF.at(i);
        SpanBuilder exact = span_with(pc.mod, nullptr, R);
        SpanBuilder loose = span_with(pc.mod, &Fi, R);
        const bool has_next = M.has(i + 1);
        const Mat D = M.dmat(i);
        SpanBuilder exact_next = has_next ? span_with(M.at(i + 1).mod, nullptr, R) : SpanBuilder(R, 0);
        SpanBuilder loose_next =
            has_next ? span_with(M.at(i + 1).mod, &filF.at(i + 1), R) : SpanBuilder(R, 0);
        Mat Tsig, Tinv;
        if (M.r > 1) {
            Tsig = twisted_scalar(M, i, Twist::Sigma);
            Tinv = twisted_scalar(M, i, Twist::SigmaInv);
        }
        for (int j = 0; j < g; ++j) {
            auto e = unit(g, j);
            auto Ve = mat_vec(pc.V.mat, e, R), Fe = mat_vec(pc.F.mat, e, R);
            auto pe = e;
            pe[j] = R.norm(M.p);
            // orders: relations map to relations
            std::vector<std::int64_t> rel(g, 0);
            rel[j] = R.ppow(pc.mod.orders[j]);
            if (!exact.contains(mat_vec(pc.V.mat, rel, R))) report("V well defined", i, e);
            if (!loose.contains(mat_vec(pc.F.mat, rel, R))) report("F well defined", i, e);
            if (has_next && !exact_next.contains(mat_vec(D, rel, R))) report("d well defined", i, e);

            auto fv = mat_vec(pc.F.mat, Ve, R);
            for (int a = 0; a < g; ++a) fv[a] = R.sub(fv[a], pe[a]);
            if (!loose.contains(fv)) report("FV = p", i, fv);
            auto vf = mat_vec(pc.V.mat, Fe, R);
            for (int a = 0; a < g; ++a) vf[a] = R.sub(vf[a], pe[a]);
            if (!loose.contains(vf)) report("VF = p", i, vf);
            if (has_next) {
                auto de = mat_vec(D, e, R);
                if (M.has(i + 2) && M.gens(i + 2) > 0) {
                    auto dd = mat_vec(M.dmat(i + 1), de, R);
                    if (!span_with(M.at(i + 2).mod, nullptr, R).contains(dd)) report("d^2 = 0", i, dd);
                }
                auto fdv = mat_vec(M.at(i + 1).F.mat, mat_vec(D, Ve, R), R);
                for (std::size_t a = 0; a < fdv.size(); ++a) fdv[a] = R.sub(fdv[a], de[a]);
                if (!loose_next.contains(fdv)) report("FdV = d", i, fdv);
            }
            if (M.r > 1) {
                auto te = mat_vec(pc.T, e, R);
                auto lhs = mat_vec(pc.F.mat, te, R), rhs = mat_vec(Tsig, Fe, R);
                for (int a = 0; a < g; ++a) lhs[a] = R.sub(lhs[a], rhs[a]);
                if (!loose.contains(lhs)) report("F a = sigma(a) F", i, lhs);
                lhs = mat_vec(pc.V.mat, te, R);
                rhs = mat_vec(Tinv, Ve, R);
                for (int a = 0; a < g; ++a) lhs[a] = R.sub(lhs[a], rhs[a]);
                if (!exact.contains(lhs)) report("V a = sigma^-1(a) V", i, lhs);
                if (has_next && M.gens(i + 1) > 0) {
                    auto dl = mat_vec(D, te, R), dr = mat_vec(M.at(i + 1).T, mat_vec(D, e, R), R);
                    for (std::size_t a = 0; a < dl.size(); ++a) dl[a] = R.sub(dl[a], dr[a]);
                    if (!exact_next.contains(dl)) report("d a = a d", i, dl);
                }
            }
        }
    }
    return out;
}

/* ---------------- morphisms ---------------- */

namespace {

Mat get_map(const GradedMats& f, int g, int rows, int cols) {
    auto it = f.find(g);
    if (it == f.end() || it->second.rows != rows || it->second.cols != cols) return Mat(rows, cols);
    return it->second;
}

/* A map M -> N is fixed by the images y of R-module generators of M, and
 * V, d alone reach every element from them (p and V are nilpotent at
 * truncation, d raises the grading).  Returns L with x = L y, where x are the
 * matrix entries in the layout of H; every morphism has this form. */
std::optional<Mat> generator_parametrization(const TGM& M, const TGM& N, const HomSpace& H,
                                             const std::map<int, int>& slot_of, const Zpm& R) {
    struct Gen {
        int g, j, off;
    };
    std::vector<Gen> gens;
    int ny = 0;
    for (int g = M.lo; g <= M.hi(); ++g) {
        const int gm = M.gens(g);
        if (gm == 0) continue;
        const auto& pc = M.at(g);
        SpanBuilder sb = span_with(pc.mod, &pc.V.mat, R);
        for (int j = 0; j < gm; ++j) {
            auto e = unit(gm, j);
            e[j] = R.norm(M.p);
            sb.insert(e);
        }
        if (M.has(g - 1) && M.gens(g - 1)) {
            const Mat D = M.dmat(g - 1);
            for (int j = 0; j < D.cols; ++j) sb.insert(D.col(j));
        }
        for (int j = 0; j < gm; ++j)
            if (sb.insert(unit(gm, j))) {
                gens.push_back({g, j, ny});
                ny += N.gens(g);
            }
    }
    struct Word {
        std::vector<std::int64_t> v;
        Mat img;  // N.gens(g) x ny
    };
    Mat L(H.nx, ny);
    std::vector<Word> carried;
    for (int g = M.lo; g <= M.hi(); ++g) {
        const int gm = M.gens(g), gn = N.gens(g);
        std::vector<Word> queue = std::move(carried);
        carried.clear();
        if (gm == 0) continue;
        for (const auto& G : gens)
            if (G.g == g) {
                Mat img(gn, ny);
                for (int a = 0; a < gn; ++a) img(a, G.off + a) = 1;
                queue.push_back({unit(gm, G.j), img});
            }
        const auto& pm = M.at(g);
        SpanBuilder sb = span_with(pm.mod, nullptr, R);
        std::vector<Word> kept;
        for (std::size_t q = 0; q < queue.size(); ++q) {
            Word w = queue[q];
            w.v = pm.mod.normalize(w.v, R);
            if (!sb.insert(w.v)) continue;
            Mat vimg = gn ? mat_mul(N.at(g).V.mat, w.img, R) : w.img;
            queue.push_back({mat_vec(pm.V.mat, w.v, R), vimg});
            kept.push_back(std::move(w));
        }
        if (sb.length() != R.m * gm) return std::nullopt;
        const int gn1 = N.gens(g + 1);
        if (M.gens(g + 1)) {
            const Mat DM = M.dmat(g);
            const Mat DN = N.dmat(g);
            for (const auto& w : kept) {
                Mat img = gn && gn1 ? mat_mul(DN, w.img, R) : Mat(gn1, ny);
                carried.push_back({mat_vec(DM, w.v, R), img});
            }
        }
        auto sit = slot_of.find(g);
        if (sit == slot_of.end()) continue;
        const auto& slot = H.slots[sit->second];
        Mat P(gm, static_cast<int>(kept.size()));
        for (std::size_t k = 0; k < kept.size(); ++k) P.set_col(static_cast<int>(k), kept[k].v);
        for (int b = 0; b < gm; ++b) {
            auto c = map_preimage(P, pm.mod, unit(gm, b), R);
            if (!c) return std::nullopt;
            for (std::size_t k = 0; k < kept.size(); ++k) {
                const std::int64_t ck = R.norm((*c)[k]);
                if (!ck) continue;
                for (int a = 0; a < gn; ++a)
                    for (int y = 0; y < ny; ++y) {
                        const std::int64_t t = kept[k].img(a, y);
                        if (t) {
                            auto& dst = L(slot.offset + a * slot.cols + b, y);
                            dst = (dst + ck * t) % R.q;
                        }
                    }
            }
        }
    }
    return L;
}

}  // namespace

bool is_morphism(const GradedMats& f, const TGM& M, const TGM& N, std::string* why) {
    const Zpm R = M.ring();
    const GradedMats filN = fil(N, std::max(0, N.n - 1));
    auto fail = [&](const std::string& s) {
        if (why) *why = s;
        return false;
    };
    for (int g = M.lo; g <= M.hi(); ++g) {
        const int gm = M.gens(g), gn = N.gens(g);
        if (gm == 0) continue;
        Mat fg = get_map(f, g, gn, gm);
        const auto& pm = M.at(g);
        if (gn > 0) {
            const auto& pn = N.at(g);
            SpanBuilder exact = span_with(pn.mod, nullptr, R);
            SpanBuilder loose = span_with(pn.mod, &filN.at(g), R);
            for (int j = 0; j < gm; ++j) {
                auto rel = unit(gm, j);
                rel[j] = R.ppow(pm.mod.orders[j]);
                if (!exact.contains(mat_vec(fg, rel, R))) return fail("not well defined");
            }
            auto chk = [&](const Mat& XM, const Mat& XN, const SpanBuilder& sp) {
                Mat diff = mat_sub(mat_mul(fg, XM, R), mat_mul(XN, fg, R), R);
                for (int j = 0; j < gm; ++j)
                    if (!sp.contains(diff.col(j))) return false;
                return true;
            };
            if (!chk(pm.V.mat, pn.V.mat, exact)) return fail("does not commute with V");
            if (!chk(pm.F.mat, pn.F.mat, loose)) return fail("does not commute with F");
            if (M.r > 1 && !chk(pm.T, pn.T, exact)) return fail("not W-linear");
        }
        const int gn1 = N.gens(g + 1);
        if (gn1 > 0) {
            Mat f1 = get_map(f, g + 1, gn1, M.gens(g + 1));
            Mat lhs = mat_mul(f1, M.dmat(g), R);
            Mat rhs = gn > 0 ? mat_mul(N.dmat(g), fg, R) : Mat(gn1, gm);
            Mat diff = mat_sub(lhs, rhs, R);
            SpanBuilder exact = span_with(N.at(g + 1).mod, nullptr, R);
            for (int j = 0; j < gm; ++j)
                if (!exact.contains(diff.col(j))) return fail("does not commute with d");
        }
    }
    return true;
}

bool is_iso(const GradedMats& f, const TGM& M, const TGM& N) {
    const int lo = std::min(M.lo, N.lo), hi = std::max(M.hi(), N.hi());
    for (int g = lo; g <= hi; ++g)
        if (M.length(g) != N.length(g)) return false;
    if (!is_morphism(f, M, N)) return false;
    const Zpm R = M.ring();
    for (int g = lo; g <= hi; ++g) {
        if (N.gens(g) == 0) continue;
        Mat fg = get_map(f, g, N.gens(g), M.gens(g));
        if (sub_length(N.at(g).mod, fg, R) != N.length(g)) return false;
    }
    return true;
}

GradedMats compose(const GradedMats& g, const GradedMats& f, const Zpm& R) {
    GradedMats out;
    for (const auto& [i, fi] : f) {
        auto it = g.find(i);
        if (it == g.end()) continue;
        if (it->second.cols != fi.rows) throw LinalgError("compose: shape mismatch");
        out[i] = mat_mul(it->second, fi, R);
    }
    return out;
}

GradedMats identity_map(const TGM& M) {
    GradedMats out;
    for (int i = M.lo; i <= M.hi(); ++i) out[i] = Mat::identity(M.gens(i));
    return out;
}

HomSpace hom_space(const TGM& M, const TGM& N, bool solve) {
    const Zpm R = M.ring();
    HomSpace H;
    std::map<int, int> slot_of;
    for (int g = M.lo; g <= M.hi(); ++g) {
        const int gm = M.gens(g), gn = N.gens(g);
        if (gm == 0 || gn == 0) continue;
        slot_of[g] = static_cast<int>(H.slots.size());
        H.slots.push_back({g, gn, gm, H.nx});
        for (int a = 0; a < gn; ++a)
            for (int b = 0; b < gm; ++b) H.ambient.orders.push_back(N.at(g).mod.orders[a]);
        H.nx += gn * gm;
    }
    auto xidx = [&](int g, int a, int b) {
        auto it = slot_of.find(g);
        if (it == slot_of.end()) return -1;
        const auto& s = H.slots[it->second];
        return s.offset + a * s.cols + b;
    };
    if (H.nx == 0 || !solve) {
        H.gens = Mat(H.nx, 0);
        return H;
    }
    const GradedMats filN = fil(N, std::max(0, N.n - 1));
    const std::optional<Mat> L = M.r == 1 ? generator_parametrization(M, N, H, slot_of, R) : std::nullopt;
    const int nvar = L ? L->cols : H.nx;

    /* Each constraint block asks A x to vanish in N^g, or in N^g / Fil^{n-1}
     * for identities involving F.  Targets are diagonal after projection, so
     * a row with order p^o is scaled by p^{m-o} and the system becomes a
     * plain kernel over Z/p^m. */
    std::map<int, QuotientData> loose_q;
    auto target = [&](int g, bool loose) -> std::pair<const Presented*, const Mat*> {
        if (!loose) return {&N.at(g).mod, nullptr};
        auto it = loose_q.find(g);
        if (it == loose_q.end()) {
            auto fit = filN.find(g);
            Mat sub = fit != filN.end() ? fit->second : Mat(N.gens(g), 0);
            it = loose_q.emplace(g, quotient(N.at(g).mod, sub, R)).first;
        }
        return {&it->second.target, &it->second.proj};
    };
    std::vector<Mat> coef;
    auto push = [&](const Mat& A, int g, bool loose) {
        auto [tg, proj] = target(g, loose);
        Mat B = proj ? mat_mul(*proj, A, R) : A;
        for (int a = 0; a < B.rows; ++a) {
            const std::int64_t s = R.ppow(R.m - tg->orders[a]);
            for (int c = 0; c < B.cols; ++c) B(a, c) = R.mul(B(a, c), s);
        }
        coef.push_back(L ? mat_mul(B, *L, R) : std::move(B));
    };
    for (int g = M.lo; g <= M.hi(); ++g) {
        const int gm = M.gens(g);
        if (gm == 0) continue;
        const auto& pm = M.at(g);
        const int gn = N.gens(g);
        if (gn > 0 && slot_of.count(g)) {
            const auto& pn = N.at(g);
            for (int j = 0; j < gm; ++j) {
                // well defined on the relation p^{e_j} e_j
                Mat A(gn, H.nx);
                std::int64_t pe = R.ppow(pm.mod.orders[j]);
                for (int a = 0; a < gn; ++a) A(a, xidx(g, a, j)) = pe;
                push(A, g, false);
            }
            struct Op {
                const Mat* XM;
                const Mat* XN;
                bool loose;
            };
            std::vector<Op> ops{{&pm.V.mat, &pn.V.mat, false}, {&pm.F.mat, &pn.F.mat, true}};
            if (M.r > 1) ops.push_back({&pm.T, &pn.T, false});
            for (const auto& op : ops)
                for (int j = 0; j < gm; ++j) {
                    Mat A(gn, H.nx);
                    for (int a = 0; a < gn; ++a) {
                        for (int b = 0; b < gm; ++b)
                            if ((*op.XM)(b, j)) A(a, xidx(g, a, b)) = R.add(A(a, xidx(g, a, b)), (*op.XM)(b, j));
                        for (int c = 0; c < gn; ++c)
                            if ((*op.XN)(a, c)) A(a, xidx(g, c, j)) = R.sub(A(a, xidx(g, c, j)), (*op.XN)(a, c));
                    }
                    push(A, g, op.loose);
                }
        }
        const int gn1 = N.gens(g + 1);
        if (gn1 > 0) {
            const Mat DM = M.dmat(g);
            const Mat DN = gn > 0 ? N.dmat(g) : Mat(gn1, 0);
            const int gm1 = M.gens(g + 1);
            for (int j = 0; j < gm; ++j) {
                Mat A(gn1, H.nx);
                bool any = false;
                for (int a = 0; a < gn1; ++a) {
                    if (slot_of.count(g + 1))
                        for (int b = 0; b < gm1; ++b)
                            if (DM(b, j)) {
                                A(a, xidx(g + 1, a, b)) = R.add(A(a, xidx(g + 1, a, b)), DM(b, j));
                                any = true;
                            }
                    if (slot_of.count(g))
                        for (int c = 0; c < gn; ++c)
                            if (DN(a, c)) {
                                A(a, xidx(g, c, j)) = R.sub(A(a, xidx(g, c, j)), DN(a, c));
                                any = true;
                            }
                }
                if (!any) continue;
                push(A, g + 1, false);
            }
        }
    }
    int rows = 0;
    for (const auto& c : coef) rows += c.rows;
    Mat big(rows, nvar);
    int r0 = 0;
    for (const auto& c : coef) {
        std::copy(c.a.begin(), c.a.end(), big.a.begin() + static_cast<std::ptrdiff_t>(r0) * nvar);
        r0 += c.rows;
    }
    Mat K = rows ? kernel(big, R) : Mat::identity(nvar);
    if (L) K = mat_mul(*L, K, R);
    H.gens = submat(K, 0, H.nx, 0, K.cols);
    H.length = sub_length(H.ambient, H.gens, R);
    return H;
}

GradedMats hom_unpack(const HomSpace& H, const std::vector<std::int64_t>& x) {
    GradedMats f;
    for (const auto& s : H.slots) {
        Mat A(s.rows, s.cols);
        for (int a = 0; a < s.rows; ++a)
            for (int b = 0; b < s.cols; ++b) A(a, b) = x[s.offset + a * s.cols + b];
        f[s.grading] = A;
    }
    return f;
}

std::vector<std::int64_t> hom_pack(const HomSpace& H, const GradedMats& f, const Zpm& R) {
    std::vector<std::int64_t> x(H.nx, 0);
    for (const auto& s : H.slots) {
        Mat A = get_map(f, s.grading, s.rows, s.cols);
        for (int a = 0; a < s.rows; ++a)
            for (int b = 0; b < s.cols; ++b) x[s.offset + a * s.cols + b] = R.norm(A(a, b));
    }
    return x;
}

int hom_span_length(const HomSpace& H, const std::vector<GradedMats>& maps, const Zpm& R) {
    if (H.nx == 0 || maps.empty()) return 0;
    Mat X(H.nx, static_cast<int>(maps.size()));
    for (std::size_t k = 0; k < maps.size(); ++k) X.set_col(static_cast<int>(k), hom_pack(H, maps[k], R));
    return sub_length(H.ambient, X, R);
}

std::optional<GradedMats> find_iso(const TGM& M, const TGM& N, std::uint64_t seed) {
    const int lo = std::min(M.lo, N.lo), hi = std::max(M.hi(), N.hi());
    for (int g = lo; g <= hi; ++g)
        if (M.length(g) != N.length(g)) return std::nullopt;
    if (M.total_length() == 0) return GradedMats{};
    const Zpm R = M.ring();
    HomSpace H = hom_space(M, N);
    // keep generators that enlarge the span modulo trivial maps
    SpanBuilder sb = span_with(H.ambient, nullptr, R);
    std::vector<std::vector<std::int64_t>> cand;
    for (int j = 0; j < H.gens.cols; ++j) {
        auto c = H.gens.col(j);
        if (sb.insert(c)) cand.push_back(c);
    }
    const int k = static_cast<int>(cand.size());
    auto try_coeffs = [&](const std::vector<std::int64_t>& coeff) -> std::optional<GradedMats> {
        std::vector<std::int64_t> x(H.nx, 0);
        for (int i = 0; i < k; ++i)
            if (coeff[i])
                for (int a = 0; a < H.nx; ++a) x[a] = (x[a] + coeff[i] * cand[i][a]) % R.q;
        GradedMats f = hom_unpack(H, x);
        if (is_iso(f, M, N)) return f;
        return std::nullopt;
    };
    double total = 1;
    for (int i = 0; i < k && total <= 4096; ++i) total *= M.p;
    if (total <= 4096) {
        std::vector<std::int64_t> coeff(k, 0);
        while (true) {
            if (auto f = try_coeffs(coeff)) return f;
            int i = 0;
            while (i < k && ++coeff[i] == M.p) coeff[i++] = 0;
            if (i == k) break;
        }
        return std::nullopt;
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> d(0, R.q - 1);
    for (int t = 0; t < 500; ++t) {
        std::vector<std::int64_t> coeff(k);
        for (auto& c : coeff) c = d(rng);
        if (auto f = try_coeffs(coeff)) return f;
    }
    return std::nullopt;
}

}  // namespace drw
