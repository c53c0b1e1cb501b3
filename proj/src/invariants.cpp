#include "drw/invariants.hpp"

#include "drw/hom.hpp"

#include <algorithm>
#include <mutex>
#include <set>
#include <sstream>

namespace drw {

std::pair<int, int> block_level(const Block& b, int L) {
    const int depth = b.kind == BlockKind::Dieudonne ? b.i + b.j : 1;
    return {L, depth * L};
}

namespace {

struct Level {
    int L;
    std::pair<int, int> mn;
    TGM T;
    Zpm R;
};

Level at_level(const Block& b, int L) {
    auto mn = block_level(b, L);
    return {L, mn, truncate(b, mn.first, mn.second), Zpm(b.p, mn.first)};
}

GradedMats trans(const Block& b, const Level& hi, const Level& lo) {
    return transition(b, hi.mn.first, hi.mn.second, lo.mn.first, lo.mn.second);
}

int gens(const TGM& T, int g) { return T.gens(g); }

Presented mod_of(const TGM& T, int g) { return T.has(g) ? T.at(g).mod : Presented{}; }

Presented capped(Presented P, int m) {
    for (auto& o : P.orders) o = std::min(o, m);
    return P;
}

Presented concat(const Presented& a, const Presented& b) {
    Presented c = a;
    c.orders.insert(c.orders.end(), b.orders.begin(), b.orders.end());
    return c;
}

Mat get(const GradedMats& P, int g, int rows, int cols) {
    auto it = P.find(g);
    if (it == P.end() || it->second.rows != rows || it->second.cols != cols) return Mat(rows, cols);
    return it->second;
}

Mat power(const Mat& A, int e, const Zpm& R) {
    Mat out = Mat::identity(A.rows);
    for (int i = 0; i < e; ++i) out = mat_mul(A, out, R);
    return out;
}

Mat Fpow(const TGM& T, int g, int e) {
    const int k = gens(T, g);
    if (!k) return Mat(0, 0);
    return power(T.at(g).F.mat, e, T.ring());
}

Mat Vpow(const TGM& T, int g, int e) {
    const int k = gens(T, g);
    if (!k) return Mat(0, 0);
    return power(T.at(g).V.mat, e, T.ring());
}

// d: grading g -> g+1, always of shape gens(g+1) x gens(g)
Mat dmap(const TGM& T, int g) {
    Mat D = T.dmat(g);
    if (D.rows != gens(T, g + 1) || D.cols != gens(T, g)) return Mat(gens(T, g + 1), gens(T, g));
    return D;
}

Mat hjoin(const Mat& a, const Mat& b, int rows) {
    Mat out(rows, a.cols + b.cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < a.cols; ++j) out(i, j) = a(i, j);
        for (int j = 0; j < b.cols; ++j) out(i, a.cols + j) = b(i, j);
    }
    return out;
}

Mat vjoin(const Mat& a, const Mat& b, int cols) {
    Mat out(a.rows + b.rows, cols);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < a.rows; ++i) out(i, j) = a(i, j);
        for (int i = 0; i < b.rows; ++i) out(a.rows + i, j) = b(i, j);
    }
    return out;
}

Mat diag2(const Mat& a, const Mat& b) {
    Mat out(a.rows + b.rows, a.cols + b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) out(i, j) = a(i, j);
    for (int i = 0; i < b.rows; ++i)
        for (int j = 0; j < b.cols; ++j) out(a.rows + i, a.cols + j) = b(i, j);
    return out;
}

Mat mul(const Mat& a, const Mat& b, const Zpm& R) {
    if (a.cols != b.rows) throw InvariantError("internal shape mismatch");
    if (a.rows == 0 || b.cols == 0) return Mat(a.rows, b.cols);
    if (a.cols == 0) return Mat(a.rows, b.cols);
    return mat_mul(mat_reduce(a, R), mat_reduce(b, R), R);
}

int sublen(const Presented& M, const Mat& G, const Zpm& R) {
    if (M.gens() == 0 || G.cols == 0) return 0;
    return sub_length(M, mat_reduce(G, R), R);
}

Mat kern(const Mat& f, const Presented& M, const Presented& N, const Zpm& R) {
    if (M.gens() == 0) return Mat(0, 0);
    if (N.gens() == 0 || f.rows == 0) return Mat::identity(M.gens());
    return map_kernel(mat_reduce(f, R), M, N, R);
}

/* Z / B for submodules B <= Z of a presented module M. */
struct SubQuotient {
    Presented target;
    Mat incl;   // target generators as elements of M
    Mat big;    // [Z | B | relations]
    Mat proj;   // Z-coordinates -> target
    int zcols = 0;
};

SubQuotient subquotient(const Presented& M, const Mat& Z, const Mat& B, const Zpm& R) {
    SubQuotient S;
    const int g = M.gens();
    S.zcols = Z.cols;
    if (g == 0 || Z.cols == 0) {
        S.incl = Mat(g, 0);
        S.proj = Mat(0, Z.cols);
        return S;
    }
    S.big = hjoin(hjoin(mat_reduce(Z, R), mat_reduce(B, R), g), M.relations(R), g);
    Mat K = kernel(S.big, R);
    Mat rel = submat(K, 0, Z.cols, 0, K.cols);
    Presented free;
    free.orders.assign(Z.cols, R.m);
    auto q = quotient(free, rel, R);
    S.target = q.target;
    S.proj = q.proj;
    S.incl = mul(Z, q.sect, R);
    return S;
}

std::vector<std::int64_t> express(const SubQuotient& S, const std::vector<std::int64_t>& y, const Zpm& R) {
    auto x = solve(S.big, y, R);
    if (!x) throw InvariantError("heart is not stable under F");
    x->resize(S.zcols);
    return S.target.normalize(mat_vec(S.proj, *x, R), R);
}

struct HeartData {
    Heart heart;
    int domino = 0;  // Z_p-length
};

struct TotData {
    int free = 0;  // Z_p-rank
    std::vector<int> torsion;
    bool operator==(const TotData& o) const { return free == o.free && torsion == o.torsion; }
};

struct Bundle {
    int level = 0;
    IntGrid hodge;                 // (grading, degree) -> Z_p-length
    std::map<int, HeartData> hearts;
    std::map<int, TotData> tot;

    bool same_numbers(const Bundle& o) const {
        if (hodge != o.hodge || tot != o.tot || hearts.size() != o.hearts.size()) return false;
        for (const auto& [g, h] : hearts) {
            auto it = o.hearts.find(g);
            if (it == o.hearts.end()) return false;
            const auto& a = h.heart;
            const auto& b = it->second.heart;
            if (h.domino != it->second.domino || a.free_rank != b.free_rank ||
                a.torsion_length != b.torsion_length)
                return false;
        }
        return true;
    }
};

IntGrid rn_at(const Block& b, int n, int L) {
    const Level lo = at_level(b, L), mid = at_level(b, L + 1 + n), hi = at_level(b, L + 1 + 2 * n);
    const GradedMats P_ml = trans(b, mid, lo), P_hm = trans(b, hi, mid), P_hl = trans(b, hi, lo);
    const Zpm& RL = lo.R;
    const Zpm& RM = mid.R;
    IntGrid out;
    if (mid.T.pieces.empty()) return out;
    for (int g = mid.T.lo; g <= mid.T.hi() + 1; ++g) {
        const int l1 = gens(lo.T, g - 1), l0 = gens(lo.T, g);
        const int m1 = gens(mid.T, g - 1), m0 = gens(mid.T, g);
        const int h1 = gens(hi.T, g - 1), h0 = gens(hi.T, g);
        const Presented L1 = mod_of(lo.T, g - 1), L0 = mod_of(lo.T, g);
        const Presented M1 = mod_of(mid.T, g - 1), M0 = mod_of(mid.T, g);
        const Presented CL = concat(L1, L0), CM = concat(M1, M0);

        auto vmat = [&](const Level& X) {
            const int x1 = gens(X.T, g - 1), x0 = gens(X.T, g);
            Mat a = x1 ? mul(dmap(X.T, g - 1), Vpow(X.T, g - 1, n), X.R) : Mat(x0, 0);
            Mat c = x0 ? Vpow(X.T, g, n) : Mat(0, 0);
            return hjoin(a, c, x0);
        };
        // H^0 = M^g / (dV^n M^{g-1} + V^n M^g) is exact at any level
        const int h0len = L0.length() - sublen(L0, vmat(lo), RL);

        // H^{-1}: stable image of ker v over the image of u
        const Mat vM = vmat(mid);
        const Mat Kv = kern(vM, CM, M0, RM);
        const Mat P1 = diag2(get(P_ml, g - 1, l1, m1), get(P_ml, g, l0, m0));
        const int lenK = Kv.cols ? sublen(CL, mul(P1, Kv, RL), RL) : 0;

        Mat top = h1 && m1 ? mul(get(P_hm, g - 1, m1, h1), Fpow(hi.T, g - 1, n), RM) : Mat(m1, h1);
        Mat bot(m0, h1);
        if (h1 && m0 && h0) {
            bot = mul(mul(get(P_hm, g, m0, h0), Fpow(hi.T, g, n), RM), dmap(hi.T, g - 1), RM);
            bot = mat_scale(bot, -1, RM);
        }
        const Mat u = vjoin(top, bot, h1);
        const int lenI = h1 ? sublen(CL, mul(P1, u, RL), RL) : 0;

        // H^{-2}: stable image of ker u
        int len2 = 0;
        if (h1) {
            const Mat Ku = kern(u, capped(mod_of(hi.T, g - 1), RM.m), CM, RM);
            len2 = sublen(L1, mul(get(P_hl, g - 1, l1, h1), Ku, RL), RL);
        }
        if (h0len) out[{g, 0}] = h0len;
        if (lenK - lenI) out[{g, -1}] = lenK - lenI;
        if (len2) out[{g, -2}] = len2;
    }
    return out;
}

std::map<int, TotData> tot_at(const Block& b, int L) {
    const Level lo = at_level(b, L), mid = at_level(b, L + 2);
    const GradedMats P_ml = trans(b, mid, lo);
    std::map<int, TotData> out;
    for (int g = lo.T.lo; g <= lo.T.hi(); ++g) {
        const int l0 = gens(lo.T, g);
        if (!l0) continue;
        const Mat Kd = kern(dmap(mid.T, g), mod_of(mid.T, g), mod_of(mid.T, g + 1), mid.R);
        const Mat Z = mul(get(P_ml, g, l0, gens(mid.T, g)), Kd, lo.R);
        const Mat B = dmap(lo.T, g - 1);
        auto sq = subquotient(lo.T.at(g).mod, Z, B, lo.R);
        TotData t;
        for (int o : sq.target.orders) {
            if (o >= lo.R.m)
                ++t.free;
            else
                t.torsion.push_back(o);
        }
        std::sort(t.torsion.begin(), t.torsion.end());
        if (t.free || !t.torsion.empty()) out[g] = t;
    }
    return out;
}

std::map<int, HeartData> hearts_at(const Block& b, int L) {
    const Level lo = at_level(b, L), mid = at_level(b, L + 2), hi = at_level(b, 2 * L + 2);
    const GradedMats P_ml = trans(b, mid, lo), P_hl = trans(b, hi, lo);
    const auto& mn_hi = hi.mn;
    const auto& mn_lo = lo.mn;
    const GradedMats S_lh = transition_section(b, mn_hi.first, mn_hi.second, mn_lo.first, mn_lo.second);
    const Zpm& RL = lo.R;
    std::map<int, HeartData> out;
    for (int g = lo.T.lo; g <= lo.T.hi(); ++g) {
        const int l0 = gens(lo.T, g);
        if (!l0) continue;
        const Presented& L0 = lo.T.at(g).mod;
        // V^{-inf} Z: common kernel of d V^s, s < n
        const int m0 = gens(mid.T, g), m1 = gens(mid.T, g + 1);
        Mat Z = Mat::identity(l0);
        if (m1) {
            const int steps = mid.mn.second;
            Mat stack(0, m0);
            Presented tgt;
            const Mat D = dmap(mid.T, g);
            Mat Vs = Mat::identity(m0);
            for (int s = 0; s < steps; ++s) {
                stack = vjoin(stack, mul(D, Vs, mid.R), m0);
                tgt = concat(tgt, mid.T.at(g + 1).mod);
                Vs = mul(mid.T.at(g).V.mat, Vs, mid.R);
            }
            Mat K = kern(stack, mid.T.at(g).mod, tgt, mid.R);
            Z = mul(get(P_ml, g, l0, m0), K, RL);
        }
        // F^inf B: sum of F^s d M^{g-1}, computed high and pushed down
        const int h0 = gens(hi.T, g), h1 = gens(hi.T, g - 1);
        Mat B(l0, 0);
        if (h1) {
            Mat FsD = dmap(hi.T, g - 1);
            const Mat Ph = get(P_hl, g, l0, h0);
            for (int s = 0; s <= L; ++s) {
                B = hjoin(B, mul(Ph, FsD, RL), l0);
                FsD = mul(hi.T.at(g).F.mat, FsD, hi.R);
            }
        }
        HeartData hd;
        const Mat Vl = lo.T.at(g).V.mat;
        hd.domino = L0.length() - sublen(L0, hjoin(Z, Vl, l0), RL);

        auto sq = subquotient(L0, Z, B, RL);
        Heart& H = hd.heart;
        H.grading = g;
        H.level = L;
        H.mod = sq.target;
        const int k = sq.target.gens();
        H.F = Mat(k, k);
        H.V = Mat(k, k);
        const Mat Sh = get(S_lh, g, h0, l0);
        const Mat Fh = hi.T.at(g).F.mat;
        const Mat Ph = get(P_hl, g, l0, h0);
        for (int c = 0; c < k; ++c) {
            const auto y = sq.incl.col(c);
            Mat ycol(l0, 1);
            ycol.set_col(0, y);
            Mat fy = mul(Ph, mul(Fh, mul(Sh, ycol, hi.R), hi.R), RL);
            H.F.set_col(c, express(sq, fy.col(0), RL));
            H.V.set_col(c, express(sq, mat_vec(Vl, y, RL), RL));
        }
        for (int o : sq.target.orders) {
            if (o >= RL.m)
                ++H.free_rank;
            else
                H.torsion_length += o;
        }
        out[g] = std::move(hd);
    }
    return out;
}

Bundle bundle_at(const Block& b, int L) {
    Bundle B;
    B.level = L;
    B.hodge = rn_at(b, 1, L);
    B.tot = tot_at(b, L);
    B.hearts = hearts_at(b, L);
    return B;
}

void finish_slopes(const Block& b, Bundle& B) {
    for (auto& [g, hd] : B.hearts) {
        Heart& H = hd.heart;
        if (H.free_rank == 0) continue;
        if (b.r > 1) {
            if (b.slopes.empty()) throw InvariantError("unsupported: supply slope metadata");
            H.slopes = b.slopes;
            H.free_rank /= b.r;
            continue;
        }
        // free part modulo the torsion exponent
        int tmax = 0;
        std::vector<int> free_idx;
        for (int a = 0; a < H.mod.gens(); ++a) {
            if (H.mod.orders[a] >= B.level)
                free_idx.push_back(a);
            else
                tmax = std::max(tmax, H.mod.orders[a]);
        }
        const Zpm Rf(b.p, B.level - tmax);
        const int k = static_cast<int>(free_idx.size());
        Mat Ff(k, k);
        for (int x = 0; x < k; ++x)
            for (int y = 0; y < k; ++y) Ff(x, y) = Rf.norm(H.F(free_idx[x], free_idx[y]));
        Presented fr;
        fr.orders.assign(k, Rf.m);
        H.slopes = newton_slopes(Ff, fr, Rf);
    }
}

std::string block_key(const Block& b, const InvariantOptions& opt) {
    std::ostringstream os;
    os << static_cast<int>(b.kind) << '|' << b.p << '|' << b.r << '|' << b.t << '|' << b.i << '|' << b.j << '|'
       << b.custom.get() << '|' << opt.start_level << '|' << opt.max_level;
    return os.str();
}

const Bundle& bundle(const Block& b, const InvariantOptions& opt) {
    static std::mutex mu;
    static std::map<std::string, Bundle> cache;
    // custom blocks are keyed by address; keep them alive with the cache
    static std::vector<std::shared_ptr<const CustomModule>> pinned;
    const std::string key = block_key(b, opt);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    Bundle prev = bundle_at(b, opt.start_level);
    for (int L = opt.start_level + 1; L <= opt.max_level; ++L) {
        Bundle next = bundle_at(b, L);
        if (prev.same_numbers(next)) {
            finish_slopes(b, prev);
            std::lock_guard<std::mutex> lock(mu);
            if (b.custom) pinned.push_back(b.custom);
            return cache.emplace(key, std::move(prev)).first->second;
        }
        prev = std::move(next);
    }
    throw UnstableError("unstable: invariants of " + b.name() + " did not stabilize by level " +
                        std::to_string(opt.max_level));
}

Rational slope_weight_low(const Rational& lam) { return Rational(1) - lam; }

}  // namespace

/* ---------------- block level ---------------- */

Heart coeur(const Block& b, int grading, const InvariantOptions& opt) {
    const Bundle& B = bundle(b, opt);
    auto it = B.hearts.find(grading);
    if (it == B.hearts.end()) {
        Heart h;
        h.grading = grading;
        h.level = B.level;
        return h;
    }
    return it->second.heart;
}

int domino_number(const Block& b, int grading, const InvariantOptions& opt) {
    const Bundle& B = bundle(b, opt);
    auto it = B.hearts.find(grading);
    return it == B.hearts.end() ? 0 : it->second.domino / b.r;
}

std::vector<std::int64_t> charpoly(const Mat& A, const Zpm& R) {
    // Berkowitz: successive Toeplitz products over leading principal minors
    const int n = A.rows;
    if (A.cols != n) throw InvariantError("charpoly: matrix not square");
    std::vector<std::int64_t> c{1};  // char poly of the empty matrix, high to low
    for (int k = 0; k < n; ++k) {
        // A_{k+1} = [[A_k, S], [Rrow, a]], here R = row k, S = column k (first k entries)
        const std::int64_t a = A(k, k);
        std::vector<std::vector<std::int64_t>> pows;  // A_k^i S
        std::vector<std::int64_t> v(k);
        for (int i = 0; i < k; ++i) v[i] = A(i, k);
        // entries of the Toeplitz column: 1, -a, -R S, -R A S, ...
        std::vector<std::int64_t> col(k + 2, 0);
        col[0] = 1;
        col[1] = R.norm(-a);
        for (int i = 0; i < k; ++i) {
            std::int64_t rs = 0;
            for (int j = 0; j < k; ++j) rs = R.add(rs, R.mul(A(k, j), v[j]));
            col[i + 2] = R.norm(-rs);
            std::vector<std::int64_t> w(k, 0);
            for (int x = 0; x < k; ++x)
                for (int y = 0; y < k; ++y) w[x] = R.add(w[x], R.mul(A(x, y), v[y]));
            v = w;
        }
        // new poly (degree k+1) = Toeplitz(col) * c
        std::vector<std::int64_t> nc(k + 2, 0);
        for (int i = 0; i < k + 2; ++i)
            for (int j = 0; j <= std::min(i, k); ++j) nc[i] = R.add(nc[i], R.mul(col[i - j], c[j]));
        c = nc;
    }
    std::reverse(c.begin(), c.end());
    return c;
}

std::vector<SlopeMult> newton_polygon(const std::vector<std::int64_t>& coeffs, const Zpm& R) {
    const int n = static_cast<int>(coeffs.size()) - 1;
    if (n <= 0) return {};
    std::vector<int> val(n + 1);
    for (int i = 0; i <= n; ++i) val[i] = R.val(R.norm(coeffs[i]));
    if (val[0] >= R.m) throw InvariantError("precision too low to certify slopes (constant term vanishes)");
    // lower convex hull from (0, val0) to (n, 0)
    std::vector<int> hull{0};
    int cur = 0;
    while (cur < n) {
        int best = -1;
        Rational best_slope;
        for (int j = cur + 1; j <= n; ++j) {
            if (val[j] >= R.m) continue;
            Rational s(val[j] - val[cur], j - cur);
            if (best < 0 || s < best_slope || (s == best_slope && j > best)) {
                best = j;
                best_slope = s;
            }
        }
        hull.push_back(best);
        cur = best;
    }
    // vanishing coefficients must sit strictly above the hull
    for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
        const int a = hull[h], b = hull[h + 1];
        for (int i = a + 1; i < b; ++i)
            if (val[i] >= R.m) {
                Rational y = Rational(val[a]) + Rational(val[b] - val[a], b - a) * Rational(i - a);
                if (!(y < Rational(R.m))) throw InvariantError("precision too low to certify slopes");
            }
    }
    std::vector<SlopeMult> out;
    for (std::size_t h = hull.size() - 1; h > 0; --h) {
        const int a = hull[h - 1], b = hull[h];
        Rational lam(val[a] - val[b], b - a);
        out.push_back({lam, b - a});
    }
    std::sort(out.begin(), out.end(), [](const SlopeMult& x, const SlopeMult& y) { return x.slope < y.slope; });
    std::vector<SlopeMult> merged;
    for (const auto& s : out) {
        if (!merged.empty() && merged.back().slope == s.slope)
            merged.back().mult += s.mult;
        else
            merged.push_back(s);
    }
    return merged;
}

std::vector<SlopeMult> newton_slopes(const Mat& F, const Presented& mod, const Zpm& R) {
    for (int o : mod.orders)
        if (o < R.m) throw InvariantError("newton_slopes: torsion input");
    if (F.rows != mod.gens() || F.cols != mod.gens()) throw InvariantError("newton_slopes: shape mismatch");
    return newton_polygon(charpoly(F, R), R);
}

TensorCohomology rn_tensor(const Block& b, int n, const InvariantOptions& opt) {
    if (n < 1) throw InvariantError("rn_tensor: n must be >= 1");
    TensorCohomology out;
    out.n = n;
    if (n == 1) {
        const Bundle& B = bundle(b, opt);
        out.level = B.level;
        out.length = B.hodge;
        return out;
    }
    const int start = std::max(opt.start_level, n + 1);
    IntGrid prev = rn_at(b, n, start);
    for (int L = start + 1; L <= std::max(opt.max_level, start + 1); ++L) {
        IntGrid next = rn_at(b, n, L);
        if (next == prev) {
            out.level = L - 1;
            out.length = prev;
            return out;
        }
        prev = std::move(next);
    }
    throw UnstableError("unstable: R_n tensor of " + b.name() + " did not stabilize");
}

TensorCohomology rn_tensor(const FormalObject& X, int n, const InvariantOptions& opt) {
    TensorCohomology out;
    out.n = n;
    for (const auto& s : X.items) {
        auto t = rn_tensor(s.block, n, opt);
        out.level = std::max(out.level, t.level);
        for (const auto& [c, len] : t.length) out.length[{c.first - s.gshift, c.second - s.cshift}] += len;
    }
    return out;
}

IntGrid hodge_numbers(const FormalObject& X, const InvariantOptions& opt) {
    IntGrid out;
    for (const auto& [c, len] : r1_tensor(X, opt).length)
        if (len) out[c] = len / X.r;
    return out;
}

IntGrid domino_numbers(const FormalObject& X, const InvariantOptions& opt) {
    IntGrid out;
    for (const auto& s : X.items) {
        const Bundle& B = bundle(s.block, opt);
        for (const auto& [g, hd] : B.hearts)
            if (hd.domino) out[{g - s.gshift, -s.cshift}] += hd.domino / X.r;
    }
    return out;
}

RatGrid slope_numbers(const FormalObject& X, const InvariantOptions& opt) {
    RatGrid out;
    for (const auto& s : X.items) {
        const Bundle& B = bundle(s.block, opt);
        for (const auto& [g, hd] : B.hearts) {
            const int i = g - s.gshift, j = -s.cshift;
            for (const auto& sm : hd.heart.slopes) {
                if (sm.slope < Rational(0) || !(sm.slope < Rational(1))) continue;
                out[{i, j}] += slope_weight_low(sm.slope) * Rational(sm.mult);
                out[{i + 1, j - 1}] += sm.slope * Rational(sm.mult);
            }
        }
    }
    for (auto it = out.begin(); it != out.end();) it = it->second == Rational(0) ? out.erase(it) : std::next(it);
    return out;
}

RatGrid hodge_witt_from_parts(const RatGrid& m, const IntGrid& T) {
    std::set<Cell> cells;
    for (const auto& [c, v] : m) cells.insert(c);
    for (const auto& [c, v] : T) {
        cells.insert(c);
        cells.insert({c.first + 1, c.second - 1});
        cells.insert({c.first + 2, c.second - 2});
    }
    auto tget = [&](int i, int j) {
        auto it = T.find({i, j});
        return it == T.end() ? 0 : it->second;
    };
    RatGrid out;
    for (const auto& c : cells) {
        const auto [i, j] = c;
        Rational v = m.count(c) ? m.at(c) : Rational(0);
        v += Rational(tget(i, j) - 2 * tget(i - 1, j + 1) + tget(i - 2, j + 2));
        if (v != Rational(0)) out[c] = v;
    }
    return out;
}

Totalization totalize(const FormalObject& X, const InvariantOptions& opt) {
    Totalization out;
    for (const auto& s : X.items) {
        const Bundle& B = bundle(s.block, opt);
        out.level = std::max(out.level, B.level);
        for (const auto& [g, t] : B.tot) {
            const int deg = (g - s.gshift) - s.cshift;
            if (t.free) out.betti[deg] += t.free / X.r;
            // each W-summand W/p^o shows up r times over Z_p
            auto& tor = out.torsion[deg];
            for (std::size_t k = 0; k < t.torsion.size(); k += X.r) tor.push_back(t.torsion[k]);
        }
    }
    for (auto it = out.torsion.begin(); it != out.torsion.end();) {
        std::sort(it->second.begin(), it->second.end());
        it = it->second.empty() ? out.torsion.erase(it) : std::next(it);
    }
    return out;
}

/* ---------------- tables ---------------- */

Rational InvariantTable::hw(int i, int j) const {
    auto it = hW.find({i, j});
    return it == hW.end() ? Rational(0) : it->second;
}

int InvariantTable::hodge(int i, int j) const {
    auto it = h.find({i, j});
    return it == h.end() ? 0 : it->second;
}

namespace {

Polygon normalize_polygon(std::map<Rational, Rational> segs) {
    Polygon out;
    for (const auto& [s, l] : segs)
        if (l != Rational(0)) out.push_back({s, l});
    return out;
}

}  // namespace

InvariantTable compute_invariants(const FormalObject& X, const InvariantOptions& opt) {
    InvariantTable t;
    t.p = X.p;
    t.r = X.r;
    t.h = hodge_numbers(X, opt);
    t.T = domino_numbers(X, opt);
    t.m = slope_numbers(X, opt);
    t.hW = hodge_witt_from_parts(t.m, t.T);
    auto tot = totalize(X, opt);
    t.betti = tot.betti;
    t.torsion = tot.torsion;
    t.level = tot.level;

    std::map<int, std::map<Rational, Rational>> newton, nh;
    for (const auto& s : X.items) {
        const Bundle& B = bundle(s.block, opt);
        t.level = std::max(t.level, B.level);
        for (const auto& [g, hd] : B.hearts) {
            const int i = g - s.gshift, j = -s.cshift;
            for (const auto& sm : hd.heart.slopes) newton[i + j][Rational(i) + sm.slope] += Rational(sm.mult);
        }
    }
    for (const auto& [c, v] : t.m) nh[c.first + c.second][Rational(c.first)] += v;
    for (auto& [n, segs] : newton) t.newton[n] = normalize_polygon(segs);
    for (auto& [n, segs] : nh) t.newton_hodge[n] = normalize_polygon(segs);
    return t;
}

CrewResult crew_check(const InvariantTable& t, int i) {
    CrewResult c;
    c.i = i;
    auto sign = [](int j) { return (j % 2 == 0) ? 1 : -1; };
    for (const auto& [cell, v] : t.hW)
        if (cell.first == i) c.witt += v * Rational(sign(cell.second));
    for (const auto& [cell, v] : t.h)
        if (cell.first == i) c.hodge += Rational(v * sign(cell.second));
    c.pass = c.witt == c.hodge;
    return c;
}

std::vector<CrewResult> crew_all(const InvariantTable& t) {
    std::set<int> cols;
    for (const auto& [c, v] : t.hW) cols.insert(c.first);
    for (const auto& [c, v] : t.h) cols.insert(c.first);
    std::vector<CrewResult> out;
    for (int i : cols) out.push_back(crew_check(t, i));
    return out;
}

EkedahlResult ekedahl_check(const InvariantTable& t) {
    EkedahlResult e;
    std::set<Cell> cells;
    for (const auto& [c, v] : t.hW) cells.insert(c);
    for (const auto& [c, v] : t.h) cells.insert(c);
    for (const auto& c : cells) {
        const Rational w = t.hw(c.first, c.second);
        const Rational h(t.hodge(c.first, c.second));
        if (w == h)
            e.equal.push_back(c);
        else if (w < h)
            e.strict.push_back(c);
        else {
            e.violated.push_back(c);
            e.pass = false;
        }
    }
    return e;
}

SymmetryResult symmetry_check(const InvariantTable& t, int N, int max_total) {
    SymmetryResult s;
    s.N = N;
    s.max_total = max_total;
    for (int tot = 0; tot <= max_total; ++tot)
        for (int i = 0; i <= tot; ++i) {
            const int j = tot - i;
            Rational d = t.hw(i, j) - t.hw(j, i);
            s.hodge_delta[{i, j}] = d;
            if (d != Rational(0)) s.hodge_ok = false;
            const int i2 = N - i, j2 = N - j;
            if (i2 >= 0 && j2 >= 0 && i2 + j2 <= max_total) {
                Rational e = t.hw(i, j) - t.hw(i2, j2);
                s.serre_delta[{i, j}] = e;
                if (e != Rational(0)) s.serre_ok = false;
            }
        }
    return s;
}

namespace {

// value of a convex polygon from the origin at abscissa x
Rational poly_at(const Polygon& P, const Rational& x) {
    Rational y(0), cx(0);
    for (const auto& s : P) {
        if (cx + s.length >= x) return y + s.slope * (x - cx);
        y += s.slope * s.length;
        cx += s.length;
    }
    return y;
}

Rational total_length(const Polygon& P) {
    Rational l(0);
    for (const auto& s : P) l += s.length;
    return l;
}

}  // namespace

std::vector<PolygonCheck> newton_hodge_check(const InvariantTable& t) {
    std::set<int> degrees;
    for (const auto& [n, P] : t.newton) degrees.insert(n);
    for (const auto& [n, P] : t.newton_hodge) degrees.insert(n);
    std::vector<PolygonCheck> out;
    for (int n : degrees) {
        PolygonCheck c;
        c.n = n;
        const Polygon NP = t.newton.count(n) ? t.newton.at(n) : Polygon{};
        const Polygon HP = t.newton_hodge.count(n) ? t.newton_hodge.at(n) : Polygon{};
        const Rational len = total_length(NP);
        c.pass = true;
        if (len != total_length(HP)) {
            c.pass = false;
            c.detail = "lengths differ";
        } else if (poly_at(NP, len) != poly_at(HP, len)) {
            c.pass = false;
            c.detail = "endpoints differ";
        } else {
            for (const auto& s : HP)
                if (s.slope.denominator() != 1) {
                    c.pass = false;
                    c.detail = "non-integral Hodge slope";
                }
            std::set<Rational> xs{Rational(0), len};
            Rational x(0);
            for (const auto& s : NP) xs.insert(x += s.length);
            x = Rational(0);
            for (const auto& s : HP) xs.insert(x += s.length);
            for (const auto& xv : xs)
                if (poly_at(HP, xv) > poly_at(NP, xv)) {
                    c.pass = false;
                    c.detail = "Hodge polygon above Newton polygon at x = " + rational_str(xv);
                }
        }
        if (c.pass) c.detail = "ok";
        out.push_back(c);
    }
    return out;
}

MazurOgusResult mazur_ogus_check(const InvariantTable& t) {
    MazurOgusResult r;
    for (const auto& [c, v] : t.h) r.sums[c.first + c.second].first += v;
    for (const auto& [n, b] : t.betti) r.sums[n].second += b;
    for (const auto& [n, pr] : r.sums)
        if (pr.first != pr.second) r.pass = false;
    return r;
}

std::string rational_str(const Rational& q) {
    if (q.denominator() == 1) return std::to_string(q.numerator());
    return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

nlohmann::json rational_json(const Rational& q) {
    if (q.denominator() == 1) return q.numerator();
    return rational_str(q);
}

namespace {

std::string cell_key(const Cell& c) { return std::to_string(c.first) + "," + std::to_string(c.second); }

nlohmann::json polygon_json(const Polygon& P) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& s : P) a.push_back({rational_json(s.slope), rational_json(s.length)});
    return a;
}

}  // namespace

nlohmann::json to_json(const InvariantTable& t) {
    nlohmann::json j;
    j["p"] = t.p;
    j["r"] = t.r;
    j["level"] = t.level;
    j["h"] = nlohmann::json::object();
    j["hW"] = nlohmann::json::object();
    j["T"] = nlohmann::json::object();
    j["m"] = nlohmann::json::object();
    j["newton"] = nlohmann::json::object();
    j["newtonHodge"] = nlohmann::json::object();
    j["betti"] = nlohmann::json::object();
    for (const auto& [c, v] : t.h) j["h"][cell_key(c)] = v;
    for (const auto& [c, v] : t.hW) j["hW"][cell_key(c)] = rational_json(v);
    for (const auto& [c, v] : t.T) j["T"][cell_key(c)] = v;
    for (const auto& [c, v] : t.m) j["m"][cell_key(c)] = rational_json(v);
    for (const auto& [n, P] : t.newton) j["newton"][std::to_string(n)] = polygon_json(P);
    for (const auto& [n, P] : t.newton_hodge) j["newtonHodge"][std::to_string(n)] = polygon_json(P);
    for (const auto& [n, b] : t.betti) j["betti"][std::to_string(n)] = b;
    if (!t.torsion.empty()) {
        j["torsion"] = nlohmann::json::object();
        for (const auto& [n, v] : t.torsion) j["torsion"][std::to_string(n)] = v;
    }
    return j;
}

std::string hw_markdown(const RatGrid& hW, int max_total) {
    int imax = 0, jmax = 0;
    for (const auto& [c, v] : hW) {
        if (c.first >= 0 && c.second >= 0 && c.first + c.second <= max_total) {
            imax = std::max(imax, c.first);
            jmax = std::max(jmax, c.second);
        }
    }
    imax = std::max(imax, max_total);
    jmax = std::max(jmax, max_total);
    std::ostringstream os;
    os << "| j \\ i |";
    for (int i = 0; i <= imax; ++i) os << ' ' << i << " |";
    os << "\n|---|";
    for (int i = 0; i <= imax; ++i) os << "---|";
    os << '\n';
    for (int j = jmax; j >= 0; --j) {
        os << "| " << j << " |";
        for (int i = 0; i <= imax; ++i) {
            if (i + j > max_total) {
                os << "   |";
                continue;
            }
            auto it = hW.find({i, j});
            os << ' ' << (it == hW.end() ? "0" : rational_str(it->second)) << " |";
        }
        os << '\n';
    }
    return os.str();
}

std::string to_markdown(const InvariantTable& t) {
    int max_total = 0;
    for (const auto& [c, v] : t.hW) max_total = std::max(max_total, c.first + c.second);
    for (const auto& [c, v] : t.h) max_total = std::max(max_total, c.first + c.second);
    std::ostringstream os;
    os << "## Hodge-Witt numbers h_W^{i,j}\n\n" << hw_markdown(t.hW, max_total);
    RatGrid h;
    for (const auto& [c, v] : t.h) h[c] = v;
    os << "\n## Hodge numbers h^{i,j}\n\n" << hw_markdown(h, max_total);
    os << "\n## Betti numbers\n\n";
    for (const auto& [n, b] : t.betti) os << "- b_" << n << " = " << b << '\n';
    os << "\n## Cells outside the first quadrant\n\n";
    bool any = false;
    for (const auto& [c, v] : t.hW)
        if (c.first < 0 || c.second < 0) {
            os << "- h_W^{" << c.first << "," << c.second << "} = " << rational_str(v) << '\n';
            any = true;
        }
    if (!any) os << "none\n";
    return os.str();
}

}  // namespace drw
