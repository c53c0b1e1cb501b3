#include "drw/linalg.hpp"

#include <algorithm>
#include <utility>

namespace drw {

Zpm::Zpm(int p_, int m_) : p(p_), m(m_), q(1) {
    if (p < 2 || m < 1) throw LinalgError("bad ring parameters");
    for (int i = 0; i < m; ++i) {
        q *= p;
        if (q >= (std::int64_t{1} << 31)) throw LinalgError("p^m exceeds 2^31");
    }
}

int Zpm::val(std::int64_t x) const {
    x = norm(x);
    if (x == 0) return m;
    int v = 0;
    while (x % p == 0) {
        x /= p;
        ++v;
    }
    return v;
}

std::int64_t Zpm::ppow(int e) const {
    if (e >= m) return 0;
    std::int64_t r = 1;
    for (int i = 0; i < e; ++i) r *= p;
    return r;
}

std::int64_t Zpm::unit_inv(std::int64_t x) const {
    x = norm(x);
    if (x == 0) throw LinalgError("unit_inv of zero");
    while (x % p == 0) x /= p;
    // extended Euclid against q
    std::int64_t a = x, b = q, u = 1, v = 0;
    while (b) {
        std::int64_t t = a / b;
        a -= t * b;
        std::swap(a, b);
        u -= t * v;
        std::swap(u, v);
    }
    return norm(u);
}

/* ---------------- dense matrices ---------------- */

Mat Mat::identity(int n) {
    Mat I(n, n);
    for (int i = 0; i < n; ++i) I(i, i) = 1;
    return I;
}

std::vector<std::int64_t> Mat::col(int j) const {
    std::vector<std::int64_t> v(rows);
    for (int i = 0; i < rows; ++i) v[i] = (*this)(i, j);
    return v;
}

void Mat::set_col(int j, const std::vector<std::int64_t>& v) {
    for (int i = 0; i < rows; ++i) (*this)(i, j) = v[i];
}

bool Mat::is_zero() const {
    return std::all_of(a.begin(), a.end(), [](std::int64_t x) { return x == 0; });
}

Mat mat_mul(const Mat& x, const Mat& y, const Zpm& R) {
    if (x.cols != y.rows) throw LinalgError("mat_mul shape mismatch");
    Mat z(x.rows, y.cols);
#pragma omp parallel for if (x.rows * y.cols > 4096)
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            std::int64_t s = x(i, k);
            if (!s) continue;
            for (int j = 0; j < y.cols; ++j) z(i, j) = (z(i, j) + s * y(k, j)) % R.q;
        }
    return z;
}

Mat mat_add(const Mat& x, const Mat& y, const Zpm& R) {
    if (x.rows != y.rows || x.cols != y.cols) throw LinalgError("mat_add shape mismatch");
    Mat z = x;
    for (std::size_t i = 0; i < z.a.size(); ++i) z.a[i] = R.norm(x.a[i] + y.a[i]);
    return z;
}

Mat mat_sub(const Mat& x, const Mat& y, const Zpm& R) {
    if (x.rows != y.rows || x.cols != y.cols) throw LinalgError("mat_sub shape mismatch");
    Mat z = x;
    for (std::size_t i = 0; i < z.a.size(); ++i) z.a[i] = R.norm(x.a[i] - y.a[i]);
    return z;
}

Mat mat_scale(const Mat& x, std::int64_t s, const Zpm& R) {
    Mat z = x;
    s = R.norm(s);
    for (auto& e : z.a) e = e * s % R.q;
    return z;
}

Mat mat_reduce(const Mat& x, const Zpm& R) {
    Mat z = x;
    for (auto& e : z.a) e = R.norm(e);
    return z;
}

Mat hcat(const Mat& x, const Mat& y) {
    if (x.cols == 0) return y.cols == 0 ? Mat(std::max(x.rows, y.rows), 0) : y;
    if (y.cols == 0) return x;
    if (x.rows != y.rows) throw LinalgError("hcat shape mismatch");
    Mat z(x.rows, x.cols + y.cols);
    for (int i = 0; i < x.rows; ++i) {
        for (int j = 0; j < x.cols; ++j) z(i, j) = x(i, j);
        for (int j = 0; j < y.cols; ++j) z(i, x.cols + j) = y(i, j);
    }
    return z;
}

Mat vcat(const Mat& x, const Mat& y) {
    if (x.rows == 0) return y;
    if (y.rows == 0) return x;
    if (x.cols != y.cols) throw LinalgError("vcat shape mismatch");
    Mat z(x.rows + y.rows, x.cols);
    std::copy(x.a.begin(), x.a.end(), z.a.begin());
    std::copy(y.a.begin(), y.a.end(), z.a.begin() + static_cast<std::ptrdiff_t>(x.a.size()));
    return z;
}

Mat kron(const Mat& x, const Mat& y, const Zpm& R) {
    Mat z(x.rows * y.rows, x.cols * y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) {
            std::int64_t s = x(i, j);
            if (!s) continue;
            for (int k = 0; k < y.rows; ++k)
                for (int l = 0; l < y.cols; ++l) z(i * y.rows + k, j * y.cols + l) = R.mul(s, y(k, l));
        }
    return z;
}

Mat block_diag(const Mat& x, const Mat& y) {
    Mat z(x.rows + y.rows, x.cols + y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) z(i, j) = x(i, j);
    for (int i = 0; i < y.rows; ++i)
        for (int j = 0; j < y.cols; ++j) z(x.rows + i, x.cols + j) = y(i, j);
    return z;
}

Mat submat(const Mat& x, int r0, int r1, int c0, int c1) {
    Mat z(r1 - r0, c1 - c0);
    for (int i = r0; i < r1; ++i)
        for (int j = c0; j < c1; ++j) z(i - r0, j - c0) = x(i, j);
    return z;
}

std::vector<std::int64_t> mat_vec(const Mat& x, const std::vector<std::int64_t>& v, const Zpm& R) {
    if (static_cast<int>(v.size()) != x.cols) throw LinalgError("mat_vec shape mismatch");
    std::vector<std::int64_t> out(x.rows, 0);
    for (int i = 0; i < x.rows; ++i) {
        std::int64_t s = 0;
        for (int j = 0; j < x.cols; ++j) s = (s + x(i, j) * R.norm(v[j])) % R.q;
        out[i] = s;
    }
    return out;
}

/* ---------------- Smith form ---------------- */

namespace {

void swap_rows(Mat& M, int a, int b) {
    if (a == b) return;
    for (int j = 0; j < M.cols; ++j) std::swap(M(a, j), M(b, j));
}

void swap_cols(Mat& M, int a, int b) {
    if (a == b) return;
    for (int i = 0; i < M.rows; ++i) std::swap(M(i, a), M(i, b));
}

}  // namespace

SmithForm smith(const Mat& A, const Zpm& R, Exec exec) {
    const int nr = A.rows, nc = A.cols;
    Mat D = mat_reduce(A, R);
    SmithForm S{Mat::identity(nr), Mat::identity(nr), Mat::identity(nc), {}};
    const int kmax = std::min(nr, nc);
    S.vals.assign(kmax, R.m);
    const bool par = exec == Exec::Parallel;
    std::vector<std::int64_t> factor;
    for (int k = 0; k < kmax; ++k) {
        int bi = -1, bj = -1, bv = R.m;
        for (int i = k; i < nr && bv > 0; ++i)
            for (int j = k; j < nc; ++j) {
                std::int64_t x = D(i, j);
                if (!x) continue;
                int v = R.val(x);
                if (v < bv) {
                    bv = v;
                    bi = i;
                    bj = j;
                    if (v == 0) break;
                }
            }
        if (bi < 0) break;
        swap_rows(D, k, bi);
        swap_rows(S.P, k, bi);
        swap_cols(S.Pinv, k, bi);
        swap_cols(D, k, bj);
        swap_cols(S.Q, k, bj);

        const std::int64_t pv = R.ppow(bv);
        const std::int64_t u = R.unit_inv(D(k, k));
        const std::int64_t uinv = R.norm(D(k, k) / pv);
        for (int j = 0; j < nc; ++j) D(k, j) = D(k, j) * u % R.q;
        for (int j = 0; j < nr; ++j) S.P(k, j) = S.P(k, j) * u % R.q;
        for (int i = 0; i < nr; ++i) S.Pinv(i, k) = S.Pinv(i, k) * uinv % R.q;

        // row elimination below the pivot
        factor.assign(nr, 0);
        for (int i = k + 1; i < nr; ++i) factor[i] = D(i, k) / pv;
#pragma omp parallel for schedule(static) if (par && (nr - k) * nc > 2048)
        for (int i = k + 1; i < nr; ++i) {
            const std::int64_t f = factor[i];
            if (!f) continue;
            for (int j = k; j < nc; ++j) D(i, j) = R.norm(D(i, j) - f * D(k, j));
            for (int j = 0; j < nr; ++j) S.P(i, j) = R.norm(S.P(i, j) - f * S.P(k, j));
        }
#pragma omp parallel for schedule(static) if (par && nr * nr > 2048)
        for (int r = 0; r < nr; ++r) {
            std::int64_t s = S.Pinv(r, k);
            for (int i = k + 1; i < nr; ++i)
                if (factor[i]) s = (s + factor[i] * S.Pinv(r, i)) % R.q;
            S.Pinv(r, k) = s;
        }

        // column elimination right of the pivot; only row k is touched in D
        factor.assign(nc, 0);
        for (int j = k + 1; j < nc; ++j) {
            factor[j] = D(k, j) / pv;
            D(k, j) = 0;
        }
#pragma omp parallel for schedule(static) if (par && nc * nc > 2048)
        for (int r = 0; r < nc; ++r) {
            const std::int64_t qk = S.Q(r, k);
            if (!qk) continue;
            for (int j = k + 1; j < nc; ++j)
                if (factor[j]) S.Q(r, j) = R.norm(S.Q(r, j) - factor[j] * qk);
        }
        S.vals[k] = bv;
    }
    return S;
}

int span_length(const Mat& cols, const Zpm& R) {
    if (cols.rows == 0 || cols.cols == 0) return 0;
    auto S = smith(cols, R);
    int len = 0;
    for (int v : S.vals) len += R.m - v;
    return len;
}

Mat kernel(const Mat& A, const Zpm& R) {
    const int nc = A.cols;
    if (nc == 0) return Mat(0, 0);
    if (A.rows == 0) return Mat::identity(nc);
    auto S = smith(A, R);
    std::vector<std::vector<std::int64_t>> gens;
    for (int i = 0; i < nc; ++i) {
        int v = i < static_cast<int>(S.vals.size()) ? S.vals[i] : R.m;
        if (v == 0) continue;
        std::int64_t s = R.ppow(R.m - v);
        std::vector<std::int64_t> g(nc);
        for (int r = 0; r < nc; ++r) g[r] = S.Q(r, i) * s % R.q;
        gens.push_back(std::move(g));
    }
    Mat K(nc, static_cast<int>(gens.size()));
    for (int j = 0; j < K.cols; ++j) K.set_col(j, gens[j]);
    return K;
}

std::optional<std::vector<std::int64_t>> solve(const Mat& A, const std::vector<std::int64_t>& b,
                                               const Zpm& R) {
    if (static_cast<int>(b.size()) != A.rows) throw LinalgError("solve shape mismatch");
    std::vector<std::int64_t> x(A.cols, 0);
    if (A.rows == 0) return x;
    if (A.cols == 0) {
        for (auto e : b)
            if (R.norm(e)) return std::nullopt;
        return x;
    }
    auto S = smith(A, R);
    auto c = mat_vec(S.P, b, R);  // D y = c, x = Q y
    std::vector<std::int64_t> y(A.cols, 0);
    for (int i = 0; i < A.rows; ++i) {
        int v = i < static_cast<int>(S.vals.size()) ? S.vals[i] : R.m;
        if (!c[i]) continue;
        if (R.val(c[i]) < v) return std::nullopt;
        if (i < A.cols) y[i] = c[i] / R.ppow(v);
    }
    return mat_vec(S.Q, y, R);
}

/* ---------------- Howell span ---------------- */

std::vector<std::int64_t> SpanBuilder::reduce(std::vector<std::int64_t> v) const {
    for (auto& e : v) e = R_.norm(e);
    for (const auto& [c, row] : rows_) {
        if (!v[c]) continue;
        int w = R_.val(v[c]);
        int pv = R_.val(row[c]);
        if (w < pv) continue;
        std::int64_t f = v[c] / R_.ppow(pv);
        for (int j = c; j < dim_; ++j)
            if (row[j]) v[j] = R_.norm(v[j] - f * row[j]);
    }
    return v;
}

bool SpanBuilder::contains(std::vector<std::int64_t> v) const {
    auto r = reduce(std::move(v));
    return std::all_of(r.begin(), r.end(), [](std::int64_t x) { return x == 0; });
}

bool SpanBuilder::insert(std::vector<std::int64_t> v) {
    if (static_cast<int>(v.size()) != dim_) throw LinalgError("SpanBuilder dimension mismatch");
    for (auto& e : v) e = R_.norm(e);
    bool grew = false;
    std::vector<std::vector<std::int64_t>> pending{std::move(v)};
    while (!pending.empty()) {
        auto x = std::move(pending.back());
        pending.pop_back();
        int c = 0;
        while (true) {
            while (c < dim_ && !x[c]) ++c;
            if (c == dim_) break;
            int w = R_.val(x[c]);
            auto it = rows_.find(c);
            if (it != rows_.end() && w >= R_.val(it->second[c])) {
                const auto& row = it->second;
                std::int64_t f = x[c] / R_.ppow(R_.val(row[c]));
                for (int j = c; j < dim_; ++j)
                    if (row[j]) x[j] = R_.norm(x[j] - f * row[j]);
                continue;
            }
            std::int64_t u = R_.unit_inv(x[c]);
            for (int j = c; j < dim_; ++j) x[j] = x[j] * u % R_.q;
            std::vector<std::int64_t> sat(dim_, 0);
            std::int64_t s = R_.ppow(R_.m - w);
            bool nonzero = false;
            for (int j = c + 1; j < dim_; ++j) {
                sat[j] = x[j] * s % R_.q;
                nonzero |= sat[j] != 0;
            }
            if (it != rows_.end()) {
                pending.push_back(std::move(it->second));
                it->second = std::move(x);
            } else {
                rows_.emplace(c, std::move(x));
            }
            if (nonzero) pending.push_back(std::move(sat));
            grew = true;
            break;
        }
    }
    return grew;
}

int SpanBuilder::length() const {
    int len = 0;
    for (const auto& [c, row] : rows_) len += R_.m - R_.val(row[c]);
    return len;
}

std::vector<std::vector<std::int64_t>> SpanBuilder::rows() const {
    std::vector<std::vector<std::int64_t>> out;
    for (const auto& [c, row] : rows_) out.push_back(row);
    return out;
}

/* ---------------- presented modules ---------------- */

int Presented::length() const {
    int s = 0;
    for (int e : orders) s += e;
    return s;
}

Mat Presented::relations(const Zpm& R) const {
    Mat D(gens(), gens());
    for (int i = 0; i < gens(); ++i) D(i, i) = R.ppow(orders[i]);
    return D;
}

std::vector<std::int64_t> Presented::normalize(std::vector<std::int64_t> v, const Zpm& R) const {
    for (int i = 0; i < gens(); ++i) {
        std::int64_t o = orders[i] >= R.m ? R.q : R.ppow(orders[i]);
        v[i] = R.norm(v[i]) % o;
    }
    return v;
}

bool Presented::is_zero_vec(const std::vector<std::int64_t>& v, const Zpm& R) const {
    auto n = normalize(v, R);
    return std::all_of(n.begin(), n.end(), [](std::int64_t x) { return x == 0; });
}

int sub_length(const Presented& M, const Mat& gens, const Zpm& R) {
    if (M.gens() == 0 || gens.cols == 0) return 0;
    Mat rel = M.relations(R);
    return span_length(hcat(gens, rel), R) - span_length(rel, R);
}

bool in_submodule(const Presented& M, const Mat& gens, const std::vector<std::int64_t>& v, const Zpm& R) {
    return solve(hcat(gens, M.relations(R)), v, R).has_value();
}

QuotientData quotient(const Presented& M, const Mat& gens, const Zpm& R, Exec exec) {
    const int g = M.gens();
    QuotientData Q;
    if (g == 0) {
        Q.proj = Mat(0, 0);
        Q.sect = Mat(0, 0);
        return Q;
    }
    Mat rel = gens.cols ? hcat(gens, M.relations(R)) : M.relations(R);
    auto S = smith(rel, R, exec);
    std::vector<int> keep;
    for (int i = 0; i < g; ++i) {
        int v = i < static_cast<int>(S.vals.size()) ? S.vals[i] : R.m;
        if (v > 0) {
            keep.push_back(i);
            Q.target.orders.push_back(v);
        }
    }
    Q.proj = Mat(static_cast<int>(keep.size()), g);
    Q.sect = Mat(g, static_cast<int>(keep.size()));
    for (std::size_t a = 0; a < keep.size(); ++a) {
        for (int j = 0; j < g; ++j) Q.proj(static_cast<int>(a), j) = S.P(keep[a], j);
        for (int i = 0; i < g; ++i) Q.sect(i, static_cast<int>(a)) = S.Pinv(i, keep[a]);
    }
    for (std::size_t a = 0; a < keep.size(); ++a) {
        std::int64_t o = Q.target.orders[a] >= R.m ? R.q : R.ppow(Q.target.orders[a]);
        for (int j = 0; j < g; ++j) Q.proj(static_cast<int>(a), j) %= o;
    }
    return Q;
}

Mat map_kernel(const Mat& f, const Presented& M, const Presented& N, const Zpm& R) {
    const int gm = M.gens();
    if (gm == 0) return Mat(0, 0);
    if (N.gens() == 0) return Mat::identity(gm);
    Mat big = hcat(f, N.relations(R));
    Mat K = kernel(big, R);
    return submat(K, 0, gm, 0, K.cols);
}

int map_image_length(const Mat& f, const Presented& N, const Zpm& R) { return sub_length(N, f, R); }

std::optional<std::vector<std::int64_t>> map_preimage(const Mat& f, const Presented& N,
                                                      const std::vector<std::int64_t>& y, const Zpm& R) {
    const int gm = f.cols;
    if (N.gens() == 0) return std::vector<std::int64_t>(gm, 0);
    auto x = solve(hcat(f, N.relations(R)), y, R);
    if (!x) return std::nullopt;
    x->resize(gm);
    return x;
}

}  // namespace drw
