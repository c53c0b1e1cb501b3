#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace drw {

/* Arithmetic in Z/p^m.  Representatives live in [0, p^m). */
struct Zpm {
    int p = 2;
    int m = 1;
    std::int64_t q = 2;

    Zpm() = default;
    Zpm(int p_, int m_);

    std::int64_t norm(std::int64_t x) const {
        x %= q;
        return x < 0 ? x + q : x;
    }
    std::int64_t add(std::int64_t a, std::int64_t b) const { return norm(a + b); }
    std::int64_t sub(std::int64_t a, std::int64_t b) const { return norm(a - b); }
    std::int64_t mul(std::int64_t a, std::int64_t b) const { return norm(a * b); }
    // valuation, m for zero
    int val(std::int64_t x) const;
    std::int64_t ppow(int e) const;
    // inverse of x / p^{val(x)}
    std::int64_t unit_inv(std::int64_t x) const;
};

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<std::int64_t> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0) {}
    static Mat identity(int n);

    std::int64_t& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    std::int64_t operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
    bool operator==(const Mat& o) const { return rows == o.rows && cols == o.cols && a == o.a; }

    std::vector<std::int64_t> col(int j) const;
    void set_col(int j, const std::vector<std::int64_t>& v);
    bool is_zero() const;
};

Mat mat_mul(const Mat& x, const Mat& y, const Zpm& R);
Mat mat_add(const Mat& x, const Mat& y, const Zpm& R);
Mat mat_sub(const Mat& x, const Mat& y, const Zpm& R);
Mat mat_scale(const Mat& x, std::int64_t s, const Zpm& R);
Mat mat_reduce(const Mat& x, const Zpm& R);
Mat hcat(const Mat& x, const Mat& y);
Mat vcat(const Mat& x, const Mat& y);
Mat kron(const Mat& x, const Mat& y, const Zpm& R);
Mat block_diag(const Mat& x, const Mat& y);
Mat submat(const Mat& x, int r0, int r1, int c0, int c1);
std::vector<std::int64_t> mat_vec(const Mat& x, const std::vector<std::int64_t>& v, const Zpm& R);

enum class Exec { Serial, Parallel };

/* P A Q = D with D diagonal, D_ii = p^{vals[i]} (vals[i] = m for a zero
 * diagonal entry).  P, Q invertible; Pinv = P^{-1}. */
struct SmithForm {
    Mat P, Pinv, Q;
    std::vector<int> vals;  // length min(rows, cols)
};

SmithForm smith(const Mat& A, const Zpm& R, Exec exec = Exec::Parallel);

// Z_p-length of the submodule of (Z/p^m)^rows spanned by the columns
int span_length(const Mat& cols, const Zpm& R);
// columns generating { x : A x = 0 }
Mat kernel(const Mat& A, const Zpm& R);
std::optional<std::vector<std::int64_t>> solve(const Mat& A, const std::vector<std::int64_t>& b,
                                               const Zpm& R);

/* Incremental span in Howell form.  Each stored row has a leading entry
 * p^v; saturations p^{m-v} row are inserted as well, so membership is a
 * plain reduction and the length is sum(m - v). */
class SpanBuilder {
public:
    SpanBuilder(const Zpm& R, int dim) : R_(R), dim_(dim) {}

    // returns true if the span grew
    bool insert(std::vector<std::int64_t> v);
    bool contains(std::vector<std::int64_t> v) const;
    std::vector<std::int64_t> reduce(std::vector<std::int64_t> v) const;
    int length() const;
    int dim() const { return dim_; }
    std::vector<std::vector<std::int64_t>> rows() const;

private:
    Zpm R_;
    int dim_;
    std::map<int, std::vector<std::int64_t>> rows_;  // keyed by pivot column
};

/* A finite W_m-module (Z/p^m)^g / diag(p^{orders}); every order in [1, m]. */
struct Presented {
    std::vector<int> orders;

    int gens() const { return static_cast<int>(orders.size()); }
    int length() const;
    Mat relations(const Zpm& R) const;  // g x g diagonal
    // reduce each coordinate modulo its order
    std::vector<std::int64_t> normalize(std::vector<std::int64_t> v, const Zpm& R) const;
    bool is_zero_vec(const std::vector<std::int64_t>& v, const Zpm& R) const;
};

// length of the submodule generated by the columns of gens
int sub_length(const Presented& M, const Mat& gens, const Zpm& R);
bool in_submodule(const Presented& M, const Mat& gens, const std::vector<std::int64_t>& v, const Zpm& R);

/* M / <gens>: new presentation with projection (g' x g) and a set-theoretic
 * section (g x g') sending generators to lifts. */
struct QuotientData {
    Presented target;
    Mat proj;
    Mat sect;
};
QuotientData quotient(const Presented& M, const Mat& gens, const Zpm& R, Exec exec = Exec::Parallel);

// generators of the kernel of f: M -> N (columns in M's coordinates)
Mat map_kernel(const Mat& f, const Presented& M, const Presented& N, const Zpm& R);
// length of the image of f: M -> N
int map_image_length(const Mat& f, const Presented& N, const Zpm& R);
// solves f x = y in N; returns some x
std::optional<std::vector<std::int64_t>> map_preimage(const Mat& f, const Presented& N,
                                                      const std::vector<std::int64_t>& y, const Zpm& R);

struct LinalgError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace drw
