#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace drw {

/* Elements of F_q, q = p^r, in the power basis of a fixed irreducible
 * polynomial (see irreducible_poly). r = 1 is plain F_p. */
struct FieldElt {
    int p = 2;
    int r = 1;
    std::vector<int> c;  // c[0] + c[1] t + ... + c[r-1] t^{r-1}

    static FieldElt zero(int p, int r) { return {p, r, std::vector<int>(r, 0)}; }
    static FieldElt one(int p, int r);
    static FieldElt gen(int p, int r);  // the class of t
    static FieldElt from_int(int p, int r, long v);

    bool is_zero() const;
    bool operator==(const FieldElt& o) const { return p == o.p && r == o.r && c == o.c; }
    bool operator!=(const FieldElt& o) const { return !(*this == o); }
};

/* Monic irreducible f of degree r over F_p, coefficients low to high
 * (size r+1).  Built-in table for p in {2,3,5,7}, r <= 4. */
const std::vector<int>& irreducible_poly(int p, int r);

FieldElt operator+(const FieldElt& a, const FieldElt& b);
FieldElt operator-(const FieldElt& a, const FieldElt& b);
FieldElt operator-(const FieldElt& a);
FieldElt operator*(const FieldElt& a, const FieldElt& b);
FieldElt pow(const FieldElt& a, std::uint64_t e);
FieldElt frob(const FieldElt& a);        // x -> x^p
FieldElt frob_inv(const FieldElt& a);    // x -> x^{1/p}
FieldElt inverse(const FieldElt& a);

struct WittError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/* Truncated Witt vector (a_0, ..., a_{m-1}) over F_{p^r}. */
struct WittScalar {
    int p = 2;
    int r = 1;
    std::vector<FieldElt> a;

    int m() const { return static_cast<int>(a.size()); }
    static WittScalar zero(int p, int r, int m);
    static WittScalar one(int p, int r, int m);
    bool operator==(const WittScalar& o) const { return p == o.p && r == o.r && a == o.a; }
    bool operator!=(const WittScalar& o) const { return !(*this == o); }
};

WittScalar witt_add(const WittScalar& x, const WittScalar& y);
WittScalar witt_sub(const WittScalar& x, const WittScalar& y);
WittScalar witt_neg(const WittScalar& x);
WittScalar witt_mul(const WittScalar& x, const WittScalar& y);
WittScalar frobenius(const WittScalar& x);
WittScalar verschiebung(const WittScalar& x);
WittScalar teichmuller(const FieldElt& x, int m);
WittScalar witt_from_int(int p, int r, int m, long v);
// least i with a_i != 0; nullopt stands for infinity
std::optional<int> valuation(const WittScalar& x);

/* Universal addition / multiplication polynomials, reduced mod p, in the
 * variables X_0..X_{m-1}, Y_0..Y_{m-1}.  Cached per (p, m). */
struct WittPolys {
    struct Mono {
        std::vector<std::uint16_t> e;  // 2m exponents
        int c;                         // coefficient in [1, p)
    };
    int p = 2;
    int m = 1;
    std::vector<std::vector<Mono>> sum;   // sum[k] = S_k
    std::vector<std::vector<Mono>> prod;  // prod[k] = P_k
    std::vector<int> max_exp;             // per variable
};

// throws WittError when the polynomials would exceed the monomial budget
const WittPolys& witt_polys(int p, int m);

}  // namespace drw
