#include "drw/galois_ring.hpp"

namespace drw {

GaloisRing::GaloisRing(int p, int r, int m) : R_(p, m), r_(r) {
    const auto& f = irreducible_poly(p, r);
    g_.assign(f.begin(), f.end());

    // Newton iteration for the root of g lifting t^p
    Elt x = pow(gen(), static_cast<std::uint64_t>(p));
    for (int it = 0; it < m + 1; ++it) {
        Elt gx = zero(), dgx = zero(), xp = one();
        for (int i = 0; i <= r; ++i) {
            Elt term = xp;
            for (auto& c : term) c = R_.mul(c, g_[i]);
            gx = add(gx, term);
            if (i + 1 <= r) {
                Elt dterm = xp;
                for (auto& c : dterm) c = R_.mul(c, R_.mul(g_[i + 1], i + 1));
                dgx = add(dgx, dterm);
            }
            xp = mul(xp, x);
        }
        x = sub(x, mul(gx, inverse(dgx)));
    }
    tau_ = x;

    S_ = Mat(r, r);
    Elt tk = one();
    for (int k = 0; k < r; ++k) {
        for (int i = 0; i < r; ++i) S_(i, k) = tk[i];
        tk = mul(tk, tau_);
    }
    Sinv_ = Mat::identity(r);
    for (int k = 1; k < r; ++k) Sinv_ = mat_mul(Sinv_, S_, R_);
}

GaloisRing::Elt GaloisRing::one() const {
    Elt e = zero();
    e[0] = 1;
    return e;
}

GaloisRing::Elt GaloisRing::gen() const {
    Elt e = zero();
    if (r_ == 1)
        e[0] = R_.norm(-g_[0]);
    else
        e[1] = 1;
    return e;
}

GaloisRing::Elt GaloisRing::add(const Elt& a, const Elt& b) const {
    Elt c(r_);
    for (int i = 0; i < r_; ++i) c[i] = R_.add(a[i], b[i]);
    return c;
}

GaloisRing::Elt GaloisRing::sub(const Elt& a, const Elt& b) const {
    Elt c(r_);
    for (int i = 0; i < r_; ++i) c[i] = R_.sub(a[i], b[i]);
    return c;
}

GaloisRing::Elt GaloisRing::mul(const Elt& a, const Elt& b) const {
    std::vector<std::int64_t> t(2 * r_ - 1, 0);
    for (int i = 0; i < r_; ++i)
        if (a[i])
            for (int j = 0; j < r_; ++j) t[i + j] = (t[i + j] + a[i] * b[j]) % R_.q;
    for (int d = 2 * r_ - 2; d >= r_; --d) {
        std::int64_t lead = t[d];
        if (!lead) continue;
        for (int i = 0; i <= r_; ++i) t[d - r_ + i] = R_.norm(t[d - r_ + i] - lead * g_[i]);
    }
    t.resize(r_);
    return t;
}

GaloisRing::Elt GaloisRing::pow(const Elt& a, std::uint64_t e) const {
    Elt res = one(), b = a;
    while (e) {
        if (e & 1) res = mul(res, b);
        b = mul(b, b);
        e >>= 1;
    }
    return res;
}

Mat GaloisRing::mult_matrix(const Elt& a) const {
    Mat M(r_, r_);
    Elt tk = one(), t = gen();
    for (int k = 0; k < r_; ++k) {
        Elt c = mul(a, tk);
        for (int i = 0; i < r_; ++i) M(i, k) = c[i];
        tk = mul(tk, t);
    }
    return M;
}

GaloisRing::Elt GaloisRing::inverse(const Elt& a) const {
    auto x = solve(mult_matrix(a), one(), R_);
    if (!x) throw LinalgError("not a unit in the Galois ring");
    return *x;
}

GaloisRing::Elt GaloisRing::sigma(const Elt& a) const { return mat_vec(S_, a, R_); }
GaloisRing::Elt GaloisRing::sigma_inv(const Elt& a) const { return mat_vec(Sinv_, a, R_); }

GaloisRing::Elt GaloisRing::teichmuller(const FieldElt& x) const {
    Elt y(r_);
    for (int i = 0; i < r_; ++i) y[i] = x.c[i];
    std::uint64_t q = 1;
    for (int i = 0; i < r_; ++i) q *= static_cast<std::uint64_t>(R_.p);
    for (int i = 1; i < R_.m; ++i) y = pow(y, q);
    return y;
}

GaloisRing::Elt GaloisRing::from_witt(const WittScalar& w) const {
    Elt acc = zero();
    for (int i = 0; i < w.m() && i < R_.m; ++i) {
        FieldElt a = w.a[i];
        for (int k = 0; k < i; ++k) a = frob_inv(a);
        Elt t = teichmuller(a);
        std::int64_t s = R_.ppow(i);
        for (auto& c : t) c = R_.mul(c, s);
        acc = add(acc, t);
    }
    return acc;
}

FieldElt GaloisRing::residue(const Elt& a) const {
    FieldElt f = FieldElt::zero(R_.p, r_);
    for (int i = 0; i < r_; ++i) f.c[i] = static_cast<int>(a[i] % R_.p);
    return f;
}

}  // namespace drw
