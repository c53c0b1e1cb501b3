#pragma once

#include "drw/linalg.hpp"
#include "drw/witt.hpp"

#include <cstdint>
#include <vector>

namespace drw {

/* GR(p^m, r) = (Z/p^m)[t]/(g), g the naive monic lift of the stored
 * irreducible polynomial.  Elements are coefficient vectors of length r.
 * This is W_m(F_{p^r}) with sigma(t) the root of g congruent to t^p. */
class GaloisRing {
public:
    using Elt = std::vector<std::int64_t>;

    GaloisRing(int p, int r, int m);

    const Zpm& ring() const { return R_; }
    int p() const { return R_.p; }
    int r() const { return r_; }
    int m() const { return R_.m; }

    Elt zero() const { return Elt(r_, 0); }
    Elt one() const;
    Elt gen() const;  // t
    Elt add(const Elt& a, const Elt& b) const;
    Elt sub(const Elt& a, const Elt& b) const;
    Elt mul(const Elt& a, const Elt& b) const;
    Elt pow(const Elt& a, std::uint64_t e) const;
    Elt inverse(const Elt& a) const;  // throws on non-units

    Elt sigma(const Elt& a) const;
    Elt sigma_inv(const Elt& a) const;

    // r x r matrices over Z/p^m in the basis 1, t, ..., t^{r-1}
    Mat mult_matrix(const Elt& a) const;
    const Mat& sigma_matrix() const { return S_; }
    const Mat& sigma_inv_matrix() const { return Sinv_; }

    Elt teichmuller(const FieldElt& x) const;
    // ring isomorphism W_m(F_{p^r}) -> GR(p^m, r)
    Elt from_witt(const WittScalar& w) const;
    FieldElt residue(const Elt& a) const;

private:
    Zpm R_;
    int r_;
    std::vector<std::int64_t> g_;  // monic, size r+1
    Elt tau_;                      // sigma(t)
    Mat S_, Sinv_;
};

}  // namespace drw
