#include "drw/hom.hpp"

#include <algorithm>

namespace drw {

GradedMats transition_section(const Block& b, int mh, int nh, int ml, int nl) {
    GradedMats proj = transition(b, mh, nh, ml, nl);
    TGM L = truncate(b, ml, nl);
    const Zpm Rh(b.p, mh);
    GradedMats out;
    for (const auto& [g, P] : proj) {
        const int gl = L.gens(g);
        Mat S(P.cols, gl);
        // the projection has entries defined mod p^{ml}; lift them verbatim
        const Zpm Rl(b.p, ml);
        for (int a = 0; a < gl; ++a) {
            std::vector<std::int64_t> e(gl, 0);
            e[a] = 1;
            auto x = map_preimage(P, L.at(g).mod, e, Rl);
            if (!x) throw BlockError("transition is not surjective");
            for (int i = 0; i < P.cols; ++i) S(i, a) = Rh.norm((*x)[i]);
        }
        out[g] = S;
    }
    return out;
}

namespace {

GradedMats shift_keys(const GradedMats& f, int a) {
    GradedMats out;
    for (const auto& [g, M] : f) out[g - a] = M;
    return out;
}

}  // namespace

int stable_hom_length(const Summand& a, const Summand& b, int m, int n) {
    TGM Ah = shift_grading(truncate(a.block, m + 1, n + 1), a.gshift);
    TGM Bh = shift_grading(truncate(b.block, m + 1, n + 1), b.gshift);
    TGM Al = shift_grading(truncate(a.block, m, n), a.gshift);
    TGM Bl = shift_grading(truncate(b.block, m, n), b.gshift);
    const Zpm Rl(a.block.p, m);
    GradedMats secA = shift_keys(transition_section(a.block, m + 1, n + 1, m, n), a.gshift);
    GradedMats prjB = shift_keys(transition(b.block, m + 1, n + 1, m, n), b.gshift);
    HomSpace Hh = hom_space(Ah, Bh);
    HomSpace Hl = hom_space(Al, Bl, false);
    std::vector<GradedMats> images;
    for (int c = 0; c < Hh.gens.cols; ++c) {
        GradedMats f = hom_unpack(Hh, Hh.gens.col(c));
        GradedMats img;
        for (const auto& [g, fg] : f) {
            auto is = secA.find(g);
            auto ip = prjB.find(g);
            if (is == secA.end() || ip == prjB.end()) continue;
            img[g] = mat_mul(mat_mul(ip->second, mat_reduce(fg, Rl), Rl), mat_reduce(is->second, Rl), Rl);
        }
        images.push_back(img);
    }
    return hom_span_length(Hl, images, Rl);
}

HomResult hom_dimension(const FormalObject& M, const FormalObject& N, int m, int n, int max_level) {
    HomResult res;
    auto degree_of = [](const FormalObject& x) {
        std::optional<int> d;
        for (const auto& s : x.items) {
            if (d && *d != -s.cshift) throw BlockError("hom_space: object not concentrated in one degree");
            d = -s.cshift;
        }
        return d;
    };
    auto dm = degree_of(M), dn = degree_of(N);
    if (!dm || !dn || *dm != *dn) {
        res.status = Stability::Stable;
        res.m = m;
        res.n = n;
        return res;
    }
    auto total = [&](int mm, int nn) {
        int s = 0;
        for (const auto& a : M.items)
            for (const auto& b : N.items) s += stable_hom_length(a, b, mm, nn);
        return s;
    };
    for (int L = 0; std::max(m, n) + L + 2 <= max_level; ++L) {
        if (res.lengths.empty())
            for (int k = 0; k < 3; ++k) res.lengths.push_back(total(m + L + k, n + L + k));
        else {
            res.lengths.erase(res.lengths.begin());
            res.lengths.push_back(total(m + L + 2, n + L + 2));
        }
        const int d1 = res.lengths[1] - res.lengths[0], d2 = res.lengths[2] - res.lengths[1];
        if (d1 == d2 && d1 >= 0) {
            res.status = Stability::Stable;
            res.rank_zp = d1;
            res.m = m + L;
            res.n = n + L;
            const int r = M.r;
            if (d1 == 0) res.dim_k = res.lengths[0] / r;
            return res;
        }
    }
    res.status = Stability::Unstable;
    return res;
}

ConeResult cone_or_extension(const FieldElt& lambda, int m, int n) {
    const int p = lambda.p, r = lambda.r;
    ConeResult out;
    out.m = m;
    out.n = n;
    if (lambda.is_zero()) {
        out.split = true;
        out.object = direct_sum(single(make_domino(p, r, -1)), single(make_residue_k(p, r), -1, 1));
        out.cone = direct_sum(truncate(make_domino(p, r, -1), m, n),
                              shift_grading(truncate(make_residue_k(p, r), m, n), -1));
        return out;
    }
    Block um1 = make_domino(p, r, -1);
    TGM U = truncate(um1, m, n);
    const Zpm R(p, m);
    // z = sum lambda_b dV^b with lambda_{b} = sigma^{-1}(lambda_{b-1})
    const auto& labels = U.at(1).labels;
    std::vector<std::int64_t> z(U.gens(1), 0);
    FieldElt lb = lambda;
    for (int b = -1; b < n; ++b) {
        std::string base = "dV^" + std::to_string(b);
        for (int k = 0; k < r; ++k) {
            std::string lab = base + (k ? "*t^" + std::to_string(k) : "");
            auto it = std::find(labels.begin(), labels.end(), lab);
            if (it != labels.end()) z[it - labels.begin()] = lb.c[k];
        }
        lb = frob_inv(lb);
    }
    Mat sub(U.gens(1), r);
    std::vector<std::int64_t> tz = z;
    for (int k = 0; k < r; ++k) {
        sub.set_col(k, tz);
        if (r > 1) tz = mat_vec(U.at(1).T, tz, R);
    }
    GradedMats gens{{1, sub}};
    out.cone = quotient(U, gens).target;
    out.object = single(make_domino(p, r, 0));
    out.model = truncate(make_domino(p, r, 0), m, n);
    out.iso = find_iso(out.model, out.cone);
    return out;
}

}  // namespace drw
