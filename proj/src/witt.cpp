#include "drw/witt.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace drw {

namespace {

int modp(long v, int p) {
    long r = v % p;
    return static_cast<int>(r < 0 ? r + p : r);
}

void check_same(const FieldElt& a, const FieldElt& b) {
    if (a.p != b.p || a.r != b.r) throw WittError("incompatible field parameters");
}

}  // namespace

const std::vector<int>& irreducible_poly(int p, int r) {
    // Conway polynomials; r = 1 uses x so that t = 0.
    static const std::map<std::pair<int, int>, std::vector<int>> table = {
        {{2, 1}, {0, 1}},          {{2, 2}, {1, 1, 1}},       {{2, 3}, {1, 1, 0, 1}},
        {{2, 4}, {1, 1, 0, 0, 1}}, {{3, 1}, {0, 1}},          {{3, 2}, {2, 2, 1}},
        {{3, 3}, {1, 2, 0, 1}},    {{3, 4}, {2, 0, 0, 2, 1}}, {{5, 1}, {0, 1}},
        {{5, 2}, {2, 4, 1}},       {{5, 3}, {3, 3, 0, 1}},    {{5, 4}, {2, 4, 4, 0, 1}},
        {{7, 1}, {0, 1}},          {{7, 2}, {3, 6, 1}},       {{7, 3}, {4, 0, 6, 1}},
        {{7, 4}, {3, 4, 5, 0, 1}},
    };
    auto it = table.find({p, r});
    if (it == table.end()) throw WittError("no built-in field model for this (p, r)");
    return it->second;
}

FieldElt FieldElt::one(int p, int r) {
    FieldElt e = zero(p, r);
    e.c[0] = 1;
    return e;
}

FieldElt FieldElt::gen(int p, int r) {
    FieldElt e = zero(p, r);
    if (r == 1)
        e.c[0] = modp(-irreducible_poly(p, 1)[0], p);
    else
        e.c[1] = 1;
    return e;
}

FieldElt FieldElt::from_int(int p, int r, long v) {
    FieldElt e = zero(p, r);
    e.c[0] = modp(v, p);
    return e;
}

bool FieldElt::is_zero() const {
    for (int x : c)
        if (x) return false;
    return true;
}

FieldElt operator+(const FieldElt& a, const FieldElt& b) {
    check_same(a, b);
    FieldElt s = a;
    for (int i = 0; i < a.r; ++i) s.c[i] = (a.c[i] + b.c[i]) % a.p;
    return s;
}

FieldElt operator-(const FieldElt& a) {
    FieldElt s = a;
    for (int& x : s.c) x = (a.p - x) % a.p;
    return s;
}

FieldElt operator-(const FieldElt& a, const FieldElt& b) { return a + (-b); }

FieldElt operator*(const FieldElt& a, const FieldElt& b) {
    check_same(a, b);
    const int p = a.p, r = a.r;
    const auto& f = irreducible_poly(p, r);
    std::vector<long> t(2 * r - 1, 0);
    for (int i = 0; i < r; ++i)
        if (a.c[i])
            for (int j = 0; j < r; ++j) t[i + j] += static_cast<long>(a.c[i]) * b.c[j];
    for (auto& x : t) x %= p;
    for (int d = 2 * r - 2; d >= r; --d) {
        long lead = t[d] % p;
        if (!lead) continue;
        for (int i = 0; i <= r; ++i) t[d - r + i] = (t[d - r + i] - lead * f[i]) % p;
    }
    FieldElt out = FieldElt::zero(p, r);
    for (int i = 0; i < r; ++i) out.c[i] = modp(t[i], p);
    return out;
}

FieldElt pow(const FieldElt& a, std::uint64_t e) {
    FieldElt res = FieldElt::one(a.p, a.r), b = a;
    while (e) {
        if (e & 1) res = res * b;
        b = b * b;
        e >>= 1;
    }
    return res;
}

FieldElt frob(const FieldElt& a) { return pow(a, static_cast<std::uint64_t>(a.p)); }

FieldElt frob_inv(const FieldElt& a) {
    FieldElt x = a;
    for (int i = 1; i < a.r; ++i) x = frob(x);
    return x;
}

FieldElt inverse(const FieldElt& a) {
    if (a.is_zero()) throw WittError("division by zero in F_q");
    std::uint64_t q = 1;
    for (int i = 0; i < a.r; ++i) q *= static_cast<std::uint64_t>(a.p);
    return pow(a, q - 2);
}

/* ---------------- universal polynomials ---------------- */

namespace {

using Exps = std::vector<std::uint16_t>;
using Poly = std::map<Exps, long>;  // coefficients mod `mod`

constexpr std::size_t kMonomialBudget = 400000;

void add_into(Poly& a, const Poly& b, long scale, long mod) {
    for (const auto& [e, c] : b) {
        long& t = a[e];
        t = ((t + scale % mod * c) % mod + mod) % mod;
        if (t == 0) a.erase(e);
    }
}

Poly mul(const Poly& a, const Poly& b, long mod) {
    Poly out;
    Exps e;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            e = ea;
            for (std::size_t i = 0; i < e.size(); ++i) e[i] = static_cast<std::uint16_t>(e[i] + eb[i]);
            long& t = out[e];
            t = (t + ca * cb) % mod;
        }
    for (auto it = out.begin(); it != out.end();) it = it->second ? std::next(it) : out.erase(it);
    if (out.size() > kMonomialBudget) throw WittError("Witt polynomial size exceeds budget");
    return out;
}

Poly pow_p(const Poly& a, int p, long mod) {
    Poly r = a;
    for (int i = 1; i < p; ++i) r = mul(r, a, mod);
    return r;
}

Poly var(int idx, int nvars, int power = 1) {
    Exps e(nvars, 0);
    e[idx] = static_cast<std::uint16_t>(power);
    return Poly{{e, 1}};
}

// ghost component w_k in X (offset 0) or Y (offset m), coefficients mod `mod`
Poly ghost(int k, int offset, int p, int m, long mod) {
    Poly g;
    long pi = 1;
    int pe = 1;
    for (int i = 0; i < k; ++i) pe *= p;
    for (int i = 0; i <= k; ++i) {
        add_into(g, var(offset + i, 2 * m, pe), pi, mod);
        pi *= p;
        pe /= p;
    }
    return g;
}

std::vector<WittPolys::Mono> to_monos(const Poly& a) {
    std::vector<WittPolys::Mono> out;
    out.reserve(a.size());
    for (const auto& [e, c] : a) out.push_back({e, static_cast<int>(c)});
    return out;
}

/* Solves w_k(Q) = target_k for Q_0..Q_{m-1} mod p.  Only the residues of
 * the lower Q_i mod p are needed, since a = b (mod p) implies
 * a^{p^s} = b^{p^s} (mod p^{s+1}). */
std::vector<std::vector<WittPolys::Mono>> solve_ghost(int p, int m, bool product) {
    long mod = 1;
    for (int i = 0; i < m; ++i) mod *= p;
    std::vector<Poly> low;                    // Q_i mod p lifted to [0, p)
    std::vector<std::vector<Poly>> powers;    // powers[i][j] = low[i]^{p^j} mod p^m
    std::vector<std::vector<WittPolys::Mono>> out;
    for (int k = 0; k < m; ++k) {
        Poly num = product ? mul(ghost(k, 0, p, m, mod), ghost(k, m, p, m, mod), mod)
                           : ghost(k, 0, p, m, mod);
        if (!product) add_into(num, ghost(k, m, p, m, mod), 1, mod);
        long pi = 1;
        for (int i = 0; i < k; ++i) {
            while (static_cast<int>(powers[i].size()) <= k - i)
                powers[i].push_back(pow_p(powers[i].back(), p, mod));
            add_into(num, powers[i][k - i], -pi, mod);
            pi *= p;
        }
        long pk = pi;
        Poly q;
        for (const auto& [e, c] : num) {
            if (c % pk != 0) throw WittError("internal: ghost equation not integral");
            long v = (c / pk) % p;
            if (v) q[e] = v;
        }
        low.push_back(q);
        powers.push_back({q});
        out.push_back(to_monos(q));
    }
    return out;
}

}  // namespace

const WittPolys& witt_polys(int p, int m) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<WittPolys>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{p, m}];
    if (!slot) {
        auto w = std::make_unique<WittPolys>();
        w->p = p;
        w->m = m;
        w->sum = solve_ghost(p, m, false);
        w->prod = solve_ghost(p, m, true);
        w->max_exp.assign(2 * m, 0);
        for (const auto* family : {&w->sum, &w->prod})
            for (const auto& poly : *family)
                for (const auto& mono : poly)
                    for (int v = 0; v < 2 * m; ++v) w->max_exp[v] = std::max<int>(w->max_exp[v], mono.e[v]);
        slot = std::move(w);
    }
    return *slot;
}

/* ---------------- Witt scalars ---------------- */

namespace {

void check_same(const WittScalar& x, const WittScalar& y) {
    if (x.p != y.p || x.r != y.r || x.m() != y.m()) throw WittError("incompatible Witt parameters");
}

// evaluates the first `upto` polynomials of a family at (x, y)
std::vector<FieldElt> eval_family(const std::vector<std::vector<WittPolys::Mono>>& fam,
                                  const std::vector<int>& max_exp, const WittScalar& x,
                                  const WittScalar& y, int upto) {
    const int m = x.m();
    std::vector<std::vector<FieldElt>> pw(2 * m);
    for (int v = 0; v < 2 * m; ++v) {
        const FieldElt& base = v < m ? x.a[v] : y.a[v - m];
        pw[v].reserve(max_exp[v] + 1);
        pw[v].push_back(FieldElt::one(x.p, x.r));
        for (int e = 1; e <= max_exp[v]; ++e) pw[v].push_back(pw[v].back() * base);
    }
    std::vector<FieldElt> out;
    for (int k = 0; k < upto; ++k) {
        FieldElt acc = FieldElt::zero(x.p, x.r);
        for (const auto& mono : fam[k]) {
            FieldElt t = FieldElt::from_int(x.p, x.r, mono.c);
            for (int v = 0; v < 2 * m && !t.is_zero(); ++v)
                if (mono.e[v]) t = t * pw[v][mono.e[v]];
            acc = acc + t;
        }
        out.push_back(acc);
    }
    return out;
}

}  // namespace

WittScalar WittScalar::zero(int p, int r, int m) {
    return {p, r, std::vector<FieldElt>(m, FieldElt::zero(p, r))};
}

WittScalar WittScalar::one(int p, int r, int m) {
    WittScalar w = zero(p, r, m);
    w.a[0] = FieldElt::one(p, r);
    return w;
}

WittScalar witt_add(const WittScalar& x, const WittScalar& y) {
    check_same(x, y);
    const auto& w = witt_polys(x.p, x.m());
    return {x.p, x.r, eval_family(w.sum, w.max_exp, x, y, x.m())};
}

WittScalar witt_mul(const WittScalar& x, const WittScalar& y) {
    check_same(x, y);
    const auto& w = witt_polys(x.p, x.m());
    return {x.p, x.r, eval_family(w.prod, w.max_exp, x, y, x.m())};
}

// z with y + z = x, solved slot by slot since S_k = X_k + Y_k + (lower terms)
WittScalar witt_sub(const WittScalar& x, const WittScalar& y) {
    check_same(x, y);
    const int m = x.m();
    const auto& w = witt_polys(x.p, m);
    WittScalar z = WittScalar::zero(x.p, x.r, m);
    for (int k = 0; k < m; ++k) {
        // with z_k = 0, S_k(y, z) = y_k + R_k
        WittScalar zk = z;
        auto s = eval_family(w.sum, w.max_exp, y, zk, k + 1);
        z.a[k] = x.a[k] - s[k];
    }
    return z;
}

WittScalar witt_neg(const WittScalar& x) { return witt_sub(WittScalar::zero(x.p, x.r, x.m()), x); }

WittScalar frobenius(const WittScalar& x) {
    WittScalar out = x;
    for (auto& c : out.a) c = frob(c);
    return out;
}

WittScalar verschiebung(const WittScalar& x) {
    WittScalar out = WittScalar::zero(x.p, x.r, x.m());
    for (int i = 1; i < x.m(); ++i) out.a[i] = x.a[i - 1];
    return out;
}

WittScalar teichmuller(const FieldElt& x, int m) {
    WittScalar out = WittScalar::zero(x.p, x.r, m);
    out.a[0] = x;
    return out;
}

WittScalar witt_from_int(int p, int r, int m, long v) {
    bool negative = v < 0;
    unsigned long u = static_cast<unsigned long>(negative ? -v : v);
    WittScalar acc = WittScalar::zero(p, r, m), base = WittScalar::one(p, r, m);
    while (u) {
        if (u & 1) acc = witt_add(acc, base);
        base = witt_add(base, base);
        u >>= 1;
    }
    return negative ? witt_neg(acc) : acc;
}

std::optional<int> valuation(const WittScalar& x) {
    for (int i = 0; i < x.m(); ++i)
        if (!x.a[i].is_zero()) return i;
    return std::nullopt;
}

}  // namespace drw
