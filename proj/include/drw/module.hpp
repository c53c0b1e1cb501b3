#pragma once

#include "drw/galois_ring.hpp"
#include "drw/linalg.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace drw {

enum class Twist { Id, Sigma, SigmaInv };

// twist of a composite "a after b"
Twist compose(Twist a, Twist b);

struct SemiMap {
    Mat mat;
    Twist twist = Twist::Id;
};

/* One grading of a truncated module.  Everything is written over Z/p^m
 * after restriction of scalars along Z/p^m -> W_m(F_{p^r}); T is the action
 * of the ring generator t (empty for r = 1).  D maps into the next grading. */
struct Piece {
    Presented mod;
    SemiMap F{Mat(), Twist::Sigma};
    SemiMap V{Mat(), Twist::SigmaInv};
    SemiMap D{Mat(), Twist::Id};
    Mat T;
    std::vector<std::string> labels;

    int gens() const { return mod.gens(); }
};

/* A graded R-module at truncation (m, n): coefficients mod p^m, quotient by
 * Fil^n.  F is only well defined modulo Fil^{n-1}, and identities
 * involving F are checked modulo Fil^{n-1}. */
struct TGM {
    int p = 2;
    int r = 1;
    int m = 1;
    int n = 1;
    int lo = 0;
    std::vector<Piece> pieces;

    Zpm ring() const { return Zpm(p, m); }
    int hi() const { return lo + static_cast<int>(pieces.size()) - 1; }
    bool has(int i) const { return i >= lo && i <= hi(); }
    const Piece& at(int i) const;
    Piece& at(int i);
    int gens(int i) const { return has(i) ? at(i).gens() : 0; }
    // Z_p-length of grading i
    int length(int i) const { return has(i) ? at(i).mod.length() : 0; }
    // k-dimension for torsion gradings (length / r)
    int klength(int i) const { return length(i) / r; }
    int total_length() const;
    // d from grading i to i+1 as a plain matrix (possibly empty)
    Mat dmat(int i) const;
};

using GradedMats = std::map<int, Mat>;
using GradedVecs = std::map<int, std::vector<std::int64_t>>;

// empty module with gradings lo..hi
TGM make_tgm(int p, int r, int m, int n, int lo, int hi);
// extends the grading range so that [lo, hi] is covered
void widen(TGM& M, int lo, int hi);
// removes zero gradings at both ends
void trim(TGM& M);

// generators of Fil^s = V^s M^i + dV^s M^{i-1}, per grading
GradedMats fil(const TGM& M, int s);

struct TGMQuotient {
    TGM target;
    GradedMats proj;  // M^i -> target^i
    GradedMats sect;  // target^i -> M^i
};
// quotient by the submodule with the given generators (assumed stable)
TGMQuotient quotient(const TGM& M, const GradedMats& sub);

/* Submodule generated by the given columns, which must be stable under
 * F (modulo Fil^{n-1}), V and d.  r = 1 only.  incl receives the inclusion. */
TGM submodule(const TGM& M, const GradedMats& gens, GradedMats* incl = nullptr);

// M(a): M(a)^i = M^{i+a}
TGM shift_grading(const TGM& M, int a);
TGM direct_sum(const TGM& A, const TGM& B);

struct Violation {
    std::string identity;
    int grading = 0;
    std::vector<std::int64_t> witness;
};

std::vector<Violation> check_relations(const TGM& M);

// matrix of multiplication by sigma(t) or sigma^{-1}(t) on grading i
Mat twisted_scalar(const TGM& M, int i, Twist tw);

bool is_morphism(const GradedMats& f, const TGM& M, const TGM& N, std::string* why = nullptr);
bool is_iso(const GradedMats& f, const TGM& M, const TGM& N);

/* Hom_R(M, N) at one truncation level.  gens are columns in the space of
 * all per-grading matrices (layout in `slots`). */
struct HomSpace {
    struct Slot {
        int grading;
        int rows;
        int cols;
        int offset;
    };
    std::vector<Slot> slots;
    int nx = 0;
    Mat gens;            // nx x k
    Presented ambient;   // orders of the entries (row orders of N)
    int length = 0;      // Z_p-length modulo maps landing in the relations
};

// with solve = false only the layout is filled in
HomSpace hom_space(const TGM& M, const TGM& N, bool solve = true);
GradedMats hom_unpack(const HomSpace& H, const std::vector<std::int64_t>& x);
std::vector<std::int64_t> hom_pack(const HomSpace& H, const GradedMats& f, const Zpm& R);
// length of the span of some maps in the layout of H, modulo trivial maps
int hom_span_length(const HomSpace& H, const std::vector<GradedMats>& maps, const Zpm& R);

/* Search for an isomorphism among combinations of Hom generators with
 * coefficients in [0, p); exhaustive when p^k <= 4096, else random tries. */
std::optional<GradedMats> find_iso(const TGM& M, const TGM& N, std::uint64_t seed = 1);

GradedMats compose(const GradedMats& g, const GradedMats& f, const Zpm& R);
GradedMats identity_map(const TGM& M);

}  // namespace drw
