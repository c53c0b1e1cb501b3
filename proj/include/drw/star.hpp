#pragma once

#include "drw/block.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace drw {

struct StarError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StarOptions {
    int max_generators = 6000;  // per grading, before saturation
};

/* Symbols of the ambient module: x = a * b, V^s x and dV^s x (s >= 1),
 * with a in grading ga of M and b in grading gb of N. */
struct StarSymbol {
    enum Kind { Gen, V, dV } kind = Gen;
    int s = 0;
    int ga = 0, ia = 0, gb = 0, ib = 0;
};

struct StarPresentation {
    TGM ambient;
    std::map<int, std::vector<StarSymbol>> symbols;  // by ambient grading
    TGM module;
    GradedMats proj, sect;  // ambient <-> module

    // position of a symbol in its grading, -1 if absent
    int index(const StarSymbol& s) const;
    int grading(const StarSymbol& s) const;
};

/* M * N at the common truncation (m, n) of the inputs, computed as the
 * quotient of the ambient module by the saturated relation set.  r = 1. */
StarPresentation star_presentation(const TGM& M, const TGM& N, const StarOptions& opt = {});
TGM star(const Block& a, const Block& b, int m, int n, const StarOptions& opt = {});

/* M (x)_W N with F (x) F, V(x (x) y) = Vx (x) F^{-1}y and the signed
 * Leibniz rule.  Throws StarError when F is not bijective on N. */
TGM star_frobenius_bijective(const TGM& M, const TGM& N);
bool frobenius_bijective(const TGM& N);

// a (x) b |-> a * b from the closed form into the presentation
GradedMats star_comparison(const StarPresentation& P, const TGM& closed);
// m |-> m * 1 into M * W
GradedMats star_unit_map(const StarPresentation& P, const TGM& M);
// a * b |-> (-1)^{deg a deg b} b * a from M * N to N * M
GradedMats star_swap(const StarPresentation& MN, const StarPresentation& NM);

/* Equality after normalization: same sorted orders in every grading and
 * f is an isomorphism. */
bool same_presentation(const TGM& A, const TGM& B, const GradedMats& f);

// k-dimension of M / (VM + dVM) per grading
std::map<int, int> r1_quotient_dims(const TGM& M);

enum class BandKind { V, F, dV, Fd };
const char* band_name(BandKind k);

struct Band {
    BandKind kind = BandKind::V;
    int lo = 0;   // first index
    int hi = 0;   // last index retained at truncation
    int shift = 0;  // grading shift relative to N
    bool product = false;
};

/* R * N written as the four bands V^i(1*N) (i > 0), F^i * N (i >= 0),
 * dV^i(1*N) (i > 0), F^i d * N (i >= 0).  V bands are kept for
 * 0 < i < n and F bands for i < fdepth.  The completed variant only
 * changes the bookkeeping of the V bands into products. */
struct StarWithR {
    std::vector<Band> bands;
    TGM module;
    int n = 0;
    int fdepth = 0;
    bool completed = true;

    struct Coord {
        BandKind kind;
        int index;
        int ngrading;
        int nindex;
    };
    std::map<int, std::vector<Coord>> layout;  // by grading of module
    int position(BandKind k, int index, int ngrading, int nindex) const;
};

StarWithR star_with_R(const TGM& N, int n, int fdepth, bool completed = true);

enum class Identification { Identified, Unidentified };

struct Identified {
    Identification status = Identification::Unidentified;
    std::string name;  // "0", "U_-1", "E_1/2", ...
    TGM module;
    int depth = 0;     // V-depth of the matching model
};

// matches M against zero, U_t, W, k, D(alpha_p) and small Dieudonne blocks
Identified identify(const TGM& M);

/* E * N for E = Dieudonne(i, j) via 0 -> R -> R -> E -> 0 with right
 * multiplication by F^i - V^j, evaluated on the bands of R * N. */
struct DerivedStar {
    Identified h_minus1;
    Identified h0;
    std::vector<std::string> kernel_bands;  // e.g. "grading 0: V^1"
    int m = 0;
    int n = 0;
    std::string summary() const;
};

DerivedStar derived_star(const Block& E, const Block& N, int m, int n);

}  // namespace drw
