#pragma once

#include "drw/module.hpp"

#include <boost/rational.hpp>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace drw {

using Rational = boost::rational<long>;

enum class BlockKind { UnitW, ResidueK, DAlphaP, Domino, Dieudonne, FiniteLength };

const char* kind_name(BlockKind k);

/* A finite-length graded module over W given by generators of prescribed
 * order and integer matrix entries for F, V, d (V must be nilpotent). */
struct CustomModule {
    struct Gen {
        int grading = 0;
        int order = 1;
        std::string label;
    };
    struct Entry {
        int row = 0;
        int col = 0;
        long value = 0;
    };
    std::vector<Gen> gens;
    std::vector<Entry> F, V, D;
};

struct SlopeMult {
    Rational slope;
    int mult = 0;
    bool operator==(const SlopeMult& o) const { return slope == o.slope && mult == o.mult; }
};

struct Block {
    BlockKind kind = BlockKind::UnitW;
    int p = 2;
    int r = 1;
    int t = 0;         // Domino
    int i = 1, j = 0;  // Dieudonne: slope j/(i+j)
    std::shared_ptr<const CustomModule> custom;

    // exact metadata; custom blocks leave slopes/domino to computation
    std::vector<SlopeMult> slopes;  // F on the torsion-free part
    std::optional<std::map<int, int>> domino;
    int free_rank = 0;
    bool coeur_torsion = true;
    std::string coeur;
    int grade_lo = 0;
    int grade_hi = 0;

    std::string name() const;
    bool operator==(const Block& o) const;
};

struct BlockError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Block make_unit_w(int p, int r = 1);
Block make_residue_k(int p, int r = 1);
Block make_dalphap(int p, int r = 1);
Block make_domino(int p, int r, int t);
Block make_dieudonne(int p, int r, int i, int j);
Block make_custom(int p, int r, CustomModule spec);

/* The quotient by Fil^n with coefficients mod p^m. */
TGM truncate(const Block& b, int m, int n);
/* Transition surjection truncate(b, mh, nh) -> truncate(b, ml, nl),
 * mh >= ml, nh >= nl.  Entries are reduced mod p^{ml}. */
GradedMats transition(const Block& b, int mh, int nh, int ml, int nl);

/* W-level data -> Z/p^m-level data by restriction of scalars along
 * Z/p^m -> GR(p^m, r).  For r = 1 this only relabels. */
TGM restrict_scalars(const TGM& wlevel, int r);

/* Finite formal sum of shifted blocks B(i)[j]; the block B sits in
 * cohomological degree 0, so B(i)[j] lives in degree -j, grading g - i. */
struct Summand {
    Block block;
    int gshift = 0;
    int cshift = 0;
};

struct FormalObject {
    int p = 2;
    int r = 1;
    std::vector<Summand> items;

    bool empty() const { return items.empty(); }
};

FormalObject single(const Block& b, int gshift = 0, int cshift = 0);
FormalObject shift(const FormalObject& x, int i, int j);
FormalObject direct_sum(const FormalObject& x, const FormalObject& y);
std::string describe(const Summand& s);
std::string describe(const FormalObject& x);

/* Truncation of the degree-d cohomology of x: sum of the summands with
 * -cshift == d, each shifted in grading. */
TGM truncate_degree(const FormalObject& x, int degree, int m, int n);

}  // namespace drw
