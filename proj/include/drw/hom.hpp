#pragma once

#include "drw/block.hpp"

#include <optional>
#include <string>

namespace drw {

enum class Stability { Stable, Unstable };

/* Hom between two formal objects each concentrated in one cohomological
 * degree.  Lengths are images of level L+1 maps in level L, compared over
 * three consecutive levels (m, n), (m+1, n+1), (m+2, n+2). */
struct HomResult {
    Stability status = Stability::Unstable;
    int dim_k = 0;    // torsion part, dimension over k
    int rank_zp = 0;  // growth of the Z_p-length per level
    std::vector<int> lengths;
    int m = 0;
    int n = 0;
};

HomResult hom_dimension(const FormalObject& M, const FormalObject& N, int m, int n, int max_level = 12);

// Z_p-length of the image of Hom at level (m+1, n+1) in Hom at level (m, n)
int stable_hom_length(const Summand& a, const Summand& b, int m, int n);

/* Section of a block transition: lifts generators of the lower level. */
GradedMats transition_section(const Block& b, int mh, int nh, int ml, int nl);

/* Cone of k(-1) -> U_{-1}, 1 |-> sum_{b >= -1} lambda_b dV^b. */
struct ConeResult {
    bool split = false;
    FormalObject object;  // U_0, or U_{-1} + k(-1)[1]
    TGM cone;             // U_{-1} / <z> at the requested level
    TGM model;            // truncation of U_0
    std::optional<GradedMats> iso;  // model -> cone
    int m = 0;
    int n = 0;
};

ConeResult cone_or_extension(const FieldElt& lambda, int m, int n);

}  // namespace drw
