#pragma once

#include "drw/block.hpp"

#include "json.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace drw {

struct UnstableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/* Block invariants are read off at level L, i.e. truncation (L, depth * L)
 * where depth is i + j for Dieudonne blocks and 1 otherwise, and accepted
 * once levels L and L+1 agree. */
struct InvariantOptions {
    int start_level = 3;
    int max_level = 10;
};

std::pair<int, int> block_level(const Block& b, int L);

/* Heart of grading g: V^{-inf}Z / F^inf B at the stable level. */
struct Heart {
    int grading = 0;
    int level = 0;
    Presented mod;
    Mat F, V;
    int free_rank = 0;       // rank over W
    int torsion_length = 0;  // Z_p-length of the torsion part
    std::vector<SlopeMult> slopes;

    bool is_zero() const { return mod.gens() == 0; }
};

Heart coeur(const Block& b, int grading, const InvariantOptions& opt = {});
int domino_number(const Block& b, int grading, const InvariantOptions& opt = {});

// monic characteristic polynomial, coefficients from x^0 up (division free)
std::vector<std::int64_t> charpoly(const Mat& A, const Zpm& R);
// slopes of the p-adic Newton polygon of a monic polynomial
std::vector<SlopeMult> newton_polygon(const std::vector<std::int64_t>& coeffs, const Zpm& R);
/* Slopes of a linear F on a free W_m-module (r = 1).  Throws
 * InvariantError on torsion input or when precision cannot certify. */
std::vector<SlopeMult> newton_slopes(const Mat& F, const Presented& mod, const Zpm& R);

using Cell = std::pair<int, int>;  // (grading i, degree j)
using IntGrid = std::map<Cell, int>;
using RatGrid = std::map<Cell, Rational>;

/* Cohomology of R_n (x)^L M from 0 -> M(-1) -> M(-1) + M -> M with
 * u(x) = (F^n x, -F^n dx), v(x, y) = dV^n x + V^n y. */
struct TensorCohomology {
    int n = 1;
    int level = 0;
    IntGrid length;  // Z_p-length of H^j in grading i
};

TensorCohomology rn_tensor(const Block& b, int n, const InvariantOptions& opt = {});
TensorCohomology rn_tensor(const FormalObject& X, int n, const InvariantOptions& opt = {});
inline TensorCohomology r1_tensor(const FormalObject& X, const InvariantOptions& opt = {}) {
    return rn_tensor(X, 1, opt);
}

struct Totalization {
    std::map<int, int> betti;                   // rank over W
    std::map<int, std::vector<int>> torsion;    // elementary divisor exponents
    int level = 0;
};

// grading i of a module placed in degree j contributes to total degree i + j
Totalization totalize(const FormalObject& X, const InvariantOptions& opt = {});

IntGrid hodge_numbers(const FormalObject& X, const InvariantOptions& opt = {});
IntGrid domino_numbers(const FormalObject& X, const InvariantOptions& opt = {});
RatGrid slope_numbers(const FormalObject& X, const InvariantOptions& opt = {});
RatGrid hodge_witt_from_parts(const RatGrid& m, const IntGrid& T);

struct Segment {
    Rational slope;
    Rational length;
    bool operator==(const Segment& o) const { return slope == o.slope && length == o.length; }
};
using Polygon = std::vector<Segment>;  // ascending slopes

struct InvariantTable {
    int p = 2;
    int r = 1;
    int level = 0;
    IntGrid h;
    IntGrid T;
    RatGrid m;
    RatGrid hW;
    std::map<int, Polygon> newton;
    std::map<int, Polygon> newton_hodge;
    std::map<int, int> betti;
    std::map<int, std::vector<int>> torsion;

    Rational hw(int i, int j) const;
    int hodge(int i, int j) const;
};

InvariantTable compute_invariants(const FormalObject& X, const InvariantOptions& opt = {});

struct CrewResult {
    int i = 0;
    Rational witt;   // sum_j (-1)^j h_W^{i,j}
    Rational hodge;  // sum_j (-1)^j h^{i,j}
    bool pass = false;
};
CrewResult crew_check(const InvariantTable& t, int i);
std::vector<CrewResult> crew_all(const InvariantTable& t);

struct EkedahlResult {
    bool pass = true;
    std::vector<Cell> equal;
    std::vector<Cell> strict;
    std::vector<Cell> violated;
};
EkedahlResult ekedahl_check(const InvariantTable& t);

/* Deltas h_W^{i,j} - h_W^{j,i} and h_W^{i,j} - h_W^{N-i,N-j} over cells with
 * i + j <= max_total (Serre partners are only compared inside that range). */
struct SymmetryResult {
    int N = 0;
    int max_total = 0;
    RatGrid hodge_delta;
    RatGrid serre_delta;
    bool hodge_ok = true;
    bool serre_ok = true;
};
SymmetryResult symmetry_check(const InvariantTable& t, int N, int max_total);

struct PolygonCheck {
    int n = 0;
    bool pass = false;
    std::string detail;
};
std::vector<PolygonCheck> newton_hodge_check(const InvariantTable& t);

struct MazurOgusResult {
    std::map<int, std::pair<int, int>> sums;  // n -> (sum h^{i,n-i}, b_n)
    bool pass = true;
};
MazurOgusResult mazur_ogus_check(const InvariantTable& t);

std::string rational_str(const Rational& q);
nlohmann::json rational_json(const Rational& q);
nlohmann::json to_json(const InvariantTable& t);
// h_W grid, rows j from top, columns i
std::string hw_markdown(const RatGrid& hW, int max_total);
std::string to_markdown(const InvariantTable& t);

}  // namespace drw
