#pragma once

#include "drw/invariants.hpp"
#include "drw/star.hpp"

#include "json.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace drw {

struct BalphapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// requested degree range lies outside what the pipeline computes
struct NotCertifiedError : BalphapError {
    using BalphapError::BalphapError;
};
// a cell could not be identified at the requested truncation
struct PipelineUnstableError : BalphapError {
    using BalphapError::BalphapError;
};

enum class ExtensionPolicy { PaperNonsplit, Split };
ExtensionPolicy parse_policy(const std::string& s);
const char* policy_name(ExtensionPolicy p);

/* Star product of shifted blocks, kept symbolic: W factors are absorbed and
 * shifts add.  Term B1 * B2 (i)[j]. */
struct Term {
    std::vector<Block> factors;
    int gshift = 0;
    int cshift = 0;
    std::string name() const;
    bool operator==(const Term& o) const;
};
using DegreeTable = std::map<int, std::vector<Term>>;

// H~ of a supersingular elliptic curve: W, E_{1/2}, W(-1)[1]
DegreeTable elliptic_tilde_h(int p);
// H~^n of a product is the sum over i + j = n of H~^i * H~^j
DegreeTable kunneth_tilde_h(const std::vector<DegreeTable>& factors);
std::string describe(const std::vector<Term>& terms);

/* Rows 0 and 1 of the first page: column c is H~^row(A^c x B), maps are the
 * alternating sums of pullbacks along the face maps.  Pullback along the
 * isogeny A -> B acts on H~^1 as multiplication by F. */
struct AlternatingRow {
    int row = 0;
    std::vector<TGM> columns;
    std::vector<GradedMats> maps;  // maps[c]: columns[c] -> columns[c + 1]
};
AlternatingRow row01_alternating_maps(int row, int p, int m, int n, int ncolumns);
// every composite maps[c+1] o maps[c] vanishes
bool composites_vanish(const AlternatingRow& row);

struct CellEntry {
    std::string name;  // "0" for zero cells
    FormalObject object;
};
using CellTable = std::map<Cell, CellEntry>;  // (column, row) for pages

struct SSPage {
    int page = 2;
    CellTable cells;
    int columns = 0;  // cells computed for column < columns
    int rows = 0;
};

// E_2 cells of rows 0 and 1 for columns 0..3, from stable cohomology
SSPage e2_rows01(int p, int m, int n);

struct Row2 {
    std::vector<Term> A, B, C;  // the complex A -> B -> C
    std::vector<Term> sub_B, sub_C, quot_A, quot_B;
    bool reassembles = false;
    Identified sub_h1, sub_h2;    // cohomology of E*E -> E*E (id * F)
    Identified quot_h0, quot_h1;  // kernel and cokernel of -p on W(-1)[1]
    bool e2_02_zero = false;
    std::string connecting;       // why the connecting map vanishes
    FormalObject left, right;     // 0 -> left -> E_2^{1,2} -> right -> 0
    IntGrid T_nonsplit, T_split;  // domino numbers of the two possible middles
};
Row2 row2_e2(int p, int m, int n);

struct Extension {
    ExtensionPolicy policy = ExtensionPolicy::PaperNonsplit;
    CellEntry cell;
    std::string provenance;
    bool counterfactual = false;
    bool cone_certified = false;  // cone of a nonzero class matched U_0
};
Extension resolve_extension(ExtensionPolicy policy, int p);

/* Cells (i, j): twist index i, cohomological degree j.  The object of a
 * cell enters the total object shifted by (-i)[-j]. */
struct BalphapTable {
    CellTable cells;
    int degree_bound = 3;
};
BalphapTable assemble_balphap_table(const SSPage& rows01, const Row2& row2, const Extension& ext,
                                    int degree_bound = 3);
// convolution with the ladder W(-n)[-n], n <= degree bound
BalphapTable twist_bgm(const BalphapTable& t);
BalphapTable point_table(int p, int degree_bound = 3);
FormalObject table_object(const BalphapTable& t);

struct ReportOptions {
    int p = 2;
    int m = 8;
    int n = 16;
    ExtensionPolicy policy = ExtensionPolicy::PaperNonsplit;
    int degree_bound = 3;
};

struct Report {
    ReportOptions opt;
    SSPage rows01;
    Row2 row2;
    Extension extension;
    BalphapTable base;
    BalphapTable twisted;
    InvariantTable invariants;
    std::vector<CrewResult> crew;
    bool crew_pass = false;
    bool symmetry_le2 = false;
    Rational asymmetry_deg3;  // h_W^{0,3} - h_W^{3,0}
    bool asymmetry_pass = false;

    bool checks_pass() const { return crew_pass && symmetry_le2 && asymmetry_pass; }
    nlohmann::json json() const;
    std::string markdown() const;
};

Report counterexample_report(const ReportOptions& opt = {});

}  // namespace drw
