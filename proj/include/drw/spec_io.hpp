#pragma once

#include "drw/block.hpp"

#include "json.hpp"

#include <stdexcept>
#include <string>

namespace drw {

struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/* Module spec:
 *   {"p": 2, "r": 1, "object": [{"block": {"kind": "Domino", "t": 0}, "shift": [0, 0]}, ...]}
 * Kinds: UnitW, ResidueK, DAlphaP, Domino (t), Dieudonne (i, j) and
 * FiniteLength with "gens": [{"grading", "order", "label"}] and "F", "V",
 * "D" as lists of [row, col, value].  "shift" is [i, j] for B(i)[j].
 * p and r fall back to the given defaults when absent. */
FormalObject parse_object(const nlohmann::json& j, int default_p = 2, int default_r = 1);
FormalObject parse_object_text(const std::string& text, int default_p = 2, int default_r = 1);
Block parse_block(const nlohmann::json& j, int p, int r);

nlohmann::json block_json(const Block& b);
nlohmann::json object_json(const FormalObject& x);

// orders, F, V and d per grading
nlohmann::json module_json(const TGM& M);

}  // namespace drw
