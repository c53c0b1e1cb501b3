#include "doctest.h"

#include "drw/spec_io.hpp"

using namespace drw;
using nlohmann::json;

TEST_CASE("every named kind survives a JSON round trip") {
    const FormalObject x{3, 1,
                         {{make_unit_w(3), 0, 0},
                          {make_residue_k(3), 1, -1},
                          {make_dalphap(3), 0, 2},
                          {make_domino(3, 1, -2), -1, 0},
                          {make_dieudonne(3, 1, 2, 1), 2, 3}}};
    const json j = object_json(x);
    const FormalObject y = parse_object(j);
    REQUIRE(y.items.size() == x.items.size());
    CHECK(y.p == 3);
    for (std::size_t k = 0; k < x.items.size(); ++k) {
        CHECK(y.items[k].block == x.items[k].block);
        CHECK(y.items[k].gshift == x.items[k].gshift);
        CHECK(y.items[k].cshift == x.items[k].cshift);
    }
    CHECK(object_json(y).dump() == j.dump());
}

TEST_CASE("defaults for p, r and shift") {
    const FormalObject x = parse_object_text(R"({"object": [{"block": {"kind": "UnitW"}}]})", 5, 2);
    CHECK(x.p == 5);
    CHECK(x.r == 2);
    CHECK(x.items.at(0).gshift == 0);
    CHECK(x.items.at(0).cshift == 0);
}

TEST_CASE("finite-length spec matches the residue field block") {
    const char* text = R"({"p": 2, "object": [{"block": {"kind": "FiniteLength",
        "gens": [{"grading": 0, "order": 1, "label": "e"}]}}]})";
    const FormalObject x = parse_object_text(text);
    const TGM a = truncate(x.items.at(0).block, 3, 4);
    const TGM b = truncate(make_residue_k(2), 3, 4);
    CHECK(a.length(0) == b.length(0));
    CHECK(a.total_length() == b.total_length());
    CHECK(check_relations(a).empty());
    const json back = block_json(x.items.at(0).block);
    CHECK(back["gens"][0]["label"] == "e");
}

TEST_CASE("bad specs raise SpecError") {
    CHECK_THROWS_WITH_AS(parse_object_text("{\"object\": ["), doctest::Contains("malformed JSON"), SpecError);
    CHECK_THROWS_AS(parse_object_text("[1, 2]"), SpecError);
    CHECK_THROWS_AS(parse_object_text(R"({"p": 2})"), SpecError);
    CHECK_THROWS_WITH_AS(parse_object_text(R"({"object": [{"block": {"kind": "Nope"}}]})"),
                         doctest::Contains("unknown block kind"), SpecError);
    CHECK_THROWS_AS(parse_object_text(R"({"object": [{"block": {"kind": "Domino"}}]})"), SpecError);
    CHECK_THROWS_AS(parse_object_text(R"({"object": [{"block": {"kind": "UnitW"}, "shift": [1]}]})"), SpecError);
    CHECK_THROWS_AS(parse_object_text(R"({"p": "two", "object": []})"), SpecError);
    CHECK_THROWS_AS(parse_object_text(R"({"object": [{"block": {"kind": "FiniteLength",
        "gens": [{"grading": 0}], "F": [[0, 0]]}}]})"),
                    SpecError);
}

TEST_CASE("module_json lists orders and operator matrices per grading") {
    const TGM M = truncate(make_domino(2, 1, 0), 2, 3);
    const json j = module_json(M);
    CHECK(j["m"] == 2);
    CHECK(j["n"] == 3);
    int total = 0;
    for (const auto& [g, e] : j["gradings"].items()) {
        total += e["length"].get<int>();
        CHECK(e["F"].size() == e["orders"].size());
        CHECK(e["V"].size() == e["orders"].size());
    }
    CHECK(total == M.total_length());
    CHECK(j.dump() == module_json(truncate(make_domino(2, 1, 0), 2, 3)).dump());
}
