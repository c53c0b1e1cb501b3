#include "drw/spec_io.hpp"

namespace drw {

namespace {

using nlohmann::json;

int get_int(const json& j, const char* key, int def) {
    if (!j.contains(key)) return def;
    if (!j.at(key).is_number_integer()) throw SpecError(std::string("field '") + key + "' must be an integer");
    return j.at(key).get<int>();
}

int need_int(const json& j, const char* key) {
    if (!j.contains(key)) throw SpecError(std::string("missing field '") + key + "'");
    return get_int(j, key, 0);
}

std::vector<CustomModule::Entry> entries(const json& j, const char* key) {
    std::vector<CustomModule::Entry> out;
    if (!j.contains(key)) return out;
    if (!j.at(key).is_array()) throw SpecError(std::string("'") + key + "' must be a list of [row, col, value]");
    for (const auto& e : j.at(key)) {
        if (!e.is_array() || e.size() != 3) throw SpecError(std::string("'") + key + "' entries are [row, col, value]");
        for (const auto& x : e)
            if (!x.is_number_integer()) throw SpecError(std::string("'") + key + "' entries must be integers");
        out.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<long>()});
    }
    return out;
}

}  // namespace

Block parse_block(const json& j, int p, int r) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw SpecError("block needs a string 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    try {
        if (kind == "UnitW") return make_unit_w(p, r);
        if (kind == "ResidueK") return make_residue_k(p, r);
        if (kind == "DAlphaP") return make_dalphap(p, r);
        if (kind == "Domino") return make_domino(p, r, need_int(j, "t"));
        if (kind == "Dieudonne") return make_dieudonne(p, r, need_int(j, "i"), need_int(j, "j"));
        if (kind == "FiniteLength") {
            CustomModule c;
            if (!j.contains("gens") || !j.at("gens").is_array()) throw SpecError("FiniteLength needs 'gens'");
            for (const auto& g : j.at("gens")) {
                CustomModule::Gen gen;
                gen.grading = get_int(g, "grading", 0);
                gen.order = get_int(g, "order", 1);
                if (g.contains("label")) gen.label = g.at("label").get<std::string>();
                c.gens.push_back(gen);
            }
            c.F = entries(j, "F");
            c.V = entries(j, "V");
            c.D = entries(j, "D");
            return make_custom(p, r, std::move(c));
        }
    } catch (const BlockError& e) {
        throw SpecError(std::string("invalid block: ") + e.what());
    }
    throw SpecError("unknown block kind '" + kind + "'");
}

FormalObject parse_object(const json& j, int default_p, int default_r) {
    if (!j.is_object()) throw SpecError("spec must be a JSON object");
    const int p = get_int(j, "p", default_p);
    const int r = get_int(j, "r", default_r);
    if (!j.contains("object") || !j.at("object").is_array()) throw SpecError("spec needs an 'object' list");
    FormalObject x{p, r, {}};
    for (const auto& item : j.at("object")) {
        if (!item.is_object() || !item.contains("block")) throw SpecError("object entries need a 'block'");
        Summand s{parse_block(item.at("block"), p, r), 0, 0};
        if (item.contains("shift")) {
            const auto& sh = item.at("shift");
            if (!sh.is_array() || sh.size() != 2 || !sh[0].is_number_integer() || !sh[1].is_number_integer())
                throw SpecError("'shift' must be [i, j]");
            s.gshift = sh[0].get<int>();
            s.cshift = sh[1].get<int>();
        }
        x.items.push_back(std::move(s));
    }
    return x;
}

FormalObject parse_object_text(const std::string& text, int default_p, int default_r) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SpecError(std::string("malformed JSON: ") + e.what());
    }
    try {
        return parse_object(j, default_p, default_r);
    } catch (const json::exception& e) {
        throw SpecError(std::string("bad spec: ") + e.what());
    }
}

json block_json(const Block& b) {
    json j;
    j["kind"] = kind_name(b.kind);
    if (b.kind == BlockKind::Domino) j["t"] = b.t;
    if (b.kind == BlockKind::Dieudonne) {
        j["i"] = b.i;
        j["j"] = b.j;
    }
    if (b.kind == BlockKind::FiniteLength && b.custom) {
        json gens = json::array();
        for (const auto& g : b.custom->gens) gens.push_back({{"grading", g.grading}, {"order", g.order}, {"label", g.label}});
        j["gens"] = gens;
        auto ent = [](const std::vector<CustomModule::Entry>& v) {
            json a = json::array();
            for (const auto& e : v) a.push_back({e.row, e.col, e.value});
            return a;
        };
        j["F"] = ent(b.custom->F);
        j["V"] = ent(b.custom->V);
        j["D"] = ent(b.custom->D);
    }
    return j;
}

json object_json(const FormalObject& x) {
    json items = json::array();
    for (const auto& s : x.items) items.push_back({{"block", block_json(s.block)}, {"shift", {s.gshift, s.cshift}}});
    return {{"p", x.p}, {"r", x.r}, {"object", items}};
}

json module_json(const TGM& M) {
    auto mat = [](const Mat& A) {
        json rows = json::array();
        for (int i = 0; i < A.rows; ++i) {
            json row = json::array();
            for (int k = 0; k < A.cols; ++k) row.push_back(A(i, k));
            rows.push_back(row);
        }
        return rows;
    };
    json g = json::object();
    if (!M.pieces.empty())
        for (int i = M.lo; i <= M.hi(); ++i) {
            const Piece& pc = M.at(i);
            if (pc.gens() == 0) continue;
            json e;
            e["orders"] = pc.mod.orders;
            e["length"] = pc.mod.length();
            e["F"] = mat(pc.F.mat);
            e["V"] = mat(pc.V.mat);
            const Mat D = M.dmat(i);
            if (D.rows) e["d"] = mat(D);
            g[std::to_string(i)] = e;
        }
    return {{"p", M.p}, {"r", M.r}, {"m", M.m}, {"n", M.n}, {"gradings", g}};
}

}  // namespace drw
