#pragma once
// Question sets in DBLP-QuAD-style JSON.
//
//   {"questions": [{"id": "q1", "question": "...", "entities": ["<iri>", ...]}, ...]}
//
// The question field may also be an object carrying the text under "string",
// as the published dataset does. Field names are configurable.

#include <fstream>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "scholink/error.hpp"

namespace scholink {

struct GoldQuestion {
    std::string id;
    std::string question;
    std::set<std::string> gold_entities;

    bool operator==(const GoldQuestion&) const = default;
};

struct DatasetFields {
    std::string questions = "questions";
    std::string id = "id";
    std::string question = "question";
    std::string gold = "entities";
};

namespace dataset_detail {

inline std::string strip_angle(const std::string& iri) {
    if (iri.size() >= 2 && iri.front() == '<' && iri.back() == '>') return iri.substr(1, iri.size() - 2);
    return iri;
}

}  // namespace dataset_detail

inline std::vector<GoldQuestion> parse_dataset(const nlohmann::json& root, const DatasetFields& f = {}) {
    const nlohmann::json* items = &root;
    std::string base;
    if (root.is_object()) {
        if (!root.contains(f.questions)) throw SchemaError("/", "missing '" + f.questions + "' array");
        items = &root[f.questions];
        base = "/" + f.questions;
    }
    if (!items->is_array()) throw SchemaError(base.empty() ? "/" : base, "expected an array of questions");
    if (items->empty()) throw SchemaError(base.empty() ? "/" : base, "dataset has no questions");

    std::vector<GoldQuestion> out;
    std::unordered_set<std::string> ids;
    for (std::size_t i = 0; i < items->size(); ++i) {
        const nlohmann::json& q = (*items)[i];
        const std::string at = base + "/" + std::to_string(i);
        if (!q.is_object()) throw SchemaError(at, "expected an object");
        GoldQuestion g;

        if (!q.contains(f.id)) throw SchemaError(at + "/" + f.id, "missing");
        const auto& id = q[f.id];
        if (id.is_string()) g.id = id.get<std::string>();
        else if (id.is_number_integer()) g.id = std::to_string(id.get<long long>());
        else throw SchemaError(at + "/" + f.id, "expected a string or integer");

        if (!q.contains(f.question)) throw SchemaError(at + "/" + f.question, "missing");
        const auto& qt = q[f.question];
        if (qt.is_string()) g.question = qt.get<std::string>();
        else if (qt.is_object() && qt.contains("string") && qt["string"].is_string())
            g.question = qt["string"].get<std::string>();
        else throw SchemaError(at + "/" + f.question, "expected a string");

        if (!q.contains(f.gold)) throw SchemaError(at + "/" + f.gold, "missing gold entity list");
        const auto& gold = q[f.gold];
        if (!gold.is_array()) throw SchemaError(at + "/" + f.gold, "expected an array");
        for (std::size_t j = 0; j < gold.size(); ++j) {
            if (!gold[j].is_string())
                throw SchemaError(at + "/" + f.gold + "/" + std::to_string(j), "expected an IRI string");
            g.gold_entities.insert(dataset_detail::strip_angle(gold[j].get<std::string>()));
        }
        if (!ids.insert(g.id).second) throw DuplicateId(g.id);
        out.push_back(std::move(g));
    }
    return out;
}

inline std::vector<GoldQuestion> load_dataset(const std::string& path, const DatasetFields& f = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset '" + path + "'");
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("/", std::string("invalid JSON: ") + e.what());
    }
    return parse_dataset(root, f);
}

inline nlohmann::json dataset_to_json(const std::vector<GoldQuestion>& qs, const DatasetFields& f = {}) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& q : qs)
        items.push_back({{f.id, q.id}, {f.question, q.question}, {f.gold, q.gold_entities}});
    return {{f.questions, std::move(items)}};
}

}  // namespace scholink
