#pragma once
// Entity store: the typed, labelled entities of a scholarly knowledge graph.
//
// Built from N-Triples via a SchemaConfig that says which predicates carry
// labels, aliases and types. Immutable once built; safe for concurrent reads.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scholink/binary_io.hpp"
#include "scholink/error.hpp"
#include "scholink/ntriples.hpp"
#include "scholink/text.hpp"

namespace scholink {

class EntityType {
public:
    enum class Kind : std::uint8_t { Person = 0, Publication = 1, Other = 2 };

    EntityType() = default;
    static EntityType person() { return EntityType(Kind::Person, {}); }
    static EntityType publication() { return EntityType(Kind::Publication, {}); }
    static EntityType other(std::string name) { return EntityType(Kind::Other, std::move(name)); }

    Kind kind() const noexcept { return kind_; }
    const std::string& other_name() const noexcept { return other_; }
    bool is_canonical() const noexcept { return kind_ != Kind::Other; }

    // "person", "publication", or the verbatim Other name.
    std::string name() const {
        switch (kind_) {
            case Kind::Person: return "person";
            case Kind::Publication: return "publication";
            case Kind::Other: return other_;
        }
        return other_;
    }

    static std::optional<EntityType> parse_canonical(std::string_view s) {
        std::string n = text::normalize(s);
        if (n == "person") return person();
        if (n == "publication") return publication();
        return std::nullopt;
    }

    auto operator<=>(const EntityType&) const = default;

private:
    EntityType(Kind k, std::string other) : kind_(k), other_(std::move(other)) {}

    Kind kind_ = Kind::Person;
    std::string other_;
};

struct EntityRecord {
    std::string uri;
    std::string label;
    std::vector<std::string> aliases;
    EntityType etype;

    bool operator==(const EntityRecord&) const = default;
};

struct StoreStats {
    std::size_t persons = 0;
    std::size_t publications = 0;
    std::map<std::string, std::size_t> other;  // by Other name

    std::size_t count(const EntityType& t) const {
        switch (t.kind()) {
            case EntityType::Kind::Person: return persons;
            case EntityType::Kind::Publication: return publications;
            case EntityType::Kind::Other: {
                auto it = other.find(t.other_name());
                return it == other.end() ? 0 : it->second;
            }
        }
        return 0;
    }

    bool operator==(const StoreStats&) const = default;
};

class EntityStore {
public:
    EntityStore() = default;

    // Records are re-ordered by uri. Throws on a duplicate uri, an empty
    // label, or an alias equal to the primary label.
    explicit EntityStore(std::vector<EntityRecord> records) : records_(std::move(records)) {
        std::sort(records_.begin(), records_.end(),
                  [](const EntityRecord& a, const EntityRecord& b) { return a.uri < b.uri; });
        by_uri_.reserve(records_.size());
        for (std::size_t i = 0; i < records_.size(); ++i) {
            const EntityRecord& r = records_[i];
            if (r.uri.empty()) throw UserError("invalid_record", "entity with empty uri");
            if (r.label.empty()) throw UserError("invalid_record", "entity '" + r.uri + "' has no label");
            if (std::find(r.aliases.begin(), r.aliases.end(), r.label) != r.aliases.end())
                throw UserError("invalid_record", "entity '" + r.uri + "' repeats its label as alias");
            if (!by_uri_.emplace(r.uri, i).second)
                throw UserError("invalid_record", "duplicate entity uri '" + r.uri + "'");
            switch (r.etype.kind()) {
                case EntityType::Kind::Person: ++stats_.persons; break;
                case EntityType::Kind::Publication: ++stats_.publications; break;
                case EntityType::Kind::Other: ++stats_.other[r.etype.other_name()]; break;
            }
        }
    }

    const std::vector<EntityRecord>& records() const noexcept { return records_; }
    const StoreStats& stats() const noexcept { return stats_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    const EntityRecord* find(std::string_view uri) const {
        auto it = by_uri_.find(std::string(uri));
        return it == by_uri_.end() ? nullptr : &records_[it->second];
    }

    bool operator==(const EntityStore& o) const { return records_ == o.records_; }

private:
    std::vector<EntityRecord> records_;
    std::unordered_map<std::string, std::size_t> by_uri_;
    StoreStats stats_;
};

// Which predicates play which role. Loaded from a key-value text file:
//
//   label = <http://www.w3.org/2000/01/rdf-schema#label>
//   alias = https://example.org/schema#alternativeName
//   type = http://www.w3.org/1999/02/22-rdf-syntax-ns#type
//   type.person = https://dblp.org/rdf/schema#Person
//   type.publication = https://dblp.org/rdf/schema#Publication
//   type.other = https://dblp.org/rdf/schema#Stream
//
// Keys may repeat. Angle brackets around IRIs are optional.
struct SchemaConfig {
    std::vector<std::string> label_predicates;
    std::vector<std::string> alias_predicates;
    std::vector<std::string> type_predicates;
    std::map<std::string, EntityType> type_map;  // type IRI -> entity type

    static std::string iri_fragment(std::string_view iri) {
        std::size_t cut = iri.find_last_of("#/");
        return std::string(cut == std::string_view::npos ? iri : iri.substr(cut + 1));
    }

    static SchemaConfig parse(std::istream& in) {
        SchemaConfig cfg;
        std::string line;
        std::size_t number = 0;
        while (std::getline(in, line)) {
            ++number;
            std::string t = text::trim(line);
            if (t.empty() || t[0] == '#') continue;
            std::size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError("schema line " + std::to_string(number) + ": expected key = value");
            std::string key = text::trim(std::string_view(t).substr(0, eq));
            std::string value = text::trim(std::string_view(t).substr(eq + 1));
            if (value.size() >= 2 && value.front() == '<' && value.back() == '>')
                value = value.substr(1, value.size() - 2);
            if (value.empty())
                throw ConfigError("schema line " + std::to_string(number) + ": empty value");
            if (key == "label") cfg.label_predicates.push_back(value);
            else if (key == "alias") cfg.alias_predicates.push_back(value);
            else if (key == "type") cfg.type_predicates.push_back(value);
            else if (key == "type.person") cfg.type_map[value] = EntityType::person();
            else if (key == "type.publication") cfg.type_map[value] = EntityType::publication();
            else if (key == "type.other") cfg.type_map[value] = EntityType::other(iri_fragment(value));
            else
                throw ConfigError("schema line " + std::to_string(number) + ": unknown key '" + key + "'");
        }
        if (cfg.label_predicates.empty()) throw ConfigError("schema names no label predicate");
        if (cfg.type_predicates.empty()) throw ConfigError("schema names no type predicate");
        if (cfg.type_map.empty()) throw ConfigError("schema maps no type IRIs");
        return cfg;
    }

    static SchemaConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open schema '" + path + "'");
        return parse(in);
    }
};

struct ExtractStats {
    std::size_t subjects = 0;
    std::size_t skipped = 0;  // subjects lacking a label or a recognized type
};

// One record per subject with a recognized type and at least one label.
// The first label seen is primary; later labels and all aliases follow in
// input order, de-duplicated.
inline EntityStore extract_entities(const std::vector<Triple>& triples, const SchemaConfig& schema,
                                    ExtractStats* stats = nullptr) {
    struct Acc {
        std::vector<std::string> labels;
        std::vector<std::string> aliases;
        std::optional<EntityType> etype;
    };
    auto contains = [](const std::vector<std::string>& v, const std::string& p) {
        return std::find(v.begin(), v.end(), p) != v.end();
    };

    std::map<std::string, Acc> subjects;
    for (const Triple& t : triples) {
        Acc& acc = subjects[t.subject];
        if (t.object_is_iri()) {
            if (!acc.etype && contains(schema.type_predicates, t.predicate)) {
                auto it = schema.type_map.find(t.object_iri().value);
                if (it != schema.type_map.end()) acc.etype = it->second;
            }
            continue;
        }
        const std::string& lex = t.object_literal().lexical;
        if (text::trim(lex).empty()) continue;
        if (contains(schema.label_predicates, t.predicate)) acc.labels.push_back(lex);
        else if (contains(schema.alias_predicates, t.predicate)) acc.aliases.push_back(lex);
    }

    ExtractStats st;
    std::vector<EntityRecord> records;
    for (auto& [uri, acc] : subjects) {
        ++st.subjects;
        if (!acc.etype || acc.labels.empty()) {
            ++st.skipped;
            continue;
        }
        EntityRecord r;
        r.uri = uri;
        r.label = acc.labels.front();
        r.etype = *acc.etype;
        auto add_alias = [&](const std::string& a) {
            if (a != r.label && !contains(r.aliases, a)) r.aliases.push_back(a);
        };
        for (std::size_t i = 1; i < acc.labels.size(); ++i) add_alias(acc.labels[i]);
        for (const auto& a : acc.aliases) add_alias(a);
        records.push_back(std::move(r));
    }
    if (stats != nullptr) *stats = st;
    if (records.empty()) throw EmptyStore();
    return EntityStore(std::move(records));
}

namespace detail {

inline constexpr std::string_view kStoreMagic = "SKST";

inline void write_store(binio::Writer& w, const EntityStore& store) {
    w.u32(static_cast<std::uint32_t>(store.size()));
    for (const EntityRecord& r : store.records()) {
        w.str(r.uri);
        w.str(r.label);
        w.u32(static_cast<std::uint32_t>(r.aliases.size()));
        for (const auto& a : r.aliases) w.str(a);
        w.u8(static_cast<std::uint8_t>(r.etype.kind()));
        w.str(r.etype.other_name());
    }
}

inline EntityStore read_store(binio::Reader& r) {
    std::uint32_t n = r.count(4 * 4 + 1);
    std::vector<EntityRecord> records;
    records.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        EntityRecord rec;
        rec.uri = r.str();
        rec.label = r.str();
        std::uint32_t na = r.count(4);
        for (std::uint32_t j = 0; j < na; ++j) rec.aliases.push_back(r.str());
        std::uint8_t kind = r.u8();
        std::string other = r.str();
        switch (kind) {
            case 0: rec.etype = EntityType::person(); break;
            case 1: rec.etype = EntityType::publication(); break;
            case 2: rec.etype = EntityType::other(other); break;
            default: throw FormatVersionError("unknown entity type tag " + std::to_string(kind));
        }
        records.push_back(std::move(rec));
    }
    try {
        return EntityStore(std::move(records));
    } catch (const UserError& e) {
        throw FormatVersionError(std::string("corrupt store: ") + e.what());
    }
}

}  // namespace detail

inline std::string serialize_store(const EntityStore& store) {
    binio::Writer w(detail::kStoreMagic);
    detail::write_store(w, store);
    return w.bytes();
}

inline void save_store(const EntityStore& store, const std::string& path) {
    binio::Writer w(detail::kStoreMagic);
    detail::write_store(w, store);
    w.save(path);
}

inline EntityStore load_store(const std::string& path) {
    binio::Reader r = binio::Reader::open(path, detail::kStoreMagic);
    EntityStore s = detail::read_store(r);
    r.expect_end();
    return s;
}

}  // namespace scholink
