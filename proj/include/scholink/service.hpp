#pragma once
// Service configuration, resource loading and the HTTP API.
//
//   GET  /api/config   detectors, embeddings, modes, sample questions
//   POST /api/link     LinkRequest -> LinkResult
//   GET  /api/health   {"status": "loading" | "ok"}
//   GET  /*            static files from static_dir, when configured
//
// Handlers are plain functions of (method, path, body) so they can be
// exercised without a socket; serve() binds them to an httplib server.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "scholink/http_client.hpp"
#include "json.hpp"

#include "scholink/dataset.hpp"
#include "scholink/error.hpp"
#include "scholink/pipeline.hpp"

namespace scholink {

inline constexpr const char* kListenHostEnv = "SCHOLINK_LISTEN_HOST";
inline constexpr const char* kListenPortEnv = "SCHOLINK_LISTEN_PORT";
inline constexpr const char* kSpanEndpointEnv = "SCHOLINK_SPAN_ENDPOINT";

struct DetectorBinding {
    SpanModelId id;
    std::string backend = "lexicon";  // lexicon | remote
    std::string endpoint;
    std::string model;
    int timeout_ms = 10000;
};

struct EmbeddingFiles {
    std::string vectors;
    std::string reranker;
};

struct ServiceConfig {
    std::string index;
    std::map<EmbeddingKind, EmbeddingFiles> embeddings;
    std::string encoder_backend = "hash";  // hash | remote
    std::string encoder_endpoint;
    int encoder_timeout_ms = 10000;
    std::vector<DetectorBinding> detectors;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::vector<std::string> sample_questions;
    std::size_t default_k = 10;
    LinkOptions options;
    DatasetFields dataset_fields;
    std::string static_dir;

    static ServiceConfig parse(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static ServiceConfig load(const std::string& path);

    std::vector<EmbeddingKind> embedding_kinds() const {
        std::vector<EmbeddingKind> out;
        for (EmbeddingKind k : kEmbeddingKinds)
            if (embeddings.contains(k)) out.push_back(k);
        return out;
    }

    // Every referenced file must exist.
    void check_files() const {
        auto need = [](const std::string& p, const std::string& what) {
            if (p.empty()) throw ConfigError(what + " path is not set");
            if (!std::filesystem::is_regular_file(p)) throw ConfigError(what + " file not found: " + p);
        };
        need(index, "index");
        for (const auto& [kind, files] : embeddings) {
            need(files.vectors, to_string(kind) + " embedding");
            need(files.reranker, to_string(kind) + " reranker");
        }
        if (!static_dir.empty() && !std::filesystem::is_directory(static_dir))
            throw ConfigError("static directory not found: " + static_dir);
    }
};

namespace service_detail {

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty() || base.empty() || std::filesystem::path(p).is_absolute()) return p;
    return (base / p).lexically_normal().string();
}

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

inline const char* env(const char* name) {
    const char* v = std::getenv(name);
    return v != nullptr && *v != '\0' ? v : nullptr;
}

}  // namespace service_detail

inline ServiceConfig ServiceConfig::parse(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    using service_detail::get_or;
    using service_detail::resolve;
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    ServiceConfig c;
    c.index = resolve(base_dir, get_or<std::string>(j, "index", "", "config"));

    if (j.contains("embeddings")) {
        if (!j["embeddings"].is_object()) throw ConfigError("config.embeddings must be an object");
        for (const auto& [name, v] : j["embeddings"].items()) {
            auto kind = parse_embedding_kind(name);
            if (!kind) throw ConfigError("unknown embedding kind '" + name + "'");
            if (!v.is_object()) throw ConfigError("config.embeddings." + name + " must be an object");
            const std::string where = "config.embeddings." + name;
            c.embeddings[*kind] = {resolve(base_dir, get_or<std::string>(v, "vectors", "", where)),
                                   resolve(base_dir, get_or<std::string>(v, "reranker", "", where))};
        }
    }

    if (j.contains("encoder")) {
        const auto& e = j["encoder"];
        if (!e.is_object()) throw ConfigError("config.encoder must be an object");
        c.encoder_backend = get_or<std::string>(e, "backend", "hash", "config.encoder");
        c.encoder_endpoint = get_or<std::string>(e, "endpoint", "", "config.encoder");
        c.encoder_timeout_ms = get_or<int>(e, "timeout_ms", 10000, "config.encoder");
    }
    if (c.encoder_backend != "hash" && c.encoder_backend != "remote")
        throw ConfigError("unknown encoder backend '" + c.encoder_backend + "'");

    if (j.contains("detectors")) {
        if (!j["detectors"].is_array()) throw ConfigError("config.detectors must be an array");
        for (std::size_t i = 0; i < j["detectors"].size(); ++i) {
            const auto& d = j["detectors"][i];
            const std::string where = "config.detectors[" + std::to_string(i) + "]";
            if (!d.is_object()) throw ConfigError(where + " must be an object");
            DetectorBinding b;
            b.id = get_or<std::string>(d, "id", "", where);
            b.backend = get_or<std::string>(d, "backend", "lexicon", where);
            b.endpoint = get_or<std::string>(d, "endpoint", "", where);
            b.model = get_or<std::string>(d, "model", b.id, where);
            b.timeout_ms = get_or<int>(d, "timeout_ms", 10000, where);
            if (b.id.empty()) throw ConfigError(where + ".id is empty");
            if (b.backend != "lexicon" && b.backend != "remote")
                throw ConfigError(where + ": unknown backend '" + b.backend + "'");
            for (const auto& prev : c.detectors)
                if (prev.id == b.id) throw ConfigError("duplicate detector id '" + b.id + "'");
            c.detectors.push_back(std::move(b));
        }
    }

    if (j.contains("listen")) {
        const auto& l = j["listen"];
        c.host = get_or<std::string>(l, "host", c.host, "config.listen");
        c.port = get_or<int>(l, "port", c.port, "config.listen");
    }
    c.sample_questions = get_or<std::vector<std::string>>(j, "sample_questions", {}, "config");
    c.default_k = get_or<std::size_t>(j, "default_k", 10, "config");
    if (c.default_k == 0) throw ConfigError("config.default_k must be >= 1");

    const std::string trigger = get_or<std::string>(j, "trigger", "top_candidate", "config");
    if (trigger == "top_candidate") c.options.trigger = TriggerRule::TopCandidate;
    else if (trigger == "any_pair") c.options.trigger = TriggerRule::AnyPair;
    else throw ConfigError("config.trigger must be top_candidate or any_pair");
    const std::string target = get_or<std::string>(j, "similarity_target", "question", "config");
    if (target == "question") c.options.similarity = SimilarityTarget::Question;
    else if (target == "span") c.options.similarity = SimilarityTarget::Span;
    else throw ConfigError("config.similarity_target must be question or span");

    if (j.contains("dataset_fields")) {
        const auto& f = j["dataset_fields"];
        c.dataset_fields.questions = get_or<std::string>(f, "questions", "questions", "config.dataset_fields");
        c.dataset_fields.id = get_or<std::string>(f, "id", "id", "config.dataset_fields");
        c.dataset_fields.question = get_or<std::string>(f, "question", "question", "config.dataset_fields");
        c.dataset_fields.gold = get_or<std::string>(f, "gold", "entities", "config.dataset_fields");
    }
    c.static_dir = resolve(base_dir, get_or<std::string>(j, "static_dir", "", "config"));

    if (const char* h = service_detail::env(kListenHostEnv)) c.host = h;
    if (const char* p = service_detail::env(kListenPortEnv)) {
        try {
            c.port = std::stoi(p);
        } catch (const std::exception&) {
            throw ConfigError(std::string(kListenPortEnv) + " is not a port number");
        }
    }
    if (const char* e = service_detail::env(kEncoderEndpointEnv)) c.encoder_endpoint = e;
    if (const char* e = service_detail::env(kSpanEndpointEnv))
        for (auto& d : c.detectors)
            if (d.backend == "remote") d.endpoint = e;

    if (c.port < 1 || c.port > 65535) throw ConfigError("listen port must be in [1, 65535]");
    return c;
}

inline ServiceConfig ServiceConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("configuration file " + path + " is not valid JSON: " + e.what());
    }
    return parse(j, std::filesystem::absolute(path).parent_path());
}

inline Resources load_resources(const ServiceConfig& cfg) {
    cfg.check_files();
    Resources res;
    res.options = cfg.options;
    res.index = std::make_shared<const LabelIndex>(load_index(cfg.index));
    for (const auto& [kind, files] : cfg.embeddings) {
        auto set = std::make_shared<const KgEmbeddingSet>(load_embeddings(files.vectors, kind));
        if (set->dim != kKgDim) throw DimensionMismatch(kKgDim, set->dim);
        res.embeddings[kind] = std::move(set);
        res.rerankers[kind] = std::make_shared<const SiameseParams>(load_params(files.reranker));
    }
    if (cfg.encoder_backend == "remote")
        res.encoder = std::make_shared<const RemoteEncoder>(cfg.encoder_endpoint,
                                                            std::chrono::milliseconds(cfg.encoder_timeout_ms));
    else
        res.encoder = std::make_shared<const HashEncoder>();
    for (const DetectorBinding& d : cfg.detectors) {
        std::shared_ptr<const SpanDetector> det;
        if (d.backend == "remote")
            det = std::make_shared<const RemoteSpanDetector>(d.endpoint, d.model,
                                                             std::chrono::milliseconds(d.timeout_ms));
        else
            det = std::make_shared<const LexiconSpanDetector>(res.index);
        res.detectors.emplace_back(d.id, std::move(det));
    }
    return res;
}

struct ApiResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

inline ApiResponse api_error(int status, const std::string& code, const std::string& message) {
    return {status, nlohmann::json{{"error", {{"code", code}, {"message", message}}}}.dump()};
}

class ApiService {
public:
    explicit ApiService(ServiceConfig cfg) : cfg_(std::move(cfg)) {}

    void set_resources(std::shared_ptr<const Resources> res) {
        std::lock_guard lock(mu_);
        res_ = std::move(res);
    }

    std::shared_ptr<const Resources> resources() const {
        std::lock_guard lock(mu_);
        return res_;
    }

    const ServiceConfig& config() const noexcept { return cfg_; }

    ApiResponse handle(const std::string& method, const std::string& path, const std::string& body) const {
        try {
            if (path == "/api/health") {
                if (method != "GET") return api_error(404, "not_found", "no such endpoint");
                return {200, nlohmann::json{{"status", resources() ? "ok" : "loading"}}.dump()};
            }
            if (path == "/api/config") {
                if (method != "GET") return api_error(404, "not_found", "no such endpoint");
                return {200, config_body().dump()};
            }
            if (path == "/api/link") {
                if (method != "POST") return api_error(404, "not_found", "no such endpoint");
                return link_body(body);
            }
            return api_error(404, "not_found", "no such endpoint");
        } catch (const std::exception&) {
            return api_error(500, "internal", "internal error");
        }
    }

    nlohmann::json config_body() const {
        nlohmann::json models = nlohmann::json::array();
        for (const auto& d : cfg_.detectors) models.push_back(d.id);
        nlohmann::json embeddings = nlohmann::json::array();
        for (EmbeddingKind k : cfg_.embedding_kinds()) embeddings.push_back(to_string(k));
        nlohmann::json modes = nlohmann::json::array();
        for (LinkMode m : kLinkModes) modes.push_back(to_string(m));
        return {{"span_models", std::move(models)},
                {"embeddings", std::move(embeddings)},
                {"modes", std::move(modes)},
                {"sample_questions", cfg_.sample_questions},
                {"default_k", cfg_.default_k}};
    }

private:
    ApiResponse link_body(const std::string& body) const {
        const auto res = resources();
        if (!res) return api_error(500, "not_ready", "resources are still loading");

        nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded() || !j.is_object()) return api_error(400, "bad_request", "body must be a JSON object");
        if (!j.contains("question") || !j["question"].is_string())
            return api_error(400, "bad_request", "'question' must be a string");
        LinkRequest req;
        req.question = j["question"].get<std::string>();
        if (text::normalize(req.question).empty()) return api_error(400, "empty_question", "question is empty");

        if (!j.contains("span_model") || !j["span_model"].is_string())
            return api_error(422, "unknown_span_model", "'span_model' must name a configured detector");
        req.span_model = j["span_model"].get<std::string>();
        if (res->detector(req.span_model) == nullptr)
            return api_error(422, "unknown_span_model", "unknown span model '" + req.span_model + "'");

        const std::string mode = j.value("mode", std::string("conditional"));
        auto parsed_mode = j.contains("mode") && !j["mode"].is_string() ? std::nullopt : parse_link_mode(mode);
        if (!parsed_mode) return api_error(422, "unknown_mode", "unknown mode '" + mode + "'");
        req.mode = *parsed_mode;

        if (j.contains("embedding")) {
            const auto& e = j["embedding"];
            auto kind = e.is_string() ? parse_embedding_kind(e.get<std::string>()) : std::nullopt;
            if (!kind || !res->embeddings.contains(*kind))
                return api_error(422, "unknown_embedding", "unknown embedding " + e.dump());
            req.embedding = *kind;
        } else if (req.mode != LinkMode::LabelSorting) {
            return api_error(422, "unknown_embedding", "'embedding' is required for this mode");
        } else if (auto kinds = res->loaded_embeddings(); !kinds.empty()) {
            req.embedding = kinds.front();
        }

        req.k = cfg_.default_k;
        if (j.contains("k") && !j["k"].is_null()) {
            if (!j["k"].is_number_unsigned() || j["k"].get<std::uint64_t>() == 0)
                return api_error(422, "invalid_k", "k must be a positive integer");
            req.k = j["k"].get<std::size_t>();
        }

        LinkResult result;
        try {
            result = link(req, *res);
        } catch (const UserError& e) {
            return api_error(422, e.code(), e.what());
        }
        nlohmann::json out = to_json(result);
        if (!result.has_errors()) return {200, out.dump()};

        StageError first;
        if (result.error) {
            first = *result.error;
        } else {
            for (const SpanResult& s : result.spans)
                if (s.error) {
                    first = *s.error;
                    break;
                }
        }
        nlohmann::json err = {{"error", to_json(first)}, {"partial", std::move(out)}};
        return {502, err.dump()};
    }

    ServiceConfig cfg_;
    mutable std::mutex mu_;
    std::shared_ptr<const Resources> res_;
};

inline void bind_api(httplib::Server& server, const ApiService& api) {
    auto route = [&api](const httplib::Request& req, httplib::Response& res) {
        const ApiResponse r = api.handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    server.Get("/api/.*", route);
    server.Post("/api/.*", route);
    if (!api.config().static_dir.empty()) server.set_mount_point("/", api.config().static_dir);
}

// Starts listening, then loads resources; /api/health answers "loading"
// until they are in place. A load failure stops the server and propagates.
inline void serve(const ServiceConfig& cfg, const std::function<void(const std::string&)>& log = {}) {
    cfg.check_files();
    ApiService api(cfg);
    httplib::Server server;
    bind_api(server, api);
    if (!server.bind_to_port(cfg.host, cfg.port))
        throw ConfigError("cannot listen on " + cfg.host + ":" + std::to_string(cfg.port));
    std::thread listener([&server] { server.listen_after_bind(); });
    try {
        api.set_resources(std::make_shared<const Resources>(load_resources(cfg)));
    } catch (...) {
        server.stop();
        listener.join();
        throw;
    }
    if (log) log("listening on " + cfg.host + ":" + std::to_string(cfg.port));
    listener.join();
}

// Stand-in for a remote span model: answers with the lexicon detector's
// spans in the model output grammar.
//   POST /detect {"model", "question"} -> {"output"}
inline void bind_span_stub(httplib::Server& server, std::shared_ptr<const LabelIndex> index) {
    auto detector = std::make_shared<const LexiconSpanDetector>(std::move(index));
    server.Post("/detect", [detector](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json j = nlohmann::json::parse(req.body, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("question") || !j["question"].is_string()) {
            res.status = 400;
            res.set_content(R"({"error":"bad_request"})", "application/json");
            return;
        }
        std::vector<SpanPrediction> spans;
        for (auto& s : detector->detect(j["question"].get<std::string>()))
            if (s.label_text.find_first_of("|[") == std::string::npos) spans.push_back(std::move(s));
        res.set_content(nlohmann::json{{"output", serialize_spans(spans)}}.dump(), "application/json");
    });
}

// Stand-in for a remote sentence encoder backed by HashEncoder.
//   POST /encode {"texts"} -> {"vectors"}
inline void bind_encoder_stub(httplib::Server& server) {
    server.Post("/encode", [](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json j = nlohmann::json::parse(req.body, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("texts") || !j["texts"].is_array()) {
            res.status = 400;
            res.set_content(R"({"error":"bad_request"})", "application/json");
            return;
        }
        const HashEncoder enc;
        nlohmann::json vectors = nlohmann::json::array();
        try {
            for (const auto& t : j["texts"]) {
                const auto v = enc.encode(t.is_string() ? t.get<std::string>() : std::string());
                vectors.push_back(std::vector<double>(v.values().begin(), v.values().end()));
            }
        } catch (const EmptyText&) {
            res.status = 400;
            res.set_content(R"({"error":"empty_text"})", "application/json");
            return;
        }
        res.set_content(nlohmann::json{{"vectors", std::move(vectors)}}.dump(), "application/json");
    });
}

}  // namespace scholink
