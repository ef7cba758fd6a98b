// scholink command-line interface.
//
// Exit status: 0 success, 1 user error (bad input, flags, missing files),
// 2 internal error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"

#include "scholink/scholink.hpp"

namespace {

using namespace scholink;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return in;
}

EmbeddingKind kind_arg(const std::string& s) {
    auto k = parse_embedding_kind(s);
    if (!k) throw UserError("unknown_embedding", "unknown embedding kind '" + s + "'");
    return *k;
}

std::string default_config_path() {
    const char* env = std::getenv("SCHOLINK_CONFIG");
    return env != nullptr && *env != '\0' ? env : "scholink.json";
}

std::vector<LinkMode> modes_arg(const std::vector<std::string>& names) {
    std::vector<LinkMode> out;
    for (const auto& n : names) {
        if (n == "all") return {std::begin(kLinkModes), std::end(kLinkModes)};
        auto m = parse_link_mode(n);
        if (!m) throw UserError("unknown_mode", "unknown mode '" + n + "'");
        out.push_back(*m);
    }
    return out;
}

struct IngestArgs {
    std::string input, schema, out;
    bool skip_malformed = false;
};

void run_ingest(const IngestArgs& a) {
    const SchemaConfig schema = SchemaConfig::load(a.schema);
    ParseStats ps;
    const auto triples =
        read_ntriples_file(a.input, a.skip_malformed ? ParseMode::Skip : ParseMode::Abort, &ps);
    ExtractStats es;
    const EntityStore store = extract_entities(triples, schema, &es);
    save_store(store, a.out);
    const StoreStats st = store.stats();
    std::cerr << "triples " << ps.triples << ", malformed " << ps.malformed << "\n"
              << "entities " << store.size() << " (person " << st.persons << ", publication "
              << st.publications << "), skipped subjects " << es.skipped << "\n";
}

struct EmbedTrainArgs {
    std::string triples, store, out, kind = "transe";
    EmbedTrainConfig cfg;
};

void run_embed_train(const EmbedTrainArgs& a) {
    const auto triples = read_ntriples_file(a.triples);
    std::unordered_set<std::string> allowed;
    if (!a.store.empty()) {
        const EntityStore store = load_store(a.store);
        for (const auto& r : store.records()) allowed.insert(r.uri);
    }
    EmbedTrainReport report;
    const KgEmbeddingSet set =
        train_embeddings(triples, a.cfg, kind_arg(a.kind), &report, a.store.empty() ? nullptr : &allowed);
    save_embeddings(set, a.out);
    std::cerr << to_string(set.kind) << ": " << set.entities.size() << " entities, " << set.relations.size()
              << " relations, final loss " << report.epoch_mean_loss.back() << "\n";
}

struct EmbedEvalArgs {
    std::string embeddings, triples;
};

void run_embed_eval(const EmbedEvalArgs& a) {
    const KgEmbeddingSet set = load_embeddings(a.embeddings);
    const auto r = evaluate_link_prediction(set, read_ntriples_file(a.triples));
    std::cout << nlohmann::json{{"queries", r.queries},
                                {"hits_at_1", r.hits_at_1},
                                {"hits_at_10", r.hits_at_10},
                                {"mean_rank", r.mean_rank}}
                     .dump()
              << "\n";
}

struct EmbedExportArgs {
    std::string in, out;
    bool relations = false;
};

void run_embed_export(const EmbedExportArgs& a) {
    const KgEmbeddingSet set = load_embeddings(a.in);
    auto out = open_out(a.out);
    export_tsv(a.relations ? set.relations : set.entities, out);
}

struct EmbedImportArgs {
    std::string entities, relations, kind, out;
};

void run_embed_import(const EmbedImportArgs& a) {
    auto ein = open_in(a.entities);
    VectorTable ents = import_tsv(ein);
    KgEmbeddingSet set(kind_arg(a.kind), ents.dim());
    set.entities = std::move(ents);
    if (!a.relations.empty()) {
        auto rin = open_in(a.relations);
        set.relations = import_tsv(rin, set.dim);
    }
    set.validate();
    save_embeddings(set, a.out);
}

struct RerankTrainArgs {
    std::string index, embeddings, data, dataset, out, write_data;
    RerankTrainConfig cfg;
    std::size_t negatives = 3;
};

void run_rerank_train(const RerankTrainArgs& a) {
    if (a.data.empty() == a.dataset.empty())
        throw UserError("usage", "exactly one of --data or --dataset is required");
    const LabelIndex index = load_index(a.index);
    const KgEmbeddingSet kg = load_embeddings(a.embeddings);
    std::vector<RerankRecord> records;
    if (!a.data.empty()) {
        auto in = open_in(a.data);
        records = read_rerank_tsv(in);
    } else {
        TrainingDataOptions opt;
        opt.policy = a.cfg.negatives;
        opt.negatives_per_positive = a.negatives;
        opt.seed = a.cfg.seed;
        records = make_training_records(load_dataset(a.dataset), index, opt);
    }
    if (!a.write_data.empty()) {
        auto out = open_out(a.write_data);
        write_rerank_tsv(records, out);
    }
    const auto triplets = build_triplets(records, index.store(), kg, HashEncoder());
    RerankTrainReport report;
    const SiameseParams p = train_reranker(triplets, a.cfg, &report);
    save_params(p, a.out);
    std::cerr << triplets.size() << " triplets, loss " << report.initial_mean_loss << " -> "
              << report.epoch_mean_loss.back() << "\n";
}

struct LinkArgs {
    std::string config = default_config_path(), question, model, embedding = "transe", mode = "conditional";
    std::size_t k = 0;
    bool timing = false;
};

void run_link(const LinkArgs& a) {
    const ServiceConfig cfg = ServiceConfig::load(a.config);
    const Resources res = load_resources(cfg);
    LinkRequest req{a.question, a.model, kind_arg(a.embedding), LinkMode::LabelSorting, a.k ? a.k : cfg.default_k};
    auto mode = parse_link_mode(a.mode);
    if (!mode) throw UserError("unknown_mode", "unknown mode '" + a.mode + "'");
    req.mode = *mode;
    if (res.detector(req.span_model) == nullptr)
        throw UserError("unknown_span_model", "unknown span model '" + req.span_model + "'");
    std::cout << to_json(link(req, res), a.timing).dump(2) << "\n";
}

struct EvalArgs {
    std::string config = default_config_path(), dataset, out, questions_out, table_out;
    std::vector<std::string> modes{"all"};
    std::size_t k = 0;
};

void run_eval(const EvalArgs& a) {
    const ServiceConfig cfg = ServiceConfig::load(a.config);
    const auto dataset = load_dataset(a.dataset, cfg.dataset_fields);
    const Resources res = load_resources(cfg);
    const EvalReport report = evaluate(dataset, available_combinations(res), modes_arg(a.modes), res,
                                       a.k ? a.k : cfg.default_k);
    if (!a.out.empty()) {
        auto out = open_out(a.out);
        write_csv(report, out);
    }
    if (!a.questions_out.empty()) {
        auto out = open_out(a.questions_out);
        write_question_csv(report, out);
    }
    const std::string table = format_table(report);
    if (!a.table_out.empty()) open_out(a.table_out) << table;
    std::cout << table;
}

struct EncodeArgs {
    std::string text;
};

void run_encode(const EncodeArgs& a) {
    const auto v = HashEncoder().encode(a.text);
    std::cout << nlohmann::json(std::vector<double>(v.values().begin(), v.values().end())).dump() << "\n";
}

struct StubArgs {
    std::string index, host = "127.0.0.1";
    int port = 0;
};

void run_stub(const StubArgs& a, bool span) {
    httplib::Server server;
    if (span) bind_span_stub(server, std::make_shared<const LabelIndex>(load_index(a.index)));
    else bind_encoder_stub(server);
    if (!server.bind_to_port(a.host, a.port))
        throw ConfigError("cannot listen on " + a.host + ":" + std::to_string(a.port));
    std::cerr << (span ? "span" : "encoder") << " stub listening on " << a.host << ":" << a.port << "\n";
    server.listen_after_bind();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entity linking over scholarly knowledge graphs"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Extract entities from N-Triples into a store");
    c_ingest->add_option("--input", ingest.input, "N-Triples file, optionally gzip-compressed")->required();
    c_ingest->add_option("--schema", ingest.schema, "Predicate/type mapping file")->required();
    c_ingest->add_option("--out", ingest.out, "Output store")->required();
    c_ingest->add_flag("--skip-malformed", ingest.skip_malformed, "Skip unparsable lines instead of failing");

    std::string index_store, index_out;
    auto* c_index = app.add_subcommand("index", "Label index commands");
    c_index->require_subcommand(1);
    auto* c_index_build = c_index->add_subcommand("build", "Build the label index from a store");
    c_index_build->add_option("--store", index_store)->required();
    c_index_build->add_option("--out", index_out)->required();

    auto* c_embed = app.add_subcommand("embed", "Knowledge graph embedding commands");
    c_embed->require_subcommand(1);
    EmbedTrainArgs etrain;
    auto* c_etrain = c_embed->add_subcommand("train", "Train entity and relation embeddings");
    c_etrain->add_option("--triples", etrain.triples)->required();
    c_etrain->add_option("--store", etrain.store, "Restrict training to triples between stored entities");
    c_etrain->add_option("--kind", etrain.kind, "transe | distmult | complex")->capture_default_str();
    c_etrain->add_option("--dim", etrain.cfg.dim)->capture_default_str();
    c_etrain->add_option("--epochs", etrain.cfg.epochs)->capture_default_str();
    c_etrain->add_option("--lr", etrain.cfg.learning_rate)->capture_default_str();
    c_etrain->add_option("--margin", etrain.cfg.margin)->capture_default_str();
    c_etrain->add_option("--negatives", etrain.cfg.negatives_per_positive)->capture_default_str();
    c_etrain->add_option("--seed", etrain.cfg.seed)->capture_default_str();
    c_etrain->add_option("--out", etrain.out)->required();

    EmbedEvalArgs eeval;
    auto* c_eeval = c_embed->add_subcommand("eval", "Filtered link prediction on a triple file");
    c_eeval->add_option("--embeddings", eeval.embeddings)->required();
    c_eeval->add_option("--triples", eeval.triples)->required();

    EmbedExportArgs eexport;
    auto* c_eexport = c_embed->add_subcommand("export", "Write vectors as TSV");
    c_eexport->add_option("--in", eexport.in)->required();
    c_eexport->add_option("--out", eexport.out)->required();
    c_eexport->add_flag("--relations", eexport.relations, "Export relation vectors instead of entities");

    EmbedImportArgs eimport;
    auto* c_eimport = c_embed->add_subcommand("import", "Read pretrained TSV vectors");
    c_eimport->add_option("--entities", eimport.entities)->required();
    c_eimport->add_option("--relations", eimport.relations);
    c_eimport->add_option("--kind", eimport.kind)->required();
    c_eimport->add_option("--out", eimport.out)->required();

    auto* c_rerank = app.add_subcommand("rerank", "Siamese reranker commands");
    c_rerank->require_subcommand(1);
    RerankTrainArgs rtrain;
    auto* c_rtrain = c_rerank->add_subcommand("train", "Train the reranker with a triplet loss");
    c_rtrain->add_option("--index", rtrain.index)->required();
    c_rtrain->add_option("--embeddings", rtrain.embeddings)->required();
    c_rtrain->add_option("--data", rtrain.data, "TSV of question, positive uri, negative uri");
    c_rtrain->add_option("--dataset", rtrain.dataset, "Question dataset to derive triplets from");
    c_rtrain->add_option("--write-data", rtrain.write_data, "Save the derived triplets as TSV");
    c_rtrain->add_option("--negatives", rtrain.negatives, "Negatives per gold entity")->capture_default_str();
    c_rtrain->add_flag_function(
        "--random-negatives", [&](std::int64_t) { rtrain.cfg.negatives = NegativePolicy::Random; },
        "Draw negatives uniformly instead of from retrieved candidates");
    c_rtrain->add_option("--epochs", rtrain.cfg.epochs)->capture_default_str();
    c_rtrain->add_option("--lr", rtrain.cfg.learning_rate)->capture_default_str();
    c_rtrain->add_option("--margin", rtrain.cfg.margin)->capture_default_str();
    c_rtrain->add_option("--batch", rtrain.cfg.batch_size)->capture_default_str();
    c_rtrain->add_option("--hidden", rtrain.cfg.hidden)->capture_default_str();
    c_rtrain->add_option("--out-dim", rtrain.cfg.out)->capture_default_str();
    c_rtrain->add_option("--seed", rtrain.cfg.seed)->capture_default_str();
    c_rtrain->add_option("--out", rtrain.out)->required();

    LinkArgs linka;
    auto* c_link = app.add_subcommand("link", "Link the entities of one question");
    c_link->add_option("--config", linka.config)->capture_default_str();
    c_link->add_option("--question", linka.question)->required();
    c_link->add_option("--model", linka.model, "Span detector id")->required();
    c_link->add_option("--embedding", linka.embedding)->capture_default_str();
    c_link->add_option("--mode", linka.mode, "label_sorting | conditional | hard")->capture_default_str();
    c_link->add_option("--k", linka.k, "Candidates per span (default from config)");
    c_link->add_flag("--timing", linka.timing, "Include elapsed_ms in the output");

    EvalArgs evala;
    auto* c_eval = app.add_subcommand("eval", "Evaluate every configured combination on a dataset");
    c_eval->add_option("--config", evala.config)->capture_default_str();
    c_eval->add_option("--dataset", evala.dataset)->required();
    c_eval->add_option("--modes", evala.modes, "all, or a list of modes")->capture_default_str();
    c_eval->add_option("--out", evala.out, "CSV report");
    c_eval->add_option("--questions-out", evala.questions_out, "Per-question CSV");
    c_eval->add_option("--table-out", evala.table_out, "Aligned text table");
    c_eval->add_option("--k", evala.k);

    std::string serve_config = default_config_path();
    auto* c_serve = app.add_subcommand("serve", "Run the HTTP API");
    c_serve->add_option("--config", serve_config)->capture_default_str();

    EncodeArgs encodea;
    auto* c_encode = app.add_subcommand("encode", "Print the hash encoder vector of a text");
    c_encode->add_option("--text", encodea.text)->required();

    auto* c_stub = app.add_subcommand("stub", "Local stand-ins for remote backends");
    c_stub->require_subcommand(1);
    StubArgs span_stub, enc_stub;
    auto* c_stub_span = c_stub->add_subcommand("span", "Span model stub backed by the lexicon detector");
    c_stub_span->add_option("--index", span_stub.index)->required();
    c_stub_span->add_option("--host", span_stub.host)->capture_default_str();
    c_stub_span->add_option("--port", span_stub.port)->required();
    auto* c_stub_enc = c_stub->add_subcommand("encoder", "Sentence encoder stub backed by the hash encoder");
    c_stub_enc->add_option("--host", enc_stub.host)->capture_default_str();
    c_stub_enc->add_option("--port", enc_stub.port)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*c_ingest) run_ingest(ingest);
        else if (*c_index_build) save_index(build_index(std::make_shared<const EntityStore>(load_store(index_store))), index_out);
        else if (*c_etrain) run_embed_train(etrain);
        else if (*c_eeval) run_embed_eval(eeval);
        else if (*c_eexport) run_embed_export(eexport);
        else if (*c_eimport) run_embed_import(eimport);
        else if (*c_rtrain) run_rerank_train(rtrain);
        else if (*c_link) run_link(linka);
        else if (*c_eval) run_eval(evala);
        else if (*c_serve) serve(ServiceConfig::load(serve_config), [](const std::string& m) { std::cerr << m << "\n"; });
        else if (*c_encode) run_encode(encodea);
        else if (*c_stub_span) run_stub(span_stub, true);
        else if (*c_stub_enc) run_stub(enc_stub, false);
        return 0;
    } catch (const UserError& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error [internal]: " << e.what() << "\n";
        return 2;
    }
}
