#pragma once
// Evaluation harness: link every question under each (detector, embedding,
// mode) combination and score the top-1 entity per span against gold.
//
// Rows mirror a detector-by-setting grid: one label-sorting row per
// detector, then conditional and hard rows per embedding kind.

#include <cstdio>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "scholink/dataset.hpp"
#include "scholink/pipeline.hpp"

namespace scholink {

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool operator==(const Prf&) const = default;
};

inline double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

// Empty prediction scores 1 only against empty gold; likewise for recall.
inline Prf prf1(const std::set<std::string>& predicted, const std::set<std::string>& gold) {
    std::size_t hit = 0;
    for (const auto& p : predicted) hit += gold.contains(p);
    Prf out;
    if (predicted.empty()) out.precision = gold.empty() ? 1.0 : 0.0;
    else out.precision = static_cast<double>(hit) / static_cast<double>(predicted.size());
    if (gold.empty()) out.recall = predicted.empty() ? 1.0 : 0.0;
    else out.recall = static_cast<double>(hit) / static_cast<double>(gold.size());
    out.f1 = harmonic(out.precision, out.recall);
    return out;
}

struct EvalRowKey {
    SpanModelId detector;
    std::optional<EmbeddingKind> embedding;  // empty for label sorting
    LinkMode mode = LinkMode::LabelSorting;

    std::string embedding_name() const { return embedding ? to_string(*embedding) : "-"; }
    bool operator==(const EvalRowKey&) const = default;
};

struct QuestionRecord {
    std::string id;
    std::set<std::string> predicted;
    Prf score;
    bool error = false;
};

struct EvalRow {
    EvalRowKey key;
    Prf macro;
    Prf micro;
    std::size_t questions = 0;
    std::size_t errors = 0;
    std::size_t empty_gold = 0;
    std::vector<QuestionRecord> records;
};

struct EvalReport {
    std::size_t dataset_size = 0;
    std::vector<EvalRow> rows;

    const EvalRow* find(const EvalRowKey& key) const {
        for (const auto& r : rows)
            if (r.key == key) return &r;
        return nullptr;
    }
};

inline std::vector<EvalRowKey> report_layout(const std::vector<SpanModelId>& detectors,
                                             const std::vector<EmbeddingKind>& embeddings,
                                             const std::vector<LinkMode>& modes) {
    auto wants = [&](LinkMode m) { return std::find(modes.begin(), modes.end(), m) != modes.end(); };
    std::vector<EvalRowKey> keys;
    for (const auto& d : detectors) {
        if (wants(LinkMode::LabelSorting)) keys.push_back({d, std::nullopt, LinkMode::LabelSorting});
        for (LinkMode m : {LinkMode::ConditionalDisambiguation, LinkMode::HardDisambiguation}) {
            if (!wants(m)) continue;
            for (EmbeddingKind k : kEmbeddingKinds)
                if (std::find(embeddings.begin(), embeddings.end(), k) != embeddings.end())
                    keys.push_back({d, k, m});
        }
    }
    return keys;
}

inline EvalRow evaluate_row(const std::vector<GoldQuestion>& dataset, const EvalRowKey& key,
                            const Resources& res, std::size_t k) {
    EvalRow row;
    row.key = key;
    std::size_t hit = 0, npred = 0, ngold = 0;
    Prf sum;
    for (const GoldQuestion& q : dataset) {
        LinkRequest req{q.question, key.detector, key.embedding.value_or(EmbeddingKind::TransE), key.mode, k};
        const LinkResult lr = link(req, res);
        QuestionRecord rec;
        rec.id = q.id;
        rec.error = lr.has_errors();
        for (const SpanResult& s : lr.spans)
            if (s.top) rec.predicted.insert(s.top->uri);
        rec.score = prf1(rec.predicted, q.gold_entities);
        for (const auto& p : rec.predicted) hit += q.gold_entities.contains(p);
        npred += rec.predicted.size();
        ngold += q.gold_entities.size();
        sum.precision += rec.score.precision;
        sum.recall += rec.score.recall;
        sum.f1 += rec.score.f1;
        row.errors += rec.error;
        row.empty_gold += q.gold_entities.empty();
        row.records.push_back(std::move(rec));
    }
    row.questions = dataset.size();
    if (row.questions > 0) {
        const auto n = static_cast<double>(row.questions);
        row.macro = {sum.precision / n, sum.recall / n, sum.f1 / n};
    }
    row.micro.precision = npred == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(npred);
    row.micro.recall = ngold == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(ngold);
    row.micro.f1 = harmonic(row.micro.precision, row.micro.recall);
    return row;
}

// Runs every row of the grid. Remote failures inside a question are recorded
// as an empty prediction with the error flag set.
inline EvalReport evaluate(const std::vector<GoldQuestion>& dataset,
                           const std::vector<std::pair<SpanModelId, EmbeddingKind>>& combinations,
                           const std::vector<LinkMode>& modes, const Resources& res, std::size_t k = 10) {
    std::vector<SpanModelId> detectors;
    std::vector<EmbeddingKind> embeddings;
    for (const auto& [d, e] : combinations) {
        if (std::find(detectors.begin(), detectors.end(), d) == detectors.end()) detectors.push_back(d);
        if (std::find(embeddings.begin(), embeddings.end(), e) == embeddings.end()) embeddings.push_back(e);
    }
    EvalReport report;
    report.dataset_size = dataset.size();
    for (const EvalRowKey& key : report_layout(detectors, embeddings, modes))
        report.rows.push_back(evaluate_row(dataset, key, res, k));
    return report;
}

namespace eval_detail {
inline std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}
}  // namespace eval_detail

inline void write_csv(const EvalReport& r, std::ostream& out) {
    using eval_detail::fixed6;
    out << "# averaging: macro (per-question F1, then mean); micro columns pool all questions\n";
    out << "detector,embedding,mode,questions,errors,empty_gold,macro_precision,macro_recall,macro_f1,"
           "micro_precision,micro_recall,micro_f1\n";
    for (const EvalRow& row : r.rows) {
        out << row.key.detector << ',' << row.key.embedding_name() << ',' << to_string(row.key.mode) << ','
            << row.questions << ',' << row.errors << ',' << row.empty_gold << ',' << fixed6(row.macro.precision)
            << ',' << fixed6(row.macro.recall) << ',' << fixed6(row.macro.f1) << ','
            << fixed6(row.micro.precision) << ',' << fixed6(row.micro.recall) << ',' << fixed6(row.micro.f1)
            << '\n';
    }
}

inline void write_question_csv(const EvalReport& r, std::ostream& out) {
    using eval_detail::fixed6;
    out << "detector,embedding,mode,id,predicted,precision,recall,f1,error\n";
    for (const EvalRow& row : r.rows) {
        for (const QuestionRecord& q : row.records) {
            std::string pred;
            for (const auto& p : q.predicted) pred += (pred.empty() ? "" : " ") + p;
            out << row.key.detector << ',' << row.key.embedding_name() << ',' << to_string(row.key.mode) << ','
                << q.id << ',' << pred << ',' << fixed6(q.score.precision) << ',' << fixed6(q.score.recall)
                << ',' << fixed6(q.score.f1) << ',' << (q.error ? 1 : 0) << '\n';
        }
    }
}

// Aligned grid of macro F1: one line per detector, one column per setting.
inline std::string format_table(const EvalReport& r) {
    std::vector<std::string> detectors;
    std::vector<std::pair<LinkMode, std::optional<EmbeddingKind>>> columns;
    for (const EvalRow& row : r.rows) {
        if (std::find(detectors.begin(), detectors.end(), row.key.detector) == detectors.end())
            detectors.push_back(row.key.detector);
        std::pair<LinkMode, std::optional<EmbeddingKind>> col{row.key.mode, row.key.embedding};
        if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
    }
    std::size_t first = 8;
    for (const auto& d : detectors) first = std::max(first, d.size());
    std::ostringstream out;
    out << "macro-averaged F1 over " << r.dataset_size << " questions\n";
    out << std::left << std::setw(static_cast<int>(first)) << "detector";
    for (const auto& [mode, emb] : columns) {
        std::string name = mode == LinkMode::LabelSorting ? "label_sorting"
                                                          : to_string(mode) + "/" + to_string(*emb);
        out << "  " << std::setw(20) << name;
    }
    out << '\n';
    for (const auto& d : detectors) {
        out << std::setw(static_cast<int>(first)) << d;
        for (const auto& [mode, emb] : columns) {
            const EvalRow* row = r.find({d, emb, mode});
            out << "  " << std::setw(20) << (row ? eval_detail::fixed6(row->macro.f1).substr(0, 5) : "-");
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace scholink
