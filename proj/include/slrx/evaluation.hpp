#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "slrx/errors.hpp"
#include "slrx/extraction.hpp"
#include "slrx/util.hpp"

namespace slrx {

struct ItemKey {
    std::string doc_id;
    std::string entry_id;

    auto operator<=>(const ItemKey&) const = default;
};

// One rater's answers over (document, entry) items. Human raters always carry
// non-empty answer sets; model-derived sets may be empty where extraction
// failed.
struct AnnotationSet {
    std::string rater_id;
    std::map<ItemKey, std::set<std::string>> answers;
};

struct KappaResult {
    double kappa = 0.0;
    double p_o = 0.0;
    double p_e = 0.0;
    int n_items = 0;
};

struct PRResult {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    std::optional<double> precision;  // null when tp+fp == 0
    std::optional<double> recall;     // null when tp+fn == 0
};

struct AgreementMatrix {
    std::vector<std::string> rater_ids;
    std::vector<std::vector<double>> values;  // symmetric, unit diagonal
};

namespace detail {

// Exact-set nominal category for one item's answers.
inline std::string category_of(const std::set<std::string>& answers) {
    std::string cat;
    for (const auto& id : answers) {
        if (!cat.empty()) cat += '|';
        cat += id;
    }
    return cat;
}

inline std::vector<ItemKey> shared_keys(const AnnotationSet& a, const AnnotationSet& b) {
    std::vector<ItemKey> keys;
    for (const auto& [key, _] : a.answers) {
        if (b.answers.count(key)) keys.push_back(key);
    }
    return keys;
}

}  // namespace detail

// Chance-corrected agreement over the item intersection, treating each full
// answer set as one nominal category. Conventions: p_o = 1 -> kappa = 1;
// p_e = 1 with p_o < 1 -> kappa = 0.
inline KappaResult cohen_kappa(const AnnotationSet& a, const AnnotationSet& b) {
    auto keys = detail::shared_keys(a, b);
    const long n = static_cast<long>(keys.size());
    if (n == 0) {
        throw EvalError("no shared items between raters '" + a.rater_id + "' and '" + b.rater_id +
                        "'");
    }

    long matches = 0;
    std::map<std::string, long> count_a, count_b;
    for (const auto& key : keys) {
        std::string ca = detail::category_of(a.answers.at(key));
        std::string cb = detail::category_of(b.answers.at(key));
        if (ca == cb) ++matches;
        ++count_a[ca];
        ++count_b[cb];
    }

    long chance_sum = 0;  // sum over categories of count_a(c) * count_b(c)
    for (const auto& [cat, ca] : count_a) {
        auto it = count_b.find(cat);
        if (it != count_b.end()) chance_sum += ca * it->second;
    }

    KappaResult result;
    result.n_items = static_cast<int>(n);
    result.p_o = static_cast<double>(matches) / static_cast<double>(n);
    result.p_e = static_cast<double>(chance_sum) / (static_cast<double>(n) * static_cast<double>(n));
    if (matches == n) {
        result.kappa = 1.0;
    } else if (chance_sum == n * n) {
        result.kappa = 0.0;
    } else {
        result.kappa = (result.p_o - result.p_e) / (1.0 - result.p_e);
    }
    return result;
}

// Pairwise kappa over all raters, in the given order.
inline AgreementMatrix agreement_matrix(const std::vector<AnnotationSet>& sets) {
    if (sets.size() < 2) throw EvalError("agreement matrix needs >= 2 annotation sets");
    AgreementMatrix m;
    for (const auto& s : sets) m.rater_ids.push_back(s.rater_id);
    m.values.assign(sets.size(), std::vector<double>(sets.size(), 1.0));
    for (std::size_t i = 0; i < sets.size(); ++i) {
        for (std::size_t j = i + 1; j < sets.size(); ++j) {
            double k = cohen_kappa(sets[i], sets[j]).kappa;
            m.values[i][j] = k;
            m.values[j][i] = k;
        }
    }
    return m;
}

// Micro-averaged precision/recall of an LLM against two reference raters,
// counted per (item, option id) over the three-way item intersection:
//   TP: answered by the LLM and by at least one rater,
//   FP: answered by the LLM and by neither rater,
//   FN: answered by both raters but missed by the LLM.
inline PRResult precision_recall(const AnnotationSet& llm, const AnnotationSet& r1,
                                 const AnnotationSet& r2) {
    PRResult result;
    bool any = false;
    for (const auto& [key, llm_answers] : llm.answers) {
        auto it1 = r1.answers.find(key);
        auto it2 = r2.answers.find(key);
        if (it1 == r1.answers.end() || it2 == r2.answers.end()) continue;
        any = true;
        const auto& a1 = it1->second;
        const auto& a2 = it2->second;
        for (const auto& id : llm_answers) {
            if (a1.count(id) || a2.count(id)) {
                ++result.tp;
            } else {
                ++result.fp;
            }
        }
        for (const auto& id : a1) {
            if (a2.count(id) && !llm_answers.count(id)) ++result.fn;
        }
    }
    if (!any) {
        throw EvalError("no items shared by '" + llm.rater_id + "', '" + r1.rater_id + "' and '" +
                        r2.rater_id + "'");
    }
    if (result.tp + result.fp > 0) {
        result.precision = static_cast<double>(result.tp) / static_cast<double>(result.tp + result.fp);
    }
    if (result.tp + result.fn > 0) {
        result.recall = static_cast<double>(result.tp) / static_cast<double>(result.tp + result.fn);
    }
    return result;
}

// Annotations input: JSON-lines, one line per (rater, item):
// {"rater", "doc_id", "entry_id", "answers": [...]}. Raters come back in
// first-appearance order.
inline std::vector<AnnotationSet> load_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read annotations file: " + path.string());
    std::vector<AnnotationSet> sets;
    std::map<std::string, std::size_t> index_of;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::string where = path.string() + ":" + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(where + ": " + e.what());
        }
        std::string rater, doc_id, entry_id;
        std::set<std::string> answers;
        try {
            rater = j.at("rater").get<std::string>();
            doc_id = j.at("doc_id").get<std::string>();
            entry_id = j.at("entry_id").get<std::string>();
            for (const auto& a : j.at("answers")) answers.insert(a.get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(where + ": " + e.what());
        }
        if (answers.empty()) {
            throw EvalError(where + ": empty answer set for rater '" + rater + "'");
        }
        auto [it, inserted] = index_of.try_emplace(rater, sets.size());
        if (inserted) sets.push_back({rater, {}});
        auto& set = sets[it->second];
        if (!set.answers.emplace(ItemKey{doc_id, entry_id}, std::move(answers)).second) {
            throw EvalError(where + ": duplicate item (" + doc_id + ", " + entry_id +
                            ") for rater '" + rater + "'");
        }
    }
    return sets;
}

// Builds one model's annotation set from its extraction records; failed
// extractions contribute empty answer sets.
inline AnnotationSet annotations_from_records(const std::string& model_id,
                                              const std::vector<ExtractionRecord>& records) {
    AnnotationSet set{model_id, {}};
    for (const auto& r : records) {
        if (r.model_id != model_id) continue;
        set.answers[{r.doc_id, r.entry_id}] =
            std::set<std::string>(r.answer_ids.begin(), r.answer_ids.end());
    }
    return set;
}

namespace detail {

inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace detail

// Square kappa matrix CSV: unit diagonal, blank lower triangle.
inline std::string kappa_matrix_csv(const AgreementMatrix& m) {
    std::string out;
    for (const auto& id : m.rater_ids) {
        out += ',';
        out += detail::csv_escape(id);
    }
    out += '\n';
    for (std::size_t i = 0; i < m.rater_ids.size(); ++i) {
        out += detail::csv_escape(m.rater_ids[i]);
        for (std::size_t j = 0; j < m.rater_ids.size(); ++j) {
            out += ',';
            if (j >= i) out += detail::fixed3(m.values[i][j]);
        }
        out += '\n';
    }
    return out;
}

// Precision/recall CSV: metric rows, one column per model.
inline std::string precision_recall_csv(const std::vector<std::string>& model_ids,
                                        const std::map<std::string, PRResult>& results) {
    std::string out;
    for (const auto& id : model_ids) {
        out += ',';
        out += detail::csv_escape(id);
    }
    out += '\n';
    for (const char* metric : {"precision", "recall"}) {
        out += metric;
        for (const auto& id : model_ids) {
            out += ',';
            const PRResult& r = results.at(id);
            const auto& value = std::string_view(metric) == "precision" ? r.precision : r.recall;
            if (value) out += detail::fixed3(*value);
        }
        out += '\n';
    }
    return out;
}

inline nlohmann::json evaluation_report_json(const AgreementMatrix& m,
                                             const std::vector<std::string>& model_ids,
                                             const std::map<std::string, PRResult>& results) {
    nlohmann::json pr = nlohmann::json::object();
    for (const auto& id : model_ids) {
        const PRResult& r = results.at(id);
        pr[id] = {{"tp", r.tp},
                  {"fp", r.fp},
                  {"fn", r.fn},
                  {"precision", r.precision ? nlohmann::json(*r.precision) : nlohmann::json(nullptr)},
                  {"recall", r.recall ? nlohmann::json(*r.recall) : nlohmann::json(nullptr)}};
    }
    return {{"kappa_matrix", {{"raters", m.rater_ids}, {"values", m.values}}},
            {"precision_recall", std::move(pr)}};
}

}  // namespace slrx
