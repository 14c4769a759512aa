#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "slrx/evaluation.hpp"
#include "test_support.hpp"

using namespace slrx;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

AnnotationSet from_categories(const std::string& rater, const std::vector<std::string>& cats) {
    AnnotationSet set{rater, {}};
    for (std::size_t i = 0; i < cats.size(); ++i) {
        set.answers[{"doc" + std::to_string(i), "e"}] = {cats[i]};
    }
    return set;
}

// Independent kappa oracle: full contingency table, p_o from the trace,
// p_e from row/column marginals.
double kappa_from_contingency_table(const AnnotationSet& a, const AnnotationSet& b) {
    std::vector<std::string> cats_a, cats_b;
    for (const auto& [key, answers] : a.answers) {
        auto it = b.answers.find(key);
        if (it == b.answers.end()) continue;
        std::string ca, cb;
        for (const auto& id : answers) ca += id + "|";
        for (const auto& id : it->second) cb += id + "|";
        cats_a.push_back(ca);
        cats_b.push_back(cb);
    }
    std::map<std::string, int> index;
    for (const auto& c : cats_a) index.emplace(c, index.size());
    for (const auto& c : cats_b) index.emplace(c, index.size());
    const std::size_t m = index.size();
    const double n = static_cast<double>(cats_a.size());
    std::vector<std::vector<double>> table(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < cats_a.size(); ++i) {
        table[index[cats_a[i]]][index[cats_b[i]]] += 1.0;
    }
    double trace = 0.0;
    for (std::size_t i = 0; i < m; ++i) trace += table[i][i];
    double p_o = trace / n;
    double p_e = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double row = 0.0, col = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            row += table[i][j];
            col += table[j][i];
        }
        p_e += (row / n) * (col / n);
    }
    if (p_o == 1.0) return 1.0;
    if (p_e == 1.0) return 0.0;
    return (p_o - p_e) / (1.0 - p_e);
}

// Exhaustive P/R oracle: evaluates the three counting rules independently for
// every (item, label) pair over a fixed label universe.
PRResult pr_by_enumeration(const AnnotationSet& llm, const AnnotationSet& r1,
                           const AnnotationSet& r2, const std::vector<std::string>& labels) {
    PRResult result;
    for (const auto& [key, llm_answers] : llm.answers) {
        auto it1 = r1.answers.find(key);
        auto it2 = r2.answers.find(key);
        if (it1 == r1.answers.end() || it2 == r2.answers.end()) continue;
        for (const auto& label : labels) {
            bool in_llm = llm_answers.count(label) > 0;
            bool in_r1 = it1->second.count(label) > 0;
            bool in_r2 = it2->second.count(label) > 0;
            if (in_llm && (in_r1 || in_r2)) ++result.tp;
            if (in_llm && !in_r1 && !in_r2) ++result.fp;
            if (in_r1 && in_r2 && !in_llm) ++result.fn;
        }
    }
    if (result.tp + result.fp > 0) {
        result.precision = static_cast<double>(result.tp) / (result.tp + result.fp);
    }
    if (result.tp + result.fn > 0) {
        result.recall = static_cast<double>(result.tp) / (result.tp + result.fn);
    }
    return result;
}

AnnotationSet random_annotations(const std::string& rater, int n_items, int n_categories,
                                 std::mt19937& rng) {
    std::vector<std::string> cats;
    for (int c = 0; c < n_categories; ++c) cats.push_back(std::string(1, static_cast<char>('A' + c)));
    std::vector<std::string> assigned;
    for (int i = 0; i < n_items; ++i) {
        assigned.push_back(cats[std::uniform_int_distribution<int>(0, n_categories - 1)(rng)]);
    }
    return from_categories(rater, assigned);
}

}  // namespace

TEST_CASE("cohen_kappa hand cases") {
    SECTION("identical raters score 1.000") {
        auto a = from_categories("a", {"A", "B", "A", "C"});
        auto b = from_categories("b", {"A", "B", "A", "C"});
        auto result = cohen_kappa(a, b);
        CHECK(result.kappa == 1.0);
        CHECK(result.p_o == 1.0);
        CHECK(result.n_items == 4);
    }

    SECTION("self-comparison with one category still scores 1.000") {
        auto a = from_categories("a", {"A", "A", "A"});
        auto result = cohen_kappa(a, a);
        CHECK(result.kappa == 1.0);
        CHECK(result.p_e == 1.0);
    }

    SECTION("kappa 0.0") {
        auto a = from_categories("a", {"A", "A", "B", "B"});
        auto b = from_categories("b", {"A", "B", "A", "B"});
        auto result = cohen_kappa(a, b);
        CHECK(result.p_o == 0.5);
        CHECK(result.p_e == 0.5);
        CHECK(result.kappa == 0.0);
    }

    SECTION("kappa 0.5") {
        auto a = from_categories("a", {"A", "A", "A", "B"});
        auto b = from_categories("b", {"A", "A", "B", "B"});
        auto result = cohen_kappa(a, b);
        CHECK(result.p_o == 0.75);
        CHECK(result.p_e == 0.5);
        CHECK(result.kappa == 0.5);
    }

    SECTION("multi-select answers form exact-set categories") {
        AnnotationSet a{"a", {}}, b{"b", {}};
        a.answers[{"d1", "e"}] = {"X", "Y"};
        b.answers[{"d1", "e"}] = {"Y", "X"};  // same set, different insertion order
        a.answers[{"d2", "e"}] = {"X"};
        b.answers[{"d2", "e"}] = {"X", "Y"};  // proper subset is a different category
        auto result = cohen_kappa(a, b);
        CHECK(result.p_o == 0.5);
    }

    SECTION("items outside the intersection are ignored") {
        AnnotationSet a{"a", {}}, b{"b", {}};
        a.answers[{"d1", "e"}] = {"X"};
        a.answers[{"d2", "e"}] = {"Y"};
        b.answers[{"d1", "e"}] = {"X"};
        auto result = cohen_kappa(a, b);
        CHECK(result.n_items == 1);
        CHECK(result.kappa == 1.0);
    }

    SECTION("empty intersection is an error") {
        AnnotationSet a{"a", {}}, b{"b", {}};
        a.answers[{"d1", "e"}] = {"X"};
        b.answers[{"d2", "e"}] = {"X"};
        CHECK_THROWS_AS(cohen_kappa(a, b), EvalError);
    }
}

TEST_CASE("cohen_kappa matches the contingency-table oracle") {
    std::mt19937 rng(20260810);
    for (int trial = 0; trial < 300; ++trial) {
        int n_items = std::uniform_int_distribution<int>(1, 30)(rng);
        int n_categories = std::uniform_int_distribution<int>(1, 6)(rng);
        auto a = random_annotations("a", n_items, n_categories, rng);
        auto b = random_annotations("b", n_items, n_categories, rng);
        auto result = cohen_kappa(a, b);
        double expected = kappa_from_contingency_table(a, b);
        CHECK_THAT(result.kappa, Catch::Matchers::WithinAbs(expected, 1e-12));
        CHECK(result.kappa >= -1.0);
        CHECK(result.kappa <= 1.0);
        // kappa is 1 exactly when observed agreement is perfect
        CHECK((result.kappa == 1.0) == (result.p_o == 1.0));
    }
}

TEST_CASE("agreement_matrix") {
    SECTION("identical sets give an all-ones matrix") {
        auto a = from_categories("r1", {"A", "B"});
        auto b = from_categories("r2", {"A", "B"});
        auto m = agreement_matrix({a, b});
        CHECK(m.rater_ids == std::vector<std::string>{"r1", "r2"});
        CHECK(m.values == std::vector<std::vector<double>>{{1.0, 1.0}, {1.0, 1.0}});
    }

    SECTION("symmetric with unit diagonal") {
        std::mt19937 rng(3);
        std::vector<AnnotationSet> sets;
        for (int r = 0; r < 5; ++r) {
            sets.push_back(random_annotations("r" + std::to_string(r), 20, 4, rng));
        }
        auto m = agreement_matrix(sets);
        REQUIRE(m.values.size() == 5);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(m.values[i][i] == 1.0);
            for (std::size_t j = 0; j < 5; ++j) CHECK(m.values[i][j] == m.values[j][i]);
        }
    }

    SECTION("permuting raters permutes the matrix") {
        std::mt19937 rng(4);
        auto a = random_annotations("a", 15, 3, rng);
        auto b = random_annotations("b", 15, 3, rng);
        auto c = random_annotations("c", 15, 3, rng);
        auto m1 = agreement_matrix({a, b, c});
        auto m2 = agreement_matrix({c, a, b});
        // m2 row/col order is (c, a, b); check a few mirrored cells
        CHECK(m1.values[0][1] == m2.values[1][2]);  // (a,b)
        CHECK(m1.values[0][2] == m2.values[1][0]);  // (a,c)
        CHECK(m1.values[1][2] == m2.values[2][0]);  // (b,c)
    }

    SECTION("disjoint pair is named") {
        AnnotationSet a{"left", {}}, b{"right", {}};
        a.answers[{"d1", "e"}] = {"X"};
        b.answers[{"d2", "e"}] = {"X"};
        try {
            agreement_matrix({a, b});
            FAIL("expected EvalError");
        } catch (const EvalError& e) {
            std::string msg = e.what();
            CHECK(msg.find("left") != std::string::npos);
            CHECK(msg.find("right") != std::string::npos);
        }
    }
}

TEST_CASE("precision_recall worked examples") {
    SECTION("perfect extraction") {
        AnnotationSet llm{"m", {}}, r1{"r1", {}}, r2{"r2", {}};
        for (int i = 0; i < 3; ++i) {
            ItemKey key{"d" + std::to_string(i), "e"};
            llm.answers[key] = {"A", "B"};
            r1.answers[key] = {"A", "B"};
            r2.answers[key] = {"A", "B"};
        }
        auto result = precision_recall(llm, r1, r2);
        CHECK(result.precision == 1.0);
        CHECK(result.recall == 1.0);
        CHECK(result.fn == 0);
        CHECK(result.fp == 0);
    }

    SECTION("one item: llm={A,B}, r1={A}, r2={A,C}") {
        AnnotationSet llm{"m", {}}, r1{"r1", {}}, r2{"r2", {}};
        ItemKey key{"d", "e"};
        llm.answers[key] = {"A", "B"};
        r1.answers[key] = {"A"};
        r2.answers[key] = {"A", "C"};
        auto result = precision_recall(llm, r1, r2);
        CHECK(result.tp == 1);
        CHECK(result.fp == 1);
        CHECK(result.fn == 0);
        CHECK(result.precision == 0.5);
        CHECK(result.recall == 1.0);
    }

    SECTION("one item: llm={B}, r1={A}, r2={A}") {
        AnnotationSet llm{"m", {}}, r1{"r1", {}}, r2{"r2", {}};
        ItemKey key{"d", "e"};
        llm.answers[key] = {"B"};
        r1.answers[key] = {"A"};
        r2.answers[key] = {"A"};
        auto result = precision_recall(llm, r1, r2);
        CHECK(result.tp == 0);
        CHECK(result.fp == 1);
        CHECK(result.fn == 1);
        CHECK(result.precision == 0.0);
        CHECK(result.recall == 0.0);
    }

    SECTION("empty llm answer contributes only false negatives") {
        AnnotationSet llm{"m", {}}, r1{"r1", {}}, r2{"r2", {}};
        ItemKey key{"d", "e"};
        llm.answers[key] = {};
        r1.answers[key] = {"A", "B"};
        r2.answers[key] = {"A"};
        auto result = precision_recall(llm, r1, r2);
        CHECK(result.tp == 0);
        CHECK(result.fp == 0);
        CHECK(result.fn == 1);  // only A has both-rater consensus
        CHECK(!result.precision);
        CHECK(result.recall == 0.0);
    }

    SECTION("undefined metrics are null, not 0 or 1") {
        AnnotationSet llm{"m", {}}, r1{"r1", {}}, r2{"r2", {}};
        ItemKey key{"d", "e"};
        llm.answers[key] = {};
        r1.answers[key] = {"A"};
        r2.answers[key] = {"B"};  // no consensus, no llm answers
        auto result = precision_recall(llm, r1, r2);
        CHECK(!result.precision);
        CHECK(!result.recall);
    }

    SECTION("empty intersection is an error") {
        AnnotationSet llm{"m", {}}, r1{"r1", {}}, r2{"r2", {}};
        llm.answers[{"d1", "e"}] = {"A"};
        r1.answers[{"d2", "e"}] = {"A"};
        r2.answers[{"d2", "e"}] = {"A"};
        CHECK_THROWS_AS(precision_recall(llm, r1, r2), EvalError);
    }
}

TEST_CASE("precision_recall matches exhaustive enumeration") {
    std::mt19937 rng(20260810);
    const std::vector<std::string> labels{"A", "B", "C", "D"};
    for (int trial = 0; trial < 300; ++trial) {
        int n_items = std::uniform_int_distribution<int>(1, 15)(rng);
        auto random_set = [&](const std::string& rater, bool allow_empty) {
            AnnotationSet set{rater, {}};
            for (int i = 0; i < n_items; ++i) {
                std::set<std::string> answers;
                for (const auto& label : labels) {
                    if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) answers.insert(label);
                }
                if (!allow_empty && answers.empty()) answers.insert(labels[0]);
                set.answers[{"d" + std::to_string(i), "e"}] = answers;
            }
            return set;
        };
        auto llm = random_set("m", true);
        auto r1 = random_set("r1", false);
        auto r2 = random_set("r2", false);
        auto got = precision_recall(llm, r1, r2);
        auto expected = pr_by_enumeration(llm, r1, r2, labels);
        CHECK(got.tp == expected.tp);
        CHECK(got.fp == expected.fp);
        CHECK(got.fn == expected.fn);
    }
}

TEST_CASE("adding an unsupported llm answer only increases FP") {
    std::mt19937 rng(17);
    const std::vector<std::string> labels{"A", "B", "C", "D", "E"};
    AnnotationSet llm{"m", {}}, r1{"r1", {}}, r2{"r2", {}};
    for (int i = 0; i < 10; ++i) {
        ItemKey key{"d" + std::to_string(i), "e"};
        llm.answers[key] = {"A"};
        r1.answers[key] = {"A", "B"};
        r2.answers[key] = {"A"};
    }
    auto before = precision_recall(llm, r1, r2);
    llm.answers[{"d3", "e"}].insert("E");  // E given by neither rater
    auto after = precision_recall(llm, r1, r2);
    CHECK(after.fp == before.fp + 1);
    CHECK(after.tp == before.tp);
    CHECK(after.fn == before.fn);
}

TEST_CASE("annotations loader") {
    TempDir dir("annotations");
    auto path = dir.path / "annotations.jsonl";

    SECTION("groups by rater in first-appearance order") {
        write_file(path,
                   R"({"rater": "r2", "doc_id": "d1", "entry_id": "e1", "answers": ["A"]})"
                   "\n"
                   R"({"rater": "r1", "doc_id": "d1", "entry_id": "e1", "answers": ["A", "B"]})"
                   "\n"
                   R"({"rater": "r2", "doc_id": "d2", "entry_id": "e1", "answers": ["C"]})"
                   "\n");
        auto sets = load_annotations(path);
        REQUIRE(sets.size() == 2);
        CHECK(sets[0].rater_id == "r2");
        CHECK(sets[1].rater_id == "r1");
        CHECK(sets[0].answers.size() == 2);
        CHECK(sets[1].answers.at({"d1", "e1"}) == std::set<std::string>{"A", "B"});
    }

    SECTION("empty answer set is rejected") {
        write_file(path, R"({"rater": "r1", "doc_id": "d1", "entry_id": "e1", "answers": []})"
                         "\n");
        CHECK_THROWS_AS(load_annotations(path), EvalError);
    }

    SECTION("duplicate item for one rater is rejected") {
        write_file(path,
                   R"({"rater": "r1", "doc_id": "d1", "entry_id": "e1", "answers": ["A"]})"
                   "\n"
                   R"({"rater": "r1", "doc_id": "d1", "entry_id": "e1", "answers": ["B"]})"
                   "\n");
        CHECK_THROWS_AS(load_annotations(path), EvalError);
    }

    SECTION("missing file is a config error") {
        CHECK_THROWS_AS(load_annotations(dir.path / "nope.jsonl"), ConfigError);
    }
}

TEST_CASE("report rendering") {
    AgreementMatrix m;
    m.rater_ids = {"Researcher 1", "Researcher 2", "model-a"};
    m.values = {{1.0, 0.925, 0.763}, {0.925, 1.0, 0.749}, {0.763, 0.749, 1.0}};

    SECTION("kappa matrix CSV has a blank lower triangle") {
        std::string csv = kappa_matrix_csv(m);
        CHECK(csv ==
              ",Researcher 1,Researcher 2,model-a\n"
              "Researcher 1,1.000,0.925,0.763\n"
              "Researcher 2,,1.000,0.749\n"
              "model-a,,,1.000\n");
    }

    SECTION("precision/recall CSV is metric rows by model columns") {
        std::map<std::string, PRResult> results;
        results["model-a"] = {41, 9, 9, 0.82, 0.82};
        results["model-b"] = {33, 6, 0, 0.846, std::nullopt};
        std::string csv = precision_recall_csv({"model-a", "model-b"}, results);
        CHECK(csv ==
              ",model-a,model-b\n"
              "precision,0.820,0.846\n"
              "recall,0.820,\n");
    }

    SECTION("JSON report carries counts and null for undefined metrics") {
        std::map<std::string, PRResult> results;
        results["model-a"] = {0, 0, 3, std::nullopt, 0.0};
        auto j = evaluation_report_json(m, {"model-a"}, results);
        CHECK(j["kappa_matrix"]["raters"].size() == 3);
        CHECK(j["precision_recall"]["model-a"]["tp"] == 0);
        CHECK(j["precision_recall"]["model-a"]["precision"].is_null());
        CHECK(j["precision_recall"]["model-a"]["recall"] == 0.0);
    }

    SECTION("rater ids with commas are quoted") {
        AgreementMatrix odd;
        odd.rater_ids = {"a,b", "c"};
        odd.values = {{1.0, 0.5}, {0.5, 1.0}};
        std::string csv = kappa_matrix_csv(odd);
        CHECK(csv.find("\"a,b\"") != std::string::npos);
    }
}
