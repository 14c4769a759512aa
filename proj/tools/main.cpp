#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slrx/pipeline.hpp"
#include "slrx/version.hpp"

namespace {

// Exit codes: 0 success, 1 config error, 2 evaluation error, 3 extraction
// completed with per-item failures (records still written).
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitEval = 2;
constexpr int kExitPartial = 3;

int cmd_extract(const std::string& config_path, bool offline,
                const std::vector<std::string>& model_overrides) {
    slrx::RunConfig config = slrx::load_run_config(config_path);
    if (!model_overrides.empty()) config.model_ids = model_overrides;
    slrx::RunStats stats = slrx::run_extract(config, offline);
    std::cerr << "wrote " << stats.records << " records to " << config.output_path.string()
              << " (" << stats.errors << " with errors)\n";
    return stats.errors > 0 ? kExitPartial : kExitOk;
}

int cmd_evaluate(const std::string& results, const std::string& annotations,
                 const std::string& out_dir) {
    slrx::run_evaluate(results, annotations, out_dir);
    std::cerr << "wrote report.json, kappa_matrix.csv, precision_recall.csv to " << out_dir
              << "\n";
    return kExitOk;
}

int cmd_chunks(const std::string& config_path, const std::string& doc_id) {
    slrx::RunConfig config = slrx::load_run_config(config_path);
    config.chunking.validate();
    auto documents = slrx::load_corpus(config.corpus_path);
    slrx::WhitespaceTokenizer tokenizer;
    for (const auto& doc : documents) {
        if (doc.doc_id != doc_id) continue;
        auto chunks = slrx::chunk_document(doc, config.chunking, tokenizer);
        auto tokens = tokenizer.tokenize(doc.text);
        for (const auto& chunk : chunks) {
            std::cout << "chunk " << chunk.chunk_index << ": tokens [" << chunk.token_start << ", "
                      << chunk.token_end << ") chars [" << tokens[chunk.token_start].char_start
                      << ", " << tokens[chunk.token_end - 1].char_end << ")\n";
        }
        return kExitOk;
    }
    throw slrx::ConfigError("document '" + doc_id + "' not found in corpus");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"retrieval-augmented structured data extraction for literature reviews", "slrx"};
    app.require_subcommand(1);

    std::string config_path;
    bool offline = false;
    std::vector<std::string> models;
    auto* extract = app.add_subcommand("extract", "run the extraction pipeline");
    extract->add_option("--config", config_path, "run configuration JSON")->required();
    extract->add_flag("--offline", offline, "use the hash embedder and a mock model (no network)");
    extract->add_option("--model", models, "override the configured model ids (repeatable)");

    std::string results_path, annotations_path, out_dir;
    auto* evaluate = app.add_subcommand("evaluate", "compare results against human annotations");
    evaluate->add_option("--results", results_path, "extraction results JSONL")->required();
    evaluate->add_option("--annotations", annotations_path, "annotations JSONL")->required();
    evaluate->add_option("--out", out_dir, "report output directory")->required();

    std::string chunks_config, chunks_doc;
    auto* chunks = app.add_subcommand("chunks", "print chunk spans for one document");
    chunks->add_option("--config", chunks_config, "run configuration JSON")->required();
    chunks->add_option("--doc", chunks_doc, "document id")->required();

    auto* version = app.add_subcommand("version", "print version and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);  // prints the message or help text
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (extract->parsed()) return cmd_extract(config_path, offline, models);
        if (evaluate->parsed()) return cmd_evaluate(results_path, annotations_path, out_dir);
        if (chunks->parsed()) return cmd_chunks(chunks_config, chunks_doc);
        if (version->parsed()) {
            std::cout << "slrx " << slrx::kVersion << "\n";
            return kExitOk;
        }
    } catch (const slrx::EvalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEval;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
