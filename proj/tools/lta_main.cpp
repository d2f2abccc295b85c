#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "lta/errors.hpp"
#include "lta/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInputError = 2;
constexpr int kExitPartialGeneration = 3;

std::set<lta::CodeId> read_code_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw lta::ConfigError("cannot read code list " + path.string());
    std::set<lta::CodeId> codes;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        std::string token = line.substr(b, e - b + 1);
        if (token[0] == '#') continue;
        try {
            codes.insert(lta::CodeId::parse(token));
        } catch (const lta::InvalidCodeError& err) {
            throw lta::ParseError(std::string(err.what()) + " in " + path.string(), lineno);
        }
    }
    return codes;
}

int failures_to_exit_code(const std::vector<lta::StageOutcome>& outcomes) {
    for (const auto& o : outcomes)
        if (o.generation_failures > 0) return kExitPartialGeneration;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lta — long-tail clinical corpus augmentation pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool dry_run = false;
    app.add_option("--config", config_path, "pipeline config file (TOML)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--out-dir", out_dir, "override the output directory");
    app.add_flag("--dry-run", dry_run, "print stage totals without writing artifacts");

    auto* cmd_stats = app.add_subcommand("stats", "frequency and tier summary");

    auto* cmd_plan = app.add_subcommand("plan", "compute per-code synthetic budgets");
    std::optional<double> alpha;
    std::optional<int> max_per_code;
    std::optional<std::string> log_base, rounding, targets_file;
    cmd_plan->add_option("--alpha", alpha, "allocation intensity (> 0)");
    cmd_plan->add_option("--max-per-code", max_per_code, "budget cap per code (>= 1)");
    cmd_plan->add_option("--log-base", log_base, "natural|base10");
    cmd_plan->add_option("--rounding", rounding, "ceil|floor|nearest");
    cmd_plan->add_option("--targets", targets_file, "file with one target code per line");

    auto* cmd_codesets = app.add_subcommand("codesets", "build anchored code sets from the plan");

    auto* cmd_prompts = app.add_subcommand("prompts", "render knowledge-injected prompts");
    std::optional<std::string> template_path;
    cmd_prompts->add_option("--template", template_path, "prompt template file");

    auto* cmd_generate = app.add_subcommand("generate", "run the text generator over the prompts");
    std::optional<std::string> backend;
    cmd_generate->add_option("--backend", backend, "mock|http");

    auto* cmd_merge = app.add_subcommand("merge", "merge real and synthetic notes");
    auto* cmd_distribution =
        app.add_subcommand("distribution", "emit before/after sample-count histograms");

    auto* cmd_evaluate = app.add_subcommand("evaluate", "score predictions with the metric suite");
    std::optional<std::string> gold_path, scores_path, labels_path, macro_mode;
    std::optional<double> threshold;
    std::vector<std::size_t> ks;
    cmd_evaluate->add_option("--gold", gold_path, "gold labels JSONL");
    cmd_evaluate->add_option("--scores", scores_path, "prediction scores JSONL");
    cmd_evaluate->add_option("--labels", labels_path, "explicit label space, one code per line");
    cmd_evaluate->add_option("--ks", ks, "precision@K cut-offs")->delimiter(',');
    cmd_evaluate->add_option("--macro-mode", macro_mode, "full_label_space|gold_present");
    cmd_evaluate->add_option("--threshold", threshold, "F1 decision threshold in (0,1)");

    auto* cmd_run_all = app.add_subcommand("run-all", "chain every stage");
    std::optional<std::string> run_all_backend;
    cmd_run_all->add_option("--backend", run_all_backend, "mock|http");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        lta::PipelineConfig cfg = lta::PipelineConfig::from_file(config_path);
        if (seed) cfg.seed = *seed;
        if (out_dir) cfg.out_dir = *out_dir;
        if (alpha) cfg.allocation.alpha = *alpha;
        if (max_per_code) cfg.allocation.max_per_code = *max_per_code;
        if (log_base) cfg.allocation.log_base = lta::log_base_from_string(*log_base);
        if (rounding) cfg.allocation.rounding = lta::rounding_from_string(*rounding);
        if (template_path) cfg.template_path = *template_path;
        if (backend) cfg.backend = *backend;
        if (run_all_backend) cfg.backend = *run_all_backend;
        if (gold_path) cfg.gold_path = *gold_path;
        if (scores_path) cfg.scores_path = *scores_path;
        if (labels_path) cfg.labels_path = *labels_path;
        if (!ks.empty()) cfg.ks = ks;
        if (macro_mode) cfg.macro_mode = lta::macro_mode_from_string(*macro_mode);
        if (threshold) cfg.threshold = *threshold;
        if (cfg.backend != "mock" && cfg.backend != "http")
            throw lta::ConfigError("backend must be mock or http, got '" + cfg.backend + "'");
        cfg.validate_paths();

        lta::PipelineSession session(std::move(cfg));
        lta::StageOptions opts{dry_run, &std::cout};

        std::vector<lta::StageOutcome> outcomes;
        if (cmd_stats->parsed()) {
            outcomes.push_back(session.stats(opts));
        } else if (cmd_plan->parsed()) {
            std::optional<std::set<lta::CodeId>> targets;
            if (targets_file) targets = read_code_list(*targets_file);
            outcomes.push_back(session.plan(opts, targets));
        } else if (cmd_codesets->parsed()) {
            outcomes.push_back(session.codesets(opts));
        } else if (cmd_prompts->parsed()) {
            outcomes.push_back(session.prompts(opts));
        } else if (cmd_generate->parsed()) {
            outcomes.push_back(session.generate(opts));
        } else if (cmd_merge->parsed()) {
            outcomes.push_back(session.merge(opts));
        } else if (cmd_distribution->parsed()) {
            outcomes.push_back(session.distribution(opts));
        } else if (cmd_evaluate->parsed()) {
            outcomes.push_back(session.evaluate(opts));
        } else if (cmd_run_all->parsed()) {
            outcomes = session.run_all(opts);
        }
        return failures_to_exit_code(outcomes);
    } catch (const lta::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}
