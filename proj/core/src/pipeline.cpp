#include "lta/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lta/anchoring.hpp"
#include "lta/errors.hpp"
#include "lta/evalkit.hpp"
#include "lta/generation.hpp"
#include "lta/planner.hpp"
#include "lta/prompting.hpp"

namespace lta {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw ConfigError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

ArtifactPaths::ArtifactPaths(const std::filesystem::path& out_dir)
    : stats(out_dir / "stats.json"),
      plan(out_dir / "plan.json"),
      codesets(out_dir / "codesets.jsonl"),
      codesets_skipped(out_dir / "codesets_skipped.json"),
      prompts(out_dir / "prompts.jsonl"),
      generated(out_dir / "generated.jsonl"),
      generation_failures(out_dir / "generation_failures.jsonl"),
      extended(out_dir / "extended.jsonl"),
      distribution(out_dir / "distribution.csv"),
      metrics(out_dir / "metrics.json"),
      run_summary(out_dir / "run_summary.json") {}

PipelineSession::PipelineSession(PipelineConfig cfg) : cfg_(std::move(cfg)) {}

const Taxonomy& PipelineSession::taxonomy() {
    if (!taxonomy_) {
        if (cfg_.taxonomy_path.empty()) throw ConfigError("config lacks a taxonomy path");
        try {
            taxonomy_ = parse_taxonomy(read_file(cfg_.taxonomy_path));
        } catch (const ParseError& e) {
            throw ConfigError(cfg_.taxonomy_path.string() + ": " + e.what());
        }
    }
    return *taxonomy_;
}

const Corpus& PipelineSession::corpus() {
    if (!corpus_) {
        if (cfg_.corpus_path.empty()) throw ConfigError("config lacks a corpus path");
        try {
            corpus_ = load_corpus(read_file(cfg_.corpus_path));
        } catch (const ParseError& e) {
            throw ConfigError(cfg_.corpus_path.string() + ": " + e.what());
        }
    }
    return *corpus_;
}

namespace {

void log_line(const StageOptions& opts, const std::string& line) {
    if (opts.log) (*opts.log) << line << '\n';
}

StageOutcome make_outcome(const StageOptions& opts, std::string name, std::string summary) {
    StageOutcome o;
    o.name = std::move(name);
    o.summary = std::move(summary);
    log_line(opts, o.name + ": " + o.summary + (opts.dry_run ? " [dry-run]" : ""));
    return o;
}

}  // namespace

StageOutcome PipelineSession::stats(const StageOptions& opts) {
    const Taxonomy& t = taxonomy();
    const Corpus& c = corpus();

    std::set<CodeId> universe;
    for (const auto& [code, card] : t.cards()) universe.insert(code);
    for (const auto& [code, n] : c.freq_index()) universe.insert(code);

    std::map<Tier, std::pair<std::uint64_t, std::uint64_t>> per_tier;  // codes, occurrences
    std::size_t zero_shot = 0;
    std::size_t outside_taxonomy = 0;
    for (const CodeId& code : universe) {
        const std::uint32_t n = c.freq(code);
        auto& [codes, occ] = per_tier[stratify(n)];
        ++codes;
        occ += n;
        if (n == 0) ++zero_shot;
        if (!t.contains(code)) ++outside_taxonomy;
    }

    json tiers = json::object();
    for (const Tier tier : {Tier::head, Tier::medium, Tier::tail, Tier::ultra_tail}) {
        const auto [codes, occ] = per_tier.count(tier) ? per_tier[tier] : std::pair<std::uint64_t, std::uint64_t>{0, 0};
        tiers[std::string(to_string(tier))] = {{"codes", codes}, {"occurrences", occ}};
    }
    json doc{{"schema_version", 1},
             {"tiers", std::move(tiers)},
             {"universe_codes", universe.size()},
             {"taxonomy_codes", t.size()},
             {"corpus_notes", c.size()},
             {"zero_shot_codes", zero_shot},
             {"codes_outside_taxonomy", outside_taxonomy}};

    for (const Tier tier : {Tier::head, Tier::medium, Tier::tail, Tier::ultra_tail}) {
        const auto [codes, occ] = per_tier.count(tier) ? per_tier[tier] : std::pair<std::uint64_t, std::uint64_t>{0, 0};
        log_line(opts, "  " + std::string(to_string(tier)) + ": " + std::to_string(codes) +
                           " codes, " + std::to_string(occ) + " occurrences");
    }

    StageOutcome o = make_outcome(opts, "stats",
                                  std::to_string(universe.size()) + " codes over " +
                                      std::to_string(c.size()) + " notes (" +
                                      std::to_string(zero_shot) + " zero-shot)");
    if (!opts.dry_run) {
        write_file(artifacts().stats, doc.dump(2) + "\n");
        o.written.push_back(artifacts().stats);
    }
    return o;
}

StageOutcome PipelineSession::plan(const StageOptions& opts,
                                   const std::optional<std::set<CodeId>>& targets) {
    AllocationPlan plan = build_plan(corpus(), taxonomy(), cfg_.allocation, targets);
    StageOutcome o = make_outcome(opts, "plan",
                                  std::to_string(plan.covered_codes()) + " codes budgeted for " +
                                      std::to_string(plan.total_notes()) + " synthetic notes");
    if (!opts.dry_run) {
        write_file(artifacts().plan, plan_to_json(plan));
        o.written.push_back(artifacts().plan);
    }
    return o;
}

StageOutcome PipelineSession::codesets(const StageOptions& opts) {
    const ArtifactPaths paths = artifacts();
    if (!std::filesystem::exists(paths.plan))
        throw ConfigError("missing plan file " + paths.plan.string() + "; run the plan stage first");
    const AllocationPlan plan = plan_from_json(read_file(paths.plan));
    const CodesetBatch batch = build_codesets(plan, corpus(), taxonomy(), cfg_.require_seed());

    StageOutcome o = make_outcome(opts, "codesets",
                                  std::to_string(batch.codesets.size()) + " code sets (" +
                                      std::to_string(batch.skipped.size()) + " codes skipped)");
    if (!opts.dry_run) {
        write_file(paths.codesets, codesets_to_jsonl(batch));
        write_file(paths.codesets_skipped, skipped_to_json(batch.skipped));
        o.written = {paths.codesets, paths.codesets_skipped};
    }
    return o;
}

StageOutcome PipelineSession::prompts(const StageOptions& opts) {
    const ArtifactPaths paths = artifacts();
    if (!std::filesystem::exists(paths.codesets))
        throw ConfigError("missing codesets file " + paths.codesets.string() +
                          "; run the codesets stage first");
    const CodesetBatch batch = codesets_from_jsonl(read_file(paths.codesets));

    std::string template_text;
    std::string template_id;
    if (cfg_.template_path.empty()) {
        template_text = default_template();
        template_id = "builtin-default";
    } else {
        template_text = read_file(cfg_.template_path);
        template_id = cfg_.template_path.stem().string();
    }

    std::vector<PromptRow> rows;
    rows.reserve(batch.codesets.size());
    for (const AnchoredCodeSet& cs : batch.codesets) {
        PromptBundle bundle = build_prompt(cs, taxonomy(), corpus(), cfg_.prompt);
        PromptRow row;
        row.anchor = cs.anchor;
        row.codes.assign(cs.codes.begin(), cs.codes.end());
        row.prompt = render_prompt(bundle, template_text, cfg_.prompt);
        row.template_id = template_id;
        rows.push_back(std::move(row));
    }

    StageOutcome o = make_outcome(opts, "prompts",
                                  std::to_string(rows.size()) + " prompts rendered with template '" +
                                      template_id + "'");
    if (!opts.dry_run) {
        write_file(paths.prompts, prompts_to_jsonl(rows));
        o.written.push_back(paths.prompts);
    }
    return o;
}

StageOutcome PipelineSession::generate(const StageOptions& opts) {
    const ArtifactPaths paths = artifacts();
    if (!std::filesystem::exists(paths.prompts))
        throw ConfigError("missing prompts file " + paths.prompts.string() +
                          "; run the prompts stage first");
    if (!std::filesystem::exists(paths.codesets))
        throw ConfigError("missing codesets file " + paths.codesets.string() +
                          "; run the codesets stage first");

    const std::vector<PromptRow> rows = prompts_from_jsonl(read_file(paths.prompts));
    const CodesetBatch batch = codesets_from_jsonl(read_file(paths.codesets));
    if (rows.size() != batch.codesets.size())
        throw SchemaError("prompts (" + std::to_string(rows.size()) + ") and codesets (" +
                          std::to_string(batch.codesets.size()) + ") do not align");
    std::vector<std::string> prompt_texts;
    prompt_texts.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].anchor != batch.codesets[i].anchor)
            throw SchemaError("prompts and codesets disagree at row " + std::to_string(i + 1) +
                              ": " + rows[i].anchor.display() + " vs " +
                              batch.codesets[i].anchor.display());
        prompt_texts.push_back(rows[i].prompt);
    }

    if (opts.dry_run)
        return make_outcome(opts, "generate",
                            "would generate " + std::to_string(rows.size()) + " notes via " +
                                cfg_.backend + " backend");

    std::unique_ptr<GeneratorBackend> backend;
    if (cfg_.backend == "mock") {
        backend = std::make_unique<MockBackend>(cfg_.require_seed());
    } else {
        const char* url = std::getenv("LTA_API_URL");
        const char* key = std::getenv("LTA_API_KEY");
        if (!url || !*url)
            throw ConfigError("http backend requires the LTA_API_URL environment variable");
        backend = std::make_unique<HttpBackend>(url, key ? key : "", cfg_.concurrency.timeout);
    }

    BatchResult result = run_batch(prompt_texts, batch.codesets, *backend, cfg_.concurrency,
                                   cfg_.gate, cfg_.decode, taxonomy());

    StageOutcome o = make_outcome(opts, "generate",
                                  std::to_string(result.notes.size()) + " notes generated, " +
                                      std::to_string(result.failures.size()) + " failures");
    write_file(paths.generated, synthetic_notes_to_jsonl(result.notes));
    write_file(paths.generation_failures, failures_to_jsonl(result.failures));
    o.written = {paths.generated, paths.generation_failures};
    o.generation_failures = static_cast<int>(result.failures.size());
    return o;
}

StageOutcome PipelineSession::merge(const StageOptions& opts) {
    const ArtifactPaths paths = artifacts();
    if (!std::filesystem::exists(paths.generated))
        throw ConfigError("missing generated notes file " + paths.generated.string() +
                          "; run the generate stage first");
    const std::vector<SyntheticNote> synthetic =
        synthetic_notes_from_jsonl(read_file(paths.generated));
    std::vector<Note> notes;
    notes.reserve(synthetic.size());
    for (const SyntheticNote& sn : synthetic) notes.push_back(sn.note);

    const Corpus extended = merge_corpus(corpus(), notes);
    StageOutcome o = make_outcome(opts, "merge",
                                  std::to_string(corpus().size()) + " real + " +
                                      std::to_string(notes.size()) + " synthetic = " +
                                      std::to_string(extended.size()) + " notes");
    if (!opts.dry_run) {
        write_file(paths.extended, notes_to_jsonl(extended.notes()));
        o.written.push_back(paths.extended);
    }
    return o;
}

StageOutcome PipelineSession::distribution(const StageOptions& opts) {
    const ArtifactPaths paths = artifacts();
    if (!std::filesystem::exists(paths.extended))
        throw ConfigError("missing extended corpus " + paths.extended.string() +
                          "; run the merge stage first");
    const Corpus extended = load_corpus(read_file(paths.extended));
    const auto rows = emit_distribution(corpus(), extended, BinningSpec{});

    StageOutcome o = make_outcome(opts, "distribution",
                                  std::to_string(rows.size()) + " histogram rows");
    if (!opts.dry_run) {
        write_file(paths.distribution, distribution_to_csv(rows));
        o.written.push_back(paths.distribution);
    }
    return o;
}

namespace {

std::vector<CodeId> parse_label_file(const std::string& content) {
    std::vector<CodeId> labels;
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        std::string token = line.substr(b, e - b + 1);
        if (token.empty() || token[0] == '#') continue;
        try {
            labels.push_back(CodeId::parse(token));
        } catch (const InvalidCodeError& err) {
            throw ParseError(err.what(), lineno);
        }
    }
    return labels;
}

}  // namespace

StageOutcome PipelineSession::evaluate(const StageOptions& opts) {
    if (!cfg_.gold_path || !cfg_.scores_path)
        throw ConfigError("evaluate requires gold and scores paths (config [evaluate] or flags)");

    auto gold_samples = gold_from_jsonl(read_file(*cfg_.gold_path));
    auto score_samples = score_samples_from_jsonl(read_file(*cfg_.scores_path));

    std::vector<CodeId> label_space;
    if (cfg_.labels_path) {
        label_space = parse_label_file(read_file(*cfg_.labels_path));
    } else {
        // Default: taxonomy plus anything observed in the gold/score files.
        std::set<CodeId> space;
        for (const auto& [code, card] : taxonomy().cards()) space.insert(code);
        for (const auto& [id, gold] : gold_samples) space.insert(gold.begin(), gold.end());
        for (const auto& sample : score_samples)
            for (const auto& [code, v] : sample.scores) space.insert(code);
        label_space.assign(space.begin(), space.end());
    }

    const GoldMatrix gold = make_gold_matrix(std::move(gold_samples), std::move(label_space));
    const ScoreMatrix scores = make_score_matrix(std::move(score_samples), gold, cfg_.threshold);

    std::map<CodeId, Tier> tiers;
    for (const CodeId& label : gold.label_space) tiers[label] = stratify(corpus().freq(label));

    const MetricReport report = lta::evaluate(gold, scores, tiers, cfg_.ks, cfg_.macro_mode);

    std::ostringstream summary;
    summary << gold.samples.size() << " samples, " << gold.label_space.size() << " labels"
            << "; f1_micro=" << report.f1_micro << " f1_macro=" << report.f1_macro;
    StageOutcome o = make_outcome(opts, "evaluate", summary.str());
    if (!opts.dry_run) {
        write_file(artifacts().metrics, report_to_json(report));
        o.written.push_back(artifacts().metrics);
    }
    return o;
}

std::vector<StageOutcome> PipelineSession::run_all(const StageOptions& opts) {
    std::vector<StageOutcome> outcomes;
    outcomes.push_back(stats(opts));
    outcomes.push_back(plan(opts));
    outcomes.push_back(codesets(opts));
    outcomes.push_back(prompts(opts));
    outcomes.push_back(generate(opts));
    if (!opts.dry_run) {
        outcomes.push_back(merge(opts));
        outcomes.push_back(distribution(opts));
        if (cfg_.gold_path && cfg_.scores_path) outcomes.push_back(evaluate(opts));
    } else {
        log_line(opts, "merge/distribution: skipped in dry-run (no generated artifacts)");
    }

    if (!opts.dry_run) {
        json stages = json::array();
        int failures = 0;
        for (const StageOutcome& o : outcomes) {
            json files = json::array();
            for (const auto& p : o.written) files.push_back(p.filename().string());
            stages.push_back({{"name", o.name}, {"summary", o.summary}, {"files", std::move(files)}});
            failures += o.generation_failures;
        }
        json doc{{"schema_version", 1}, {"stages", std::move(stages)},
                 {"generation_failures", failures}};
        write_file(artifacts().run_summary, doc.dump(2) + "\n");
    }
    return outcomes;
}

}  // namespace lta
