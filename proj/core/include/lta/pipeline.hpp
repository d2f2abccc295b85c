#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lta/config.hpp"
#include "lta/corpus.hpp"
#include "lta/taxonomy.hpp"

namespace lta {

struct StageOptions {
    bool dry_run = false;
    std::ostream* log = nullptr;  // progress lines; null silences them
};

struct StageOutcome {
    std::string name;
    std::string summary;
    std::vector<std::filesystem::path> written;
    int generation_failures = 0;
};

/// Fixed artifact names inside the configured output directory.
struct ArtifactPaths {
    explicit ArtifactPaths(const std::filesystem::path& out_dir);
    std::filesystem::path stats, plan, codesets, codesets_skipped, prompts, generated,
        generation_failures, extended, distribution, metrics, run_summary;
};

/// Runs pipeline stages against one config. Taxonomy and corpus loads are
/// cached per session; stage artifacts always round-trip through their files
/// so chained runs match stage-by-stage runs byte for byte.
class PipelineSession {
public:
    explicit PipelineSession(PipelineConfig cfg);

    const PipelineConfig& config() const { return cfg_; }
    PipelineConfig& config() { return cfg_; }
    const Taxonomy& taxonomy();
    const Corpus& corpus();

    StageOutcome stats(const StageOptions& opts = {});
    StageOutcome plan(const StageOptions& opts = {},
                      const std::optional<std::set<CodeId>>& targets = std::nullopt);
    StageOutcome codesets(const StageOptions& opts = {});
    StageOutcome prompts(const StageOptions& opts = {});
    StageOutcome generate(const StageOptions& opts = {});
    StageOutcome merge(const StageOptions& opts = {});
    StageOutcome distribution(const StageOptions& opts = {});
    StageOutcome evaluate(const StageOptions& opts = {});

    /// Chain every stage; evaluate only runs when gold and scores paths are
    /// configured. Writes a run summary and returns all stage outcomes.
    std::vector<StageOutcome> run_all(const StageOptions& opts = {});

private:
    ArtifactPaths artifacts() const { return ArtifactPaths(cfg_.out_dir); }

    PipelineConfig cfg_;
    std::optional<Taxonomy> taxonomy_;
    std::optional<Corpus> corpus_;
};

/// Slurp a file; throws ConfigError when it cannot be read.
std::string read_file(const std::filesystem::path& path);
/// Write atomically-enough for this toolkit (tmp file + rename).
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace lta
