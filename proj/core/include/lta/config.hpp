#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lta/evalkit.hpp"
#include "lta/generation.hpp"
#include "lta/planner.hpp"
#include "lta/prompting.hpp"

namespace lta {

/// Minimal TOML reader covering the subset this toolkit's config files use:
/// [section] tables, string/integer/float/boolean scalars and flat arrays of
/// scalars, with '#' comments. Keys are exposed flattened as "section.key".
class TomlTable {
public:
    struct Value {
        enum class Kind { string, integer, real, boolean, array } kind = Kind::string;
        std::string str;
        std::int64_t integer = 0;
        double real = 0.0;
        bool boolean = false;
        std::vector<Value> items;
    };

    static TomlTable parse(std::string_view text);

    bool has(const std::string& key) const;

    std::optional<std::string> get_string(const std::string& key) const;
    std::optional<std::int64_t> get_int(const std::string& key) const;
    std::optional<double> get_double(const std::string& key) const;  // accepts integers
    std::optional<bool> get_bool(const std::string& key) const;
    std::optional<std::vector<std::int64_t>> get_int_array(const std::string& key) const;

    const std::map<std::string, std::string>& raw() const { return display_; }

private:
    const Value* find(const std::string& key) const;

    std::map<std::string, Value> values_;
    std::map<std::string, std::string> display_;  // for diagnostics
};

/// Everything the pipeline stages need, loaded from one TOML file. Paths are
/// resolved relative to the config file's directory.
struct PipelineConfig {
    std::filesystem::path taxonomy_path;
    std::filesystem::path corpus_path;
    std::filesystem::path template_path;  // empty -> built-in default template
    std::filesystem::path out_dir = "out";

    std::optional<std::uint64_t> seed;

    AllocationParams allocation;
    PromptConfig prompt;

    std::string backend = "mock";
    DecodeParams decode;
    AlignmentGate gate;
    ConcurrencyConfig concurrency;

    std::optional<std::filesystem::path> gold_path;
    std::optional<std::filesystem::path> scores_path;
    std::optional<std::filesystem::path> labels_path;
    std::vector<std::size_t> ks = {8, 15};
    MacroMode macro_mode = MacroMode::full_label_space;
    double threshold = 0.5;

    static PipelineConfig from_file(const std::filesystem::path& path);
    static PipelineConfig from_toml(const TomlTable& table, const std::filesystem::path& base_dir);

    /// Input files must exist; out_dir need not.
    void validate_paths() const;

    std::uint64_t require_seed() const;
};

}  // namespace lta
