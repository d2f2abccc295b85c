#include "lta/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "lta/errors.hpp"

namespace lta {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool valid_key(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-' || c == '.';
    });
}

}  // namespace

const TomlTable::Value* TomlTable::find(const std::string& key) const {
    auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
}

bool TomlTable::has(const std::string& key) const { return values_.count(key) > 0; }

std::optional<std::string> TomlTable::get_string(const std::string& key) const {
    const Value* v = find(key);
    if (!v) return std::nullopt;
    if (v->kind != Value::Kind::string)
        throw ConfigError("config key '" + key + "' must be a string");
    return v->str;
}

std::optional<std::int64_t> TomlTable::get_int(const std::string& key) const {
    const Value* v = find(key);
    if (!v) return std::nullopt;
    if (v->kind != Value::Kind::integer)
        throw ConfigError("config key '" + key + "' must be an integer");
    return v->integer;
}

std::optional<double> TomlTable::get_double(const std::string& key) const {
    const Value* v = find(key);
    if (!v) return std::nullopt;
    if (v->kind == Value::Kind::integer) return static_cast<double>(v->integer);
    if (v->kind != Value::Kind::real)
        throw ConfigError("config key '" + key + "' must be a number");
    return v->real;
}

std::optional<bool> TomlTable::get_bool(const std::string& key) const {
    const Value* v = find(key);
    if (!v) return std::nullopt;
    if (v->kind != Value::Kind::boolean)
        throw ConfigError("config key '" + key + "' must be true or false");
    return v->boolean;
}

std::optional<std::vector<std::int64_t>> TomlTable::get_int_array(const std::string& key) const {
    const Value* v = find(key);
    if (!v) return std::nullopt;
    if (v->kind != Value::Kind::array)
        throw ConfigError("config key '" + key + "' must be an array");
    std::vector<std::int64_t> out;
    for (const Value& item : v->items) {
        if (item.kind != Value::Kind::integer)
            throw ConfigError("config key '" + key + "' must contain only integers");
        out.push_back(item.integer);
    }
    return out;
}

namespace {

struct ParsedToml {
    std::map<std::string, TomlTable::Value> values;
    std::map<std::string, std::string> display;
};

ParsedToml parse_impl(std::string_view text);

}  // namespace

namespace {

TomlTable::Value parse_scalar(const std::string& token, std::size_t lineno);

std::string strip_comment(std::string_view line) {
    std::string out;
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (c == '#' && !in_string) break;
        out += c;
    }
    return out;
}

std::string parse_string_token(const std::string& token, std::size_t lineno) {
    if (token.size() < 2 || token.back() != '"')
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < token.size(); ++i) {
        char c = token[i];
        if (c == '\\') {
            if (i + 2 >= token.size())
                throw ConfigError("line " + std::to_string(lineno) + ": dangling escape");
            char esc = token[++i];
            switch (esc) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default:
                    throw ConfigError("line " + std::to_string(lineno) +
                                      ": unsupported escape \\" + std::string(1, esc));
            }
        } else {
            out += c;
        }
    }
    return out;
}

std::vector<std::string> split_array_items(const std::string& inner, std::size_t lineno) {
    std::vector<std::string> items;
    std::string cur;
    bool in_string = false;
    for (std::size_t i = 0; i < inner.size(); ++i) {
        char c = inner[i];
        if (c == '"' && (i == 0 || inner[i - 1] != '\\')) in_string = !in_string;
        if (c == ',' && !in_string) {
            items.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (in_string) throw ConfigError("line " + std::to_string(lineno) + ": unterminated string");
    std::string last = trim(cur);
    if (!last.empty()) items.push_back(std::move(last));
    return items;
}

TomlTable::Value parse_scalar(const std::string& token, std::size_t lineno) {
    TomlTable::Value v{};
    if (token.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": missing value");
    if (token.front() == '"') {
        v.kind = TomlTable::Value::Kind::string;
        v.str = parse_string_token(token, lineno);
        return v;
    }
    if (token == "true" || token == "false") {
        v.kind = TomlTable::Value::Kind::boolean;
        v.boolean = token == "true";
        return v;
    }
    // Number: integer when it survives a full stoll parse, float otherwise.
    try {
        std::size_t used = 0;
        if (token.find_first_of(".eE") == std::string::npos) {
            std::int64_t i = std::stoll(token, &used);
            if (used == token.size()) {
                v.kind = TomlTable::Value::Kind::integer;
                v.integer = i;
                return v;
            }
        } else {
            double d = std::stod(token, &used);
            if (used == token.size()) {
                v.kind = TomlTable::Value::Kind::real;
                v.real = d;
                return v;
            }
        }
    } catch (const std::exception&) {
        // fall through to the error below
    }
    throw ConfigError("line " + std::to_string(lineno) + ": cannot parse value '" + token + "'");
}

ParsedToml parse_impl(std::string_view text) {
    ParsedToml table;
    std::string section;
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string line = strip_comment(text.substr(start, end - start));
        const bool last = end == text.size();
        start = end + 1;
        ++lineno;
        std::string t = trim(line);
        if (t.empty()) {
            if (last) break;
            continue;
        }

        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (!valid_key(section))
                throw ConfigError("line " + std::to_string(lineno) + ": bad section name '" +
                                  section + "'");
            if (last) break;
            continue;
        }

        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (!valid_key(key))
            throw ConfigError("line " + std::to_string(lineno) + ": bad key '" + key + "'");
        std::string full_key = section.empty() ? key : section + "." + key;

        TomlTable::Value v{};
        if (!value.empty() && value.front() == '[') {
            if (value.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": unterminated array");
            v.kind = TomlTable::Value::Kind::array;
            for (const std::string& item :
                 split_array_items(value.substr(1, value.size() - 2), lineno))
                v.items.push_back(parse_scalar(item, lineno));
        } else {
            v = parse_scalar(value, lineno);
        }

        if (!table.values.emplace(full_key, std::move(v)).second)
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + full_key +
                              "'");
        table.display[full_key] = value;
        if (last) break;
    }
    return table;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

TomlTable TomlTable::parse(std::string_view text) {
    ParsedToml parsed = parse_impl(text);
    TomlTable table;
    table.values_ = std::move(parsed.values);
    table.display_ = std::move(parsed.display);
    return table;
}

PipelineConfig PipelineConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return from_toml(TomlTable::parse(buf.str()), path.parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

PipelineConfig PipelineConfig::from_toml(const TomlTable& t, const std::filesystem::path& base) {
    PipelineConfig cfg;

    if (auto v = t.get_string("paths.taxonomy")) cfg.taxonomy_path = resolve(base, *v);
    if (auto v = t.get_string("paths.corpus")) cfg.corpus_path = resolve(base, *v);
    if (auto v = t.get_string("paths.template")) cfg.template_path = resolve(base, *v);
    if (auto v = t.get_string("paths.out_dir")) cfg.out_dir = resolve(base, *v);

    if (auto v = t.get_int("seed")) {
        if (*v < 0) throw ConfigError("seed must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(*v);
    }

    if (auto v = t.get_double("allocation.alpha")) cfg.allocation.alpha = *v;
    if (auto v = t.get_int("allocation.max_per_code"))
        cfg.allocation.max_per_code = static_cast<int>(*v);
    if (auto v = t.get_string("allocation.log_base"))
        cfg.allocation.log_base = log_base_from_string(*v);
    if (auto v = t.get_string("allocation.rounding"))
        cfg.allocation.rounding = rounding_from_string(*v);
    cfg.allocation.validate();

    if (auto v = t.get_int("prompt.max_excerpts"))
        cfg.prompt.max_excerpts = static_cast<std::size_t>(*v);
    if (auto v = t.get_int("prompt.excerpt_chars"))
        cfg.prompt.excerpt_chars = static_cast<std::size_t>(*v);
    if (auto v = t.get_int("prompt.max_prompt_chars"))
        cfg.prompt.max_prompt_chars = static_cast<std::size_t>(*v);
    if (auto v = t.get_bool("prompt.exclude_source")) cfg.prompt.exclude_source = *v;
    if (auto v = t.get_string("prompt.instructions")) cfg.prompt.instructions = *v;

    if (auto v = t.get_string("generation.backend")) {
        if (*v != "mock" && *v != "http")
            throw ConfigError("generation.backend must be mock or http, got '" + *v + "'");
        cfg.backend = *v;
    }
    if (auto v = t.get_double("generation.temperature")) cfg.decode.temperature = *v;
    if (auto v = t.get_int("generation.max_tokens")) cfg.decode.max_tokens = static_cast<int>(*v);
    if (auto v = t.get_double("generation.min_alignment")) cfg.gate.min_alignment = *v;
    if (auto v = t.get_int("generation.max_regen")) cfg.gate.max_regen = static_cast<int>(*v);
    if (auto v = t.get_int("generation.max_in_flight"))
        cfg.concurrency.max_in_flight = static_cast<int>(*v);
    if (auto v = t.get_int("generation.timeout_ms"))
        cfg.concurrency.timeout = std::chrono::milliseconds(*v);
    if (auto v = t.get_int("generation.base_delay_ms"))
        cfg.concurrency.retry.base_delay = std::chrono::milliseconds(*v);
    if (auto v = t.get_int("generation.max_retries"))
        cfg.concurrency.retry.max_retries = static_cast<int>(*v);

    if (auto v = t.get_string("evaluate.gold")) cfg.gold_path = resolve(base, *v);
    if (auto v = t.get_string("evaluate.scores")) cfg.scores_path = resolve(base, *v);
    if (auto v = t.get_string("evaluate.labels")) cfg.labels_path = resolve(base, *v);
    if (auto v = t.get_int_array("evaluate.ks")) {
        cfg.ks.clear();
        for (std::int64_t k : *v) {
            if (k < 1) throw ConfigError("evaluate.ks entries must be >= 1");
            cfg.ks.push_back(static_cast<std::size_t>(k));
        }
    }
    if (auto v = t.get_string("evaluate.macro_mode")) cfg.macro_mode = macro_mode_from_string(*v);
    if (auto v = t.get_double("evaluate.threshold")) cfg.threshold = *v;

    return cfg;
}

void PipelineConfig::validate_paths() const {
    auto must_exist = [](const std::filesystem::path& p, const char* what) {
        if (p.empty()) throw ConfigError(std::string("config lacks a ") + what + " path");
        if (!std::filesystem::exists(p))
            throw ConfigError(std::string(what) + " file not found: " + p.string());
    };
    must_exist(taxonomy_path, "taxonomy");
    must_exist(corpus_path, "corpus");
    if (!template_path.empty() && !std::filesystem::exists(template_path))
        throw ConfigError("template file not found: " + template_path.string());
}

std::uint64_t PipelineConfig::require_seed() const {
    if (!seed)
        throw ConfigError("a seed is required for this stage; set `seed` in the config or pass --seed");
    return *seed;
}

}  // namespace lta
