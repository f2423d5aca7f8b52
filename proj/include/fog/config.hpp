#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fog/archive.hpp"
#include "fog/error.hpp"
#include "fog/federated.hpp"
#include "fog/ingest.hpp"
#include "fog/model.hpp"
#include "fog/text.hpp"

namespace fog {

// Configuration files use a TOML subset: one `key = value` per line, optional
// `[section]` headers (one level), `#` comments, and values that are quoted
// strings (no escapes), integers, decimal reals, booleans, or arrays of
// quoted strings. Keys flatten to "section.key".
struct TomlValue {
    enum class Kind { string, integer, real, boolean, string_array };

    Kind kind = Kind::string;
    std::string str;
    std::int64_t integer = 0;
    double real = 0.0;
    bool boolean = false;
    std::vector<std::string> array;
};

struct TomlEntry {
    std::string key;
    TomlValue value;
    std::size_t line = 0;
};

namespace detail {

inline bool bare_key_ok(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_' || c == '-';
        if (!ok) return false;
    }
    return true;
}

// Removes a trailing comment. Quotes protect '#' inside string values.
inline std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

inline std::string unquote(std::string_view raw, std::size_t line_no) {
    if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') {
        throw BadConfig("line " + std::to_string(line_no) + ": string must be double-quoted");
    }
    auto body = raw.substr(1, raw.size() - 2);
    if (body.find('"') != std::string_view::npos) {
        throw BadConfig("line " + std::to_string(line_no) + ": embedded quotes not supported");
    }
    return std::string(body);
}

inline TomlValue parse_toml_value(std::string_view raw, std::size_t line_no) {
    TomlValue v;
    if (raw.empty()) throw BadConfig("line " + std::to_string(line_no) + ": empty value");
    if (raw.front() == '"') {
        v.kind = TomlValue::Kind::string;
        v.str = unquote(raw, line_no);
        return v;
    }
    if (raw == "true" || raw == "false") {
        v.kind = TomlValue::Kind::boolean;
        v.boolean = raw == "true";
        return v;
    }
    if (raw.front() == '[') {
        if (raw.back() != ']') {
            throw BadConfig("line " + std::to_string(line_no) + ": unterminated array");
        }
        v.kind = TomlValue::Kind::string_array;
        auto body = trim(raw.substr(1, raw.size() - 2));
        if (body.empty()) return v;
        for (auto cell : split_csv_line(body)) {
            v.array.push_back(unquote(trim(cell), line_no));
        }
        return v;
    }
    bool real_syntax = raw.find('.') != std::string_view::npos ||
                       raw.find('e') != std::string_view::npos ||
                       raw.find('E') != std::string_view::npos;
    if (real_syntax) {
        v.kind = TomlValue::Kind::real;
        auto end = raw.data() + raw.size();
        auto res = std::from_chars(raw.data(), end, v.real);
        if (res.ec != std::errc{} || res.ptr != end) {
            throw BadConfig("line " + std::to_string(line_no) + ": bad number \"" +
                            std::string(raw) + "\"");
        }
        return v;
    }
    v.kind = TomlValue::Kind::integer;
    auto end = raw.data() + raw.size();
    auto res = std::from_chars(raw.data(), end, v.integer);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw BadConfig("line " + std::to_string(line_no) + ": bad integer \"" +
                        std::string(raw) + "\"");
    }
    return v;
}

inline const char* toml_kind_name(TomlValue::Kind k) {
    switch (k) {
        case TomlValue::Kind::string: return "string";
        case TomlValue::Kind::integer: return "integer";
        case TomlValue::Kind::real: return "real";
        case TomlValue::Kind::boolean: return "boolean";
        case TomlValue::Kind::string_array: return "string array";
    }
    return "value";
}

}  // namespace detail

inline std::vector<TomlEntry> parse_toml(std::string_view text) {
    std::vector<TomlEntry> entries;
    std::string section;
    std::size_t line_no = 0;
    for (auto raw_line : split_lines(text)) {
        ++line_no;
        auto line = trim(detail::strip_comment(raw_line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw BadConfig("line " + std::to_string(line_no) + ": unterminated section");
            }
            auto name = trim(line.substr(1, line.size() - 2));
            if (!detail::bare_key_ok(name)) {
                throw BadConfig("line " + std::to_string(line_no) + ": bad section name \"" +
                                std::string(name) + "\"");
            }
            section = std::string(name);
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw BadConfig("line " + std::to_string(line_no) + ": expected key = value");
        }
        auto key = trim(line.substr(0, eq));
        if (!detail::bare_key_ok(key)) {
            throw BadConfig("line " + std::to_string(line_no) + ": bad key \"" +
                            std::string(key) + "\"");
        }
        TomlEntry e;
        e.key = section.empty() ? std::string(key) : section + "." + std::string(key);
        e.value = detail::parse_toml_value(trim(line.substr(eq + 1)), line_no);
        e.line = line_no;
        for (const auto& prior : entries) {
            if (prior.key == e.key) {
                throw BadConfig("line " + std::to_string(line_no) + ": duplicate key \"" +
                                e.key + "\"");
            }
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

// Everything one run needs: input/output locations, the root seed, split and
// windowing choices, image parameters, training hyperparameters, the channel
// combinations to train, and federated settings.
struct RunConfig {
    std::string data_dir;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    int repetitions = 3;

    int sample_rate_hz = 128;
    int downsample_factor = 1;
    int window_length = 256;
    double missing_tolerance = 0.0;
    SplitRatios split{};

    int image_size = 64;
    AngleSource angle_source = AngleSource::bipolar;

    std::vector<std::vector<std::string>> combinations = {{"AccV"}, {"AccML"}, {"AccAP"}};
    int epochs = 60;
    int batch_size = 64;
    double l2_lambda = 0.001;
    AdamConfig adam{};

    RoundConfig federated{};
};

namespace detail {

inline double real_of(const TomlEntry& e) {
    if (e.value.kind == TomlValue::Kind::real) return e.value.real;
    if (e.value.kind == TomlValue::Kind::integer) return static_cast<double>(e.value.integer);
    throw BadConfig("key \"" + e.key + "\" must be a number, got " +
                    toml_kind_name(e.value.kind));
}

inline std::int64_t int_of(const TomlEntry& e) {
    if (e.value.kind != TomlValue::Kind::integer) {
        throw BadConfig("key \"" + e.key + "\" must be an integer, got " +
                        toml_kind_name(e.value.kind));
    }
    return e.value.integer;
}

inline int bounded_int_of(const TomlEntry& e, std::int64_t lo, std::int64_t hi) {
    auto v = int_of(e);
    if (v < lo || v > hi) {
        throw BadConfig("key \"" + e.key + "\" must lie in [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "], got " + std::to_string(v));
    }
    return static_cast<int>(v);
}

inline std::string string_of(const TomlEntry& e) {
    if (e.value.kind != TomlValue::Kind::string) {
        throw BadConfig("key \"" + e.key + "\" must be a string, got " +
                        toml_kind_name(e.value.kind));
    }
    return e.value.str;
}

inline std::vector<std::string> string_array_of(const TomlEntry& e) {
    if (e.value.kind != TomlValue::Kind::string_array) {
        throw BadConfig("key \"" + e.key + "\" must be an array of strings, got " +
                        toml_kind_name(e.value.kind));
    }
    return e.value.array;
}

// A combination spells channel names joined by '+', e.g. "AccV+AccAP".
inline std::vector<std::string> parse_combination(const std::string& text) {
    std::vector<std::string> channels;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        auto plus = text.find('+', begin);
        auto name = trim(std::string_view(text).substr(
            begin, plus == std::string::npos ? text.size() - begin : plus - begin));
        if (name.empty()) throw BadConfig("empty channel name in combination \"" + text + "\"");
        channel_index(name);
        channels.emplace_back(name);
        if (plus == std::string::npos) break;
        begin = plus + 1;
    }
    return channels;
}

}  // namespace detail

inline void validate_run_config(const RunConfig& cfg) {
    if (cfg.repetitions < 1) throw BadConfig("repetitions must be at least 1");
    if (cfg.window_length < 2 || cfg.window_length % 2 != 0) {
        throw BadConfig("window_length must be even and positive");
    }
    if (cfg.downsample_factor < 1) throw BadConfig("downsample_factor must be at least 1");
    if (cfg.sample_rate_hz < 1) throw BadConfig("sample_rate_hz must be positive");
    if (cfg.missing_tolerance < 0.0 || cfg.missing_tolerance > 1.0) {
        throw BadConfig("missing_tolerance must lie in [0, 1]");
    }
    double ratio_sum = cfg.split.train + cfg.split.val + cfg.split.test;
    if (cfg.split.train < 0 || cfg.split.val < 0 || cfg.split.test < 0 ||
        std::abs(ratio_sum - 1.0) > 1e-9) {
        throw BadConfig("split fractions must be nonnegative and sum to 1");
    }
    if (cfg.combinations.empty()) throw BadConfig("at least one channel combination required");
    for (const auto& combo : cfg.combinations) {
        ModelConfig probe;
        probe.channels = combo;
        probe.epochs = cfg.epochs;
        probe.batch_size = cfg.batch_size;
        probe.l2_lambda = cfg.l2_lambda;
        probe.image_size = cfg.image_size;
        validate_model_config(probe);
    }
    validate_round_config(cfg.federated);
}

inline RunConfig run_config_from_entries(const std::vector<TomlEntry>& entries) {
    RunConfig cfg;
    for (const auto& e : entries) {
        if (e.key == "data_dir") {
            cfg.data_dir = detail::string_of(e);
        } else if (e.key == "out_dir") {
            cfg.out_dir = detail::string_of(e);
        } else if (e.key == "seed") {
            auto v = detail::int_of(e);
            if (v < 0) throw BadConfig("seed must be nonnegative");
            cfg.seed = static_cast<std::uint64_t>(v);
        } else if (e.key == "repetitions") {
            cfg.repetitions = detail::bounded_int_of(e, 1, 1000);
        } else if (e.key == "ingest.sample_rate_hz") {
            cfg.sample_rate_hz = detail::bounded_int_of(e, 1, 100000);
        } else if (e.key == "ingest.downsample_factor") {
            cfg.downsample_factor = detail::bounded_int_of(e, 1, 100000);
        } else if (e.key == "windowing.window_length") {
            cfg.window_length = detail::bounded_int_of(e, 2, 1 << 20);
        } else if (e.key == "windowing.missing_tolerance") {
            cfg.missing_tolerance = detail::real_of(e);
        } else if (e.key == "windowing.train_fraction") {
            cfg.split.train = detail::real_of(e);
        } else if (e.key == "windowing.val_fraction") {
            cfg.split.val = detail::real_of(e);
        } else if (e.key == "windowing.test_fraction") {
            cfg.split.test = detail::real_of(e);
        } else if (e.key == "gaf.image_size") {
            cfg.image_size = detail::bounded_int_of(e, 2, 4096);
        } else if (e.key == "gaf.angle_source") {
            cfg.angle_source = angle_source_from_name(detail::string_of(e));
        } else if (e.key == "model.combinations") {
            cfg.combinations.clear();
            for (const auto& combo : detail::string_array_of(e)) {
                cfg.combinations.push_back(detail::parse_combination(combo));
            }
        } else if (e.key == "model.epochs") {
            cfg.epochs = detail::bounded_int_of(e, 0, 100000);
        } else if (e.key == "model.batch_size") {
            cfg.batch_size = detail::bounded_int_of(e, 2, 1 << 20);
        } else if (e.key == "model.l2_lambda") {
            cfg.l2_lambda = detail::real_of(e);
        } else if (e.key == "model.learning_rate") {
            cfg.adam.lr = detail::real_of(e);
        } else if (e.key == "model.adam_beta1") {
            cfg.adam.beta1 = detail::real_of(e);
        } else if (e.key == "model.adam_beta2") {
            cfg.adam.beta2 = detail::real_of(e);
        } else if (e.key == "model.adam_eps") {
            cfg.adam.eps = detail::real_of(e);
        } else if (e.key == "federated.clients") {
            cfg.federated.num_clients = detail::bounded_int_of(e, 1, 100000);
        } else if (e.key == "federated.local_epochs") {
            cfg.federated.local_epochs = detail::bounded_int_of(e, 1, 100000);
        } else if (e.key == "federated.rounds") {
            cfg.federated.rounds = detail::bounded_int_of(e, 1, 100000);
        } else {
            throw BadConfig("unknown config key \"" + e.key + "\" (line " +
                            std::to_string(e.line) + ")");
        }
    }
    validate_run_config(cfg);
    return cfg;
}

inline RunConfig parse_run_config(std::string_view text) {
    return run_config_from_entries(parse_toml(text));
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = detail::read_file(path);
    } catch (const BadArchive& e) {
        throw BadConfig(std::string("config file: ") + e.what());
    }
    return parse_run_config(text);
}

// Training settings for one channel combination of one repetition. The
// repetition offset shifts the root seed so repetitions are independent runs.
inline ModelConfig model_config_for(const RunConfig& run, const std::vector<std::string>& combo,
                                    int repetition = 0) {
    ModelConfig cfg;
    cfg.channels = combo;
    cfg.epochs = run.epochs;
    cfg.batch_size = run.batch_size;
    cfg.l2_lambda = run.l2_lambda;
    cfg.seed = run.seed + static_cast<std::uint64_t>(repetition);
    cfg.angle_source = run.angle_source;
    cfg.image_size = run.image_size;
    cfg.adam = run.adam;
    validate_model_config(cfg);
    return cfg;
}

// A combination's file-system identity: channel names joined by '+' in the
// order given.
inline std::string combination_tag(const std::vector<std::string>& combo) {
    std::string tag;
    for (const auto& name : combo) {
        if (!tag.empty()) tag += '+';
        tag += name;
    }
    return tag;
}

}  // namespace fog
