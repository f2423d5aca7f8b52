#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fog/error.hpp"
#include "fog/rng.hpp"
#include "fog/text.hpp"

namespace fog {

inline constexpr std::array<std::string_view, 3> kChannelNames = {"AccV", "AccML", "AccAP"};

inline int channel_index(std::string_view name) {
    for (int i = 0; i < 3; ++i) {
        if (kChannelNames[i] == name) return i;
    }
    throw BadConfig("unknown channel name: " + std::string(name));
}
inline constexpr std::array<std::string_view, 3> kEventNames = {"StartHesitation", "Turn",
                                                                "Walking"};

// One accelerometer axis. values[i] is NaN exactly where missing[i] is set;
// downstream consumers treat a channel with any missing sample in a window
// as non-functional.
struct ChannelSeries {
    std::vector<double> values;
    std::vector<std::uint8_t> missing;

    std::size_t size() const { return values.size(); }
    bool any_missing() const {
        return std::find(missing.begin(), missing.end(), std::uint8_t{1}) != missing.end();
    }
};

// Parsed sensor session before label consolidation. All sequences share one
// length; channels are indexed in kChannelNames order.
struct RawRecording {
    std::string subject_id;
    int sample_rate_hz = 0;
    std::vector<std::int64_t> time_index;
    std::array<ChannelSeries, 3> channels;
    std::array<std::vector<std::uint8_t>, 3> event_tracks;

    std::size_t size() const { return time_index.size(); }
};

// Session with the three event annotations collapsed into one binary
// freeze/no-freeze label per sample.
struct LabeledRecording {
    std::string subject_id;
    int sample_rate_hz = 0;
    std::array<ChannelSeries, 3> channels;
    std::vector<std::uint8_t> label;

    std::size_t size() const { return label.size(); }
};

inline constexpr std::string_view kCsvHeader =
    "Time,AccV,AccML,AccAP,StartHesitation,Turn,Walking";

// Parses one session CSV. The header must name all seven columns; cells are
// plain decimals; an empty accelerometer cell marks that sample missing for
// that channel only.
inline RawRecording parse_recording(std::string_view csv_text, std::string_view subject_id,
                                    int sample_rate_hz = 128) {
    auto lines = split_lines(csv_text);
    if (lines.empty()) throw EmptyRecording(std::string(subject_id));

    auto header = split_csv_line(lines[0]);
    for (auto& cell : header) cell = trim(cell);

    auto column_of = [&](std::string_view name) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw MissingColumn("header is missing column \"" + std::string(name) + "\"");
    };
    std::size_t time_col = column_of("Time");
    std::array<std::size_t, 3> channel_col{};
    std::array<std::size_t, 3> event_col{};
    for (std::size_t c = 0; c < 3; ++c) channel_col[c] = column_of(kChannelNames[c]);
    for (std::size_t e = 0; e < 3; ++e) event_col[e] = column_of(kEventNames[e]);

    if (lines.size() < 2) throw EmptyRecording(std::string(subject_id));

    RawRecording rec;
    rec.subject_id = std::string(subject_id);
    rec.sample_rate_hz = sample_rate_hz;
    std::size_t n_rows = lines.size() - 1;
    rec.time_index.reserve(n_rows);
    for (auto& ch : rec.channels) {
        ch.values.reserve(n_rows);
        ch.missing.reserve(n_rows);
    }
    for (auto& track : rec.event_tracks) track.reserve(n_rows);

    for (std::size_t r = 1; r < lines.size(); ++r) {
        auto cells = split_csv_line(lines[r]);
        if (cells.size() != header.size()) {
            throw RaggedRows("row " + std::to_string(r) + " has " + std::to_string(cells.size()) +
                             " cells, header has " + std::to_string(header.size()));
        }
        rec.time_index.push_back(parse_int(trim(cells[time_col]), "Time"));
        if (rec.time_index.size() >= 2 &&
            rec.time_index.back() <= rec.time_index[rec.time_index.size() - 2]) {
            throw DataError("Time must be strictly increasing at row " + std::to_string(r));
        }
        for (std::size_t c = 0; c < 3; ++c) {
            std::string_view cell = trim(cells[channel_col[c]]);
            if (cell.empty()) {
                rec.channels[c].values.push_back(std::numeric_limits<double>::quiet_NaN());
                rec.channels[c].missing.push_back(1);
            } else {
                rec.channels[c].values.push_back(parse_double(cell, kChannelNames[c]));
                rec.channels[c].missing.push_back(0);
            }
        }
        for (std::size_t e = 0; e < 3; ++e) {
            std::string_view cell = trim(cells[event_col[e]]);
            if (cell == "0") {
                rec.event_tracks[e].push_back(0);
            } else if (cell == "1") {
                rec.event_tracks[e].push_back(1);
            } else {
                throw DataError("event cell for " + std::string(kEventNames[e]) +
                                " must be 0 or 1, got '" + std::string(cell) + "'");
            }
        }
    }
    return rec;
}

// Inverse of parse_recording for finite values: numbers are written in
// shortest round-trip form, missing samples as empty cells.
inline std::string serialize_recording(const RawRecording& rec) {
    std::string out;
    out += kCsvHeader;
    out += '\n';
    for (std::size_t i = 0; i < rec.size(); ++i) {
        out += std::to_string(rec.time_index[i]);
        for (std::size_t c = 0; c < 3; ++c) {
            out += ',';
            if (!rec.channels[c].missing[i]) out += format_double(rec.channels[c].values[i]);
        }
        for (std::size_t e = 0; e < 3; ++e) {
            out += ',';
            out += rec.event_tracks[e][i] ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

// Reads one session file; the subject id is the file name stem.
inline RawRecording load_recording_file(const std::filesystem::path& path,
                                        int sample_rate_hz = 128) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open recording file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_recording(buf.str(), path.stem().string(), sample_rate_hz);
}

// label[t] = 1 when any of the three event annotations fires at t.
inline LabeledRecording consolidate_labels(const RawRecording& rec) {
    LabeledRecording out;
    out.subject_id = rec.subject_id;
    out.sample_rate_hz = rec.sample_rate_hz;
    out.channels = rec.channels;
    out.label.resize(rec.size());
    for (std::size_t i = 0; i < rec.size(); ++i) {
        out.label[i] = static_cast<std::uint8_t>(rec.event_tracks[0][i] | rec.event_tracks[1][i] |
                                                 rec.event_tracks[2][i]);
    }
    return out;
}

// Stride decimation of channels and labels: keeps samples 0, factor,
// 2*factor, ... so output length is ceil(len/factor). No low-pass filter is
// applied before decimation.
inline LabeledRecording downsample(const LabeledRecording& rec, int factor) {
    if (factor < 1 || rec.sample_rate_hz % factor != 0) {
        throw BadFactor("sample rate " + std::to_string(rec.sample_rate_hz) +
                        " not divisible by factor " + std::to_string(factor));
    }
    if (factor == 1) return rec;
    LabeledRecording out;
    out.subject_id = rec.subject_id;
    out.sample_rate_hz = rec.sample_rate_hz / factor;
    std::size_t n = rec.size();
    std::size_t m = (n + static_cast<std::size_t>(factor) - 1) / static_cast<std::size_t>(factor);
    out.label.reserve(m);
    for (std::size_t c = 0; c < 3; ++c) {
        out.channels[c].values.reserve(m);
        out.channels[c].missing.reserve(m);
    }
    for (std::size_t i = 0; i < n; i += static_cast<std::size_t>(factor)) {
        out.label.push_back(rec.label[i]);
        for (std::size_t c = 0; c < 3; ++c) {
            out.channels[c].values.push_back(rec.channels[c].values[i]);
            out.channels[c].missing.push_back(rec.channels[c].missing[i]);
        }
    }
    return out;
}

struct SplitRatios {
    double train = 0.7;
    double val = 0.1;
    double test = 0.2;
};

// Disjoint subject partition. Sets are stored sorted; shuffle order is an
// implementation detail of the assignment, not part of the result.
struct SubjectSplit {
    std::vector<std::string> train_subjects;
    std::vector<std::string> val_subjects;
    std::vector<std::string> test_subjects;
    std::uint64_t seed = 0;
    int repetition_index = 0;
};

// Largest-remainder apportionment of n into three buckets. Leftover units go
// to the largest fractional remainders; ties resolve in (train, val, test)
// order so results are total and deterministic.
inline std::array<std::size_t, 3> apportion_largest_remainder(std::size_t n,
                                                              const SplitRatios& ratios) {
    std::array<double, 3> r = {ratios.train, ratios.val, ratios.test};
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> remainders{};
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        double exact = static_cast<double>(n) * r[i];
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        remainders[i] = exact - std::floor(exact);
        assigned += counts[i];
    }
    // Remainders within 1e-9 are a tie, resolved in (train, val, test) order
    // by the stable sort; without the tolerance, rounding noise in n*ratio
    // would break exact mathematical ties arbitrarily.
    std::array<std::size_t, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return remainders[a] > remainders[b] + 1e-9;
    });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) counts[order[k % 3]] += 1;
    // A product that rounds up to an exact integer leaves remainder 0 and can
    // overshoot; take the excess back from the smallest remainders.
    for (std::size_t k = 2; assigned > n; --k) {
        while (assigned > n && counts[order[k]] > 0) {
            counts[order[k]] -= 1;
            assigned -= 1;
        }
        if (k == 0) break;
    }
    return counts;
}

// Subject-level split: sort the registry (set semantics, input order must not
// matter), shuffle with the seeded generator, then cut by largest-remainder
// counts with train taking the first block.
inline SubjectSplit split_subjects(std::vector<std::string> registry, std::uint64_t seed,
                                   int repetition_index = 0,
                                   const SplitRatios& ratios = SplitRatios{}) {
    double sum = ratios.train + ratios.val + ratios.test;
    if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 || std::abs(sum - 1.0) > 1e-9) {
        throw BadConfig("split ratios must be nonnegative and sum to 1");
    }
    std::sort(registry.begin(), registry.end());
    registry.erase(std::unique(registry.begin(), registry.end()), registry.end());
    if (registry.size() < 3) {
        throw TooFewSubjects("need at least 3 subjects, got " + std::to_string(registry.size()));
    }
    Rng rng(derive_seed(seed, "subject_split"));
    rng.shuffle(registry);
    auto counts = apportion_largest_remainder(registry.size(), ratios);

    SubjectSplit split;
    split.seed = seed;
    split.repetition_index = repetition_index;
    auto it = registry.begin();
    split.train_subjects.assign(it, it + static_cast<std::ptrdiff_t>(counts[0]));
    it += static_cast<std::ptrdiff_t>(counts[0]);
    split.val_subjects.assign(it, it + static_cast<std::ptrdiff_t>(counts[1]));
    it += static_cast<std::ptrdiff_t>(counts[1]);
    split.test_subjects.assign(it, registry.end());
    std::sort(split.train_subjects.begin(), split.train_subjects.end());
    std::sort(split.val_subjects.begin(), split.val_subjects.end());
    std::sort(split.test_subjects.begin(), split.test_subjects.end());
    return split;
}

}  // namespace fog
