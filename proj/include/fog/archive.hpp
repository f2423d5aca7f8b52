#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fog/error.hpp"
#include "fog/gaf.hpp"
#include "fog/parallel.hpp"
#include "fog/text.hpp"
#include "fog/windowing.hpp"

namespace fog {

// On-disk archive layout: a directory holding
//   meta.txt      key=value lines describing the payload
//   manifest.csv  one row per record: subject_id,start_index,label,fog_fraction,channel_mask
//   data.bin      flat little-endian binary, one fixed-size record per manifest row
//
// Window archives store each record as 3 channels of float64 samples; image
// archives store each record as 3 float32 square planes. The channel_mask
// column marks which of a record's channels carry usable data.

// Per-record manifest line. channel_mask follows channel storage order
// (AccV, AccML, AccAP) and serializes as a 3-character 0/1 string.
struct ManifestRow {
    std::string subject_id;
    std::int64_t start_index = 0;
    int label = 0;
    double fog_fraction = 0.0;
    std::array<bool, 3> channel_mask = {true, true, true};
};

namespace detail {

inline void append_f32le(std::string& out, float v) {
    auto bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline void append_f64le(std::string& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline float take_f32le(const unsigned char* p) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return std::bit_cast<float>(bits);
}

inline double take_f64le(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw BadArchive("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw BadArchive("short write to " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BadArchive("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string format_mask(const std::array<bool, 3>& mask) {
    std::string s;
    for (bool b : mask) s.push_back(b ? '1' : '0');
    return s;
}

inline std::array<bool, 3> parse_mask(std::string_view cell) {
    if (cell.size() != 3) throw BadArchive("channel mask must have 3 digits: " + std::string(cell));
    std::array<bool, 3> mask{};
    for (std::size_t i = 0; i < 3; ++i) {
        if (cell[i] != '0' && cell[i] != '1') {
            throw BadArchive("channel mask must be 0/1 digits: " + std::string(cell));
        }
        mask[i] = cell[i] == '1';
    }
    return mask;
}

inline constexpr std::string_view kManifestHeader =
    "subject_id,start_index,label,fog_fraction,channel_mask";

inline std::string manifest_text(const std::vector<ManifestRow>& rows) {
    std::string out(kManifestHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += r.subject_id;
        out += ',';
        out += std::to_string(r.start_index);
        out += ',';
        out += std::to_string(r.label);
        out += ',';
        out += format_double(r.fog_fraction);
        out += ',';
        out += format_mask(r.channel_mask);
        out += '\n';
    }
    return out;
}

inline std::vector<ManifestRow> parse_manifest(std::string_view text) {
    auto lines = split_lines(text);
    if (lines.empty() || lines[0] != kManifestHeader) {
        throw BadArchive("manifest header must be \"" + std::string(kManifestHeader) + "\"");
    }
    std::vector<ManifestRow> rows;
    rows.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto cells = split_csv_line(lines[i]);
        if (cells.size() != 5) {
            throw BadArchive("manifest row " + std::to_string(i) + " has " +
                             std::to_string(cells.size()) + " cells, want 5");
        }
        ManifestRow r;
        r.subject_id = std::string(cells[0]);
        r.start_index = parse_int(cells[1], "start_index");
        r.label = static_cast<int>(parse_int(cells[2], "label"));
        r.fog_fraction = parse_double(cells[3], "fog_fraction");
        r.channel_mask = parse_mask(cells[4]);
        rows.push_back(std::move(r));
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& a = rows[i - 1];
        const auto& b = rows[i];
        if (a.subject_id > b.subject_id ||
            (a.subject_id == b.subject_id && a.start_index >= b.start_index)) {
            throw BadArchive("manifest rows out of (subject_id, start_index) order at row " +
                             std::to_string(i + 1));
        }
    }
    return rows;
}

// meta.txt holds one key=value per line; keys are unique.
inline std::string meta_text(const std::vector<std::pair<std::string, std::string>>& meta) {
    std::string out;
    for (const auto& [k, v] : meta) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

inline std::vector<std::pair<std::string, std::string>> parse_meta(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> meta;
    for (auto line : split_lines(text)) {
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw BadArchive("meta line has no '=': " + std::string(line));
        }
        meta.emplace_back(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
    }
    return meta;
}

inline std::string meta_value(const std::vector<std::pair<std::string, std::string>>& meta,
                              const std::string& key) {
    for (const auto& [k, v] : meta) {
        if (k == key) return v;
    }
    throw BadArchive("meta.txt missing key " + key);
}

inline ManifestRow row_of(const Window& w) {
    return {w.subject_id, w.start_index, w.label, w.fog_fraction, w.channel_mask};
}

}  // namespace detail

inline void write_window_archive(const std::filesystem::path& dir, const WindowSet& ws) {
    int length = ws.windows.empty() ? 256 : ws.windows.front().length;
    std::vector<ManifestRow> rows;
    rows.reserve(ws.size());
    std::string data;
    data.reserve(ws.size() * 3 * static_cast<std::size_t>(length) * 8);
    for (const auto& w : ws.windows) {
        if (w.length != length) {
            throw BadArchive("window archives require a uniform window length; got " +
                             std::to_string(w.length) + " and " + std::to_string(length));
        }
        rows.push_back(detail::row_of(w));
        for (const auto& channel : w.data) {
            for (double v : channel) detail::append_f64le(data, v);
        }
    }
    std::filesystem::create_directories(dir);
    detail::write_file(dir / "meta.txt", detail::meta_text({
                                             {"kind", "windows"},
                                             {"split", ws.split_tag},
                                             {"window_length", std::to_string(length)},
                                             {"count", std::to_string(ws.size())},
                                         }));
    detail::write_file(dir / "manifest.csv", detail::manifest_text(rows));
    detail::write_file(dir / "data.bin", data);
}

inline WindowSet read_window_archive(const std::filesystem::path& dir) {
    auto meta = detail::parse_meta(detail::read_file(dir / "meta.txt"));
    if (detail::meta_value(meta, "kind") != "windows") {
        throw BadArchive(dir.string() + " is not a window archive");
    }
    int length = static_cast<int>(parse_int(detail::meta_value(meta, "window_length"),
                                            "window_length"));
    if (length < 1) throw BadArchive("window_length must be positive");
    auto count = static_cast<std::size_t>(parse_int(detail::meta_value(meta, "count"), "count"));
    auto rows = detail::parse_manifest(detail::read_file(dir / "manifest.csv"));
    if (rows.size() != count) {
        throw BadArchive("manifest has " + std::to_string(rows.size()) + " rows, meta says " +
                         std::to_string(count));
    }
    auto data = detail::read_file(dir / "data.bin");
    std::size_t record = 3 * static_cast<std::size_t>(length) * 8;
    if (data.size() != count * record) {
        throw BadArchive("data.bin holds " + std::to_string(data.size()) + " bytes, want " +
                         std::to_string(count * record));
    }
    WindowSet ws;
    ws.split_tag = detail::meta_value(meta, "split");
    ws.windows.resize(count);
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
    for (std::size_t i = 0; i < count; ++i) {
        Window& w = ws.windows[i];
        w.subject_id = rows[i].subject_id;
        w.start_index = rows[i].start_index;
        w.length = length;
        w.label = rows[i].label;
        w.fog_fraction = rows[i].fog_fraction;
        w.channel_mask = rows[i].channel_mask;
        const unsigned char* p = bytes + i * record;
        for (auto& channel : w.data) {
            channel.resize(static_cast<std::size_t>(length));
            for (auto& v : channel) {
                v = detail::take_f64le(p);
                p += 8;
            }
        }
    }
    return ws;
}

// Precomputed square GASF planes for every window of one split, three planes
// per record in channel storage order. Planes of masked channels are zero;
// the manifest mask gates their use.
struct GafArchive {
    std::string split_tag;
    int image_size = 64;
    AngleSource angle_source = AngleSource::bipolar;
    std::vector<ManifestRow> rows;
    std::vector<float> planes;

    std::size_t size() const { return rows.size(); }

    std::size_t plane_offset(std::size_t row, std::size_t channel) const {
        auto n = static_cast<std::size_t>(image_size);
        return (row * 3 + channel) * n * n;
    }

    GafImage image(std::size_t row, std::size_t channel) const {
        auto n = static_cast<std::size_t>(image_size);
        GafImage img;
        img.n = n;
        img.channel_name = std::string(kChannelNames[channel]);
        img.subject_id = rows[row].subject_id;
        img.start_index = rows[row].start_index;
        img.matrix.resize(n * n);
        const float* src = planes.data() + plane_offset(row, channel);
        for (std::size_t i = 0; i < n * n; ++i) img.matrix[i] = static_cast<double>(src[i]);
        return img;
    }
};

inline GafArchive build_gaf_archive(const WindowSet& ws, int image_size = 64,
                                    AngleSource source = AngleSource::bipolar) {
    if (image_size < 2) throw BadConfig("image_size must be at least 2");
    GafArchive a;
    a.split_tag = ws.split_tag;
    a.image_size = image_size;
    a.angle_source = source;
    a.rows.reserve(ws.size());
    for (const auto& w : ws.windows) a.rows.push_back(detail::row_of(w));
    auto n = static_cast<std::size_t>(image_size);
    a.planes.assign(ws.size() * 3 * n * n, 0.0f);
    parallel_for(ws.size(), [&](std::size_t i) {
        const Window& w = ws.windows[i];
        for (std::size_t c = 0; c < 3; ++c) {
            if (!w.channel_mask[c]) continue;
            auto img = gasf_from_series(w.data[c], n, source);
            float* dst = a.planes.data() + a.plane_offset(i, c);
            for (std::size_t k = 0; k < n * n; ++k) dst[k] = static_cast<float>(img.matrix[k]);
        }
    });
    return a;
}

inline void write_gaf_archive(const std::filesystem::path& dir, const GafArchive& a) {
    std::filesystem::create_directories(dir);
    detail::write_file(dir / "meta.txt", detail::meta_text({
                                             {"kind", "gaf"},
                                             {"split", a.split_tag},
                                             {"image_size", std::to_string(a.image_size)},
                                             {"angle_source", angle_source_name(a.angle_source)},
                                             {"count", std::to_string(a.size())},
                                         }));
    detail::write_file(dir / "manifest.csv", detail::manifest_text(a.rows));
    std::string data;
    data.reserve(a.planes.size() * 4);
    for (float v : a.planes) detail::append_f32le(data, v);
    detail::write_file(dir / "data.bin", data);
}

inline GafArchive read_gaf_archive(const std::filesystem::path& dir) {
    auto meta = detail::parse_meta(detail::read_file(dir / "meta.txt"));
    if (detail::meta_value(meta, "kind") != "gaf") {
        throw BadArchive(dir.string() + " is not an image archive");
    }
    GafArchive a;
    a.split_tag = detail::meta_value(meta, "split");
    a.image_size = static_cast<int>(parse_int(detail::meta_value(meta, "image_size"),
                                              "image_size"));
    if (a.image_size < 2) throw BadArchive("image_size must be at least 2");
    a.angle_source = angle_source_from_name(detail::meta_value(meta, "angle_source"));
    auto count = static_cast<std::size_t>(parse_int(detail::meta_value(meta, "count"), "count"));
    a.rows = detail::parse_manifest(detail::read_file(dir / "manifest.csv"));
    if (a.rows.size() != count) {
        throw BadArchive("manifest has " + std::to_string(a.rows.size()) + " rows, meta says " +
                         std::to_string(count));
    }
    auto data = detail::read_file(dir / "data.bin");
    auto n = static_cast<std::size_t>(a.image_size);
    if (data.size() != count * 3 * n * n * 4) {
        throw BadArchive("data.bin holds " + std::to_string(data.size()) + " bytes, want " +
                         std::to_string(count * 3 * n * n * 4));
    }
    a.planes.resize(count * 3 * n * n);
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
    for (std::size_t i = 0; i < a.planes.size(); ++i) {
        a.planes[i] = detail::take_f32le(bytes + i * 4);
    }
    return a;
}

}  // namespace fog
