#pragma once

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fog/error.hpp"
#include "fog/tensor.hpp"
#include "fog/text.hpp"

namespace fog {

// Versioned binary weight container: a line-oriented text header (format id,
// version, metadata, tensor count) followed by named tensor records (name,
// rank, dims, explicit byte count, raw little-endian float32 data) and a
// trailing CRC32 over everything before it. Byte counts are stored per record
// so structural damage is distinguishable from shape edits.

inline constexpr int kWeightFormatVersion = 1;
inline constexpr std::string_view kWeightMagic = "fogweights";

struct NamedTensor {
    std::string name;
    Tensor<float> tensor;
};

struct WeightContainer {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<NamedTensor> tensors;

    const std::string* find_meta(std::string_view key) const {
        for (const auto& kv : metadata) {
            if (kv.first == key) return &kv.second;
        }
        return nullptr;
    }
};

namespace detail {

inline void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f32le(std::string& out, float v) {
    put_u32le(out, std::bit_cast<std::uint32_t>(v));
}

struct ByteReader {
    const std::string& bytes;
    std::size_t pos = 0;

    void require(std::size_t n) const {
        if (pos + n > bytes.size()) {
            throw ChecksumFailure("weight container truncated");
        }
    }
    std::uint32_t u32le() {
        require(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        }
        pos += 4;
        return v;
    }
    std::uint64_t u64le() {
        require(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        }
        pos += 8;
        return v;
    }
    float f32le() { return std::bit_cast<float>(u32le()); }
    std::string raw(std::size_t n) {
        require(n);
        std::string s = bytes.substr(pos, n);
        pos += n;
        return s;
    }
};

inline std::uint32_t crc32_of(const std::string& bytes, std::size_t len) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(len)));
}

}  // namespace detail

inline std::string serialize_weights(const WeightContainer& c) {
    std::string out;
    out += kWeightMagic;
    out += ' ';
    out += std::to_string(kWeightFormatVersion);
    out += '\n';
    for (const auto& kv : c.metadata) {
        out += "meta ";
        out += kv.first;
        out += ' ';
        out += kv.second;
        out += '\n';
    }
    out += "tensors " + std::to_string(c.tensors.size()) + "\n";
    out += "end_header\n";
    for (const auto& nt : c.tensors) {
        detail::put_u32le(out, static_cast<std::uint32_t>(nt.name.size()));
        out += nt.name;
        detail::put_u32le(out, static_cast<std::uint32_t>(nt.tensor.rank));
        // Rank-2 tensors live in storage as (n,1,1,c); their logical dims are
        // the outer axes only.
        if (nt.tensor.rank == 2) {
            detail::put_u32le(out, static_cast<std::uint32_t>(nt.tensor.dims[0]));
            detail::put_u32le(out, static_cast<std::uint32_t>(nt.tensor.dims[3]));
        } else {
            for (int d = 0; d < nt.tensor.rank; ++d) {
                detail::put_u32le(out, static_cast<std::uint32_t>(nt.tensor.dims[d]));
            }
        }
        detail::put_u64le(out, static_cast<std::uint64_t>(nt.tensor.size()) * 4);
        for (float v : nt.tensor.v) detail::put_f32le(out, v);
    }
    detail::put_u32le(out, detail::crc32_of(out, out.size()));
    return out;
}

inline WeightContainer parse_weights(const std::string& bytes) {
    // Header text is parsed before the checksum so a future-version container
    // reports VersionMismatch rather than a checksum complaint.
    std::size_t header_end = bytes.find("end_header\n");
    if (header_end == std::string::npos) {
        throw ChecksumFailure("weight container: header terminator not found");
    }
    std::size_t body_start = header_end + 11;

    WeightContainer c;
    std::size_t declared_tensors = 0;
    bool saw_count = false;
    {
        std::string_view header(bytes.data(), header_end);
        auto lines = split_lines(header);
        if (lines.empty()) throw ChecksumFailure("weight container: empty header");
        auto first = split_whitespace(lines[0]);
        if (first.size() != 2 || first[0] != kWeightMagic) {
            throw ChecksumFailure("weight container: bad format id");
        }
        int version = 0;
        try {
            version = static_cast<int>(parse_int(first[1], "weight container version"));
        } catch (const DataError&) {
            throw ChecksumFailure("weight container: unreadable version field");
        }
        if (version != kWeightFormatVersion) {
            throw VersionMismatch("weight container version " + std::string(first[1]) +
                                  ", expected " + std::to_string(kWeightFormatVersion));
        }
        for (std::size_t i = 1; i < lines.size(); ++i) {
            std::string_view line = lines[i];
            if (line.rfind("meta ", 0) == 0) {
                std::string_view rest = line.substr(5);
                std::size_t sp = rest.find(' ');
                if (sp == std::string_view::npos) {
                    throw ChecksumFailure("weight container: malformed metadata line");
                }
                c.metadata.emplace_back(std::string(rest.substr(0, sp)),
                                        std::string(rest.substr(sp + 1)));
            } else if (line.rfind("tensors ", 0) == 0) {
                try {
                    declared_tensors =
                        static_cast<std::size_t>(parse_int(line.substr(8), "tensor count"));
                } catch (const DataError&) {
                    throw ChecksumFailure("weight container: unreadable tensor count");
                }
                saw_count = true;
            } else {
                throw ChecksumFailure("weight container: unknown header line");
            }
        }
        if (!saw_count) throw ChecksumFailure("weight container: missing tensor count");
    }

    if (bytes.size() < body_start + 4) throw ChecksumFailure("weight container truncated");
    std::uint32_t stored = 0;
    for (int i = 0; i < 4; ++i) {
        stored |= static_cast<std::uint32_t>(
                      static_cast<unsigned char>(bytes[bytes.size() - 4 + i]))
                  << (8 * i);
    }
    if (detail::crc32_of(bytes, bytes.size() - 4) != stored) {
        throw ChecksumFailure("weight container checksum mismatch");
    }

    detail::ByteReader r{bytes, body_start};
    for (std::size_t t = 0; t < declared_tensors; ++t) {
        std::uint32_t name_len = r.u32le();
        if (name_len == 0 || name_len > 4096) {
            throw ChecksumFailure("weight container: implausible tensor name length");
        }
        std::string name = r.raw(name_len);
        std::uint32_t rank = r.u32le();
        if (rank < 1 || rank > 4) {
            throw ChecksumFailure("weight container: tensor rank out of range");
        }
        std::array<int, 4> dims{1, 1, 1, 1};
        std::uint64_t count = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            std::uint32_t dim = r.u32le();
            if (dim == 0 || dim > (1u << 28)) {
                throw ChecksumFailure("weight container: tensor dim out of range");
            }
            dims[d] = static_cast<int>(dim);
            count *= dim;
        }
        std::uint64_t nbytes = r.u64le();
        if (nbytes != count * 4) {
            // Framing is intact (nbytes drives the read) but dims disagree
            // with the payload size: a shape edit, not corruption.
            throw ShapeMismatch("weight container: tensor " + name + " declares " +
                                std::to_string(nbytes) + " bytes but dims imply " +
                                std::to_string(count * 4));
        }
        NamedTensor nt;
        nt.name = std::move(name);
        nt.tensor.rank = static_cast<int>(rank);
        // Stored dims occupy the leading axes; Tensor keeps rank-2 as (n,1,1,c).
        if (rank == 2) {
            nt.tensor.dims = {dims[0], 1, 1, dims[1]};
        } else {
            nt.tensor.dims = dims;
        }
        nt.tensor.v.resize(count);
        r.require(count * 4);
        for (std::uint64_t i = 0; i < count; ++i) nt.tensor.v[i] = r.f32le();
        c.tensors.push_back(std::move(nt));
    }
    if (r.pos != bytes.size() - 4) {
        throw ChecksumFailure("weight container: trailing bytes after tensor records");
    }
    return c;
}

}  // namespace fog
