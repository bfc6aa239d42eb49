#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "homsim/errors.hpp"

namespace homsim {

// Binary time-tag file: 8-byte magic "HOMTAG1\0", then 9-byte records of
// u8 channel (0 = I3, 1 = I4) + u64 time in picoseconds, little-endian.
// Run metadata travels in a JSON sidecar next to the file.

inline constexpr std::array<char, 8> kTimeTagMagic = {'H', 'O', 'M', 'T', 'A', 'G', '1', '\0'};
inline constexpr std::size_t kTimeTagRecordSize = 9;

struct TimeTagMetadata {
    double duration_s = 0.0;
    std::uint64_t seed = 0;
    std::string config_hash;
};

struct TimeTagData {
    std::vector<std::uint64_t> i3;  // ps
    std::vector<std::uint64_t> i4;  // ps
    std::optional<TimeTagMetadata> meta;
};

inline std::string sidecar_path(const std::string& path) { return path + ".meta.json"; }

namespace detail {

inline void put_u64_le(std::uint8_t* out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

inline std::uint64_t get_u64_le(const std::uint8_t* in) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
    return v;
}

}  // namespace detail

// Writes the two output-port streams merged into time order (ties: I3
// first).  Both inputs must already be sorted.
inline void write_timetags(const std::string& path, const std::vector<std::uint64_t>& i3,
                           const std::vector<std::uint64_t>& i4,
                           const std::optional<TimeTagMetadata>& meta = std::nullopt) {
    for (const auto* s : {&i3, &i4})
        for (std::size_t i = 1; i < s->size(); ++i)
            if ((*s)[i] < (*s)[i - 1]) throw InvalidInput("time-tag stream is not sorted");

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(kTimeTagMagic.data(), kTimeTagMagic.size());

    std::uint8_t rec[kTimeTagRecordSize];
    std::size_t a = 0, b = 0;
    while (a < i3.size() || b < i4.size()) {
        const bool take_a = b >= i4.size() || (a < i3.size() && i3[a] <= i4[b]);
        rec[0] = take_a ? 0 : 1;
        detail::put_u64_le(rec + 1, take_a ? i3[a++] : i4[b++]);
        out.write(reinterpret_cast<const char*>(rec), sizeof rec);
    }
    if (!out) throw IoError("write failed: " + path);
    out.close();

    if (meta) {
        nlohmann::json j;
        j["duration_s"] = meta->duration_s;
        j["seed"] = meta->seed;
        j["config_hash"] = meta->config_hash;
        std::ofstream side(sidecar_path(path), std::ios::trunc);
        if (!side) throw IoError("cannot open for writing: " + sidecar_path(path));
        side << j.dump(2) << "\n";
    }
}

inline TimeTagData read_timetags(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);

    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (in.gcount() != static_cast<std::streamsize>(magic.size()) || magic != kTimeTagMagic)
        throw FormatError("bad time-tag magic", 0);

    TimeTagData data;
    std::uint8_t rec[kTimeTagRecordSize];
    std::size_t offset = magic.size();
    for (;;) {
        in.read(reinterpret_cast<char*>(rec), sizeof rec);
        const std::streamsize got = in.gcount();
        if (got == 0) break;
        if (got != static_cast<std::streamsize>(sizeof rec))
            throw FormatError("truncated time-tag record", offset);
        const std::uint8_t ch = rec[0];
        const std::uint64_t t = detail::get_u64_le(rec + 1);
        if (ch > 1) throw FormatError("unknown channel id " + std::to_string(ch), offset);
        auto& stream = ch == 0 ? data.i3 : data.i4;
        if (!stream.empty() && t < stream.back())
            throw FormatError("time regression on channel " + std::to_string(ch), offset);
        stream.push_back(t);
        offset += sizeof rec;
    }

    std::ifstream side(sidecar_path(path));
    if (side) {
        try {
            nlohmann::json j = nlohmann::json::parse(side);
            TimeTagMetadata m;
            m.duration_s = j.at("duration_s").get<double>();
            m.seed = j.at("seed").get<std::uint64_t>();
            m.config_hash = j.value("config_hash", std::string{});
            data.meta = std::move(m);
        } catch (const nlohmann::json::exception& e) {
            throw Error("bad metadata sidecar " + sidecar_path(path) + ": " + e.what());
        }
    }
    return data;
}

}  // namespace homsim
