#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "homsim/errors.hpp"
#include "homsim/timetag.hpp"

using namespace homsim;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("homsim_tags_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::vector<std::uint8_t> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void spit(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("time tags round-trip through the binary format", "[timetag]") {
    TempDir dir;
    const std::string path = dir.file("a.homtag");
    const std::vector<std::uint64_t> i3 = {10, 20, 20, 1000000007};
    const std::vector<std::uint64_t> i4 = {5, 20, 999999999};
    write_timetags(path, i3, i4);

    const TimeTagData data = read_timetags(path);
    CHECK(data.i3 == i3);
    CHECK(data.i4 == i4);
    CHECK_FALSE(data.meta.has_value());

    // file size: 8-byte magic + 9 bytes per record
    CHECK(std::filesystem::file_size(path) == 8 + 9 * (i3.size() + i4.size()));
}

TEST_CASE("metadata sidecar round-trips when present", "[timetag]") {
    TempDir dir;
    const std::string path = dir.file("b.homtag");
    TimeTagMetadata meta{12.5, 0xDEADBEEFULL, "0123456789abcdef"};
    write_timetags(path, {1, 2, 3}, {}, meta);

    const TimeTagData data = read_timetags(path);
    REQUIRE(data.meta.has_value());
    CHECK(data.meta->duration_s == 12.5);
    CHECK(data.meta->seed == 0xDEADBEEFULL);
    CHECK(data.meta->config_hash == "0123456789abcdef");
}

TEST_CASE("merged records are time ordered with channel-0 tie priority", "[timetag]") {
    TempDir dir;
    const std::string path = dir.file("c.homtag");
    write_timetags(path, {100, 300}, {100, 200});

    const auto bytes = slurp(path);
    REQUIRE(bytes.size() == 8 + 9 * 4);
    // record order: (0,100), (1,100), (1,200), (0,300)
    CHECK(bytes[8] == 0);
    CHECK(bytes[8 + 9] == 1);
    CHECK(bytes[8 + 18] == 1);
    CHECK(bytes[8 + 27] == 0);
    // little-endian time of the second record
    CHECK(bytes[8 + 9 + 1] == 100);
    CHECK(bytes[8 + 9 + 2] == 0);
}

TEST_CASE("empty files round-trip", "[timetag]") {
    TempDir dir;
    const std::string path = dir.file("empty.homtag");
    write_timetags(path, {}, {});
    const TimeTagData data = read_timetags(path);
    CHECK(data.i3.empty());
    CHECK(data.i4.empty());
}

TEST_CASE("unsorted input is rejected before writing", "[timetag]") {
    TempDir dir;
    CHECK_THROWS_AS(write_timetags(dir.file("x.homtag"), {5, 3}, {}), InvalidInput);
    CHECK_THROWS_AS(write_timetags(dir.file("x.homtag"), {}, {7, 6}), InvalidInput);
}

TEST_CASE("missing file raises an I/O error", "[timetag]") {
    CHECK_THROWS_AS(read_timetags("/nonexistent/dir/tags.homtag"), IoError);
}

TEST_CASE("corrupt files report the failing byte offset", "[timetag]") {
    TempDir dir;
    const std::string path = dir.file("bad.homtag");

    SECTION("wrong magic") {
        spit(path, {'X', 'Y', 'Z', 0, 0, 0, 0, 0});
        try {
            read_timetags(path);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.offset == 0);
            CHECK(std::string(e.what()).find("offset 0") != std::string::npos);
        }
    }

    SECTION("truncated record") {
        std::vector<std::uint8_t> bytes(kTimeTagMagic.begin(), kTimeTagMagic.end());
        bytes.insert(bytes.end(), {0, 1, 0, 0, 0, 0, 0, 0, 0});  // full record at offset 8
        bytes.insert(bytes.end(), {1, 2, 3});                    // partial record at offset 17
        spit(path, bytes);
        try {
            read_timetags(path);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.offset == 17);
        }
    }

    SECTION("unknown channel id") {
        std::vector<std::uint8_t> bytes(kTimeTagMagic.begin(), kTimeTagMagic.end());
        bytes.insert(bytes.end(), {7, 0, 0, 0, 0, 0, 0, 0, 0});
        spit(path, bytes);
        try {
            read_timetags(path);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.offset == 8);
            CHECK(std::string(e.what()).find("7") != std::string::npos);
        }
    }

    SECTION("time regression within a channel") {
        std::vector<std::uint8_t> bytes(kTimeTagMagic.begin(), kTimeTagMagic.end());
        bytes.insert(bytes.end(), {0, 9, 0, 0, 0, 0, 0, 0, 0});
        bytes.insert(bytes.end(), {1, 4, 0, 0, 0, 0, 0, 0, 0});  // other channel: fine
        bytes.insert(bytes.end(), {0, 8, 0, 0, 0, 0, 0, 0, 0});  // regression on channel 0
        spit(path, bytes);
        try {
            read_timetags(path);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.offset == 26);
        }
    }

    SECTION("corrupt sidecar") {
        write_timetags(path, {1}, {2});
        std::ofstream side(sidecar_path(path));
        side << "{ not json";
        side.close();
        CHECK_THROWS_AS(read_timetags(path), Error);
    }
}

TEST_CASE("large streams round-trip intact", "[timetag][slow]") {
    TempDir dir;
    const std::string path = dir.file("big.homtag");
    std::mt19937_64 rng(42);
    std::vector<std::uint64_t> i3(500000), i4(500000);
    std::uint64_t t3 = 0, t4 = 0;
    for (auto& t : i3) t = (t3 += rng() % 2000);
    for (auto& t : i4) t = (t4 += rng() % 2000);
    write_timetags(path, i3, i4);
    const TimeTagData data = read_timetags(path);
    CHECK(data.i3 == i3);
    CHECK(data.i4 == i4);
}
