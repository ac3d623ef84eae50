#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tritier/corpus.hpp"

#ifndef TRITIER_ASSET_DIR
#define TRITIER_ASSET_DIR "assets"
#endif

namespace testutil {

inline std::filesystem::path asset_dir() { return std::filesystem::path(TRITIER_ASSET_DIR); }

inline std::filesystem::path registry_path() {
    return asset_dir() / "registry" / "dimension_registry.json";
}

inline std::filesystem::path fixtures_dir() { return asset_dir() / "fixtures"; }

inline const tritier::DimensionRegistry& shipped_registry() {
    static const tritier::DimensionRegistry reg = tritier::load_registry(registry_path());
    return reg;
}

inline std::vector<tritier::CritiquePair> fixture_pairs() {
    return tritier::load_pairs(fixtures_dir() / "pairs_fixture.jsonl");
}

// Scoped temp directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng{std::random_device{}()};
        path_ = std::filesystem::temp_directory_path() /
                ("tritier_" + tag + "_" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// A minimal registry for surgical TF-IDF tests (bypasses shipped-count
// validation, which only the loader enforces).
inline tritier::DimensionRegistry tiny_registry() {
    using tritier::Culture;
    tritier::DimensionRegistry reg;
    reg.add({"CN_L1_D1", Culture::CN, 1, "ink wash", {"ink wash", "spirit resonance"}, false});
    reg.add({"WE_L1_D1", Culture::WE, 1, "w", {"alpha"}, false});
    reg.add({"JP_L1_D1", Culture::JP, 1, "j", {"beta"}, false});
    reg.add({"KR_L1_D1", Culture::KR, 1, "k", {"gamma"}, false});
    reg.add({"IS_L1_D1", Culture::IS, 1, "i", {"delta"}, false});
    reg.add({"IN_L1_D1", Culture::IN, 1, "n", {"epsilon"}, false});
    return reg;
}

}  // namespace testutil
