#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace testutil {

// Seeded uniform doubles without std::uniform_real_distribution, so expected
// values frozen here never shift between standard library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : rng_(seed) {}
    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t next_u64() { return rng_(); }

private:
    std::mt19937_64 rng_;
};

inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << content;
}

// Runs the fsgu CLI with the given arguments; returns the process exit code.
inline int run_cli(const std::string& args) {
#ifdef FSGU_CLI_PATH
    const std::string cmd = std::string(FSGU_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return (rc >> 8) & 0xff;
#else
    (void)args;
    return -1;
#endif
}

}  // namespace testutil
