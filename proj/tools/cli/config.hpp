#pragma once

#include <array>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace nfqed_cli {

/// Malformed or inconsistent configuration. Exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FiberConfig {
    double radius_nm = 250.0;
    std::string material = "silica";  // silica | vacuum
    std::string material_file;        // overrides material when set
};

struct ChainConfig {
    int n = 10;
    double spacing_over_lambda = 0.1;
    double x_a_nm = 50.0;
    std::string orientation = "normal";
};

struct EmitterConfig {
    double r_nm = 0, phi = 0, z_nm = 0;
    std::array<std::complex<double>, 3> dipole{};
};

struct QuadConfig {
    int m_cut = 0;
    int theta_order = 0;
    double rel_tol = 1e-3;
    int max_refinements = 3;
};

struct PvConfig {
    std::string strategy = "averaged";  // averaged | direct
    std::optional<std::array<double, 2>> window;  // cutoffs in units of omega_a
    int n_cutoffs = 32;
};

struct DriveConfig {
    double rabi = 1e-3;
    std::vector<double> detunings;
};

struct DispersionConfig {
    double wavelength_min_nm = 700, wavelength_max_nm = 1000;
    int points = 31;
};

struct GreenMapConfig {
    std::string component = "xx";
    std::string plane = "zx";
    double x_a_nm = 100;
    std::array<double, 2> x_range_nm{-500, 500};
    std::array<double, 2> other_range_nm{-500, 500};  // z for zx, y for yx
    std::array<int, 2> points{21, 21};               // (x, other)
};

struct PairConfig {
    std::vector<double> x_a_nm{50, 100};
    std::vector<double> a_over_lambda;
    std::vector<std::string> orientations{"parallel", "binormal", "normal"};
};

struct BenchmarkConfig {
    std::vector<double> a_over_lambda{0.3, 0.5, 1.0, 2.0};
    std::string orientation = "perpendicular";  // relative to the separation
};

struct RunConfig {
    int schema_version = 1;
    FiberConfig fiber;
    double wavelength_nm = 852;
    std::optional<ChainConfig> chain;
    std::vector<EmitterConfig> emitters;
    QuadConfig quadrature;
    PvConfig pv;
    DriveConfig drive;
    DispersionConfig dispersion;
    GreenMapConfig green_map;
    PairConfig pair_interaction;
    BenchmarkConfig pv_benchmark;
    std::string mode = "both";  // exact | vacuum-approx | both
    std::string output_dir = "nfqed_out";
    std::string cache_dir;
    int threads = 0;
    std::string base_dir;  // directory of the config file, for relative paths
};

inline constexpr int schema_version = 1;

/// Parses a YAML config. Errors name the line and the dotted key.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& origin, const std::string& base_dir);

/// Resolved configuration with every default filled in. Runtime-only
/// settings that cannot change results (threads) are left out.
nlohmann::json to_json(const RunConfig& c);

}  // namespace nfqed_cli
