#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kvtopo/fem.hpp"
#include "kvtopo/geometry.hpp"
#include "kvtopo/mesh.hpp"
#include "kvtopo/synth.hpp"

namespace kvtopo {

inline constexpr const char* kVersion = "1.0.0";

/// Flat `key = value` configuration with dotted section names. `#` starts a
/// comment; blank lines are ignored; keys are unique.
class Config {
public:
    static Config parse(std::istream& in);
    static Config parse_string(const std::string& text);
    static Config load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    const std::map<std::string, std::string>& entries() const { return entries_; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;
    Vec2 get_vec2(const std::string& key, const Vec2& fallback) const;

    /// Sorted `key = value` lines; parse(serialize()) reproduces the config.
    std::string serialize() const;
    /// 64-bit FNV-1a of serialize() without output.dir.
    std::uint64_t hash() const;
    std::string hash_hex() const;

    bool operator==(const Config&) const = default;

private:
    std::map<std::string, std::string> entries_;
};

/// Named analytic families for the coefficient and data fields:
///   constant: value
///   linear: a0 + ax x + ay y
///   gaussian: base + amplitude exp(-|x - center|^2 / (2 width^2))
///   uniform_field (flux only): gamma(x) field . n
CoefficientField make_coefficient(const Config& cfg, const std::string& prefix, const DomainSpec& domain);
ScalarFunction make_scalar(const Config& cfg, const std::string& prefix);
FluxFunction make_flux(const Config& cfg, const std::string& prefix, const CoefficientField& gamma);

enum class MeasurementSource {
    Synth,       // generated from the true scene at h_true
    Consistent,  // the inversion mesh's own Neumann trace
    File,        // measurement CSV written by synth
};

struct PolarizationSpec {
    std::string shape = "circle";
    double radius = 1.0;
    Vec2 axes{2.0, 1.0};
    double angle = 0.0;
    std::vector<Vec2> points;
    int panels = 256;
    std::vector<int> history{16, 32, 64, 128, 256};
};

struct SweepSpec {
    std::vector<double> eps{0.1, 0.07, 0.05, 0.035, 0.025};
    std::optional<Vec2> z;  // empty: admissible deltaK argmin
    int n_segments = 32;
    bool remainder = true;
    double far_field_factor = 4.0;
};

/// Validated configuration of a run. Every check happens at construction.
struct RunConfig {
    Config raw;
    DomainSpec domain;
    ProblemData data;  // psi_m unset
    TrueScene scene;
    double noise = 0.0;
    std::uint64_t seed = 0;
    MeasurementSource source = MeasurementSource::Synth;
    std::filesystem::path measurement_file;
    std::vector<double> candidates{0.2, 0.4, 0.6, 0.8};
    SweepSpec sweep;
    PolarizationSpec polarization;
    std::filesystem::path out_dir = "out";

    /// One-line provenance string: toolkit version and config hash.
    std::string metadata() const;
    std::string metadata_json() const;
};

/// Throws ConfigError naming the offending key.
RunConfig build_run_config(const Config& cfg);

}  // namespace kvtopo
