#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kvtopo/fem.hpp"
#include "kvtopo/mesh.hpp"

namespace kvtopo {

/// Ground truth used to synthesize boundary data. `data.psi_m` is ignored.
struct TrueScene {
    DomainSpec domain;  // domain.h is overridden by h_true
    std::optional<Shape> object;
    ProblemData data;
    double h_true = 0.01;
};

/// Throws GeometryError unless the object lies inside the domain with
/// clearance >= 2 h_true.
void check_scene(const TrueScene& scene);

/// Name of the pseudo-random generator; recorded in measurement metadata.
inline constexpr const char* kNoiseGenerator = "mt19937_64";

struct MeasurementSample {
    double arc = 0.0;
    Vec2 point;
    double psi = 0.0;
};

struct Measurement {
    std::vector<MeasurementSample> samples;  // sorted by arc
    double perimeter = 0.0;                  // arc-length period of the outer boundary
    std::uint64_t seed = 0;
    double noise_level = 0.0;
    double h_true = 0.0;
    std::string scene;
};

/// Neumann solve on the true (punctured) mesh at resolution h_true, traced at
/// the GammaA nodes, plus uniform noise in [-d, d] with d = noise_level * max|trace|.
Measurement generate_measurement(const TrueScene& scene, double noise_level, std::uint64_t seed);

double perimeter(const DomainSpec& spec);

/// Periodic piecewise-linear interpolation of the samples in arc length.
ScalarFunction measurement_function(const Measurement& m, const DomainSpec& spec);

/// CSV `arc_length,x,y,psi_m` preceded by `#` metadata lines.
void write_measurement_csv(const Measurement& m, std::ostream& out, const std::string& header = {});
Measurement read_measurement_csv(std::istream& in);
/// JSON metadata sidecar (scene, seed, noise, h_true, generator).
std::string measurement_metadata_json(const Measurement& m);

void save_measurement(const Measurement& m, const std::filesystem::path& csv, const std::string& header = {});
Measurement load_measurement(const std::filesystem::path& csv);

}  // namespace kvtopo
