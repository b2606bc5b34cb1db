#include "kvtopo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <cstdio>

#include "json.hpp"

#include "kvtopo/errors.hpp"
#include "kvtopo/kv.hpp"

namespace kvtopo {

void check_scene(const TrueScene& scene) {
    if (!(scene.h_true > 0.0)) throw GeometryError("h_true must be positive");
    if (!scene.object) return;
    const double clearance = 2.0 * scene.h_true;
    for (const Vec2& p : shape_boundary(*scene.object, scene.h_true)) {
        if (!domain_contains(scene.domain, p) || distance_to_boundary(scene.domain, p) < clearance)
            throw GeometryError("true object " + describe(*scene.object) + " needs clearance >= 2*h_true from the boundary");
    }
}

double perimeter(const DomainSpec& spec) {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DiskDomain>)
                return 2.0 * kPi * d.radius;
            else
                return 2.0 * (d.width + d.height);
        },
        spec.shape);
}

namespace {

// uniform double in [0, 1) from the top 53 bits
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Measurement generate_measurement(const TrueScene& scene, double noise_level, std::uint64_t seed) {
    if (!(noise_level >= 0.0)) throw Error("noise level must be nonnegative");
    check_scene(scene);
    DomainSpec spec = scene.domain;
    spec.h = scene.h_true;
    auto mesh = std::make_shared<const Mesh>(scene.object ? puncture(spec, *scene.object, scene.h_true)
                                                          : generate_mesh(spec));
    const ScalarField psi = solve(assemble(mesh, scene.data, neumann_conditions(scene.data)));

    Measurement m;
    m.perimeter = perimeter(spec);
    m.seed = seed;
    m.noise_level = noise_level;
    m.h_true = scene.h_true;
    m.scene = scene.object ? describe(*scene.object) : "none";

    std::vector<bool> on_gamma_a(mesh->nodes.size(), false);
    for (const auto& e : mesh->boundary)
        if (e.tag == BoundaryTag::GammaA) on_gamma_a[e.a] = on_gamma_a[e.b] = true;
    for (int v = 0; v < mesh->num_nodes(); ++v)
        if (on_gamma_a[v]) m.samples.push_back({arc_parameter(spec, mesh->nodes[v]), mesh->nodes[v], psi.values[v]});
    std::sort(m.samples.begin(), m.samples.end(),
              [](const MeasurementSample& a, const MeasurementSample& b) { return a.arc < b.arc; });

    if (noise_level > 0.0) {
        double peak = 0.0;
        for (const auto& s : m.samples) peak = std::max(peak, std::abs(s.psi));
        const double delta = noise_level * peak;
        std::mt19937_64 rng(seed);
        for (auto& s : m.samples) s.psi += delta * (2.0 * unit_uniform(rng) - 1.0);
    }
    return m;
}

ScalarFunction measurement_function(const Measurement& m, const DomainSpec& spec) {
    if (m.samples.empty()) throw Error("measurement has no samples");
    auto samples = std::make_shared<const std::vector<MeasurementSample>>(m.samples);
    const double period = m.perimeter;
    return [samples, period, spec](const Vec2& p) {
        const auto& s = *samples;
        const double t = arc_parameter(spec, p);
        const auto it = std::upper_bound(s.begin(), s.end(), t,
                                         [](double v, const MeasurementSample& x) { return v < x.arc; });
        // neighbours with periodic wrap
        const MeasurementSample& hi = it == s.end() ? s.front() : *it;
        const MeasurementSample& lo = it == s.begin() ? s.back() : *(it - 1);
        double a = lo.arc, b = hi.arc, x = t;
        if (b <= a) b += period;
        if (x < a) x += period;
        if (b - a <= 0.0) return lo.psi;
        const double w = std::clamp((x - a) / (b - a), 0.0, 1.0);
        return (1.0 - w) * lo.psi + w * hi.psi;
    };
}

std::string measurement_metadata_json(const Measurement& m) {
    nlohmann::ordered_json j;
    j["scene"] = m.scene;
    j["seed"] = m.seed;
    j["noise_level"] = m.noise_level;
    j["h_true"] = m.h_true;
    j["perimeter"] = m.perimeter;
    j["generator"] = kNoiseGenerator;
    j["samples"] = m.samples.size();
    return j.dump(2);
}

void write_measurement_csv(const Measurement& m, std::ostream& out, const std::string& header) {
    if (!header.empty()) out << "# " << header << '\n';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", m.perimeter);
    out << "# perimeter " << buf << '\n';
    out << "arc_length,x,y,psi_m\n";
    char line[160];
    for (const auto& s : m.samples) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", s.arc, s.point.x(), s.point.y(), s.psi);
        out << line;
    }
}

Measurement read_measurement_csv(std::istream& in) {
    Measurement m;
    std::string line;
    int lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string key;
            if (ss >> key && key == "perimeter") ss >> m.perimeter;
            continue;
        }
        if (!have_header) {
            if (line.rfind("arc_length,x,y,psi_m", 0) != 0) throw ParseError(lineno, "expected CSV header arc_length,x,y,psi_m");
            have_header = true;
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        MeasurementSample s;
        double x = 0, y = 0;
        if (!(ss >> s.arc >> x >> y >> s.psi)) throw ParseError(lineno, "malformed measurement row");
        s.point = Vec2(x, y);
        m.samples.push_back(s);
    }
    if (!(m.perimeter > 0.0)) throw ParseError(lineno, "missing '# perimeter' line");
    if (m.samples.empty()) throw ParseError(lineno, "no measurement samples");
    return m;
}

void save_measurement(const Measurement& m, const std::filesystem::path& csv, const std::string& header) {
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw Error("cannot write " + csv.string());
    write_measurement_csv(m, out, header);
    std::filesystem::path meta = csv;
    meta.replace_extension(".meta.json");
    std::ofstream mo(meta, std::ios::binary);
    if (!mo) throw Error("cannot write " + meta.string());
    mo << measurement_metadata_json(m) << '\n';
}

Measurement load_measurement(const std::filesystem::path& csv) {
    std::ifstream in(csv, std::ios::binary);
    if (!in) throw Error("cannot open " + csv.string());
    return read_measurement_csv(in);
}

}  // namespace kvtopo
