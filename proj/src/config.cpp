#include "kvtopo/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kvtopo/errors.hpp"
#include "kvtopo/io.hpp"

namespace kvtopo {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s) {
    std::vector<std::string> out;
    std::string w;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == ',') {
            if (!w.empty()) out.push_back(std::move(w));
            w.clear();
        } else {
            w.push_back(c);
        }
    }
    if (!w.empty()) out.push_back(std::move(w));
    return out;
}

bool parse_number(const std::string& s, double& out) {
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

Config Config::parse(std::istream& in) {
    Config c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(lineno, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key.find_first_of(" \t") != std::string::npos) throw ParseError(lineno, "invalid key");
        if (c.has(key)) throw ParseError(lineno, "duplicate key " + key);
        c.entries_[key] = value;
    }
    return c;
}

Config Config::parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config " + path.string());
    return parse(in);
}

void Config::set(const std::string& key, const std::string& value) { entries_[key] = trim(value); }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    double v = 0.0;
    if (!parse_number(it->second, v)) throw ConfigError(key, "expected a number, got '" + it->second + "'");
    return v;
}

long long Config::get_int(const std::string& key, long long fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    long long v = 0;
    const std::string& s = it->second;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError(key, "expected an integer, got '" + s + "'");
    return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    throw ConfigError(key, "expected true or false, got '" + it->second + "'");
}

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    std::vector<double> out;
    for (const auto& w : words(it->second)) {
        double v = 0.0;
        if (!parse_number(w, v)) throw ConfigError(key, "expected a list of numbers, got '" + w + "'");
        out.push_back(v);
    }
    return out;
}

Vec2 Config::get_vec2(const std::string& key, const Vec2& fallback) const {
    if (!has(key)) return fallback;
    const auto v = get_list(key, {});
    if (v.size() != 2) throw ConfigError(key, "expected two numbers 'x y'");
    return {v[0], v[1]};
}

std::string Config::serialize() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    return out;
}

std::uint64_t Config::hash() const {
    // output.dir is excluded so that relocated runs carry identical headers
    Config hashed = *this;
    hashed.entries_.erase("output.dir");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : hashed.serialize()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string Config::hash_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

const std::set<std::string> kFamilies{"constant", "linear", "gaussian"};

void require_positive(const std::string& key, double v) {
    if (!(v > 0.0)) throw ConfigError(key, "must be positive");
}

// corners of the domain's bounding box
std::vector<Vec2> bounding_corners(const DomainSpec& domain) {
    return std::visit(
        [](const auto& d) -> std::vector<Vec2> {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DiskDomain>) {
                const Vec2 r(d.radius, d.radius);
                return {d.center - r, d.center + Vec2(r.x(), -r.y()), d.center + r, d.center + Vec2(-r.x(), r.y())};
            } else {
                return {d.origin, d.origin + Vec2(d.width, 0), d.origin + Vec2(d.width, d.height),
                        d.origin + Vec2(0, d.height)};
            }
        },
        domain.shape);
}

struct Family {
    std::string type;
    double value = 0.0, a0 = 0.0, ax = 0.0, ay = 0.0, base = 0.0, amplitude = 0.0, width = 1.0;
    Vec2 center{0.0, 0.0};
};

Family read_family(const Config& cfg, const std::string& prefix, const std::string& fallback_type, double fallback_value,
                   bool allow_field) {
    Family f;
    f.type = cfg.get_string(prefix + ".type", fallback_type);
    if (!kFamilies.count(f.type) && !(allow_field && f.type == "uniform_field"))
        throw ConfigError(prefix + ".type", "unknown family '" + f.type + "'");
    f.value = cfg.get_double(prefix + ".value", fallback_value);
    f.a0 = cfg.get_double(prefix + ".a0", 0.0);
    f.ax = cfg.get_double(prefix + ".ax", 0.0);
    f.ay = cfg.get_double(prefix + ".ay", 0.0);
    f.base = cfg.get_double(prefix + ".base", 0.0);
    f.amplitude = cfg.get_double(prefix + ".amplitude", 0.0);
    f.width = cfg.get_double(prefix + ".width", 1.0);
    f.center = cfg.get_vec2(prefix + ".center", Vec2::Zero());
    if (f.type == "gaussian") require_positive(prefix + ".width", f.width);
    return f;
}

ScalarFunction to_function(const Family& f) {
    if (f.type == "constant") return [v = f.value](const Vec2&) { return v; };
    if (f.type == "linear") return [a0 = f.a0, ax = f.ax, ay = f.ay](const Vec2& p) { return a0 + ax * p.x() + ay * p.y(); };
    return [base = f.base, amp = f.amplitude, c = f.center, w = f.width](const Vec2& p) {
        return base + amp * std::exp(-(p - c).squaredNorm() / (2.0 * w * w));
    };
}

}  // namespace

CoefficientField make_coefficient(const Config& cfg, const std::string& prefix, const DomainSpec& domain) {
    const Family f = read_family(cfg, prefix, "constant", 1.0, false);
    double lo = 0.0, hi = 0.0;
    if (f.type == "constant") {
        lo = hi = f.value;
    } else if (f.type == "linear") {
        lo = std::numeric_limits<double>::infinity();
        hi = -lo;
        for (const Vec2& c : bounding_corners(domain)) {
            const double v = f.a0 + f.ax * c.x() + f.ay * c.y();
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    } else {
        lo = f.base + std::min(0.0, f.amplitude);
        hi = f.base + std::max(0.0, f.amplitude);
    }
    if (!(lo > 0.0)) throw ConfigError(prefix + ".type", "coefficient is not bounded below by a positive constant on the domain");
    return {to_function(f), lo, hi};
}

ScalarFunction make_scalar(const Config& cfg, const std::string& prefix) {
    return to_function(read_family(cfg, prefix, "constant", 0.0, false));
}

FluxFunction make_flux(const Config& cfg, const std::string& prefix, const CoefficientField& gamma) {
    const Family f = read_family(cfg, prefix, "constant", 0.0, true);
    if (f.type == "uniform_field") {
        const Vec2 g = cfg.get_vec2(prefix + ".field", Vec2(1.0, 0.0));
        return [g, gm = gamma.eval](const Vec2& p, const Vec2& n) { return gm(p) * g.dot(n); };
    }
    return [fn = to_function(f)](const Vec2& p, const Vec2&) { return fn(p); };
}

// ---------------------------------------------------------------------------
// RunConfig

namespace {

const std::set<std::string> kKnownKeys = [] {
    std::set<std::string> k{"domain.shape",        "domain.origin",        "domain.width",    "domain.height",
                            "domain.gamma_a",      "domain.center",        "domain.radius",   "domain.arc",
                            "domain.h",            "scene.object",         "scene.center",    "scene.radius",
                            "scene.axes",          "scene.angle",          "scene.points",    "scene.h_true",
                            "scene.noise",         "scene.seed",           "measurement.source", "measurement.file",
                            "recon.candidates",    "sweep.eps",            "sweep.z",         "sweep.n_segments",
                            "sweep.remainder",     "sweep.far_field_factor", "polarization.shape", "polarization.radius",
                            "polarization.axes",   "polarization.angle",   "polarization.points", "polarization.panels",
                            "polarization.history", "output.dir"};
    for (const char* p : {"gamma", "source", "flux"})
        for (const char* f : {"type", "value", "a0", "ax", "ay", "base", "amplitude", "center", "width"})
            k.insert(std::string(p) + "." + f);
    k.insert("flux.field");
    return k;
}();

std::vector<Vec2> read_points(const Config& cfg, const std::string& key) {
    const auto v = cfg.get_list(key, {});
    if (v.size() < 6 || v.size() % 2 != 0) throw ConfigError(key, "expected at least three 'x y' pairs");
    std::vector<Vec2> pts;
    for (std::size_t i = 0; i < v.size(); i += 2) pts.emplace_back(v[i], v[i + 1]);
    return pts;
}

DomainSpec read_domain(const Config& cfg) {
    DomainSpec spec;
    spec.h = cfg.get_double("domain.h", 0.02);
    require_positive("domain.h", spec.h);
    const std::string shape = cfg.get_string("domain.shape", "rectangle");
    if (shape == "rectangle") {
        RectDomain r;
        r.origin = cfg.get_vec2("domain.origin", r.origin);
        r.width = cfg.get_double("domain.width", r.width);
        r.height = cfg.get_double("domain.height", r.height);
        require_positive("domain.width", r.width);
        require_positive("domain.height", r.height);
        if (spec.h >= std::min(r.width, r.height)) throw ConfigError("domain.h", "must be smaller than the domain");
        if (cfg.has("domain.gamma_a")) {
            r.gamma_a = {false, false, false, false};
            for (const auto& w : words(cfg.get_string("domain.gamma_a", ""))) {
                static const std::map<std::string, int> sides{{"bottom", 0}, {"right", 1}, {"top", 2}, {"left", 3}};
                const auto it = sides.find(w);
                if (it == sides.end()) throw ConfigError("domain.gamma_a", "unknown side '" + w + "'");
                r.gamma_a[it->second] = true;
            }
        }
        const int n = static_cast<int>(std::count(r.gamma_a.begin(), r.gamma_a.end(), true));
        if (n == 0 || n == 4) throw ConfigError("domain.gamma_a", "accessible boundary must be a nonempty strict subset");
        spec.shape = r;
    } else if (shape == "disk") {
        DiskDomain d;
        d.center = cfg.get_vec2("domain.center", d.center);
        d.radius = cfg.get_double("domain.radius", d.radius);
        require_positive("domain.radius", d.radius);
        if (spec.h >= d.radius) throw ConfigError("domain.h", "must be smaller than the disk radius");
        const Vec2 arc = cfg.get_vec2("domain.arc", Vec2(d.gamma_a.begin, d.gamma_a.end));
        d.gamma_a = {arc.x(), arc.y()};
        if (!(arc.x() >= 0.0 && arc.y() > arc.x() && arc.y() - arc.x() < 2.0 * kPi))
            throw ConfigError("domain.arc", "arc must be a nonempty strict subset of [0, 2pi)");
        spec.shape = d;
    } else {
        throw ConfigError("domain.shape", "unknown shape '" + shape + "' (rectangle | disk)");
    }
    return spec;
}

std::optional<Shape> read_object(const Config& cfg) {
    const std::string kind = cfg.get_string("scene.object", "none");
    if (kind == "none") return std::nullopt;
    if (kind == "circle") {
        Circle c{cfg.get_vec2("scene.center", Vec2(0.5, 0.5)), cfg.get_double("scene.radius", 0.1)};
        require_positive("scene.radius", c.radius);
        return c;
    }
    if (kind == "ellipse") {
        const Vec2 ax = cfg.get_vec2("scene.axes", Vec2(0.2, 0.1));
        if (!(ax.x() > 0.0 && ax.y() > 0.0)) throw ConfigError("scene.axes", "semi-axes must be positive");
        return Ellipse{cfg.get_vec2("scene.center", Vec2(0.5, 0.5)), ax.x(), ax.y(), cfg.get_double("scene.angle", 0.0)};
    }
    if (kind == "polygon") {
        Polygon p{read_points(cfg, "scene.points")};
        if (!(polygon_signed_area(p.points) > 0.0)) throw ConfigError("scene.points", "polygon must be counter-clockwise");
        return p;
    }
    throw ConfigError("scene.object", "unknown object '" + kind + "' (none | circle | ellipse | polygon)");
}

}  // namespace

RunConfig build_run_config(const Config& cfg) {
    for (const auto& [k, v] : cfg.entries())
        if (!kKnownKeys.count(k)) throw ConfigError(k, "unknown key");

    RunConfig rc;
    rc.raw = cfg;
    rc.domain = read_domain(cfg);
    rc.data.gamma = make_coefficient(cfg, "gamma", rc.domain);
    rc.data.source = make_scalar(cfg, "source");
    rc.data.flux = make_flux(cfg, "flux", rc.data.gamma);
    rc.data.psi_m = [](const Vec2&) { return 0.0; };

    rc.scene.domain = rc.domain;
    rc.scene.data = rc.data;
    rc.scene.object = read_object(cfg);
    rc.scene.h_true = cfg.get_double("scene.h_true", rc.domain.h / 2.0);
    require_positive("scene.h_true", rc.scene.h_true);
    rc.noise = cfg.get_double("scene.noise", 0.0);
    if (!(rc.noise >= 0.0)) throw ConfigError("scene.noise", "must be nonnegative");
    const long long seed = cfg.get_int("scene.seed", 0);
    if (seed < 0) throw ConfigError("scene.seed", "must be nonnegative");
    rc.seed = static_cast<std::uint64_t>(seed);

    const std::string src = cfg.get_string("measurement.source", "synth");
    if (src == "synth")
        rc.source = MeasurementSource::Synth;
    else if (src == "consistent")
        rc.source = MeasurementSource::Consistent;
    else if (src == "file")
        rc.source = MeasurementSource::File;
    else
        throw ConfigError("measurement.source", "unknown source '" + src + "' (synth | consistent | file)");
    if (rc.source == MeasurementSource::File) {
        if (!cfg.has("measurement.file")) throw ConfigError("measurement.file", "required when measurement.source = file");
        rc.measurement_file = cfg.get_string("measurement.file", "");
    }
    if (rc.source == MeasurementSource::Synth) {
        if (rc.scene.h_true > rc.domain.h / 2.0 * (1.0 + 1e-12))
            throw ConfigError("scene.h_true", "synthesis mesh must be at least twice as fine as domain.h");
        try {
            check_scene(rc.scene);
        } catch (const GeometryError& e) {
            throw ConfigError("scene.object", e.what());
        }
    }

    rc.candidates = cfg.get_list("recon.candidates", rc.candidates);
    if (rc.candidates.empty()) throw ConfigError("recon.candidates", "needs at least one fraction");
    for (double f : rc.candidates)
        if (!(f > 0.0 && f <= 1.0)) throw ConfigError("recon.candidates", "fractions must lie in (0, 1]");

    rc.sweep.eps = cfg.get_list("sweep.eps", rc.sweep.eps);
    if (rc.sweep.eps.empty()) throw ConfigError("sweep.eps", "needs at least one value");
    for (std::size_t i = 0; i < rc.sweep.eps.size(); ++i) {
        if (!(rc.sweep.eps[i] > 0.0)) throw ConfigError("sweep.eps", "values must be positive");
        if (i > 0 && !(rc.sweep.eps[i] < rc.sweep.eps[i - 1])) throw ConfigError("sweep.eps", "values must be strictly decreasing");
    }
    const std::string z = cfg.get_string("sweep.z", "argmin");
    if (z != "argmin") rc.sweep.z = cfg.get_vec2("sweep.z", Vec2::Zero());
    rc.sweep.n_segments = static_cast<int>(cfg.get_int("sweep.n_segments", rc.sweep.n_segments));
    if (rc.sweep.n_segments < 16) throw ConfigError("sweep.n_segments", "holes need at least 16 segments");
    rc.sweep.remainder = cfg.get_bool("sweep.remainder", rc.sweep.remainder);
    rc.sweep.far_field_factor = cfg.get_double("sweep.far_field_factor", rc.sweep.far_field_factor);
    if (!(rc.sweep.far_field_factor > 1.0)) throw ConfigError("sweep.far_field_factor", "must exceed 1");

    auto& pol = rc.polarization;
    pol.shape = cfg.get_string("polarization.shape", pol.shape);
    if (pol.shape != "circle" && pol.shape != "ellipse" && pol.shape != "polygon")
        throw ConfigError("polarization.shape", "unknown shape '" + pol.shape + "' (circle | ellipse | polygon)");
    pol.radius = cfg.get_double("polarization.radius", pol.radius);
    require_positive("polarization.radius", pol.radius);
    pol.axes = cfg.get_vec2("polarization.axes", pol.axes);
    if (!(pol.axes.x() > 0.0 && pol.axes.y() > 0.0)) throw ConfigError("polarization.axes", "semi-axes must be positive");
    pol.angle = cfg.get_double("polarization.angle", pol.angle);
    if (pol.shape == "polygon") pol.points = read_points(cfg, "polarization.points");
    pol.panels = static_cast<int>(cfg.get_int("polarization.panels", pol.panels));
    if (pol.shape != "polygon" && (pol.panels < 12 || pol.panels > 4096))
        throw ConfigError("polarization.panels", "must lie in [12, 4096]");
    if (cfg.has("polarization.history")) {
        pol.history.clear();
        for (double v : cfg.get_list("polarization.history", {})) {
            if (v != std::floor(v) || v < 12 || v > 4096)
                throw ConfigError("polarization.history", "panel counts must be integers in [12, 4096]");
            pol.history.push_back(static_cast<int>(v));
        }
    }

    rc.out_dir = cfg.get_string("output.dir", "out");
    return rc;
}

std::string RunConfig::metadata() const {
    return std::string("kvtopo ") + kVersion + " config_hash=" + raw.hash_hex();
}

std::string RunConfig::metadata_json() const {
    nlohmann::ordered_json j;
    j["toolkit"] = "kvtopo";
    j["version"] = kVersion;
    j["config_hash"] = raw.hash_hex();
    return j.dump();
}

}  // namespace kvtopo
