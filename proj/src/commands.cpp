#include "kvtopo/commands.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "kvtopo/asymp.hpp"
#include "kvtopo/bem.hpp"
#include "kvtopo/errors.hpp"
#include "kvtopo/io.hpp"
#include "kvtopo/recon.hpp"
#include "kvtopo/synth.hpp"

namespace kvtopo {

using json = nlohmann::ordered_json;

namespace {

std::filesystem::path prepare(const RunConfig& rc, const std::string& name) {
    std::error_code ec;
    std::filesystem::create_directories(rc.out_dir, ec);
    if (ec) throw Error("cannot create output directory " + rc.out_dir.string() + ": " + ec.message());
    return rc.out_dir / name;
}

template <class Writer>
std::filesystem::path write_file(const RunConfig& rc, const std::string& name, Writer&& writer) {
    const auto path = prepare(rc, name);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    writer(out);
    if (!out) throw Error("write failed for " + path.string());
    return path;
}

json meta(const RunConfig& rc) { return json::parse(rc.metadata_json()); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::shared_ptr<const Mesh> inversion_mesh(const RunConfig& rc) {
    return std::make_shared<const Mesh>(generate_mesh(rc.domain));
}

TopGradResult background_gradient(const RunConfig& rc, std::shared_ptr<const Mesh> mesh) {
    auto data = std::make_shared<const ProblemData>(inversion_data(rc, mesh));
    return topological_gradient(solve_pair(mesh, data));
}

PanelCurve polarization_curve(const PolarizationSpec& p, int panels) {
    if (p.shape == "circle") return PanelCurve::circle(p.radius, panels);
    if (p.shape == "ellipse") return PanelCurve::ellipse(p.axes.x(), p.axes.y(), panels, p.angle);
    return PanelCurve::from_polygon(p.points);
}

}  // namespace

ProblemData inversion_data(const RunConfig& rc, std::shared_ptr<const Mesh> mesh) {
    switch (rc.source) {
        case MeasurementSource::Consistent:
            return with_consistent_measurement(std::move(mesh), rc.data);
        case MeasurementSource::File: {
            ProblemData d = rc.data;
            d.psi_m = measurement_function(load_measurement(rc.measurement_file), rc.domain);
            return d;
        }
        case MeasurementSource::Synth:
        default: {
            ProblemData d = rc.data;
            d.psi_m = measurement_function(generate_measurement(rc.scene, rc.noise, rc.seed), rc.domain);
            return d;
        }
    }
}

CommandResult cmd_mesh(const RunConfig& rc) {
    const Mesh mesh = generate_mesh(rc.domain);
    CommandResult r;
    r.files.push_back(write_file(rc, "mesh.txt", [&](std::ostream& o) { write_mesh(mesh, o, rc.metadata()); }));
    r.summary = "mesh: " + std::to_string(mesh.num_nodes()) + " nodes, " + std::to_string(mesh.num_triangles()) +
                " triangles, " + std::to_string(mesh.boundary.size()) + " boundary edges, max edge " +
                fmt("%.4g", mesh.max_edge_length()) + "\n";
    return r;
}

CommandResult cmd_synth(const RunConfig& rc) {
    const Measurement m = generate_measurement(rc.scene, rc.noise, rc.seed);
    CommandResult r;
    r.files.push_back(write_file(rc, "measurement.csv", [&](std::ostream& o) { write_measurement_csv(m, o, rc.metadata()); }));
    json sidecar = json::parse(measurement_metadata_json(m));
    sidecar["meta"] = meta(rc);
    r.files.push_back(write_file(rc, "measurement.meta.json", [&](std::ostream& o) { o << sidecar.dump(2) << '\n'; }));
    r.summary = "synth: " + std::to_string(m.samples.size()) + " samples on GammaA, object " + m.scene + ", noise " +
                fmt("%g", m.noise_level) + ", seed " + std::to_string(m.seed) + "\n";
    return r;
}

CommandResult cmd_tgrad(const RunConfig& rc) {
    auto mesh = inversion_mesh(rc);
    const TopGradResult tg = background_gradient(rc, mesh);
    CommandResult r;
    r.files.push_back(write_file(rc, "deltaK.csv", [&](std::ostream& o) { write_field_csv(*mesh, tg.deltaK.values, o, rc.metadata()); }));
    Eigen::VectorXd interior(mesh->num_nodes());
    for (int v = 0; v < mesh->num_nodes(); ++v) interior[v] = tg.interior[v] ? 1.0 : 0.0;
    r.files.push_back(write_file(rc, "tgrad.vtk", [&](std::ostream& o) {
        write_vtk(*mesh, o, rc.metadata() + " topological gradient",
                  {{"deltaK", tg.deltaK.values}, {"psi_N", tg.pair.psi_N.values}, {"psi_D", tg.pair.psi_D.values},
                   {"interior", interior}});
    }));
    r.files.push_back(write_file(rc, "tgrad_summary.json", [&](std::ostream& o) { o << topgrad_summary_json(tg, rc.metadata_json()); }));
    r.summary = "tgrad: K = " + fmt("%.6e", tg.K_value) + ", min deltaK = " + fmt("%.6e", tg.min_value());
    if (const int a = tg.argmin_node(); a >= 0)
        r.summary += " at node " + std::to_string(a) + " (" + fmt("%.6g", mesh->nodes[a].x()) + ", " +
                     fmt("%.6g", mesh->nodes[a].y()) + ")";
    r.summary += "\n";
    return r;
}

CommandResult cmd_reconstruct(const RunConfig& rc) {
    auto mesh = inversion_mesh(rc);
    const TopGradResult tg = background_gradient(rc, mesh);
    Reconstruction rec = reconstruct(tg, rc.candidates);
    const bool truth_known = rc.source == MeasurementSource::Synth && rc.scene.object.has_value();
    if (truth_known) score(rec, *mesh, *rc.scene.object);

    json j;
    j["meta"] = meta(rc);
    j["indicated"] = rec.indicated();
    j["chosen_c"] = rec.chosen_c ? json(*rec.chosen_c) : json(nullptr);
    j["K_before"] = rec.K_before;
    j["K_after"] = rec.K_after;
    j["min_deltaK"] = tg.min_value();
    j["n_elements"] = rec.object_elements.size();
    j["components"] = rec.components;
    j["center_estimate"] = rec.center_estimate ? json{rec.center_estimate->x(), rec.center_estimate->y()} : json(nullptr);
    j["jaccard"] = rec.jaccard ? json(*rec.jaccard) : json(nullptr);
    j["center_error"] = rec.center_error ? json(*rec.center_error) : json(nullptr);
    json cands = json::array();
    for (const auto& c : rec.candidates)
        cands.push_back({{"fraction", c.fraction}, {"c", c.c}, {"n_elements", c.n_elements}, {"valid", c.valid},
                         {"K_after", c.valid ? json(c.K_after) : json(nullptr)}});
    j["candidates"] = cands;
    j["object_elements"] = rec.object_elements;

    std::ostringstream text;
    text << rc.metadata() << '\n';
    if (!rec.indicated()) {
        text << "no object indicated (K_after = K_before = " << format_double(rec.K_before) << ")\n";
    } else {
        text << "chosen c        " << format_double(*rec.chosen_c) << '\n'
             << "K before/after  " << format_double(rec.K_before) << " / " << format_double(rec.K_after) << '\n'
             << "elements        " << rec.object_elements.size() << " in " << rec.components << " component(s)\n"
             << "center estimate (" << format_double(rec.center_estimate->x()) << ", "
             << format_double(rec.center_estimate->y()) << ")\n";
        if (rec.jaccard) text << "jaccard         " << format_double(*rec.jaccard) << '\n';
        if (rec.center_error) text << "center error    " << format_double(*rec.center_error) << '\n';
    }

    CommandResult r;
    r.files.push_back(write_file(rc, "reconstruction.json", [&](std::ostream& o) { o << j.dump(2) << '\n'; }));
    r.files.push_back(write_file(rc, "reconstruction.txt", [&](std::ostream& o) { o << text.str(); }));
    r.files.push_back(write_file(rc, "candidates.csv", [&](std::ostream& o) {
        o << "# " << rc.metadata() << "\nfraction,c,n_elements,valid,K_after\n";
        for (const auto& c : rec.candidates)
            o << format_double(c.fraction) << ',' << format_double(c.c) << ',' << c.n_elements << ','
              << (c.valid ? 1 : 0) << ',' << (c.valid ? format_double(c.K_after) : std::string("nan")) << '\n';
    }));
    std::vector<double> mask(mesh->triangles.size(), 0.0);
    for (int t : rec.object_elements) mask[t] = 1.0;
    r.files.push_back(write_file(rc, "reconstruction.vtk", [&](std::ostream& o) {
        write_vtk(*mesh, o, rc.metadata() + " reconstruction", {{"deltaK", tg.deltaK.values}}, {{"object", mask}});
    }));
    r.summary = "reconstruct:\n" + text.str().substr(text.str().find('\n') + 1);
    return r;
}

CommandResult cmd_polarization(const RunConfig& rc) {
    const auto& p = rc.polarization;
    const PanelCurve curve = polarization_curve(p, p.panels);
    const Mat2 M = polarization_matrix(curve);
    std::ostringstream table;
    table << "# " << rc.metadata() << '\n'
          << "# polarization matrix, " << p.shape << ", " << curve.size() << " panels\n"
          << format_double(M(0, 0)) << ' ' << format_double(M(0, 1)) << '\n'
          << format_double(M(1, 0)) << ' ' << format_double(M(1, 1)) << '\n';

    CommandResult r;
    r.files.push_back(write_file(rc, "polarization.txt", [&](std::ostream& o) { o << table.str(); }));
    if (p.shape != "polygon") {
        r.files.push_back(write_file(rc, "polarization_history.csv", [&](std::ostream& o) {
            o << "# " << rc.metadata() << "\npanels,M11,M12,M21,M22,change\n";
            std::optional<Mat2> prev;
            for (int n : p.history) {
                const Mat2 Mn = polarization_matrix(polarization_curve(p, n));
                o << n << ',' << format_double(Mn(0, 0)) << ',' << format_double(Mn(0, 1)) << ','
                  << format_double(Mn(1, 0)) << ',' << format_double(Mn(1, 1)) << ','
                  << (prev ? format_double((Mn - *prev).norm()) : std::string("nan")) << '\n';
                prev = Mn;
            }
        }));
    }
    r.summary = "polarization (" + std::to_string(curve.size()) + " panels):\n  [" + fmt("%12.6f", M(0, 0)) + " " +
                fmt("%12.6f", M(0, 1)) + " ]\n  [" + fmt("%12.6f", M(1, 0)) + " " + fmt("%12.6f", M(1, 1)) + " ]\n";
    return r;
}

CommandResult cmd_sweep(const RunConfig& rc) {
    auto mesh = inversion_mesh(rc);
    const TopGradResult tg = background_gradient(rc, mesh);
    SweepOptions opts;
    opts.n_segments = rc.sweep.n_segments;
    opts.far_field_factor = rc.sweep.far_field_factor;
    Vec2 z;
    if (rc.sweep.z) {
        z = *rc.sweep.z;
    } else {
        const int a = admissible_argmin(tg, rc.domain, sweep_clearance(rc.sweep.eps));
        if (a < 0) throw ConfigError("sweep.z", "no mesh node is far enough from the boundary for the largest eps");
        z = mesh->nodes[a];
    }
    const SweepReport rep = sweep(rc.domain, tg, z, rc.sweep.eps, opts);

    CommandResult r;
    r.files.push_back(write_file(rc, "sweep.csv", [&](std::ostream& o) {
        o << "# " << rc.metadata() << '\n'
          << "# z = " << format_double(z.x()) << ' ' << format_double(z.y())
          << ", deltaK(z) = " << format_double(rep.deltaK_z) << '\n'
          << "# measured = K(domain with hole) - K(same triangulation without hole)\n";
        for (const auto& [eps, why] : rep.skipped) o << "# skipped eps " << format_double(eps) << ": " << why << '\n';
        o << "eps,measured,predicted,ratio\n";
        for (std::size_t i = 0; i < rep.eps_list.size(); ++i)
            o << format_double(rep.eps_list[i]) << ',' << format_double(rep.measured[i]) << ','
              << format_double(rep.predicted[i]) << ','
              << (rep.ratios[i] ? format_double(*rep.ratios[i]) : std::string("undefined")) << '\n';
        if (rep.fit)
            o << "# fitted_slope " << format_double(rep.fit->slope) << " stderr "
              << (rep.fit->slope_stderr ? format_double(*rep.fit->slope_stderr) : std::string("undefined")) << '\n';
        else
            o << "# fitted_slope undefined\n";
    }));
    r.summary = "sweep at (" + fmt("%.6g", z.x()) + ", " + fmt("%.6g", z.y()) + "), deltaK = " + fmt("%.6e", rep.deltaK_z) + "\n";
    for (std::size_t i = 0; i < rep.eps_list.size(); ++i)
        r.summary += "  eps " + fmt("%-6g", rep.eps_list[i]) + " measured " + fmt("% .6e", rep.measured[i]) +
                     " predicted " + fmt("% .6e", rep.predicted[i]) + " ratio " +
                     (rep.ratios[i] ? fmt("%.4f", *rep.ratios[i]) : std::string("undefined")) + "\n";
    for (const auto& [eps, why] : rep.skipped) r.summary += "  eps " + fmt("%g", eps) + " skipped: " + why + "\n";
    r.summary += rep.fit ? "  fitted slope " + fmt("%.4f", rep.fit->slope) +
                               (rep.fit->slope_stderr ? " +- " + fmt("%.4f", *rep.fit->slope_stderr) : std::string()) + "\n"
                         : std::string("  fitted slope undefined\n");

    if (rc.sweep.remainder && rc.sweep.eps.size() >= 3) {
        const RemainderReport rem = remainder_scaling(rc.domain, tg.pair.data, z, rc.sweep.eps, opts);
        r.files.push_back(write_file(rc, "remainder.csv", [&](std::ostream& o) {
            o << "# " << rc.metadata() << '\n'
              << "# far-field proxy: ||psi_N(eps) - psi_N(0)||_H1 on eps < |x - z| < " << format_double(opts.far_field_factor)
              << " eps; the corrector term is not constructed\n";
            for (const auto& [eps, why] : rem.skipped) o << "# skipped eps " << format_double(eps) << ": " << why << '\n';
            o << "eps,norm\n";
            for (std::size_t i = 0; i < rem.eps_list.size(); ++i)
                o << format_double(rem.eps_list[i]) << ',' << format_double(rem.norms[i]) << '\n';
            o << "# fitted_exponent " << (rem.fit ? format_double(rem.fit->slope) : std::string("undefined")) << '\n';
        }));
        r.summary += rem.fit ? "  remainder exponent " + fmt("%.4f", rem.fit->slope) + "\n"
                             : std::string("  remainder exponent not reported (norms at solver-noise level)\n");
    }
    return r;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const ParseError*>(&e)) return kExitParse;
    if (dynamic_cast<const GeometryError*>(&e)) return kExitGeometry;
    if (dynamic_cast<const AssemblyError*>(&e)) return kExitAssembly;
    if (dynamic_cast<const ConvergenceError*>(&e)) return kExitConvergence;
    if (dynamic_cast<const Error*>(&e)) return kExitToolkit;
    return kExitUnexpected;
}

}  // namespace kvtopo
