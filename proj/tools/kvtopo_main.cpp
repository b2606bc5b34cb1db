#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "kvtopo/commands.hpp"
#include "kvtopo/config.hpp"
#include "kvtopo/errors.hpp"

namespace {

using Command = kvtopo::CommandResult (*)(const kvtopo::RunConfig&);

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

int run(const Options& opts, Command command) {
    kvtopo::Config cfg;
    if (!opts.config.empty()) cfg = kvtopo::Config::load(opts.config);
    if (!opts.out.empty()) cfg.set("output.dir", opts.out);
    if (opts.seed) cfg.set("scene.seed", std::to_string(*opts.seed));
    const kvtopo::RunConfig rc = kvtopo::build_run_config(cfg);
    const kvtopo::CommandResult result = command(rc);
    std::cout << result.summary;
    for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
    return kvtopo::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kvtopo: Kohn-Vogelius topological-gradient toolkit"};
    app.set_version_flag("--version", std::string("kvtopo ") + kvtopo::kVersion);
    app.footer(
        "Exit codes: 0 success, 1 unexpected failure, 2 usage or configuration error,\n"
        "3 malformed input file, 4 geometry error, 5 assembly error,\n"
        "6 solver did not converge, 7 other toolkit error (I/O included).");
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    Options opts;
    std::uint64_t seed = 0;
    app.add_option("--config", opts.config, "configuration file (flat key = value)");
    app.add_option("--out", opts.out, "output directory (overrides output.dir)");
    auto* seed_opt = app.add_option("--seed", seed, "noise seed (overrides scene.seed)");

    Command selected = nullptr;
    const std::pair<const char*, std::pair<const char*, Command>> commands[] = {
        {"mesh", {"generate the inversion mesh", kvtopo::cmd_mesh}},
        {"synth", {"synthesize boundary measurements from the true scene", kvtopo::cmd_synth}},
        {"tgrad", {"compute K and the topological gradient", kvtopo::cmd_tgrad}},
        {"reconstruct", {"one-iteration object reconstruction", kvtopo::cmd_reconstruct}},
        {"polarization", {"polarization matrix of a reference shape", kvtopo::cmd_polarization}},
        {"sweep", {"compare measured and predicted K variation over eps", kvtopo::cmd_sweep}},
    };
    for (const auto& [name, info] : commands) {
        auto* sub = app.add_subcommand(name, info.first);
        sub->callback([&selected, cmd = info.second] { selected = cmd; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kvtopo::kExitOk : kvtopo::kExitConfig;
    }
    if (*seed_opt) opts.seed = seed;

    try {
        return run(opts, selected);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kvtopo::exit_code_for(e);
    }
}
