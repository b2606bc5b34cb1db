#pragma once

#include <exception>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "kvtopo/config.hpp"
#include "kvtopo/kv.hpp"

namespace kvtopo {

struct CommandResult {
    std::vector<std::filesystem::path> files;  // written under RunConfig::out_dir
    std::string summary;                       // human-readable, printed by the CLI
};

/// Problem data on `mesh` with psi_m taken from the configured measurement
/// source, see MeasurementSource.
ProblemData inversion_data(const RunConfig& rc, std::shared_ptr<const Mesh> mesh);

CommandResult cmd_mesh(const RunConfig& rc);
CommandResult cmd_synth(const RunConfig& rc);
CommandResult cmd_tgrad(const RunConfig& rc);
CommandResult cmd_reconstruct(const RunConfig& rc);
CommandResult cmd_polarization(const RunConfig& rc);
CommandResult cmd_sweep(const RunConfig& rc);

/// Process exit codes:
///   0 success, 1 unexpected failure, 2 usage or configuration error,
///   3 malformed input file, 4 geometry error, 5 assembly error,
///   6 solver did not converge, 7 other toolkit error (I/O included).
enum ExitCode : int {
    kExitOk = 0,
    kExitUnexpected = 1,
    kExitConfig = 2,
    kExitParse = 3,
    kExitGeometry = 4,
    kExitAssembly = 5,
    kExitConvergence = 6,
    kExitToolkit = 7,
};

int exit_code_for(const std::exception& e);

}  // namespace kvtopo
