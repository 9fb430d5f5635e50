#pragma once

#include <cstdint>
#include <string>

#include "multifrac/hurst.hpp"
#include "multifrac/kernels.hpp"
#include "multifrac/simulate.hpp"

namespace multifrac {

/// Knobs for the verification suites.
struct AnalysisConfig {
    std::size_t n_paths = 0;  // 0: suite default
    double kc_p = 4.0;
    double kc_claim = 0.0;  // 0: claim the true exponent
};

/// Parsed run configuration (JSON, schema 1). Unknown fields anywhere are
/// rejected so that typos fail loudly.
struct RunConfig {
    UniformGrid grid{0.0, 1.0, 1024};
    KernelSpec kernel;
    HurstSpec hurst;
    SimConfig sim;
    AnalysisConfig analysis;
    std::uint64_t seed = 42;
    std::size_t n_paths = 1;

    /// sim carries grid/seed copies ready for the simulators.
    void finalize();
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

/// Schema-1 JSON fragments (the inverse of the parser), used for manifests.
std::string hurst_spec_to_json(const HurstSpec& spec);
std::string kernel_spec_to_json(const KernelSpec& spec);

/// Thrown on schema violations; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace multifrac
