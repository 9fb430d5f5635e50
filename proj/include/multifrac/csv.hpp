#pragma once

#include <string>
#include <vector>

#include "multifrac/analysis.hpp"
#include "multifrac/gaussian.hpp"
#include "multifrac/path.hpp"

namespace multifrac {

/// Shortest round-trip decimal form; locale-independent and bit-stable.
std::string format_double(double x);

void write_path_csv(const std::string& file, const SampledPath& path,
                    const SampledPath* hurst = nullptr);

/// Multi-path file with a path_id column.
void write_paths_csv(const std::string& file, const std::vector<SampledPath>& paths,
                     const std::vector<SampledPath>* hurst_paths = nullptr);

void write_covariance_csv(const std::string& file, const CovarianceTable& table);

void write_rescaling_csv(const std::string& file, const RescalingReport& rep);

void write_kc_csv(const std::string& file, const KcCheckReport& rep);

void write_fig2_csv(const std::string& file, const Fig2Report& rep);

}  // namespace multifrac
