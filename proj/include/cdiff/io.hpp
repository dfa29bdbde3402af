#ifndef CDIFF_IO_HPP
#define CDIFF_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "cdiff/drift.hpp"
#include "cdiff/sampler.hpp"

namespace cdiff {

/// printf("%.17g"); round-trips every double and never depends on locale.
std::string format_number(double value);

/// Column-major CSV: one header entry per column, all columns the same length.
void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

/// x.., re, im, abs2, t
void write_wave_csv(const std::filesystem::path& file, const WaveField& psi);

/// x.., rho[, reference]
void write_density_csv(const std::filesystem::path& file, const DensityField& rho,
                       const DensityField* reference = nullptr);

/// x.., w_plus_re/im, w_minus_re/im per component[, b per component]
void write_drift_csv(const std::filesystem::path& file, const DriftField& drift,
                     const Eigen::MatrixXd* generative = nullptr);

/// One row per snapshot: time, mean, variance (axis 0), then histogram counts
/// on the cells of `bins`.
void write_ensemble_summary_csv(const std::filesystem::path& file, const PathEnsemble& ensemble,
                                const GridSpec& bins);

}  // namespace cdiff

#endif  // CDIFF_IO_HPP
