#include "cdiff/io.hpp"

#include <cstdio>
#include <fstream>

namespace cdiff {

namespace {

std::ofstream open_for_write(const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  return os;
}

std::vector<std::string> coordinate_names(const GridSpec& grid) {
  std::vector<std::string> names;
  for (int a = 0; a < grid.dimension(); ++a) names.push_back("x" + std::to_string(a));
  return names;
}

std::vector<std::vector<double>> coordinate_columns(const GridSpec& grid) {
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(grid.dimension()));
  for (int a = 0; a < grid.dimension(); ++a) {
    auto& c = cols[static_cast<std::size_t>(a)];
    c.reserve(static_cast<std::size_t>(grid.size()));
    for (Index i = 0; i < grid.size(); ++i) c.push_back(grid.coordinate(i, a));
  }
  return cols;
}

template <typename Derived>
std::vector<double> to_column(const Eigen::DenseBase<Derived>& v) {
  std::vector<double> out(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = v(i);
  return out;
}

}  // namespace

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw std::invalid_argument("csv header/column mismatch");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw std::invalid_argument("csv columns differ in length");
  }
  auto os = open_for_write(file);
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  os << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      os << (c ? "," : "") << format_number(columns[c][r]);
    }
    os << '\n';
  }
}

void write_wave_csv(const std::filesystem::path& file, const WaveField& psi) {
  auto header = coordinate_names(psi.grid());
  auto cols = coordinate_columns(psi.grid());
  const auto& a = psi.amplitudes();
  header.insert(header.end(), {"re", "im", "abs2", "t"});
  cols.push_back(to_column(a.real()));
  cols.push_back(to_column(a.imag()));
  cols.push_back(to_column(a.cwiseAbs2()));
  cols.emplace_back(static_cast<std::size_t>(a.size()), psi.time());
  write_csv(file, header, cols);
}

void write_density_csv(const std::filesystem::path& file, const DensityField& rho,
                       const DensityField* reference) {
  auto header = coordinate_names(rho.grid());
  auto cols = coordinate_columns(rho.grid());
  header.emplace_back("rho");
  cols.push_back(to_column(rho.values()));
  if (reference) {
    if (!(reference->grid() == rho.grid())) throw InvalidSpec("reference density grid differs");
    header.emplace_back("reference");
    cols.push_back(to_column(reference->values()));
  }
  write_csv(file, header, cols);
}

void write_drift_csv(const std::filesystem::path& file, const DriftField& drift,
                     const Eigen::MatrixXd* generative) {
  auto header = coordinate_names(drift.grid);
  auto cols = coordinate_columns(drift.grid);
  for (Index c = 0; c < drift.wPlus.cols(); ++c) {
    const std::string k = std::to_string(c);
    header.insert(header.end(),
                  {"w_plus_re" + k, "w_plus_im" + k, "w_minus_re" + k, "w_minus_im" + k});
    cols.push_back(to_column(drift.wPlus.col(c).real()));
    cols.push_back(to_column(drift.wPlus.col(c).imag()));
    cols.push_back(to_column(drift.wMinus.col(c).real()));
    cols.push_back(to_column(drift.wMinus.col(c).imag()));
  }
  if (generative) {
    for (Index c = 0; c < generative->cols(); ++c) {
      header.push_back("b" + std::to_string(c));
      cols.push_back(to_column(generative->col(c)));
    }
  }
  write_csv(file, header, cols);
}

void write_ensemble_summary_csv(const std::filesystem::path& file, const PathEnsemble& ensemble,
                                const GridSpec& bins) {
  if (bins.dimension() != 1) throw InvalidSpec("ensemble summary bins are one-dimensional");
  const Axis& ax = bins.axis(0);
  std::vector<std::string> header{"time", "mean", "variance"};
  for (Index c = 0; c < bins.size(); ++c) header.push_back("bin" + std::to_string(c));
  std::vector<std::vector<double>> cols(header.size());
  for (std::size_t s = 0; s < ensemble.positions.size(); ++s) {
    const auto x = ensemble.positions[s].col(0);
    const double mean = x.mean();
    const double var = (x.array() - mean).square().sum() / static_cast<double>(std::max<Index>(1, x.size() - 1));
    cols[0].push_back(ensemble.snapshotTimes[s]);
    cols[1].push_back(mean);
    cols[2].push_back(var);
    std::vector<double> counts(static_cast<std::size_t>(bins.size()), 0.0);
    const double h = ax.spacing();
    for (Index p = 0; p < x.size(); ++p) {
      double u = (x(p) - ax.lower) / h + (ax.periodic ? 0.5 : 0.0);
      if (ax.periodic) u -= static_cast<double>(ax.cells) * std::floor(u / static_cast<double>(ax.cells));
      if (u < 0.0 || u >= static_cast<double>(ax.cells)) continue;
      counts[static_cast<std::size_t>(u)] += 1.0;
    }
    for (std::size_t c = 0; c < counts.size(); ++c) cols[3 + c].push_back(counts[c]);
  }
  write_csv(file, header, cols);
}

}  // namespace cdiff
