#ifndef SINKGAN_IO_HPP
#define SINKGAN_IO_HPP

#include "sinkgan/measure.hpp"
#include "sinkgan/training.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sinkgan {

/// Point-cloud CSV: one point per row. A header `x0,x1,...,weight` marks the
/// last column as weights; without a header the weights are uniform. A header
/// without `weight` is accepted and ignored.
Measure read_point_csv(std::istream &in, const std::string &source = "<stream>");
Measure read_point_csv(const std::filesystem::path &path);
void write_point_csv(std::ostream &out, const Measure &mu, bool with_weights = false);
void write_point_csv(const std::filesystem::path &path, const Measure &mu,
                     bool with_weights = false);

void write_metrics_csv(std::ostream &out, const std::vector<MetricRow> &rows,
                       bool header = true);
std::vector<MetricRow> read_metrics_csv(std::istream &in);

/// Binary checkpoint. Layout (little-endian):
///   "SGAN1"
///   u64 k, u64 d, u64 L, u64 dims[L+1], u8 activation[L-1]
///   f64 params[...]
///   u64 m, u64 k, f64 delta, f64 particles[m*k] (row-major)
///   optional: "STATE", u64 iteration, u64 generator_steps, u64 adam_step,
///             f64 first[P], f64 second[P]
void save_checkpoint(std::ostream &out, const FittedModel &model);
void save_checkpoint(const std::filesystem::path &path, const FittedModel &model);
FittedModel load_checkpoint(std::istream &in);
FittedModel load_checkpoint(const std::filesystem::path &path);

}  // namespace sinkgan

#endif  // SINKGAN_IO_HPP
