#ifndef SINKGAN_CONFIG_HPP
#define SINKGAN_CONFIG_HPP

#include "sinkgan/evaluation.hpp"
#include "sinkgan/synthdata.hpp"
#include "sinkgan/training.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sinkgan {

/// Everything a run needs: the target experiment, training settings, gap
/// evaluation settings and output paths.
struct RunConfig {
  ExperimentSpec experiment;
  TrainConfig train;
  GapSettings eval;
  std::string target_csv;  // overrides the experiment sampler when set
  std::string checkpoint = "model.sgan";
  std::string metrics = "metrics.csv";
};

/// Defaults for a run on the named experiment; the eval seed is chosen away
/// from the training seed.
RunConfig default_run_config();

/// Flat `key = value` lines, `#` starts a comment. Unknown keys and malformed
/// values raise std::runtime_error naming the source and line.
RunConfig parse_run_config(std::istream &in, const std::string &source = "<config>");
RunConfig load_run_config(const std::filesystem::path &path);

/// Applies one `key=value` assignment (used for command-line overrides).
void set_config_value(RunConfig &config, const std::string &key,
                      const std::string &value);

/// Writes every key; parsing the output yields identical values.
void write_run_config(std::ostream &out, const RunConfig &config);

const std::vector<std::string> &config_keys();

}  // namespace sinkgan

#endif  // SINKGAN_CONFIG_HPP
