#include "sinkgan/config.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sinkgan {

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) {
    return out;
  }
  std::string cell;
  std::istringstream in(s);
  while (std::getline(in, cell, sep)) {
    out.push_back(trim(cell));
  }
  return out;
}

double to_double(const std::string &s) {
  double v = 0.0;
  const char *end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("expected a number, got '" + s + "'");
  }
  return v;
}

template <typename Int>
Int to_int(const std::string &s) {
  Int v = 0;
  const char *end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("expected an integer, got '" + s + "'");
  }
  return v;
}

bool to_bool(const std::string &s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::string fmt(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

template <typename T, typename F>
std::string join(const std::vector<T> &xs, F f, const char *sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out += (i ? sep : "") + f(xs[i]);
  }
  return out;
}

struct Field {
  std::string key;
  std::function<void(RunConfig &, const std::string &)> set;
  std::function<std::string(const RunConfig &)> get;
};

#define SG_DOUBLE(name, member)                                              \
  Field {                                                                     \
    name, [](RunConfig &c, const std::string &v) { c.member = to_double(v); }, \
        [](const RunConfig &c) { return fmt(c.member); }                      \
  }
#define SG_INDEX(name, member)                                                     \
  Field {                                                                           \
    name, [](RunConfig &c, const std::string &v) { c.member = to_int<Index>(v); }, \
        [](const RunConfig &c) { return std::to_string(c.member); }                 \
  }
#define SG_BOOL(name, member)                                                  \
  Field {                                                                       \
    name, [](RunConfig &c, const std::string &v) { c.member = to_bool(v); },   \
        [](const RunConfig &c) { return std::string(c.member ? "true" : "false"); } \
  }
#define SG_STRING(name, member)                                          \
  Field {                                                                 \
    name, [](RunConfig &c, const std::string &v) { c.member = v; },       \
        [](const RunConfig &c) { return c.member; }                       \
  }

const std::vector<Field> &fields() {
  static const std::vector<Field> table = {
      Field{"experiment",
            [](RunConfig &c, const std::string &v) {
              check_experiment_name(v);
              c.experiment.name = v;
            },
            [](const RunConfig &c) { return c.experiment.name; }},
      SG_INDEX("train_size", experiment.train_size),
      SG_INDEX("test_size", experiment.test_size),
      Field{"data_seed",
            [](RunConfig &c, const std::string &v) {
              c.experiment.seed = to_int<std::uint64_t>(v);
            },
            [](const RunConfig &c) { return std::to_string(c.experiment.seed); }},
      SG_DOUBLE("noise", experiment.noise),
      Field{"spiral_means",
            [](RunConfig &c, const std::string &v) {
              std::vector<double> means;
              for (const auto &s : split(v, ',')) means.push_back(to_double(s));
              if (means.empty()) throw std::invalid_argument("empty list");
              c.experiment.spiral_means = means;
            },
            [](const RunConfig &c) { return join(c.experiment.spiral_means, fmt); }},
      SG_DOUBLE("spiral_variance", experiment.spiral_variance),
      Field{"swissroll_means",
            [](RunConfig &c, const std::string &v) {
              std::vector<std::array<double, 2>> means;
              for (const auto &s : split(v, ',')) {
                const auto xy = split(s, ':');
                if (xy.size() != 2) {
                  throw std::invalid_argument("expected x:y pairs, got '" + s + "'");
                }
                means.push_back({to_double(xy[0]), to_double(xy[1])});
              }
              if (means.empty()) throw std::invalid_argument("empty list");
              c.experiment.swissroll_means = means;
            },
            [](const RunConfig &c) {
              return join(c.experiment.swissroll_means,
                          [](const std::array<double, 2> &m) {
                            return fmt(m[0]) + ":" + fmt(m[1]);
                          });
            }},
      SG_DOUBLE("swissroll_variance", experiment.swissroll_variance),
      SG_DOUBLE("helix_turns", experiment.helix_turns),
      SG_DOUBLE("helix_height", experiment.helix_height),
      SG_DOUBLE("mixture4_offset", experiment.mixture4_offset),
      SG_DOUBLE("mixture4_sigma", experiment.mixture4_sigma),

      SG_INDEX("latent_dim", train.latent_dim),
      Field{"hidden",
            [](RunConfig &c, const std::string &v) {
              std::vector<Index> dims;
              for (const auto &s : split(v, ',')) dims.push_back(to_int<Index>(s));
              c.train.hidden = dims;
            },
            [](const RunConfig &c) {
              return join(c.train.hidden, [](Index d) { return std::to_string(d); });
            }},
      Field{"activations",
            [](RunConfig &c, const std::string &v) {
              std::vector<Activation> acts;
              for (const auto &s : split(v, ',')) acts.push_back(activation_from_string(s));
              c.train.activations = acts;
            },
            [](const RunConfig &c) {
              return join(c.train.activations,
                          [](Activation a) { return std::string(to_string(a)); });
            }},
      SG_INDEX("batch_size", train.batch_size),
      SG_INDEX("particles", train.particles),
      SG_DOUBLE("delta", train.delta),
      SG_DOUBLE("init_scale", train.init_scale),
      SG_DOUBLE("init_mean", train.init_mean),
      SG_DOUBLE("epsilon0", train.epsilon0),
      SG_DOUBLE("epsilon_floor", train.epsilon_floor),
      SG_DOUBLE("epsilon_decay", train.epsilon_decay),
      SG_INDEX("epsilon_period", train.epsilon_period),
      SG_DOUBLE("lr_generator", train.lr_generator),
      SG_DOUBLE("lr_particles", train.lr_particles),
      Field{"optimizer",
            [](RunConfig &c, const std::string &v) {
              if (v == "adam") c.train.optimizer = Optimizer::adam;
              else if (v == "sgd") c.train.optimizer = Optimizer::sgd;
              else throw std::invalid_argument("expected adam or sgd, got '" + v + "'");
            },
            [](const RunConfig &c) {
              return std::string(c.train.optimizer == Optimizer::adam ? "adam" : "sgd");
            }},
      SG_DOUBLE("adam_beta1", train.adam_beta1),
      SG_DOUBLE("adam_beta2", train.adam_beta2),
      SG_DOUBLE("adam_eps", train.adam_eps),
      SG_INDEX("max_iters", train.max_iters),
      SG_DOUBLE("sinkhorn_tol", train.sinkhorn_tol),
      Field{"sinkhorn_max_iter",
            [](RunConfig &c, const std::string &v) {
              c.train.sinkhorn_max_iter = to_int<int>(v);
            },
            [](const RunConfig &c) { return std::to_string(c.train.sinkhorn_max_iter); }},
      SG_DOUBLE("sinkhorn_relaxation", train.sinkhorn_relaxation),
      Field{"seed",
            [](RunConfig &c, const std::string &v) {
              c.train.seed = to_int<std::uint64_t>(v);
            },
            [](const RunConfig &c) { return std::to_string(c.train.seed); }},
      Field{"target_batch",
            [](RunConfig &c, const std::string &v) {
              if (v == "auto") c.train.target_batch.reset();
              else c.train.target_batch = to_int<Index>(v);
            },
            [](const RunConfig &c) {
              return c.train.target_batch ? std::to_string(*c.train.target_batch)
                                          : std::string("auto");
            }},
      Field{"schedule",
            [](RunConfig &c, const std::string &v) {
              if (v == "simultaneous") c.train.schedule = ScheduleMode::simultaneous;
              else if (v == "block") c.train.schedule = ScheduleMode::block;
              else throw std::invalid_argument("expected simultaneous or block, got '" + v + "'");
            },
            [](const RunConfig &c) {
              return std::string(c.train.schedule == ScheduleMode::block ? "block"
                                                                         : "simultaneous");
            }},
      SG_INDEX("gen_iters", train.gen_iters),
      SG_INDEX("latent_iters", train.latent_iters),
      SG_BOOL("fixed_latent", train.fixed_latent),
      SG_BOOL("biased_gradient", train.biased_gradient),

      SG_DOUBLE("eval_epsilon", eval.epsilon),
      SG_INDEX("eval_n_test", eval.n_test),
      SG_INDEX("eval_n_gen", eval.n_gen),
      Field{"eval_seed",
            [](RunConfig &c, const std::string &v) {
              c.eval.seed = to_int<std::uint64_t>(v);
            },
            [](const RunConfig &c) { return std::to_string(c.eval.seed); }},
      SG_DOUBLE("eval_sinkhorn_tol", eval.sinkhorn.tol),
      Field{"eval_sinkhorn_max_iter",
            [](RunConfig &c, const std::string &v) {
              c.eval.sinkhorn.max_iter = to_int<int>(v);
            },
            [](const RunConfig &c) { return std::to_string(c.eval.sinkhorn.max_iter); }},
      SG_DOUBLE("eval_sinkhorn_relaxation", eval.sinkhorn.relaxation),

      SG_STRING("target_csv", target_csv),
      SG_STRING("checkpoint", checkpoint),
      SG_STRING("metrics", metrics),
  };
  return table;
}

#undef SG_DOUBLE
#undef SG_INDEX
#undef SG_BOOL
#undef SG_STRING

const Field *find_field(const std::string &key) {
  for (const Field &f : fields()) {
    if (f.key == key) {
      return &f;
    }
  }
  return nullptr;
}

}  // namespace

RunConfig default_run_config() {
  RunConfig c;
  c.eval.seed = 1000003;
  return c;
}

const std::vector<std::string> &config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const Field &f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void set_config_value(RunConfig &config, const std::string &key,
                      const std::string &value) {
  const Field *f = find_field(key);
  if (!f) {
    throw std::invalid_argument("unknown key '" + key + "'");
  }
  try {
    f->set(config, value);
  } catch (const std::invalid_argument &e) {
    throw std::invalid_argument(key + ": " + e.what());
  }
}

RunConfig parse_run_config(std::istream &in, const std::string &source) {
  RunConfig config = default_run_config();
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(source + ":" + std::to_string(lineno) +
                               ": expected 'key = value'");
    }
    try {
      set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument &e) {
      throw std::runtime_error(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return parse_run_config(in, path.string());
}

void write_run_config(std::ostream &out, const RunConfig &config) {
  std::string s;
  for (const Field &f : fields()) {
    s += f.key + " = " + f.get(config) + "\n";
  }
  out << s;
}

}  // namespace sinkgan
