#include "sinkgan/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sinkgan {

namespace {

[[noreturn]] void csv_error(const std::string &source, int line, const std::string &msg) {
  throw std::runtime_error(source + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream s(line);
  while (std::getline(s, cell, ',')) {
    out.push_back(trim(cell));
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

bool parse_double(const std::string &s, double &v) {
  if (s.empty()) {
    return false;
  }
  const char *end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && ptr == end;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

template <typename T>
void put(std::ostream &out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  out.write(reinterpret_cast<const char *>(bytes.data()), sizeof(T));
}

template <typename T>
T get(std::istream &in, const char *what) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char *>(bytes.data()), sizeof(T))) {
    throw std::runtime_error(std::string("checkpoint: truncated while reading ") + what);
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  return std::bit_cast<T>(bytes);
}

std::uint64_t get_count(std::istream &in, const char *what,
                        std::uint64_t limit = (std::uint64_t(1) << 32)) {
  const auto v = get<std::uint64_t>(in, what);
  if (v > limit) {
    throw std::runtime_error(std::string("checkpoint: implausible ") + what);
  }
  return v;
}

}  // namespace

Measure read_point_csv(std::istream &in, const std::string &source) {
  std::vector<double> values;
  std::vector<double> weights;
  Index dim = -1;
  bool weighted = false;
  bool first = true;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty()) {
      continue;
    }
    const auto cells = split(line);
    double probe = 0.0;
    if (first && !parse_double(cells.front(), probe)) {
      first = false;
      weighted = cells.back() == "weight";
      dim = Index(cells.size()) - (weighted ? 1 : 0);
      if (dim < 1) {
        csv_error(source, lineno, "header has no coordinate columns");
      }
      continue;
    }
    first = false;
    const Index cols = Index(cells.size());
    if (dim < 0) {
      dim = cols;
    }
    const Index expected = dim + (weighted ? 1 : 0);
    if (cols != expected) {
      csv_error(source, lineno,
                "expected " + std::to_string(expected) + " columns, got " +
                    std::to_string(cols));
    }
    for (Index c = 0; c < cols; ++c) {
      double v = 0.0;
      if (!parse_double(cells[std::size_t(c)], v)) {
        csv_error(source, lineno, "not a number: '" + cells[std::size_t(c)] + "'");
      }
      if (c < dim) {
        values.push_back(v);
      } else {
        weights.push_back(v);
      }
    }
  }
  if (values.empty()) {
    throw std::runtime_error(source + ": no points");
  }
  const Index n = Index(values.size()) / dim;
  Matrix<double> pts(n, dim);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < dim; ++j) {
      pts(i, j) = values[std::size_t(i * dim + j)];
    }
  }
  try {
    if (weighted) {
      return Measure(std::move(pts),
                     Eigen::Map<const Vector<double>>(weights.data(), n));
    }
    return Measure(std::move(pts));
  } catch (const std::invalid_argument &e) {
    throw std::runtime_error(source + ": " + e.what());
  }
}

Measure read_point_csv(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return read_point_csv(in, path.string());
}

void write_point_csv(std::ostream &out, const Measure &mu, bool with_weights) {
  std::string s;
  if (with_weights) {
    for (Index j = 0; j < mu.dim(); ++j) {
      s += "x" + std::to_string(j) + ",";
    }
    s += "weight\n";
  }
  for (Index i = 0; i < mu.size(); ++i) {
    for (Index j = 0; j < mu.dim(); ++j) {
      if (j > 0) {
        s += ',';
      }
      s += format_double(mu.points()(i, j));
    }
    if (with_weights) {
      s += ',' + format_double(mu.weights()(i));
    }
    s += '\n';
  }
  out << s;
}

void write_point_csv(const std::filesystem::path &path, const Measure &mu,
                     bool with_weights) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  write_point_csv(out, mu, with_weights);
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

void write_metrics_csv(std::ostream &out, const std::vector<MetricRow> &rows,
                       bool header) {
  std::string s;
  if (header) {
    s += "iter,epsilon,sinkhorn_estimate,grad_norm_theta,grad_norm_particles,wall_ms\n";
  }
  for (const MetricRow &r : rows) {
    s += std::to_string(r.iter) + ',' + format_double(r.epsilon) + ',' +
         format_double(r.sinkhorn_estimate) + ',' + format_double(r.grad_norm_theta) +
         ',' + format_double(r.grad_norm_particles) + ',' + format_double(r.wall_ms) +
         '\n';
  }
  out << s;
}

std::vector<MetricRow> read_metrics_csv(std::istream &in) {
  std::vector<MetricRow> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.rfind("iter,", 0) == 0) {
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != 6) {
      csv_error("metrics", lineno, "expected 6 columns");
    }
    std::array<double, 6> v{};
    for (std::size_t c = 0; c < 6; ++c) {
      // NaN estimates are written as "nan".
      if (cells[c] == "nan" || cells[c] == "-nan") {
        v[c] = std::numeric_limits<double>::quiet_NaN();
      } else if (!parse_double(cells[c], v[c])) {
        csv_error("metrics", lineno, "not a number: '" + cells[c] + "'");
      }
    }
    rows.push_back(MetricRow{Index(v[0]), v[1], v[2], v[3], v[4], v[5]});
  }
  return rows;
}

void save_checkpoint(std::ostream &out, const FittedModel &model) {
  const Generator &net = model.net;
  const auto &dims = net.layer_dims();
  out.write("SGAN1", 5);
  put<std::uint64_t>(out, std::uint64_t(net.input_dim()));
  put<std::uint64_t>(out, std::uint64_t(net.output_dim()));
  put<std::uint64_t>(out, std::uint64_t(net.num_layers()));
  for (Index d : dims) {
    put<std::uint64_t>(out, std::uint64_t(d));
  }
  for (Activation a : net.activations()) {
    put<std::uint8_t>(out, std::uint8_t(a));
  }
  for (Index i = 0; i < net.num_params(); ++i) {
    put<double>(out, net.params()(i));
  }
  const ParticleLatent &lat = model.latent;
  put<std::uint64_t>(out, std::uint64_t(lat.size()));
  put<std::uint64_t>(out, std::uint64_t(lat.dim()));
  put<double>(out, lat.delta);
  for (Index i = 0; i < lat.size(); ++i) {
    for (Index j = 0; j < lat.dim(); ++j) {
      put<double>(out, lat.particles(i, j));
    }
  }
  out.write("STATE", 5);
  put<std::uint64_t>(out, std::uint64_t(model.iteration));
  put<std::uint64_t>(out, std::uint64_t(model.generator_steps));
  put<std::uint64_t>(out, std::uint64_t(model.moments.step));
  const bool has_moments = model.moments.first.size() == net.num_params();
  for (Index i = 0; i < net.num_params(); ++i) {
    put<double>(out, has_moments ? model.moments.first(i) : 0.0);
  }
  for (Index i = 0; i < net.num_params(); ++i) {
    put<double>(out, has_moments ? model.moments.second(i) : 0.0);
  }
}

void save_checkpoint(const std::filesystem::path &path, const FittedModel &model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  save_checkpoint(out, model);
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

FittedModel load_checkpoint(std::istream &in) {
  std::array<char, 5> magic{};
  if (!in.read(magic.data(), 5) || std::memcmp(magic.data(), "SGAN1", 5) != 0) {
    throw std::runtime_error("checkpoint: bad magic (expected SGAN1)");
  }
  const auto k = get_count(in, "k");
  const auto d = get_count(in, "d");
  const auto layers = get_count(in, "layer count", 1024);
  if (layers < 1) {
    throw std::runtime_error("checkpoint: no layers");
  }
  std::vector<Index> dims;
  for (std::uint64_t l = 0; l <= layers; ++l) {
    dims.push_back(Index(get_count(in, "layer dim")));
  }
  if (Index(k) != dims.front() || Index(d) != dims.back()) {
    throw std::runtime_error("checkpoint: k/d disagree with layer dims");
  }
  std::vector<Activation> acts;
  for (std::uint64_t l = 0; l + 1 < layers; ++l) {
    const auto tag = get<std::uint8_t>(in, "activation");
    if (tag > 2) {
      throw std::runtime_error("checkpoint: unknown activation tag " +
                               std::to_string(tag));
    }
    acts.push_back(Activation(tag));
  }
  Generator net(dims, acts);
  for (Index i = 0; i < net.num_params(); ++i) {
    net.params()(i) = get<double>(in, "params");
  }
  const auto m = get_count(in, "particle count");
  const auto pk = get_count(in, "particle dim");
  if (Index(pk) != net.input_dim()) {
    throw std::runtime_error("checkpoint: particle dim disagrees with generator");
  }
  const double delta = get<double>(in, "delta");
  Matrix<double> particles(static_cast<Index>(m), static_cast<Index>(pk));
  for (Index i = 0; i < particles.rows(); ++i) {
    for (Index j = 0; j < particles.cols(); ++j) {
      particles(i, j) = get<double>(in, "particles");
    }
  }
  FittedModel model{std::move(net), ParticleLatent(std::move(particles), delta)};
  std::array<char, 5> tag{};
  in.read(tag.data(), 5);
  if (in.gcount() > 0) {
    if (in.gcount() != 5 || std::memcmp(tag.data(), "STATE", 5) != 0) {
      throw std::runtime_error("checkpoint: unexpected trailing data");
    }
    model.iteration = Index(get<std::uint64_t>(in, "iteration"));
    model.generator_steps = Index(get<std::uint64_t>(in, "generator steps"));
    model.moments.step = std::int64_t(get<std::uint64_t>(in, "adam step"));
    const Index p = model.net.num_params();
    model.moments.first.resize(p);
    model.moments.second.resize(p);
    for (Index i = 0; i < p; ++i) {
      model.moments.first(i) = get<double>(in, "adam moments");
    }
    for (Index i = 0; i < p; ++i) {
      model.moments.second(i) = get<double>(in, "adam moments");
    }
    if (in.peek() != std::char_traits<char>::eof()) {
      throw std::runtime_error("checkpoint: unexpected trailing data");
    }
  }
  return model;
}

FittedModel load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  try {
    return load_checkpoint(in);
  } catch (const std::runtime_error &e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace sinkgan
