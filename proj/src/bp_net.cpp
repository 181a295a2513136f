#include "cafbp/bp_net.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cafbp/random.hpp"

namespace cafbp {

namespace {

void check_shape(NetworkShape s) {
  if (s.inputs < 1 || s.hidden < 1 || s.outputs < 1)
    throw Error(Errc::ShapeMismatch, "network layers need at least one unit");
}

}  // namespace

Network Network::zeros(NetworkShape shape, double eta) {
  check_shape(shape);
  Network net;
  net.shape = shape;
  net.w_hidden = Matrix(shape.hidden, shape.inputs);
  net.w_output = Matrix(shape.outputs, shape.hidden);
  net.bias_hidden.assign(shape.hidden, 0.0);
  net.bias_output.assign(shape.outputs, 0.0);
  net.eta = eta;
  return net;
}

Network Network::random(NetworkShape shape, double eta, std::uint64_t seed) {
  Network net = zeros(shape, eta);
  net.seed = seed;
  Rng rng(seed);
  for (double& w : net.w_hidden.data) w = rng.uniform(-0.5, 0.5);
  for (double& b : net.bias_hidden) b = rng.uniform(-0.5, 0.5);
  for (double& w : net.w_output.data) w = rng.uniform(-0.5, 0.5);
  for (double& b : net.bias_output) b = rng.uniform(-0.5, 0.5);
  return net;
}

void Network::validate() const {
  check_shape(shape);
  if (w_hidden.rows != shape.hidden || w_hidden.cols != shape.inputs ||
      w_output.rows != shape.outputs || w_output.cols != shape.hidden ||
      static_cast<int>(bias_hidden.size()) != shape.hidden ||
      static_cast<int>(bias_output.size()) != shape.outputs)
    throw Error(Errc::ShapeMismatch, "weight dimensions disagree with the network shape");
}

bool Network::all_finite() const {
  auto finite = [](const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  return finite(w_hidden.data) && finite(w_output.data) && finite(bias_hidden) &&
         finite(bias_output) && std::isfinite(eta);
}

double sigmoid(double net) { return 1.0 / (1.0 + std::exp(-net)); }

ForwardTrace forward(const Network& net, std::span<const double> x) {
  const auto [n, hidden, outputs] = net.shape;
  if (static_cast<int>(x.size()) != n)
    throw Error(Errc::DimensionMismatch, "input length differs from the network's input count");
  ForwardTrace t;
  t.input.assign(x.begin(), x.end());
  t.net_hidden.resize(hidden);
  t.hidden_out.resize(hidden);
  for (int j = 0; j < hidden; ++j) {
    double acc = net.bias_hidden[j];
    for (int i = 0; i < n; ++i) acc += net.w_hidden(j, i) * x[i];
    t.net_hidden[j] = acc;
    t.hidden_out[j] = sigmoid(acc);
  }
  t.net_output.resize(outputs);
  t.output.resize(outputs);
  for (int k = 0; k < outputs; ++k) {
    double acc = net.bias_output[k];
    for (int j = 0; j < hidden; ++j) acc += net.w_output(k, j) * t.hidden_out[j];
    t.net_output[k] = acc;
    t.output[k] = sigmoid(acc);
  }
  return t;
}

Gradients backward(const Network& net, const ForwardTrace& trace, std::span<const double> target) {
  const auto [n, hidden, outputs] = net.shape;
  if (static_cast<int>(target.size()) != outputs || static_cast<int>(trace.output.size()) != outputs ||
      static_cast<int>(trace.hidden_out.size()) != hidden || static_cast<int>(trace.input.size()) != n)
    throw Error(Errc::DimensionMismatch, "trace or target does not match the network shape");

  Gradients g;
  g.delta_output.resize(outputs);
  for (int k = 0; k < outputs; ++k) {
    const double oo = trace.output[k];
    g.delta_output[k] = (target[k] - oo) * oo * (1.0 - oo);
  }
  g.delta_hidden.resize(hidden);
  for (int j = 0; j < hidden; ++j) {
    double err = 0.0;
    for (int k = 0; k < outputs; ++k) err += g.delta_output[k] * net.w_output(k, j);
    const double oh = trace.hidden_out[j];
    g.delta_hidden[j] = oh * (1.0 - oh) * err;
  }
  g.wed_output = Matrix(outputs, hidden);
  for (int k = 0; k < outputs; ++k)
    for (int j = 0; j < hidden; ++j) g.wed_output(k, j) = g.delta_output[k] * trace.hidden_out[j];
  g.wed_hidden = Matrix(hidden, n);
  for (int j = 0; j < hidden; ++j)
    for (int i = 0; i < n; ++i) g.wed_hidden(j, i) = g.delta_hidden[j] * trace.input[i];
  g.wed_bias_output = g.delta_output;
  g.wed_bias_hidden = g.delta_hidden;
  return g;
}

void apply_update(Network& net, const Gradients& g) {
  const double eta = net.eta;
  for (std::size_t i = 0; i < net.w_output.data.size(); ++i) net.w_output.data[i] += eta * g.wed_output.data[i];
  for (std::size_t i = 0; i < net.w_hidden.data.size(); ++i) net.w_hidden.data[i] += eta * g.wed_hidden.data[i];
  for (std::size_t k = 0; k < net.bias_output.size(); ++k) net.bias_output[k] += eta * g.wed_bias_output[k];
  for (std::size_t j = 0; j < net.bias_hidden.size(); ++j) net.bias_hidden[j] += eta * g.wed_bias_hidden[j];
}

double mean_squared_error(const Network& net, std::span<const TrainingPair> pairs) {
  if (pairs.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& p : pairs) {
    const auto t = forward(net, p.input);
    for (std::size_t k = 0; k < t.output.size(); ++k) {
      const double e = p.target[k] - t.output[k];
      acc += e * e;
    }
  }
  return acc / (static_cast<double>(pairs.size()) * net.shape.outputs);
}

TrainResult train(Network& net, std::span<const TrainingPair> pairs, double eta, int max_epochs,
                  double error_goal) {
  if (pairs.empty()) throw Error(Errc::EmptyTrainingSet, "no training pairs");
  if (max_epochs < 1) throw Error(Errc::InvalidArgument, "max_epochs must be >= 1");
  net.validate();
  for (const auto& p : pairs) {
    if (static_cast<int>(p.input.size()) != net.shape.inputs ||
        static_cast<int>(p.target.size()) != net.shape.outputs)
      throw Error(Errc::DimensionMismatch, "training pair does not match the network shape");
  }
  net.eta = eta;

  TrainResult result;
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    for (const auto& p : pairs) apply_update(net, backward(net, forward(net, p.input), p.target));
    const double err = mean_squared_error(net, pairs);
    result.history.push_back(err);
    if (err <= error_goal) {
      result.converged = true;
      break;
    }
  }
  return result;
}

bool gate(const Network& net, std::span<const double> features, double cutoff) {
  if (net.shape.outputs != 1) throw Error(Errc::ShapeMismatch, "gate needs a single-output network");
  return forward(net, features).output[0] >= cutoff;
}

// Text model format, one record per line:
//   cafbp-bpnet 1
//   shape <inputs> <hidden> <outputs>
//   eta <value>
//   seed <value>
//   w_hidden <hidden*inputs values, row-major>
//   bias_hidden <hidden values>
//   w_output <outputs*hidden values, row-major>
//   bias_output <outputs values>
// Reals use the shortest representation that parses back to the same double.
namespace {

constexpr std::string_view kMagic = "cafbp-bpnet";
constexpr int kVersion = 1;

void put(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.push_back(' ');
  out.append(buf, res.ptr);
}

void put_line(std::string& out, std::string_view key, const std::vector<double>& values) {
  out.append(key);
  for (double v : values) put(out, v);
  out.push_back('\n');
}

std::vector<double> read_values(std::istringstream& in, std::string_view key, std::size_t count) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::MalformedHeader, "model missing " + std::string(key));
  std::istringstream fields(line);
  std::string name;
  fields >> name;
  if (name != key) throw Error(Errc::MalformedHeader, "expected " + std::string(key) + ", got " + name);
  std::vector<double> values;
  std::string token;
  while (fields >> token) {
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
      throw Error(Errc::MalformedHeader, "bad number in " + std::string(key));
    values.push_back(v);
  }
  if (values.size() != count)
    throw Error(Errc::MalformedHeader, std::string(key) + " has the wrong number of values");
  return values;
}

}  // namespace

std::string serialize_network(const Network& net) {
  net.validate();
  std::string out = std::string(kMagic) + " " + std::to_string(kVersion) + "\n";
  out += "shape " + std::to_string(net.shape.inputs) + " " + std::to_string(net.shape.hidden) + " " +
         std::to_string(net.shape.outputs) + "\n";
  out += "eta";
  put(out, net.eta);
  out += "\nseed " + std::to_string(net.seed) + "\n";
  put_line(out, "w_hidden", net.w_hidden.data);
  put_line(out, "bias_hidden", net.bias_hidden);
  put_line(out, "w_output", net.w_output.data);
  put_line(out, "bias_output", net.bias_output);
  return out;
}

Network parse_network(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  {
    std::getline(in, line);
    std::istringstream head(line);
    std::string magic;
    int version = 0;
    head >> magic >> version;
    if (magic != kMagic) throw Error(Errc::MalformedHeader, "not a cafbp network file");
    if (version != kVersion) throw Error(Errc::MalformedHeader, "unsupported model version");
  }
  NetworkShape shape;
  {
    std::getline(in, line);
    std::istringstream f(line);
    std::string key;
    if (!(f >> key >> shape.inputs >> shape.hidden >> shape.outputs) || key != "shape")
      throw Error(Errc::MalformedHeader, "bad shape line");
  }
  const double eta = read_values(in, "eta", 1)[0];
  std::uint64_t seed = 0;
  {
    std::getline(in, line);
    std::istringstream f(line);
    std::string key;
    if (!(f >> key >> seed) || key != "seed") throw Error(Errc::MalformedHeader, "bad seed line");
  }
  Network net = Network::zeros(shape, eta);
  net.seed = seed;
  const auto h = static_cast<std::size_t>(shape.hidden), n = static_cast<std::size_t>(shape.inputs),
             m = static_cast<std::size_t>(shape.outputs);
  net.w_hidden.data = read_values(in, "w_hidden", h * n);
  net.bias_hidden = read_values(in, "bias_hidden", h);
  net.w_output.data = read_values(in, "w_output", m * h);
  net.bias_output = read_values(in, "bias_output", m);
  if (!net.all_finite()) throw Error(Errc::MalformedHeader, "model holds non-finite weights");
  return net;
}

void save_network(const Network& net, const std::string& path) {
  const std::string text = serialize_network(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot create " + path);
  out << text;
  if (!out) throw Error(Errc::IoFailure, "write failed on " + path);
}

Network load_network(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_network(buf.str());
}

}  // namespace cafbp
