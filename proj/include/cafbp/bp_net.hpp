#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cafbp/error.hpp"

namespace cafbp {

// Row-major dense matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct NetworkShape {
  int inputs = 1;   // n
  int hidden = 1;   // L
  int outputs = 1;  // m

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

// One-hidden-layer sigmoid network. Biases act as weights on a constant +1
// input and are trained by the same rule as the other weights.
struct Network {
  NetworkShape shape;
  Matrix w_hidden;  // hidden x inputs
  Matrix w_output;  // outputs x hidden
  std::vector<double> bias_hidden;
  std::vector<double> bias_output;
  double eta = 0.5;
  std::uint64_t seed = 0;

  // All weights and biases zero.
  static Network zeros(NetworkShape shape, double eta = 0.5);
  // Weights and biases uniform in [-0.5, 0.5].
  static Network random(NetworkShape shape, double eta, std::uint64_t seed);

  void validate() const;
  bool all_finite() const;

  friend bool operator==(const Network&, const Network&) = default;
};

double sigmoid(double net);

struct ForwardTrace {
  std::vector<double> input;
  std::vector<double> net_hidden;
  std::vector<double> hidden_out;  // oh_j
  std::vector<double> net_output;
  std::vector<double> output;      // oo_k
};

ForwardTrace forward(const Network& net, std::span<const double> x);

// Weight error derivatives: the negative gradient of E = 1/2 sum (d - oo)^2,
// so adding eta * wed descends E.
struct Gradients {
  std::vector<double> delta_output;  // delta_ok
  std::vector<double> delta_hidden;  // delta_hj
  Matrix wed_output;                 // outputs x hidden
  Matrix wed_hidden;                 // hidden x inputs
  std::vector<double> wed_bias_output;
  std::vector<double> wed_bias_hidden;
};

Gradients backward(const Network& net, const ForwardTrace& trace, std::span<const double> target);

void apply_update(Network& net, const Gradients& g);

struct TrainingPair {
  std::vector<double> input;
  std::vector<double> target;
};

struct TrainResult {
  std::vector<double> history;  // mean squared error after each epoch
  bool converged = false;
};

// Online training in the given pattern order. Stops once the epoch MSE is
// <= error_goal or after max_epochs.
TrainResult train(Network& net, std::span<const TrainingPair> pairs, double eta, int max_epochs,
                  double error_goal);

// Mean over patterns and outputs of (d - oo)^2.
double mean_squared_error(const Network& net, std::span<const TrainingPair> pairs);

// True ("code the residual") when the single output reaches the cutoff.
bool gate(const Network& net, std::span<const double> features, double cutoff = 0.5);

std::string serialize_network(const Network& net);
Network parse_network(const std::string& text);
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace cafbp
