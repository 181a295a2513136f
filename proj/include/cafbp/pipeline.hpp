#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cafbp/block_engine.hpp"
#include "cafbp/bp_net.hpp"
#include "cafbp/collab_filter.hpp"
#include "cafbp/frame_io.hpp"
#include "cafbp/toy_codec.hpp"

namespace cafbp {

enum class GateMode {
  Model,      // trained network when one is configured, else all open
  AllOpen,
  AllClosed,
  Oracle,     // rate-distortion oracle decisions
};

struct PipelineConfig {
  FilterParams filter;
  QuantParams quant;
  VarianceThresholds thresholds;
  std::optional<Network> gate_model;
  GateMode gate_mode = GateMode::Model;
  std::optional<double> threshold_psnr;  // dB; empty means derive from the sequence
  std::optional<double> lambda_rd;       // empty means 0.85 * step^2
  bool filter_enabled = true;
  bool sigma_decay = true;
  double gate_cutoff = 0.5;
  double psnr_cap = 60.0;
  std::uint64_t seed = 42;

  NetworkShape gate_shape{4, 8, 1};
  double gate_eta = 0.5;
  double gate_error_goal = 0.02;
  int gate_max_epochs = 5000;

  double lambda() const;
  void validate() const;
};

struct GateFeatures {
  double variance_norm = 0.0;
  double edge_norm = 0.0;
  double residual_energy_norm = 0.0;
  double size_index = 0.0;

  std::array<double, 4> as_array() const {
    return {variance_norm, edge_norm, residual_energy_norm, size_index};
  }
};

GateFeatures gate_features(const BlockContext& ctx);

// Maximum finite PSNR between each frame's filtered and unfiltered versions;
// the cap when every frame comes back unchanged.
double compute_threshold_psnr(const VideoSequence& seq, const FilterParams& filter,
                              double cap = 60.0);
double threshold_from_psnrs(const std::vector<PsnrValue>& psnrs, double cap = 60.0);

struct FilterLoopResult {
  FramePlane plane;
  int iterations = 0;
  std::vector<PsnrValue> psnr;  // output vs that iteration's input, per iteration
};

// Filters frames[index] and, while the change it made leaves PSNR below the
// threshold, filters the result again (spatially, sigma halved per repeat
// unless sigma_decay is off), up to max_pipeline_iters passes.
FilterLoopResult filter_until_threshold(std::span<const FramePlane> frames, int index,
                                        double threshold, const FilterParams& filter,
                                        bool sigma_decay = true);
FilterLoopResult refine_until_threshold(const FramePlane& input, FramePlane first_estimate,
                                        double threshold, const FilterParams& filter,
                                        bool sigma_decay = true);

// Rate-distortion choice between coding and skipping a residual block.
bool oracle_gate_label(std::span<const double> residual, int size, const QuantParams& q,
                       double lambda_rd);

struct FilteredSequence {
  std::vector<FramePlane> luma;
  std::vector<int> iterations;
  std::vector<PsnrValue> first_pass_psnr;
  double threshold = 0.0;
};

FilteredSequence filter_sequence(const VideoSequence& seq, const PipelineConfig& config);

// Features and oracle labels for every luma block, collected while encoding
// with the oracle's own decisions.
std::vector<TrainingPair> collect_gate_samples(const std::vector<FramePlane>& planes,
                                               const PipelineConfig& config);

struct GateTraining {
  Network network;
  TrainResult result;
  std::vector<TrainingPair> samples;
  double accuracy = 0.0;  // against the oracle labels
};

GateTraining train_gate_on(const std::vector<FramePlane>& filtered, const PipelineConfig& config);
GateTraining train_gate(const VideoSequence& seq, const PipelineConfig& config);

struct RdPoint {
  int qp = 0;
  std::uint64_t bits = 0;
  PsnrValue psnr_y = PsnrValue::infinite();
  std::optional<PsnrValue> psnr_u;
  std::optional<PsnrValue> psnr_v;

  friend bool operator==(const RdPoint&, const RdPoint&) = default;
};

struct EncodedSequence {
  ChromaMode mode = ChromaMode::Mono;
  Rational frame_rate;
  std::vector<std::vector<Bitstream>> frames;  // Y[, U, V] per frame

  std::uint64_t total_bits() const;
};

std::vector<std::uint8_t> serialize_encoded(const EncodedSequence& enc);
EncodedSequence parse_encoded(std::span<const std::uint8_t> bytes);
VideoSequence decode_sequence(const EncodedSequence& enc);

struct PlaneStats {
  std::uint64_t sse = 0;
  std::uint64_t samples = 0;
  PsnrValue psnr() const;
  void add(const FramePlane& a, const FramePlane& b);
};

struct CafbpReport {
  double threshold_psnr = 0.0;
  std::vector<int> iterations;
  std::size_t gates_open = 0;
  std::size_t gates_closed = 0;
  std::vector<PsnrValue> frame_psnr_vs_filtered;
  std::vector<PsnrValue> frame_psnr_vs_input;
  PsnrValue psnr_y_vs_input = PsnrValue::infinite();
  std::optional<PsnrValue> psnr_u_vs_input;
  std::optional<PsnrValue> psnr_v_vs_input;
  std::uint64_t baseline_bits = 0;
  PsnrValue baseline_psnr_y = PsnrValue::infinite();
  double rd_cost = 0.0;  // luma SSE vs filtered + lambda * luma bits
};

struct CafbpResult {
  EncodedSequence encoded;
  VideoSequence recon;
  RdPoint point;
  CafbpReport report;
};

// Codes an already-filtered sequence; `input` supplies chroma and the raw
// reference for the end-to-end figures.
CafbpResult encode_filtered(const VideoSequence& input, const FilteredSequence& filtered,
                            const PipelineConfig& config);
CafbpResult run_cafbp(const VideoSequence& seq, const PipelineConfig& config);

std::string format_report(const CafbpReport& report, const RdPoint& point,
                          const PipelineConfig& config);

inline constexpr const char* kRdCsvHeader = "qp,bits,kbps,psnr_y,psnr_u,psnr_v";

std::string format_rd_csv(std::vector<RdPoint> points, Rational frame_rate, std::size_t frames);
std::vector<RdPoint> parse_rd_csv(const std::string& text);
void emit_rd_csv(const std::vector<RdPoint>& points, Rational frame_rate, std::size_t frames,
                 const std::string& path);

}  // namespace cafbp
