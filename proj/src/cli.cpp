#include "cafbp/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cafbp/pipeline.hpp"

namespace cafbp {

namespace {

struct Options {
  // input
  std::optional<int> width;
  std::optional<int> height;
  std::string chroma = "420";
  // filter
  double sigma = 25.0;
  double lambda3d = 2.7;
  int search_radius = 8;
  int group_size = 16;
  double match_threshold = 3000.0;
  double match_threshold2 = 400.0;
  int temporal_depth = 1;
  int step = 3;
  bool no_edge_adapt = false;
  double edge_tau = 30.0;
  int max_iters = 4;
  int threads = 0;
  std::optional<std::uint64_t> seed;
  // codec / pipeline
  int qp = 30;
  std::vector<int> qps{22, 26, 30, 34, 38};
  std::vector<double> block_thresholds{50.0, 300.0, 1200.0};
  std::string threshold_psnr = "auto";
  std::optional<double> lambda_rd;
  bool no_sigma_decay = false;
  bool no_filter = false;
  std::string gate_model;
  bool train_gate = false;
  std::string gate = "model";
  // files
  std::string input;
  std::string input2;
  std::string output;
  std::string report_path;
  std::string csv_path;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

void add_input_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--width", o.width, "Raw YUV width");
  cmd->add_option("--height", o.height, "Raw YUV height");
  cmd->add_option("--chroma", o.chroma, "Raw YUV chroma layout")->check(CLI::IsMember({"mono", "420"}));
}

void add_filter_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--sigma", o.sigma, "Noise standard deviation (8-bit units)");
  cmd->add_option("--lambda3d", o.lambda3d, "Hard-threshold multiplier");
  cmd->add_option("--search-radius", o.search_radius, "Block-matching search radius (pixels)");
  cmd->add_option("--group-size", o.group_size, "Maximum group size (power of two)");
  cmd->add_option("--match-threshold", o.match_threshold, "Pass-1 per-pixel match threshold");
  cmd->add_option("--match-threshold2", o.match_threshold2, "Pass-2 per-pixel match threshold");
  cmd->add_option("--temporal-depth", o.temporal_depth, "Neighbor frames searched on each side");
  cmd->add_option("--step", o.step, "Reference block stride");
  cmd->add_flag("--no-edge-adapt", o.no_edge_adapt, "Disable edge-guided threshold tightening");
  cmd->add_option("--edge-tau", o.edge_tau, "Edge energy above which matching tightens");
  cmd->add_option("--max-iters", o.max_iters, "Maximum filtering passes per frame");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  cmd->add_option("--seed", o.seed, "Random seed (falls back to CAFBP_SEED, then 42)");
}

void add_codec_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--block-thresholds", o.block_thresholds, "Variance cutoffs T1,T2,T3")
      ->delimiter(',')
      ->expected(3);
  cmd->add_option("--threshold-psnr", o.threshold_psnr, "Filter loop threshold in dB, or auto");
  cmd->add_option("--lambda-rd", o.lambda_rd, "Lagrange multiplier for gate labels (default 0.85*step^2)");
  cmd->add_flag("--no-sigma-decay", o.no_sigma_decay, "Keep sigma constant across filter passes");
  cmd->add_flag("--no-filter", o.no_filter, "Skip denoising");
  cmd->add_option("--gate-model", o.gate_model, "Trained gate network file");
  cmd->add_flag("--train-gate", o.train_gate, "Train the gate on the input before coding");
  cmd->add_option("--gate", o.gate, "Gate mode")->check(CLI::IsMember({"model", "open", "closed", "oracle"}));
}

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("CAFBP_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw UsageError("CAFBP_SEED is not an unsigned integer");
    }
  }
  return 42;
}

FilterParams filter_params(const Options& o) {
  FilterParams f;
  f.sigma = o.sigma;
  f.lambda_3d = o.lambda3d;
  for (MatchParams* m : {&f.match1, &f.match2}) {
    m->search_radius = o.search_radius;
    m->max_group_size = o.group_size;
    m->temporal_depth = o.temporal_depth;
    m->step = o.step;
    m->edge_adapt = !o.no_edge_adapt;
    m->edge_tau = o.edge_tau;
  }
  f.match1.match_threshold = o.match_threshold;
  f.match2.match_threshold = o.match_threshold2;
  f.max_pipeline_iters = o.max_iters;
  f.threads = o.threads;
  try {
    f.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return f;
}

PipelineConfig pipeline_config(const Options& o, int qp) {
  PipelineConfig c;
  c.filter = filter_params(o);
  c.quant.qp = qp;
  c.thresholds = {o.block_thresholds[0], o.block_thresholds[1], o.block_thresholds[2]};
  if (o.threshold_psnr != "auto") {
    try {
      std::size_t used = 0;
      c.threshold_psnr = std::stod(o.threshold_psnr, &used);
      if (used != o.threshold_psnr.size()) throw 0;
    } catch (...) {
      throw UsageError("--threshold-psnr must be a number or 'auto'");
    }
  }
  c.lambda_rd = o.lambda_rd;
  c.sigma_decay = !o.no_sigma_decay;
  c.filter_enabled = !o.no_filter;
  c.seed = resolve_seed(o);
  if (o.gate == "open") c.gate_mode = GateMode::AllOpen;
  else if (o.gate == "closed") c.gate_mode = GateMode::AllClosed;
  else if (o.gate == "oracle") c.gate_mode = GateMode::Oracle;
  if (!o.gate_model.empty()) c.gate_model = load_network(o.gate_model);
  try {
    c.validate();
  } catch (const Error& e) {
    if (e.code() == Errc::ShapeMismatch) throw;
    throw UsageError(e.what());
  }
  return c;
}

VideoSequence load_input(const Options& o, const std::string& path) {
  return load_video(path, o.width, o.height, o.chroma == "mono" ? ChromaMode::Mono : ChromaMode::Yuv420);
}

void write_text(const std::string& path, const std::string& text) {
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

int cmd_denoise(const Options& o, std::ostream& out) {
  const FilterParams f = filter_params(o);
  VideoSequence seq = load_input(o, o.input);
  seq.frames = denoise_sequence(seq.frames, f);
  write_file(o.output, serialize_y4m(seq));
  out << "denoised " << seq.frames.size() << " frame(s)\n";
  return 0;
}

int cmd_train(const Options& o, std::ostream& out) {
  const PipelineConfig c = pipeline_config(o, o.qp);
  const VideoSequence seq = load_input(o, o.input);
  const GateTraining t = train_gate(seq, c);
  save_network(t.network, o.output);
  out << "samples: " << t.samples.size() << "\n"
      << "epochs: " << t.result.history.size() << "\n"
      << "final_mse: " << t.result.history.back() << "\n"
      << "accuracy: " << t.accuracy << "\n";
  return 0;
}

void maybe_train(PipelineConfig& c, const Options& o, const FilteredSequence& filtered) {
  if (o.train_gate) c.gate_model = train_gate_on(filtered.luma, c).network;
}

int cmd_encode(const Options& o, std::ostream& out) {
  PipelineConfig c = pipeline_config(o, o.qp);
  const VideoSequence seq = load_input(o, o.input);
  const FilteredSequence filtered = filter_sequence(seq, c);
  maybe_train(c, o, filtered);
  const CafbpResult r = encode_filtered(seq, filtered, c);
  write_file(o.output, serialize_encoded(r.encoded));
  const std::string report = format_report(r.report, r.point, c);
  if (o.report_path.empty()) out << report;
  else write_text(o.report_path, report);
  if (!o.csv_path.empty()) emit_rd_csv({r.point}, seq.frame_rate, seq.frames.size(), o.csv_path);
  return 0;
}

int cmd_decode(const Options& o, std::ostream& out) {
  const auto enc = parse_encoded(read_file(o.input));
  const VideoSequence seq = decode_sequence(enc);
  write_file(o.output, serialize_y4m(seq));
  out << "decoded " << seq.frames.size() << " frame(s)\n";
  return 0;
}

int cmd_rd(const Options& o, std::ostream& out) {
  if (o.qps.empty()) throw UsageError("--qps needs at least one value");
  PipelineConfig base = pipeline_config(o, o.qps.front());
  const VideoSequence seq = load_input(o, o.input);
  const FilteredSequence filtered = filter_sequence(seq, base);
  std::vector<RdPoint> points;
  for (int qp : o.qps) {
    PipelineConfig c = pipeline_config(o, qp);
    maybe_train(c, o, filtered);
    points.push_back(encode_filtered(seq, filtered, c).point);
  }
  emit_rd_csv(points, seq.frame_rate, seq.frames.size(), o.output);
  out << format_rd_csv(points, seq.frame_rate, seq.frames.size());
  return 0;
}

int cmd_psnr(const Options& o, std::ostream& out) {
  const VideoSequence a = load_input(o, o.input);
  const VideoSequence b = load_input(o, o.input2);
  if (a.frames.size() != b.frames.size())
    throw Error(Errc::DimensionMismatch, "inputs differ in frame count");
  PlaneStats stats;
  for (std::size_t i = 0; i < a.frames.size(); ++i) stats.add(a.frames[i], b.frames[i]);
  out << stats.psnr().to_string() << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"CAFBP: block-matching 3D denoising with a back-propagation coding gate"};
  app.name("cafbp");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  auto* denoise = app.add_subcommand("denoise", "Denoise a sequence (y4m/yuv -> y4m)");
  add_input_flags(denoise, o);
  add_filter_flags(denoise, o);
  denoise->add_option("input", o.input, "Input video")->required();
  denoise->add_option("output", o.output, "Output .y4m")->required();

  auto* train = app.add_subcommand("train", "Train the coding gate network on a sequence");
  add_input_flags(train, o);
  add_filter_flags(train, o);
  add_codec_flags(train, o);
  train->add_option("--qp", o.qp, "Quantization parameter for oracle labels")->check(CLI::Range(0, 51));
  train->add_option("--out", o.output, "Model file to write")->required();
  train->add_option("input", o.input, "Input video")->required();

  auto* encode = app.add_subcommand("encode", "Filter, gate and code a sequence");
  add_input_flags(encode, o);
  add_filter_flags(encode, o);
  add_codec_flags(encode, o);
  encode->add_option("--qp", o.qp, "Quantization parameter")->check(CLI::Range(0, 51));
  encode->add_option("--report", o.report_path, "Write the report here instead of stdout");
  encode->add_option("--csv", o.csv_path, "Also write a one-row RD CSV");
  encode->add_option("input", o.input, "Input video")->required();
  encode->add_option("output", o.output, "Output .cfbp")->required();

  auto* decode = app.add_subcommand("decode", "Decode a .cfbp stream to y4m");
  decode->add_option("input", o.input, "Input .cfbp")->required();
  decode->add_option("output", o.output, "Output .y4m")->required();

  auto* rd = app.add_subcommand("rd", "Sweep QPs and write an RD CSV");
  add_input_flags(rd, o);
  add_filter_flags(rd, o);
  add_codec_flags(rd, o);
  rd->add_option("--qps", o.qps, "QP ladder")->delimiter(',')->check(CLI::Range(0, 51));
  rd->add_option("input", o.input, "Input video")->required();
  rd->add_option("output", o.output, "Output CSV")->required();

  auto* psnr_cmd = app.add_subcommand("psnr", "Luma PSNR between two sequences");
  add_input_flags(psnr_cmd, o);
  psnr_cmd->add_option("a", o.input, "First video")->required();
  psnr_cmd->add_option("b", o.input2, "Second video")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (o.block_thresholds.size() != 3) throw UsageError("--block-thresholds needs three values");
    if (*denoise) return cmd_denoise(o, out);
    if (*train) return cmd_train(o, out);
    if (*encode) return cmd_encode(o, out);
    if (*decode) return cmd_decode(o, out);
    if (*rd) return cmd_rd(o, out);
    if (*psnr_cmd) return cmd_psnr(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace cafbp
