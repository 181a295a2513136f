#include "cafbp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cafbp/parallel.hpp"

namespace cafbp {

double PipelineConfig::lambda() const {
  if (lambda_rd) return *lambda_rd;
  const double step = quant.step();
  return 0.85 * step * step;
}

void PipelineConfig::validate() const {
  filter.validate();
  quant.validate();
  if (!(thresholds.t1 < thresholds.t2 && thresholds.t2 < thresholds.t3))
    throw Error(Errc::ThresholdOrderInvalid, "block thresholds must satisfy T1 < T2 < T3");
  if (threshold_psnr && !std::isfinite(*threshold_psnr))
    throw Error(Errc::InvalidArgument, "threshold PSNR must be finite");
  if (lambda_rd && !(*lambda_rd > 0.0)) throw Error(Errc::InvalidArgument, "lambda must be > 0");
  if (gate_model) {
    gate_model->validate();
    if (gate_model->shape.inputs != 4 || gate_model->shape.outputs != 1)
      throw Error(Errc::ShapeMismatch, "gate model must map 4 features to 1 output");
  }
}

GateFeatures gate_features(const BlockContext& ctx) {
  const int size = ctx.entry.size;
  GateFeatures f;
  f.variance_norm = std::min(1.0, block_variance(ctx.source) / 16256.25);
  Block b{size, ctx.entry.x, ctx.entry.y, {ctx.source.begin(), ctx.source.end()}};
  f.edge_norm = std::clamp(edge_energy(b) / 255.0, 0.0, 1.0);
  double abs_sum = 0.0;
  for (double r : ctx.residual) abs_sum += std::abs(r);
  f.residual_energy_norm =
      std::min(1.0, abs_sum / static_cast<double>(ctx.residual.size()) / 255.0);
  int index = 0;
  while (kCodecBlockSizes[index] != size) ++index;
  f.size_index = index / 3.0;
  return f;
}

double threshold_from_psnrs(const std::vector<PsnrValue>& psnrs, double cap) {
  if (psnrs.empty()) throw Error(Errc::EmptySequence, "no frames");
  std::optional<double> best;
  for (const auto& p : psnrs)
    if (!p.is_infinite()) best = std::max(best.value_or(p.db()), p.db());
  return best.value_or(cap);
}

double compute_threshold_psnr(const VideoSequence& seq, const FilterParams& filter, double cap) {
  if (seq.frames.empty()) throw Error(Errc::EmptySequence, "sequence has no frames");
  const auto filtered = denoise_sequence(seq.frames, filter);
  std::vector<PsnrValue> psnrs;
  for (std::size_t i = 0; i < filtered.size(); ++i) psnrs.push_back(psnr(filtered[i], seq.frames[i]));
  return threshold_from_psnrs(psnrs, cap);
}

FilterLoopResult refine_until_threshold(const FramePlane& input, FramePlane first_estimate,
                                        double threshold, const FilterParams& filter,
                                        bool sigma_decay) {
  if (!std::isfinite(threshold)) throw Error(Errc::InvalidArgument, "threshold must be finite");
  FilterLoopResult out;
  out.plane = std::move(first_estimate);
  out.iterations = 1;
  out.psnr.push_back(psnr(out.plane, input));

  FilterParams again = filter;
  again.match1.temporal_depth = 0;
  again.match2.temporal_depth = 0;
  while (out.psnr.back().db() < threshold && out.iterations < filter.max_pipeline_iters) {
    if (sigma_decay) again.sigma *= 0.5;
    const FramePlane previous = out.plane;
    out.plane = aegbm3d_denoise(std::span<const FramePlane>(&previous, 1), 0, again);
    out.psnr.push_back(psnr(out.plane, previous));
    ++out.iterations;
  }
  return out;
}

FilterLoopResult filter_until_threshold(std::span<const FramePlane> frames, int index,
                                        double threshold, const FilterParams& filter,
                                        bool sigma_decay) {
  return refine_until_threshold(frames[index], aegbm3d_denoise(frames, index, filter), threshold,
                                filter, sigma_decay);
}

bool oracle_gate_label(std::span<const double> residual, int size, const QuantParams& q,
                       double lambda_rd) {
  BitWriter w;
  const auto levels = encode_block(w, residual, size, q);
  const auto rec = reconstruct_residual(levels, size, q);
  double d_code = 0.0, d_skip = 0.0;
  for (std::size_t i = 0; i < residual.size(); ++i) {
    const double e = residual[i] - std::floor(rec[i] + 0.5);
    d_code += e * e;
    d_skip += residual[i] * residual[i];
  }
  const double j_code = d_code + lambda_rd * static_cast<double>(1 + w.bit_count());
  const double j_skip = d_skip + lambda_rd * 1.0;
  return j_code < j_skip;
}

FilteredSequence filter_sequence(const VideoSequence& seq, const PipelineConfig& config) {
  if (seq.frames.empty()) throw Error(Errc::EmptySequence, "sequence has no frames");
  FilteredSequence out;
  if (!config.filter_enabled) {
    out.luma = seq.frames;
    out.iterations.assign(seq.frames.size(), 0);
    return out;
  }
  const auto first = denoise_sequence(seq.frames, config.filter);
  for (std::size_t i = 0; i < first.size(); ++i)
    out.first_pass_psnr.push_back(psnr(first[i], seq.frames[i]));
  out.threshold = config.threshold_psnr.value_or(threshold_from_psnrs(out.first_pass_psnr, config.psnr_cap));
  for (std::size_t i = 0; i < first.size(); ++i) {
    auto loop = refine_until_threshold(seq.frames[i], first[i], out.threshold, config.filter,
                                       config.sigma_decay);
    out.luma.push_back(std::move(loop.plane));
    out.iterations.push_back(loop.iterations);
  }
  return out;
}

std::vector<TrainingPair> collect_gate_samples(const std::vector<FramePlane>& planes,
                                               const PipelineConfig& config) {
  std::vector<TrainingPair> samples;
  const double lambda = config.lambda();
  for (const auto& plane : planes) {
    const BlockMap map = build_block_map(plane, config.thresholds);
    encode_frame(plane, map, config.quant, [&](const BlockContext& ctx) {
      const bool label = oracle_gate_label(ctx.residual, ctx.entry.size, config.quant, lambda);
      const auto f = gate_features(ctx).as_array();
      samples.push_back({{f.begin(), f.end()}, {label ? 1.0 : 0.0}});
      return label;
    });
  }
  return samples;
}

GateTraining train_gate_on(const std::vector<FramePlane>& filtered, const PipelineConfig& config) {
  if (filtered.empty()) throw Error(Errc::EmptySequence, "sequence has no frames");
  GateTraining t;
  t.samples = collect_gate_samples(filtered, config);
  t.network = Network::random(config.gate_shape, config.gate_eta, config.seed);
  t.result = train(t.network, t.samples, config.gate_eta, config.gate_max_epochs, config.gate_error_goal);
  std::size_t correct = 0;
  for (const auto& s : t.samples)
    correct += gate(t.network, s.input, config.gate_cutoff) == (s.target[0] >= 0.5);
  t.accuracy = static_cast<double>(correct) / static_cast<double>(t.samples.size());
  return t;
}

GateTraining train_gate(const VideoSequence& seq, const PipelineConfig& config) {
  if (seq.frames.empty()) throw Error(Errc::EmptySequence, "sequence has no frames");
  config.validate();
  return train_gate_on(filter_sequence(seq, config).luma, config);
}

std::uint64_t EncodedSequence::total_bits() const {
  std::uint64_t bits = 0;
  for (const auto& f : frames)
    for (const auto& p : f) bits += p.bit_count;
  return bits;
}

// Sequence container: "CFBV" | version u8 | chroma u8 (0 mono, 1 4:2:0) |
// rate num u32 | rate den u32 | frame count u32 | per frame, per plane:
// bit count u32 | byte length u32 | plane bitstream. Integers big-endian.
namespace {

constexpr char kContainerMagic[4] = {'C', 'F', 'B', 'V'};
constexpr std::uint8_t kContainerVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t& pos) {
  if (in.size() - pos < 4) throw Error(Errc::TruncatedStream, "container truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | in[pos++];
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_encoded(const EncodedSequence& enc) {
  std::vector<std::uint8_t> out(std::begin(kContainerMagic), std::end(kContainerMagic));
  out.push_back(kContainerVersion);
  out.push_back(enc.mode == ChromaMode::Yuv420 ? 1 : 0);
  put_u32(out, enc.frame_rate.num);
  put_u32(out, enc.frame_rate.den);
  put_u32(out, enc.frames.size());
  for (const auto& frame : enc.frames) {
    for (const auto& plane : frame) {
      put_u32(out, plane.bit_count);
      put_u32(out, plane.bytes.size());
      out.insert(out.end(), plane.bytes.begin(), plane.bytes.end());
    }
  }
  return out;
}

EncodedSequence parse_encoded(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6 || !std::equal(std::begin(kContainerMagic), std::end(kContainerMagic), bytes.begin()))
    throw Error(Errc::MalformedHeader, "not a CFBV stream");
  if (bytes[4] != kContainerVersion) throw Error(Errc::MalformedHeader, "unsupported container version");
  if (bytes[5] > 1) throw Error(Errc::MalformedHeader, "bad chroma mode");
  EncodedSequence enc;
  enc.mode = bytes[5] == 1 ? ChromaMode::Yuv420 : ChromaMode::Mono;
  std::size_t pos = 6;
  enc.frame_rate.num = get_u32(bytes, pos);
  enc.frame_rate.den = get_u32(bytes, pos);
  const std::uint32_t count = get_u32(bytes, pos);
  const int planes = enc.mode == ChromaMode::Yuv420 ? 3 : 1;
  for (std::uint32_t f = 0; f < count; ++f) {
    std::vector<Bitstream> frame;
    for (int p = 0; p < planes; ++p) {
      Bitstream b;
      b.bit_count = get_u32(bytes, pos);
      const std::uint32_t len = get_u32(bytes, pos);
      if (bytes.size() - pos < len) throw Error(Errc::TruncatedStream, "plane payload truncated");
      if (b.bit_count > static_cast<std::size_t>(len) * 8)
        throw Error(Errc::MalformedStream, "bit count exceeds payload");
      b.bytes.assign(bytes.begin() + pos, bytes.begin() + pos + len);
      pos += len;
      frame.push_back(std::move(b));
    }
    enc.frames.push_back(std::move(frame));
  }
  if (pos != bytes.size()) throw Error(Errc::MalformedStream, "trailing bytes after last frame");
  return enc;
}

VideoSequence decode_sequence(const EncodedSequence& enc) {
  VideoSequence seq;
  seq.mode = enc.mode;
  seq.frame_rate = enc.frame_rate;
  for (const auto& frame : enc.frames) {
    seq.frames.push_back(decode_frame(frame.at(0)));
    if (enc.mode == ChromaMode::Yuv420)
      seq.chroma.push_back({decode_frame(frame.at(1)), decode_frame(frame.at(2))});
  }
  seq.validate();
  return seq;
}

PsnrValue PlaneStats::psnr() const {
  if (samples == 0) return PsnrValue::infinite();
  return psnr_from_mse(static_cast<double>(sse) / static_cast<double>(samples));
}

void PlaneStats::add(const FramePlane& a, const FramePlane& b) {
  sse += cafbp::sse(a, b);
  samples += a.samples.size();
}

namespace {

struct FrameOutcome {
  std::vector<EncodedPlane> planes;
  std::uint64_t baseline_bits = 0;
  FramePlane baseline_recon;
};

GatePolicy luma_policy(const PipelineConfig& config) {
  switch (config.gate_mode) {
    case GateMode::AllOpen: return {};
    case GateMode::AllClosed: return [](const BlockContext&) { return false; };
    case GateMode::Oracle: {
      const QuantParams q = config.quant;
      const double lambda = config.lambda();
      return [q, lambda](const BlockContext& ctx) {
        return oracle_gate_label(ctx.residual, ctx.entry.size, q, lambda);
      };
    }
    case GateMode::Model:
      if (!config.gate_model) return {};
      return [&config](const BlockContext& ctx) {
        const auto f = gate_features(ctx).as_array();
        return gate(*config.gate_model, f, config.gate_cutoff);
      };
  }
  return {};
}

}  // namespace

CafbpResult encode_filtered(const VideoSequence& input, const FilteredSequence& filtered,
                            const PipelineConfig& config) {
  config.validate();
  input.validate();
  if (input.frames.empty()) throw Error(Errc::EmptySequence, "sequence has no frames");
  if (filtered.luma.size() != input.frames.size())
    throw Error(Errc::DimensionMismatch, "filtered sequence length differs from input");

  const std::size_t n = input.frames.size();
  std::vector<FrameOutcome> outcomes(n);
  const GatePolicy policy = luma_policy(config);
  parallel_for(n, config.filter.threads, [&](std::size_t i) {
    FrameOutcome& o = outcomes[i];
    const FramePlane& luma = filtered.luma[i];
    o.planes.push_back(encode_frame(luma, build_block_map(luma, config.thresholds), config.quant, policy));
    const FramePlane& raw = input.frames[i];
    auto base = encode_frame(raw, build_block_map(raw, config.thresholds), config.quant);
    o.baseline_bits = base.stream.bit_count;
    o.baseline_recon = std::move(base.recon);
    if (input.has_chroma()) {
      for (const FramePlane* c : {&input.chroma[i].u, &input.chroma[i].v}) {
        auto coded = encode_frame(*c, build_block_map(*c, config.thresholds), config.quant);
        o.baseline_bits += coded.stream.bit_count;
        o.planes.push_back(std::move(coded));
      }
    }
  });

  CafbpResult r;
  r.encoded.mode = input.mode;
  r.encoded.frame_rate = input.frame_rate;
  r.recon.mode = input.mode;
  r.recon.frame_rate = input.frame_rate;
  r.report.threshold_psnr = filtered.threshold;
  r.report.iterations = filtered.iterations;

  PlaneStats y_filtered, y_input, u, v, y_baseline;
  std::uint64_t luma_bits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& o = outcomes[i];
    std::vector<Bitstream> streams;
    for (const auto& p : o.planes) streams.push_back(p.stream);
    r.encoded.frames.push_back(std::move(streams));

    const EncodedPlane& y = o.planes[0];
    r.report.gates_open += y.coded_blocks();
    r.report.gates_closed += y.skipped_blocks();
    luma_bits += y.stream.bit_count;
    y_filtered.add(y.recon, filtered.luma[i]);
    y_input.add(y.recon, input.frames[i]);
    y_baseline.add(o.baseline_recon, input.frames[i]);
    r.report.frame_psnr_vs_filtered.push_back(psnr(y.recon, filtered.luma[i]));
    r.report.frame_psnr_vs_input.push_back(psnr(y.recon, input.frames[i]));
    r.report.baseline_bits += o.baseline_bits;
    r.recon.frames.push_back(y.recon);
    if (input.has_chroma()) {
      u.add(o.planes[1].recon, input.chroma[i].u);
      v.add(o.planes[2].recon, input.chroma[i].v);
      r.recon.chroma.push_back({o.planes[1].recon, o.planes[2].recon});
    }
  }

  r.point.qp = config.quant.qp;
  r.point.bits = r.encoded.total_bits();
  r.point.psnr_y = y_filtered.psnr();
  r.report.psnr_y_vs_input = y_input.psnr();
  r.report.baseline_psnr_y = y_baseline.psnr();
  if (input.has_chroma()) {
    r.point.psnr_u = u.psnr();
    r.point.psnr_v = v.psnr();
    r.report.psnr_u_vs_input = u.psnr();
    r.report.psnr_v_vs_input = v.psnr();
  }
  r.report.rd_cost = static_cast<double>(y_filtered.sse) + config.lambda() * static_cast<double>(luma_bits);
  return r;
}

CafbpResult run_cafbp(const VideoSequence& seq, const PipelineConfig& config) {
  config.validate();
  return encode_filtered(seq, filter_sequence(seq, config), config);
}

namespace {

std::string fixed(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

const char* gate_mode_name(const PipelineConfig& c) {
  switch (c.gate_mode) {
    case GateMode::AllOpen: return "all-open";
    case GateMode::AllClosed: return "all-closed";
    case GateMode::Oracle: return "oracle";
    case GateMode::Model: return c.gate_model ? "model" : "all-open (no model)";
  }
  return "?";
}

std::string describe_match(const MatchParams& m) {
  return "block=" + std::to_string(m.block_size) + " radius=" + std::to_string(m.search_radius) +
         " group=" + std::to_string(m.max_group_size) + " threshold=" + fixed(m.match_threshold, 2) +
         " temporal=" + std::to_string(m.temporal_depth) + " step=" + std::to_string(m.step) +
         " edge_adapt=" + (m.edge_adapt ? "on" : "off") + " edge_tau=" + fixed(m.edge_tau, 2);
}

}  // namespace

std::string format_report(const CafbpReport& report, const RdPoint& point,
                          const PipelineConfig& config) {
  std::ostringstream out;
  const auto& f = config.filter;
  out << "# cafbp report\n";
  out << "config.sigma: " << fixed(f.sigma, 4) << "\n";
  out << "config.lambda3d: " << fixed(f.lambda_3d, 4) << "\n";
  out << "config.match1: " << describe_match(f.match1) << "\n";
  out << "config.match2: " << describe_match(f.match2) << "\n";
  out << "config.max_iters: " << f.max_pipeline_iters << "\n";
  out << "config.sigma_decay: " << (config.sigma_decay ? "on" : "off") << "\n";
  out << "config.filter: " << (config.filter_enabled ? "on" : "off") << "\n";
  out << "config.qp: " << config.quant.qp << " (step " << fixed(config.quant.step(), 6) << ")\n";
  out << "config.block_thresholds: " << fixed(config.thresholds.t1, 2) << ","
      << fixed(config.thresholds.t2, 2) << "," << fixed(config.thresholds.t3, 2) << "\n";
  out << "config.threshold_psnr: "
      << (config.threshold_psnr ? fixed(*config.threshold_psnr) : std::string("auto")) << "\n";
  out << "config.lambda_rd: " << fixed(config.lambda(), 6) << "\n";
  out << "config.gate: " << gate_mode_name(config) << " cutoff=" << fixed(config.gate_cutoff, 4) << "\n";
  out << "config.seed: " << config.seed << "\n";
  out << "threshold_psnr_db: " << fixed(report.threshold_psnr) << "\n";
  out << "frames: " << report.iterations.size() << "\n";
  for (std::size_t i = 0; i < report.iterations.size(); ++i) {
    out << "frame " << i << ": iterations=" << report.iterations[i]
        << " psnr_vs_filtered=" << report.frame_psnr_vs_filtered[i].to_string()
        << " psnr_vs_input=" << report.frame_psnr_vs_input[i].to_string() << "\n";
  }
  out << "gates_open: " << report.gates_open << "\n";
  out << "gates_closed: " << report.gates_closed << "\n";
  out << "bits: " << point.bits << "\n";
  out << "psnr_y_vs_filtered: " << point.psnr_y.to_string() << "\n";
  out << "psnr_y_vs_input: " << report.psnr_y_vs_input.to_string() << "\n";
  if (report.psnr_u_vs_input) {
    out << "psnr_u: " << report.psnr_u_vs_input->to_string() << "\n";
    out << "psnr_v: " << report.psnr_v_vs_input->to_string() << "\n";
  }
  out << "rd_cost_luma: " << fixed(report.rd_cost, 2) << "\n";
  out << "baseline_bits: " << report.baseline_bits << "\n";
  out << "baseline_psnr_y: " << report.baseline_psnr_y.to_string() << "\n";
  if (report.baseline_bits > 0) {
    const double pct = 100.0 * (static_cast<double>(point.bits) - static_cast<double>(report.baseline_bits)) /
                       static_cast<double>(report.baseline_bits);
    out << "delta_bits_percent: " << fixed(pct, 2) << "\n";
  }
  if (!report.psnr_y_vs_input.is_infinite() && !report.baseline_psnr_y.is_infinite())
    out << "delta_psnr_y_db: " << fixed(report.psnr_y_vs_input.db() - report.baseline_psnr_y.db()) << "\n";
  return out.str();
}

std::string format_rd_csv(std::vector<RdPoint> points, Rational frame_rate, std::size_t frames) {
  if (points.empty()) throw Error(Errc::InvalidArgument, "no RD points");
  std::stable_sort(points.begin(), points.end(),
                   [](const RdPoint& a, const RdPoint& b) { return a.qp < b.qp; });
  std::string out = std::string(kRdCsvHeader) + "\n";
  for (const auto& p : points) {
    const double kbps = frames == 0 ? 0.0
                                    : static_cast<double>(p.bits) * frame_rate.value() /
                                          static_cast<double>(frames) / 1000.0;
    out += std::to_string(p.qp) + "," + std::to_string(p.bits) + "," + fixed(kbps) + "," +
           p.psnr_y.to_string() + "," + (p.psnr_u ? p.psnr_u->to_string() : "") + "," +
           (p.psnr_v ? p.psnr_v->to_string() : "") + "\n";
  }
  return out;
}

namespace {

PsnrValue parse_psnr(const std::string& cell) {
  if (cell == "inf") return PsnrValue::infinite();
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw 0;
    return PsnrValue::finite(v);
  } catch (...) {
    throw Error(Errc::MalformedHeader, "bad PSNR cell '" + cell + "'");
  }
}

}  // namespace

std::vector<RdPoint> parse_rd_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kRdCsvHeader)
    throw Error(Errc::MalformedHeader, "RD CSV header mismatch");
  std::vector<RdPoint> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 6) throw Error(Errc::MalformedHeader, "RD CSV row needs 6 cells");
    RdPoint p;
    try {
      p.qp = std::stoi(cells[0]);
      p.bits = std::stoull(cells[1]);
    } catch (...) {
      throw Error(Errc::MalformedHeader, "bad integer in RD CSV");
    }
    p.psnr_y = parse_psnr(cells[3]);
    if (!cells[4].empty()) p.psnr_u = parse_psnr(cells[4]);
    if (!cells[5].empty()) p.psnr_v = parse_psnr(cells[5]);
    points.push_back(p);
  }
  return points;
}

void emit_rd_csv(const std::vector<RdPoint>& points, Rational frame_rate, std::size_t frames,
                 const std::string& path) {
  const std::string text = format_rd_csv(points, frame_rate, frames);
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace cafbp
