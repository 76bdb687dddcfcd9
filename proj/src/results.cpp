#include "memlab/results.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "memlab/rng.hpp"

namespace memlab::results {

namespace {

namespace fs = std::filesystem;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// RFC 4180: CRLF rows, quote fields containing separators or quotes.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open csv for writing: " + path);
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << escape(fields[i]);
    }
    out_ << "\r\n";
  }

 private:
  static std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
      if (c == '"') quoted += "\"\"";
      else quoted.push_back(c);
    }
    quoted += "\"";
    return quoted;
  }

  std::ofstream out_;
};

// Minimal deterministic SVG 1.1 builder. No timestamps, fixed formatting.
class Svg {
 public:
  Svg(double width, double height) : width_(width), height_(height) {
    body_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
          << fmt(width) << "\" height=\"" << fmt(height) << "\" viewBox=\"0 0 "
          << fmt(width) << " " << fmt(height) << "\">\n";
    body_ << "<rect x=\"0\" y=\"0\" width=\"" << fmt(width) << "\" height=\""
          << fmt(height) << "\" fill=\"white\"/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0, const std::string& dash = "") {
    body_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2)
          << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
          << fmt(width) << "\"";
    if (!dash.empty()) body_ << " stroke-dasharray=\"" << dash << "\"";
    body_ << "/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill,
            double opacity = 1.0) {
    body_ << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
          << "\" height=\"" << fmt(h) << "\" fill=\"" << fill << "\" fill-opacity=\""
          << fmt(opacity) << "\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& stroke, double width = 1.5) {
    body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
          << fmt(width) << "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) body_ << ' ';
      body_ << fmt(pts[i].first) << ',' << fmt(pts[i].second);
    }
    body_ << "\"/>\n";
  }

  void circle(double cx, double cy, double r, const std::string& fill) {
    body_ << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\"" << fmt(r)
          << "\" fill=\"" << fill << "\"/>\n";
  }

  void text(double x, double y, const std::string& s, double size = 11.0,
            const std::string& anchor = "start") {
    body_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-family=\"sans-serif\""
          << " font-size=\"" << fmt(size) << "\" text-anchor=\"" << anchor << "\">"
          << escape(s) << "</text>\n";
  }

  // inverted triangle, the distribution-mean marker
  void mean_marker(double cx, double cy, double r, const std::string& fill) {
    body_ << "<path d=\"M " << fmt(cx - r) << ' ' << fmt(cy - r) << " L " << fmt(cx + r)
          << ' ' << fmt(cy - r) << " L " << fmt(cx) << ' ' << fmt(cy + r)
          << " Z\" fill=\"" << fill << "\"/>\n";
  }

  void star(double cx, double cy, double r, const std::string& fill) {
    body_ << "<path d=\"";
    for (int i = 0; i < 10; ++i) {
      const double ang = -1.5707963267948966 + i * 0.6283185307179586;
      const double rr = (i % 2 == 0) ? r : r * 0.45;
      body_ << (i == 0 ? "M " : "L ") << fmt(cx + rr * std::cos(ang)) << ' '
            << fmt(cy + rr * std::sin(ang)) << ' ';
    }
    body_ << "Z\" fill=\"" << fill << "\"/>\n";
  }

  void save(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open svg for writing: " + path);
    out << body_.str() << "</svg>\n";
  }

 private:
  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out.push_back(c);
      }
    }
    return out;
  }

  double width_, height_;
  std::ostringstream body_;
};

struct Histogram {
  double lo = 0.0;
  double width = 1.0;
  std::vector<std::vector<std::int64_t>> counts;  // per series
};

// Freedman-Diaconis bins over the pooled data; all series share the bins.
Histogram histogram(const std::vector<const std::vector<double>*>& series) {
  std::vector<double> pooled;
  for (const auto* s : series) pooled.insert(pooled.end(), s->begin(), s->end());
  std::sort(pooled.begin(), pooled.end());
  Histogram h;
  if (pooled.empty()) {
    h.counts.resize(series.size());
    return h;
  }
  const double lo = pooled.front(), hi = pooled.back();
  const auto n = pooled.size();
  const double q1 = pooled[static_cast<std::size_t>(0.25 * (n - 1))];
  const double q3 = pooled[static_cast<std::size_t>(0.75 * (n - 1))];
  double bw = 2.0 * (q3 - q1) / std::cbrt(static_cast<double>(n));
  if (!(bw > 0.0)) bw = (hi - lo) / 20.0;
  if (!(bw > 0.0)) bw = 1.0;
  const auto n_bins = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil((hi - lo) / bw)) + 1);
  h.lo = lo;
  h.width = bw;
  h.counts.assign(series.size(), std::vector<std::int64_t>(n_bins, 0));
  for (std::size_t si = 0; si < series.size(); ++si) {
    for (double v : *series[si]) {
      auto bin = static_cast<std::int64_t>((v - lo) / bw);
      bin = std::clamp<std::int64_t>(bin, 0, n_bins - 1);
      h.counts[si][bin] += 1;
    }
  }
  return h;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// panel of overlaid histogram series with mean markers
void draw_hist_panel(Svg& svg, double px, double py, double pw, double ph,
                     const Histogram& h, const std::vector<std::string>& colors,
                     const std::vector<double>& means, const std::string& title) {
  svg.text(px + pw / 2, py - 6, title, 11.0, "middle");
  svg.line(px, py + ph, px + pw, py + ph, "black");
  svg.line(px, py, px, py + ph, "black");
  if (h.counts.empty() || h.counts[0].empty()) return;
  std::int64_t max_count = 1;
  for (const auto& c : h.counts) {
    for (auto v : c) max_count = std::max(max_count, v);
  }
  const auto n_bins = static_cast<double>(h.counts[0].size());
  const double bin_w = pw / n_bins;
  for (std::size_t si = 0; si < h.counts.size(); ++si) {
    for (std::size_t b = 0; b < h.counts[si].size(); ++b) {
      const double frac = static_cast<double>(h.counts[si][b]) /
                          static_cast<double>(max_count);
      if (frac <= 0.0) continue;
      svg.rect(px + b * bin_w, py + ph * (1.0 - frac), bin_w, ph * frac, colors[si], 0.45);
    }
    const double span = h.width * n_bins;
    const double mx = px + (means[si] - h.lo) / (span > 0 ? span : 1.0) * pw;
    svg.mean_marker(std::clamp(mx, px, px + pw), py + 8, 5, colors[si]);
  }
  // x range labels
  svg.text(px, py + ph + 12, fmt(h.lo), 9.0);
  svg.text(px + pw, py + ph + 12, fmt(h.lo + h.width * n_bins), 9.0, "end");
}

}  // namespace

std::string record_timestamp() {
  if (const char* fixed = std::getenv("MEMLAB_TIMESTAMP")) return fixed;
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

RunRecord make_record(const std::string& kind, const nlohmann::ordered_json& config,
                      std::uint64_t seed, const std::string& timestamp) {
  RunRecord record;
  const std::string config_dump = config.dump();
  std::uint64_t h = fnv1a64(config_dump);
  h = fnv1a64(&seed, sizeof(seed), h);
  h = fnv1a64(kind, h);

  record.doc["schema_version"] = kSchemaVersion;
  record.doc["run_id"] = kind + "-" + hex64(h);
  record.doc["timestamp"] = timestamp;
  record.doc["kind"] = kind;
  record.doc["config"] = config;
  record.doc["seeds"] = nlohmann::ordered_json{{"master", seed}};
  record.doc["corpus_checksums"] = nlohmann::ordered_json::object();
  record.doc["environment"] = nlohmann::ordered_json{
      {"seed_derivation", kSeedDerivation},
      {"grad_slots", 8},
      {"threads", 0},
      {"precision", "float64"},
  };
  record.doc["aggregates"] = nlohmann::ordered_json::object();
  return record;
}

std::string write_record(const RunRecord& record, const std::string& dir) {
  fs::create_directories(dir);
  const std::string path = (fs::path(dir) / (record.id() + ".json")).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write run record: " + path);
  out << record.doc.dump(1) << "\n";
  return path;
}

RunRecord read_record(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open run record: " + path);
  RunRecord record;
  try {
    record.doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("malformed run record " + path + ": " + e.what());
  }
  if (!record.doc.contains("schema_version") ||
      !record.doc["schema_version"].is_number_integer()) {
    throw VersionError("run record missing schema_version: " + path);
  }
  const int version = record.doc["schema_version"].get<int>();
  if (version != kSchemaVersion) {
    throw VersionError("run record " + path + " has schema version " +
                       std::to_string(version) + ", expected " +
                       std::to_string(kSchemaVersion));
  }
  return record;
}

AggregateSummary summarize(const std::string& metric, std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("summarize needs >= 1 value");
  AggregateSummary s;
  s.metric = metric;
  s.values = std::move(values);
  double mean = 0.0;
  for (double v : s.values) mean += v;
  mean /= static_cast<double>(s.values.size());
  double var = 0.0;
  for (double v : s.values) var += (v - mean) * (v - mean);
  const auto n = static_cast<double>(s.values.size());
  s.mean = mean;
  s.stderr_ = s.values.size() > 1 ? std::sqrt(var / (n - 1.0)) / std::sqrt(n) : 0.0;
  return s;
}

nlohmann::ordered_json to_json(const scoring::RecognitionOutcome& o) {
  return nlohmann::ordered_json{
      {"trial_id", o.trial_id},
      {"loss_study_mean", o.loss_study_mean},
      {"loss_foil_mean", o.loss_foil_mean},
      {"loss_study_sum", o.loss_study_sum},
      {"loss_foil_sum", o.loss_foil_sum},
      {"correct", o.correct},
  };
}

nlohmann::ordered_json to_json(const scoring::RecallOutcome& o) {
  return nlohmann::ordered_json{
      {"sentence_id", o.sentence_id},
      {"prompt_token_count", o.prompt_token_count},
      {"reference", o.reference},
      {"hypothesis", o.hypothesis},
      {"rouge_l", o.rouge_l},
      {"perfect", o.perfect},
      {"common_substring_len", o.common_substring_len},
  };
}

nlohmann::ordered_json to_json(const protocol::RecognitionProbeResult& r) {
  auto outcomes = nlohmann::ordered_json::array();
  for (const auto& o : r.outcomes) outcomes.push_back(to_json(o));
  return nlohmann::ordered_json{
      {"accuracy", r.accuracy},
      {"mean_study_loss", r.mean_study_loss},
      {"mean_foil_loss", r.mean_foil_loss},
      {"outcomes", std::move(outcomes)},
  };
}

nlohmann::ordered_json to_json(const protocol::RecallProbeResult& r) {
  auto outcomes = nlohmann::ordered_json::array();
  for (const auto& o : r.outcomes) outcomes.push_back(to_json(o));
  return nlohmann::ordered_json{
      {"mean_rouge_l", r.mean_rouge_l},
      {"perfect_ids", r.perfect_ids},
      {"skipped_truncated", r.skipped_truncated},
      {"outcomes", std::move(outcomes)},
  };
}

nlohmann::ordered_json to_json(const protocol::RetentionSeries& s) {
  auto points = nlohmann::ordered_json::array();
  for (const auto& p : s.points) {
    nlohmann::ordered_json rec = nlohmann::ordered_json::object();
    for (const auto& [e, v] : p.recognition_accuracy) rec[std::to_string(e)] = v;
    nlohmann::ordered_json study_loss = nlohmann::ordered_json::object();
    for (const auto& [e, v] : p.mean_study_loss) study_loss[std::to_string(e)] = v;
    nlohmann::ordered_json foil_loss = nlohmann::ordered_json::object();
    for (const auto& [e, v] : p.mean_foil_loss) foil_loss[std::to_string(e)] = v;
    nlohmann::ordered_json recall = nlohmann::ordered_json::object();
    for (const auto& [k, v] : p.recall_rouge_l) recall[k] = v;
    points.push_back(nlohmann::ordered_json{
        {"step", p.step},
        {"recognition_accuracy", std::move(rec)},
        {"mean_study_loss", std::move(study_loss)},
        {"mean_foil_loss", std::move(foil_loss)},
        {"recall_rouge_l", std::move(recall)},
    });
  }
  return nlohmann::ordered_json{
      {"points", std::move(points)},
      {"corpus_wraps", s.corpus_wraps},
  };
}

EmitResult emit_recognition_summary(const std::vector<RunRecord>& records,
                                    const std::string& out_dir,
                                    std::optional<double> human_reference) {
  // group accuracies by (experiment, exposures); sort values so input order
  // never changes output bytes
  std::map<std::pair<int, int>, std::vector<double>> groups;
  for (const auto& record : records) {
    if (!record.aggregates().contains("recognition_accuracy")) continue;
    const int exposures = record.config().contains("study")
                              ? record.config()["study"].value("exposures", 0)
                              : 0;
    for (const auto& [key, value] :
         record.aggregates()["recognition_accuracy"].items()) {
      groups[{std::stoi(key), exposures}].push_back(value.get<double>());
    }
  }
  if (groups.empty()) {
    throw std::invalid_argument("no recognition aggregates among the records");
  }
  for (auto& [key, values] : groups) std::sort(values.begin(), values.end());

  fs::create_directories(out_dir);
  EmitResult result;
  result.csv_path = (fs::path(out_dir) / "recognition_summary.csv").string();
  {
    CsvWriter csv(result.csv_path);
    csv.row({"experiment", "exposures", "replications", "mean_accuracy", "stderr"});
    for (const auto& [key, values] : groups) {
      auto s = summarize("recognition_accuracy", values);
      csv.row({std::to_string(key.first), std::to_string(key.second),
               std::to_string(values.size()), fmt(s.mean), fmt(s.stderr_)});
    }
  }

  std::vector<int> experiments, exposure_levels;
  for (const auto& [key, values] : groups) {
    if (std::find(experiments.begin(), experiments.end(), key.first) ==
        experiments.end()) {
      experiments.push_back(key.first);
    }
    if (std::find(exposure_levels.begin(), exposure_levels.end(), key.second) ==
        exposure_levels.end()) {
      exposure_levels.push_back(key.second);
    }
  }
  std::sort(experiments.begin(), experiments.end());
  std::sort(exposure_levels.begin(), exposure_levels.end());

  const double W = 760, H = 420, ml = 56, mr = 16, mt = 30, mb = 56;
  const double pw = W - ml - mr, ph = H - mt - mb;
  Svg svg(W, H);
  svg.text(W / 2, 18, "Recognition accuracy by experiment and exposures", 13.0, "middle");
  for (int grid = 0; grid <= 5; ++grid) {
    const double y = mt + ph * (1.0 - grid / 5.0);
    svg.line(ml, y, ml + pw, y, "#dddddd");
    svg.text(ml - 6, y + 3, fmt(grid / 5.0), 9.0, "end");
  }
  svg.line(ml, mt + ph, ml + pw, mt + ph, "black");
  svg.line(ml, mt, ml, mt + ph, "black");

  const std::vector<std::string> palette = {"#4878cf", "#ee854a", "#6acc65",
                                            "#d65f5f", "#956cb4", "#8c613c"};
  const double group_w = pw / static_cast<double>(experiments.size());
  const double bar_w = group_w * 0.8 / std::max<std::size_t>(1, exposure_levels.size());
  for (std::size_t gi = 0; gi < experiments.size(); ++gi) {
    const double gx = ml + gi * group_w + group_w * 0.1;
    svg.text(ml + gi * group_w + group_w / 2, mt + ph + 16,
             "exp " + std::to_string(experiments[gi]), 10.0, "middle");
    for (std::size_t bi = 0; bi < exposure_levels.size(); ++bi) {
      const auto it = groups.find({experiments[gi], exposure_levels[bi]});
      if (it == groups.end()) continue;  // gap for a missing cell
      auto s = summarize("recognition_accuracy", it->second);
      const double x = gx + bi * bar_w;
      const double y = mt + ph * (1.0 - s.mean);
      svg.rect(x, y, bar_w * 0.92, ph * s.mean, palette[bi % palette.size()]);
      if (s.stderr_ > 0) {
        const double e = ph * s.stderr_;
        svg.line(x + bar_w * 0.46, y - e, x + bar_w * 0.46, y + e, "black");
      }
    }
  }
  for (std::size_t bi = 0; bi < exposure_levels.size(); ++bi) {
    svg.rect(ml + bi * 110.0, mt + ph + 28, 10, 10, palette[bi % palette.size()]);
    svg.text(ml + bi * 110.0 + 14, mt + ph + 37,
             std::to_string(exposure_levels[bi]) + " exposure(s)", 10.0);
  }
  if (human_reference) {
    const double y = mt + ph * (1.0 - *human_reference);
    svg.line(ml, y, ml + pw, y, "#333333", 1.2, "6,3");
    svg.text(ml + pw, y - 4, "human reference", 9.0, "end");
  }
  result.svg_path = (fs::path(out_dir) / "recognition_summary.svg").string();
  svg.save(result.svg_path);
  return result;
}

EmitResult emit_loss_histograms(const std::vector<double>& pre_study,
                                const std::vector<double>& pre_foil,
                                const std::vector<double>& post_study,
                                const std::vector<double>& post_foil, int experiment,
                                const std::string& out_dir) {
  if (pre_study.empty() || pre_foil.empty() || post_study.empty() || post_foil.empty()) {
    throw std::invalid_argument("loss histogram inputs must be non-empty");
  }
  const auto h = histogram({&pre_study, &pre_foil, &post_study, &post_foil});

  fs::create_directories(out_dir);
  const std::string stem = "loss_hist_exp" + std::to_string(experiment);
  EmitResult result;
  result.csv_path = (fs::path(out_dir) / (stem + ".csv")).string();
  {
    CsvWriter csv(result.csv_path);
    csv.row({"bin_lo", "bin_hi", "pre_study", "pre_foil", "post_study", "post_foil"});
    for (std::size_t b = 0; b < h.counts[0].size(); ++b) {
      csv.row({fmt(h.lo + b * h.width), fmt(h.lo + (b + 1) * h.width),
               std::to_string(h.counts[0][b]), std::to_string(h.counts[1][b]),
               std::to_string(h.counts[2][b]), std::to_string(h.counts[3][b])});
    }
    csv.row({"mean", "", fmt(mean_of(pre_study)), fmt(mean_of(pre_foil)),
             fmt(mean_of(post_study)), fmt(mean_of(post_foil))});
  }

  const double W = 640, H = 460;
  Svg svg(W, H);
  svg.text(W / 2, 18, "Loss distributions, experiment " + std::to_string(experiment),
           13.0, "middle");
  Histogram pre = h, post = h;
  pre.counts = {h.counts[0], h.counts[1]};
  post.counts = {h.counts[2], h.counts[3]};
  draw_hist_panel(svg, 60, 50, W - 100, 150, pre, {"#4878cf", "#ee854a"},
                  {mean_of(pre_study), mean_of(pre_foil)}, "before exposure");
  draw_hist_panel(svg, 60, 260, W - 100, 150, post, {"#4878cf", "#ee854a"},
                  {mean_of(post_study), mean_of(post_foil)}, "after exposure");
  svg.rect(60, H - 26, 10, 10, "#4878cf");
  svg.text(76, H - 17, "study", 10.0);
  svg.rect(130, H - 26, 10, 10, "#ee854a");
  svg.text(146, H - 17, "foil", 10.0);
  result.svg_path = (fs::path(out_dir) / (stem + ".svg")).string();
  svg.save(result.svg_path);
  return result;
}

EmitResult emit_perfect_recall_analysis(
    const std::vector<scoring::RecallOutcome>& outcomes,
    const std::map<std::string, double>& pre_losses,
    const std::map<std::string, double>& post_losses, const std::string& out_dir) {
  if (outcomes.empty()) {
    throw std::invalid_argument("perfect recall analysis needs >= 1 outcome");
  }
  std::vector<double> len_perfect, len_other, pre_perfect, pre_other, post_perfect,
      post_other;
  for (const auto& o : outcomes) {
    const auto len = static_cast<double>(o.reference.size());
    const auto pre = pre_losses.find(o.sentence_id);
    const auto post = post_losses.find(o.sentence_id);
    if (o.perfect) {
      len_perfect.push_back(len);
      if (pre != pre_losses.end()) pre_perfect.push_back(pre->second);
      if (post != post_losses.end()) post_perfect.push_back(post->second);
    } else {
      len_other.push_back(len);
      if (pre != pre_losses.end()) pre_other.push_back(pre->second);
      if (post != post_losses.end()) post_other.push_back(post->second);
    }
  }
  std::sort(len_perfect.begin(), len_perfect.end());
  std::sort(len_other.begin(), len_other.end());
  std::sort(pre_perfect.begin(), pre_perfect.end());
  std::sort(pre_other.begin(), pre_other.end());
  std::sort(post_perfect.begin(), post_perfect.end());
  std::sort(post_other.begin(), post_other.end());

  fs::create_directories(out_dir);
  EmitResult result;
  result.csv_path = (fs::path(out_dir) / "perfect_recall.csv").string();
  {
    CsvWriter csv(result.csv_path);
    csv.row({"group", "count", "mean_length", "mean_pre_loss", "mean_post_loss"});
    csv.row({"perfect", std::to_string(len_perfect.size()), fmt(mean_of(len_perfect)),
             fmt(mean_of(pre_perfect)), fmt(mean_of(post_perfect))});
    csv.row({"other", std::to_string(len_other.size()), fmt(mean_of(len_other)),
             fmt(mean_of(pre_other)), fmt(mean_of(post_other))});
  }
  if (len_perfect.empty() || len_other.empty()) {
    // single-group data: ship the table, skip the figure
    std::cerr << "note: perfect-recall figure skipped (one of the groups is empty)\n";
    return result;
  }

  const double W = 880, H = 280;
  Svg svg(W, H);
  svg.text(W / 2, 18, "Perfectly recalled vs other study sentences", 13.0, "middle");
  const auto h_len = histogram({&len_perfect, &len_other});
  const auto h_pre = histogram({&pre_perfect, &pre_other});
  const auto h_post = histogram({&post_perfect, &post_other});
  draw_hist_panel(svg, 50, 50, 230, 160, h_len, {"#6acc65", "#956cb4"},
                  {mean_of(len_perfect), mean_of(len_other)}, "token length");
  draw_hist_panel(svg, 330, 50, 230, 160, h_pre, {"#6acc65", "#956cb4"},
                  {mean_of(pre_perfect), mean_of(pre_other)}, "pre-exposure loss");
  draw_hist_panel(svg, 610, 50, 230, 160, h_post, {"#6acc65", "#956cb4"},
                  {mean_of(post_perfect), mean_of(post_other)}, "post-exposure loss");
  svg.rect(50, H - 30, 10, 10, "#6acc65");
  svg.text(66, H - 21, "perfect", 10.0);
  svg.rect(130, H - 30, 10, 10, "#956cb4");
  svg.text(146, H - 21, "other", 10.0);
  result.svg_path = (fs::path(out_dir) / "perfect_recall.svg").string();
  svg.save(result.svg_path);
  return result;
}

EmitResult emit_retention_curves(const std::vector<protocol::RetentionSeries>& series,
                                 const std::string& out_dir) {
  if (series.empty()) throw std::invalid_argument("retention curves need >= 1 series");

  // collect steps and metric keys from the first series; all series share the
  // schedule by construction
  std::vector<std::int64_t> steps;
  for (const auto& p : series[0].points) steps.push_back(p.step);
  std::vector<std::string> recall_keys;
  std::vector<int> recog_keys;
  for (const auto& [k, v] : series[0].points[0].recall_rouge_l) recall_keys.push_back(k);
  for (const auto& [k, v] : series[0].points[0].recognition_accuracy)
    recog_keys.push_back(k);

  auto mean_at = [&](std::size_t pi, const std::string& recall_key, int recog_key,
                     bool is_recall) {
    std::vector<double> vals;
    for (const auto& s : series) {
      const auto& p = s.points.at(pi);
      if (is_recall) {
        const auto it = p.recall_rouge_l.find(recall_key);
        if (it != p.recall_rouge_l.end()) vals.push_back(it->second);
      } else {
        const auto it = p.recognition_accuracy.find(recog_key);
        if (it != p.recognition_accuracy.end()) vals.push_back(it->second);
      }
    }
    std::sort(vals.begin(), vals.end());
    return mean_of(vals);
  };

  fs::create_directories(out_dir);
  EmitResult result;
  result.csv_path = (fs::path(out_dir) / "retention_curves.csv").string();
  {
    CsvWriter csv(result.csv_path);
    csv.row({"step", "panel", "metric", "mean_value", "series_count"});
    for (std::size_t pi = 0; pi < steps.size(); ++pi) {
      for (const auto& k : recall_keys) {
        csv.row({std::to_string(steps[pi]), "recall", k, fmt(mean_at(pi, k, 0, true)),
                 std::to_string(series.size())});
      }
      for (int k : recog_keys) {
        csv.row({std::to_string(steps[pi]), "recognition", "exp" + std::to_string(k),
                 fmt(mean_at(pi, "", k, false)), std::to_string(series.size())});
      }
    }
  }

  const double W = 760, H = 560;
  Svg svg(W, H);
  svg.text(W / 2, 18, "Retention under interference", 13.0, "middle");

  const double ml = 60, pw = W - ml - 150;
  const double max_step = static_cast<double>(std::max<std::int64_t>(1, steps.back()));
  // step 0 sits left of the log axis at the pseudo-position of first_step/2
  const double star_pos = steps.size() > 1 ? static_cast<double>(steps[1]) / 2.0 : 0.5;
  const double log_lo = std::log10(star_pos);
  const double log_hi = std::log10(max_step);
  auto x_of = [&](std::int64_t step) {
    const double v = step == 0 ? star_pos : static_cast<double>(step);
    return ml + (std::log10(v) - log_lo) / std::max(1e-9, log_hi - log_lo) * pw;
  };

  const std::vector<std::string> palette = {"#4878cf", "#ee854a", "#6acc65",
                                            "#d65f5f", "#956cb4", "#8c613c"};
  struct Panel {
    double top;
    double height;
    std::string title;
  };
  const Panel panels[2] = {{50, 200, "recall (rouge-l)"},
                           {310, 200, "recognition accuracy"}};

  for (int panel = 0; panel < 2; ++panel) {
    const auto& P = panels[panel];
    svg.text(ml, P.top - 8, P.title, 11.0);
    svg.line(ml, P.top + P.height, ml + pw, P.top + P.height, "black");
    svg.line(ml, P.top, ml, P.top + P.height, "black");
    auto y_of = [&](double v) { return P.top + P.height * (1.0 - v); };
    for (int grid = 0; grid <= 4; ++grid) {
      const double y = y_of(grid / 4.0);
      svg.line(ml, y, ml + pw, y, "#eeeeee");
      svg.text(ml - 6, y + 3, fmt(grid / 4.0), 9.0, "end");
    }
    // chance line at 0.5 on both panels
    svg.line(ml, y_of(0.5), ml + pw, y_of(0.5), "#888888", 1.0, "4,3");
    for (std::size_t si = 1; si < steps.size(); ++si) {
      svg.text(x_of(steps[si]), P.top + P.height + 14, std::to_string(steps[si]), 9.0,
               "middle");
    }

    const std::size_t n_curves = panel == 0 ? recall_keys.size() : recog_keys.size();
    for (std::size_t ci = 0; ci < n_curves; ++ci) {
      const auto& color = palette[ci % palette.size()];
      std::vector<std::pair<double, double>> pts;
      for (std::size_t pi = 0; pi < steps.size(); ++pi) {
        const double v = panel == 0 ? mean_at(pi, recall_keys[ci], 0, true)
                                    : mean_at(pi, "", recog_keys[ci], false);
        const double x = x_of(steps[pi]);
        const double y = y_of(std::clamp(v, 0.0, 1.0));
        if (steps[pi] == 0) {
          svg.star(x, y, 7, color);
        } else {
          pts.emplace_back(x, y);
        }
      }
      if (pts.size() > 1) svg.polyline(pts, color);
      const std::string label = panel == 0 ? recall_keys[ci]
                                           : "exp " + std::to_string(recog_keys[ci]);
      svg.rect(ml + pw + 12, P.top + ci * 16.0, 10, 10, color);
      svg.text(ml + pw + 26, P.top + ci * 16.0 + 9, label, 9.0);
    }
  }

  result.svg_path = (fs::path(out_dir) / "retention_curves.svg").string();
  svg.save(result.svg_path);
  return result;
}

}  // namespace memlab::results
