#include "semo/scoring.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "semo/error.hpp"
#include "semo/log.hpp"

namespace semo {

double psnr(const Frame& pred, const Frame& target, bool strict) {
  if (!pred.same_shape(target)) throw ContractError("psnr: frame shapes differ");
  if (pred.size() == 0) throw ContractError("psnr: empty frame");
  double sse = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = double(pred.data[i]) - double(target.data[i]);
    sse += d * d;
  }
  const double mse = sse / double(pred.size());
  if (mse < 1e-12) return kPsnrCap;
  const double peak = *std::max_element(pred.data.begin(), pred.data.end());
  const double num = strict ? peak : peak * peak;
  if (num <= 0.0) return -kPsnrCap;
  return std::clamp(10.0 * std::log10(num / mse), -kPsnrCap, kPsnrCap);
}

std::vector<double> normalize_scores(const std::vector<double>& psnrs) {
  if (psnrs.empty()) throw ContractError("normalize_scores: empty series");
  const auto [lo, hi] = std::minmax_element(psnrs.begin(), psnrs.end());
  const double min = *lo, max = *hi;
  if (!(max > min)) {
    warn("normalize_scores: constant PSNR series, every score set to 0.5");
    return std::vector<double>(psnrs.size(), 0.5);
  }
  std::vector<double> out(psnrs.size());
  for (std::size_t i = 0; i < psnrs.size(); ++i) out[i] = (psnrs[i] - min) / (max - min);
  // Endpoints exactly, whatever the rounding above did.
  out[std::size_t(lo - psnrs.begin())] = 0.0;
  out[std::size_t(hi - psnrs.begin())] = 1.0;
  return out;
}

ScoreSeries make_series(std::string clip_id, int skip, int frame_count, std::vector<double> psnrs) {
  ScoreSeries s;
  s.clip_id = std::move(clip_id);
  s.skip_prefix = skip;
  s.frame_count = frame_count;
  s.frame_index.resize(psnrs.size());
  std::iota(s.frame_index.begin(), s.frame_index.end(), skip);
  if (!psnrs.empty()) s.normality = normalize_scores(psnrs);
  s.psnr = std::move(psnrs);
  return s;
}

namespace {

void count_classes(const std::vector<std::uint8_t>& labels, std::size_t& pos, std::size_t& neg) {
  pos = 0;
  for (auto l : labels) pos += l ? 1 : 0;
  neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw EvalMismatchError("AUC undefined: labels contain a single class");
}

}  // namespace

double rank_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  if (scores.size() != labels.size()) throw EvalMismatchError("rank_auc: scores and labels differ in length");
  std::size_t pos, neg;
  count_classes(labels, pos, neg);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg = 0.5 * double(i + 1 + j);  // mean of ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]]) rank_sum += avg;
    i = j;
  }
  const double u = rank_sum - 0.5 * double(pos) * double(pos + 1);
  return u / (double(pos) * double(neg));
}

RocResult roc_curve(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  RocResult r;
  r.auc = rank_auc(scores, labels);
  count_classes(labels, r.positives, r.negatives);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  r.points.push_back({HUGE_VAL, 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    for (; j < order.size() && scores[order[j]] == scores[order[i]]; ++j) (labels[order[j]] ? tp : fp) += 1;
    r.points.push_back({scores[order[i]], double(fp) / double(r.negatives), double(tp) / double(r.positives)});
    i = j;
  }
  return r;
}

RocResult frame_auc(const std::vector<ScoreSeries>& series, const std::vector<ClipLabels>& labels, int skip) {
  std::map<std::string, const ClipLabels*> by_id;
  for (const auto& l : labels) by_id[l.clip_id] = &l;
  std::vector<double> scores;
  std::vector<std::uint8_t> flags;
  for (const auto& s : series) {
    const auto it = by_id.find(s.clip_id);
    if (it == by_id.end()) throw EvalMismatchError("no labels for clip " + s.clip_id);
    const auto& l = it->second->labels;
    if (s.normality.size() != s.size() || s.psnr.size() != s.size())
      throw EvalMismatchError("clip " + s.clip_id + ": inconsistent score columns");
    const int expected = s.frame_count > 0 ? s.frame_count : (s.size() ? s.frame_index.back() + 1 : 0);
    if (int(l.size()) != expected)
      throw EvalMismatchError("clip " + s.clip_id + ": " + std::to_string(l.size()) + " labels for " +
                              std::to_string(expected) + " frames");
    for (std::size_t i = 0; i < s.size(); ++i) {
      const int t = s.frame_index[i];
      if (t < 0 || t >= int(l.size())) throw EvalMismatchError("clip " + s.clip_id + ": frame index out of range");
      if (t < skip) continue;
      scores.push_back(s.anomaly(i));
      flags.push_back(l[std::size_t(t)] ? 1 : 0);
    }
  }
  if (scores.empty()) throw EvalMismatchError("no scored frames to evaluate");
  return roc_curve(scores, flags);
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_scores_csv(std::ostream& out, const std::vector<ScoreSeries>& series) {
  out << "clip_id,frame_index,psnr_db,normality,anomaly\n";
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.size(); ++i)
      out << s.clip_id << ',' << s.frame_index[i] << ',' << fmt(s.psnr[i]) << ',' << fmt(s.normality[i]) << ','
          << fmt(s.anomaly(i)) << '\n';
}

void write_scores_csv(const std::filesystem::path& path, const std::vector<ScoreSeries>& series) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_scores_csv(out, series);
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<ScoreSeries> read_scores_csv(std::istream& in) {
  std::vector<ScoreSeries> out;
  std::map<std::string, std::size_t> index;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.rfind("clip_id", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 5) throw ParseError("expected 5 columns", line_no);
    ScoreSeries* s;
    if (auto it = index.find(cells[0]); it != index.end()) {
      s = &out[it->second];
    } else {
      index[cells[0]] = out.size();
      s = &out.emplace_back();
      s->clip_id = cells[0];
    }
    try {
      std::size_t used = 0;
      const int t = std::stoi(cells[1], &used);
      if (used != cells[1].size()) throw std::invalid_argument("frame index");
      s->frame_index.push_back(t);
      s->psnr.push_back(std::stod(cells[2]));
      s->normality.push_back(std::stod(cells[3]));
    } catch (const std::logic_error&) {
      throw ParseError("malformed number", line_no);
    }
  }
  for (auto& s : out)
    if (!s.frame_index.empty()) s.skip_prefix = *std::min_element(s.frame_index.begin(), s.frame_index.end());
  return out;
}

std::vector<ScoreSeries> read_scores_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_scores_csv(in);
}

void write_roc_csv(std::ostream& out, const RocResult& roc) {
  out << "threshold,fpr,tpr\n";
  for (const auto& p : roc.points) out << (std::isinf(p.threshold) ? "inf" : fmt(p.threshold)) << ',' << fmt(p.fpr)
                                       << ',' << fmt(p.tpr) << '\n';
  out << "# auc=" << fmt(roc.auc) << " positives=" << roc.positives << " negatives=" << roc.negatives << '\n';
}

void write_roc_csv(const std::filesystem::path& path, const RocResult& roc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_roc_csv(out, roc);
}

namespace {

// Piecewise-linear black → blue → red → yellow → white ramp.
std::array<std::uint8_t, 3> heat(double v) {
  static constexpr double stops[5][3] = {{0, 0, 0}, {0, 0, 1}, {1, 0, 0}, {1, 1, 0}, {1, 1, 1}};
  const double x = std::clamp(v, 0.0, 1.0) * 4.0;
  const int i = std::min(3, int(x));
  const double f = x - i;
  std::array<std::uint8_t, 3> rgb;
  for (int c = 0; c < 3; ++c)
    rgb[std::size_t(c)] = std::uint8_t(std::lround(255.0 * (stops[i][c] + (stops[i + 1][c] - stops[i][c]) * f)));
  return rgb;
}

}  // namespace

Image<std::uint8_t> difference_map(const Frame& pred, const Frame& target) {
  if (!pred.same_shape(target)) throw ContractError("difference_map: frame shapes differ");
  const std::size_t n = pred.plane_size();
  std::vector<double> d(n, 0.0);
  for (int c = 0; c < pred.channels; ++c)
    for (std::size_t i = 0; i < n; ++i) d[i] += std::abs(double(pred.channel(c)[i]) - target.channel(c)[i]);
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  const double min = n ? *lo : 0.0, range = n ? *hi - *lo : 0.0;
  Image<std::uint8_t> out(3, pred.height, pred.width);
  for (std::size_t i = 0; i < n; ++i) {
    const auto rgb = heat(range > 0 ? (d[i] - min) / range : 0.0);
    for (int c = 0; c < 3; ++c) out.channel(c)[i] = rgb[std::size_t(c)];
  }
  return out;
}

}  // namespace semo
