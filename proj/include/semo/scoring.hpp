#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "semo/image.hpp"
#include "semo/video_io.hpp"

namespace semo {

/// Scores and labels cannot be lined up, or the AUC is undefined.
class EvalMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPsnrCap = 120.0;

/// 10·log10(max(pred)² / MSE) over all channel entries; kPsnrCap when MSE < 1e-12.
/// `strict` drops the square on the peak. Results are clamped to [-kPsnrCap, kPsnrCap].
double psnr(const Frame& pred, const Frame& target, bool strict = false);

/// Per-clip min-max normalization to [0,1]; a constant series maps to 0.5 with a warning.
std::vector<double> normalize_scores(const std::vector<double>& psnrs);

/// Scores of one clip. Entry i belongs to frame frame_index[i]; frames before skip_prefix are not scored.
struct ScoreSeries {
  std::string clip_id;
  int skip_prefix = 0;
  int frame_count = 0;  // frames in the clip, 0 when unknown
  std::vector<int> frame_index;
  std::vector<double> psnr;
  std::vector<double> normality;

  std::size_t size() const noexcept { return frame_index.size(); }
  double anomaly(std::size_t i) const { return 1.0 - normality[i]; }
};

/// Builds a series from per-frame PSNR values of frames skip, skip+1, ...
ScoreSeries make_series(std::string clip_id, int skip, int frame_count, std::vector<double> psnrs);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  double auc = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::vector<RocPoint> points;  // threshold descending, fpr/tpr non-decreasing
};

/// Mann–Whitney AUC with average ranks (ties count 1/2). Label 1 is the positive class.
/// Throws EvalMismatchError when only one class is present.
double rank_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels);

/// ROC over `score >= threshold` for every distinct score.
RocResult roc_curve(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels);

/// Pools anomaly scores 1 - S_t of all clips, dropping frames with index < skip, and evaluates the ROC.
/// Series and labels are matched by clip id. Throws EvalMismatchError on missing clips or length mismatch.
RocResult frame_auc(const std::vector<ScoreSeries>& series, const std::vector<ClipLabels>& labels, int skip);

/// clip_id,frame_index,psnr_db,normality,anomaly
void write_scores_csv(std::ostream& out, const std::vector<ScoreSeries>& series);
void write_scores_csv(const std::filesystem::path& path, const std::vector<ScoreSeries>& series);
/// Groups rows by clip id in order of first appearance. Throws ParseError on malformed rows.
std::vector<ScoreSeries> read_scores_csv(std::istream& in);
std::vector<ScoreSeries> read_scores_csv(const std::filesystem::path& path);

/// threshold,fpr,tpr rows followed by a "# auc=..." summary line.
void write_roc_csv(std::ostream& out, const RocResult& roc);
void write_roc_csv(const std::filesystem::path& path, const RocResult& roc);

/// Per-pixel |pred - target| summed over channels, min-max normalized, as an RGB heat map.
Image<std::uint8_t> difference_map(const Frame& pred, const Frame& target);

}  // namespace semo
