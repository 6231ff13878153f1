#pragma once

#include "types.hpp"

#include <string>
#include <vector>

namespace unmix::metrics {

// Entries below this are treated as zero when counting supports.
inline constexpr double kZeroThreshold = 1e-4;
// Reconstruction-error ratios above this are reported capped.
inline constexpr double kSreCapDb = 300.0;

struct EvalReport {
  double sre_a_db = std::numeric_limits<double>::quiet_NaN();
  double sre_r_db = std::numeric_limits<double>::quiet_NaN();
  double sl_a = std::numeric_limits<double>::quiet_NaN();
  double sl_r = std::numeric_limits<double>::quiet_NaN();
  double sl_a_ref = std::numeric_limits<double>::quiet_NaN();  // truth
  double sl_r_ref = std::numeric_limits<double>::quiet_NaN();
  double dist_a = std::numeric_limits<double>::quiet_NaN();
  double dist_r = std::numeric_limits<double>::quiet_NaN();
  double wall_time_s = std::numeric_limits<double>::quiet_NaN();
  bool sre_a_capped = false;
  bool sre_r_capped = false;
  bool has_truth = false;
};

struct PixelEval {
  int pixel = 0;
  double err_a_sq = 0.0, sig_a_sq = 0.0;
  double err_r_sq = 0.0, sig_r_sq = 0.0;
  double dist_a = 0.0, dist_r = 0.0;
  int sl_a = 0, sl_r = 0;
};

struct Evaluation {
  EvalReport report;
  std::vector<PixelEval> per_pixel;
};

// Signal-to-reconstruction-error in dB over a whole batch:
// 10 log10(sum ||truth col||^2 / sum ||err col||^2), ratio of sums.
// A ratio above the 300 dB cap (including a zero error) reports the cap
// with *capped set.
double sre_db(const Matrix& truth, const Matrix& estimate,
              bool* capped = nullptr);

// Mean number of entries at or above the zero threshold per column.
double sparsity_level(const Matrix& estimate);

// Support distance of two index sets:
// (max(|S|,|T|) - |S intersect T|) / max(|S|,|T|); 0 when both are empty.
double support_distance(const std::vector<int>& truth_support,
                        const std::vector<int>& est_support);

// Column support at the zero threshold, sorted.
std::vector<int> thresholded_support(const Vector& column);

// Batch evaluation of abundance (K x P) and per-atom (N x P) estimates
// against recorded truth. Without truth only the sparsity levels are
// computed and the rest stays flagged absent.
Evaluation evaluate(const PixelBatch& batch, const Matrix& abundance_est,
                    const Matrix& multiple_est,
                    double wall_time_s = std::numeric_limits<double>::quiet_NaN());

struct ReportLabels {
  std::string method;
  std::string dataset;
  double snr_db = std::numeric_limits<double>::infinity();
  double lambda_a = std::numeric_limits<double>::quiet_NaN();
  double lambda_b = std::numeric_limits<double>::quiet_NaN();
  double lambda_r = std::numeric_limits<double>::quiet_NaN();
  double lambda_g = std::numeric_limits<double>::quiet_NaN();
};

std::string report_csv_header();
std::string report_csv_row(const ReportLabels& labels, const EvalReport& r);
std::string report_text_header();
std::string report_text_row(const ReportLabels& labels, const EvalReport& r);

}  // namespace unmix::metrics
