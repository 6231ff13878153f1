#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace unmix::metrics {

namespace {

std::string num_field(double v, const char* fmt = "%.6g") {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

double sre_db(const Matrix& truth, const Matrix& estimate, bool* capped) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols())
    throw DimensionError("sre: shape mismatch");
  if (capped) *capped = false;
  const double num = truth.squaredNorm();
  const double den = (estimate - truth).squaredNorm();
  if (den == 0.0) {
    if (capped) *capped = true;
    return kSreCapDb;
  }
  double val = 10.0 * std::log10(num / den);
  if (val > kSreCapDb) {
    if (capped) *capped = true;
    return kSreCapDb;
  }
  if (val < -kSreCapDb || std::isnan(val)) {
    if (capped) *capped = true;
    return -kSreCapDb;
  }
  return val;
}

double sparsity_level(const Matrix& estimate) {
  if (estimate.cols() == 0) throw DimensionError("sparsity_level: no columns");
  double total = 0.0;
  for (int j = 0; j < estimate.cols(); ++j)
    for (int i = 0; i < estimate.rows(); ++i)
      if (estimate(i, j) >= kZeroThreshold) total += 1.0;
  return total / static_cast<double>(estimate.cols());
}

double support_distance(const std::vector<int>& truth_support,
                        const std::vector<int>& est_support) {
  const std::size_t m = std::max(truth_support.size(), est_support.size());
  if (m == 0) return 0.0;
  std::size_t inter = 0;
  auto it = truth_support.begin();
  for (int e : est_support) {
    while (it != truth_support.end() && *it < e) ++it;
    if (it != truth_support.end() && *it == e) {
      ++inter;
      ++it;
    }
  }
  return (static_cast<double>(m) - static_cast<double>(inter)) /
         static_cast<double>(m);
}

std::vector<int> thresholded_support(const Vector& column) {
  std::vector<int> s;
  for (int i = 0; i < column.size(); ++i)
    if (column[i] >= kZeroThreshold) s.push_back(i);
  return s;
}

Evaluation evaluate(const PixelBatch& batch, const Matrix& abundance_est,
                    const Matrix& multiple_est, double wall_time_s) {
  const int pp = batch.pixels();
  if (abundance_est.cols() != pp || multiple_est.cols() != pp)
    throw DimensionError("evaluate: pixel count mismatch");

  Evaluation ev;
  ev.report.sl_a = sparsity_level(abundance_est);
  ev.report.sl_r = sparsity_level(multiple_est);
  ev.report.wall_time_s = wall_time_s;
  ev.per_pixel.resize(pp);
  for (int i = 0; i < pp; ++i) {
    ev.per_pixel[i].pixel = i;
    ev.per_pixel[i].sl_a =
        static_cast<int>(thresholded_support(abundance_est.col(i)).size());
    ev.per_pixel[i].sl_r =
        static_cast<int>(thresholded_support(multiple_est.col(i)).size());
  }
  if (!batch.truth) return ev;  // everything else stays flagged absent

  const BatchTruth& t = *batch.truth;
  if (t.abundance.rows() != abundance_est.rows() ||
      t.multiple.rows() != multiple_est.rows() || t.abundance.cols() != pp)
    throw DimensionError("evaluate: truth shape mismatch");

  ev.report.has_truth = true;
  ev.report.sre_a_db = sre_db(t.abundance, abundance_est,
                              &ev.report.sre_a_capped);
  ev.report.sre_r_db =
      sre_db(t.multiple, multiple_est, &ev.report.sre_r_capped);
  ev.report.sl_a_ref = sparsity_level(t.abundance);
  ev.report.sl_r_ref = sparsity_level(t.multiple);

  double dist_a = 0.0, dist_r = 0.0;
  for (int i = 0; i < pp; ++i) {
    PixelEval& pe = ev.per_pixel[i];
    pe.err_a_sq = (abundance_est.col(i) - t.abundance.col(i)).squaredNorm();
    pe.sig_a_sq = t.abundance.col(i).squaredNorm();
    pe.err_r_sq = (multiple_est.col(i) - t.multiple.col(i)).squaredNorm();
    pe.sig_r_sq = t.multiple.col(i).squaredNorm();
    pe.dist_a = support_distance(t.class_support[i],
                                 thresholded_support(abundance_est.col(i)));
    pe.dist_r = support_distance(t.atom_support[i],
                                 thresholded_support(multiple_est.col(i)));
    dist_a += pe.dist_a;
    dist_r += pe.dist_r;
  }
  ev.report.dist_a = dist_a / pp;
  ev.report.dist_r = dist_r / pp;
  return ev;
}

std::string report_csv_header() {
  return "method,dataset,snr_db,lambda_a,lambda_b,lambda_r,lambda_g,"
         "sre_a_db,sre_r_db,sl_a,sl_r,sl_a_ref,sl_r_ref,dist_a,dist_r,"
         "wall_time_s";
}

std::string report_csv_row(const ReportLabels& labels, const EvalReport& r) {
  std::string row = labels.method + "," + labels.dataset + "," +
                    num_field(labels.snr_db);
  for (double l : {labels.lambda_a, labels.lambda_b, labels.lambda_r,
                   labels.lambda_g})
    row += "," + num_field(l);
  for (double v : {r.sre_a_db, r.sre_r_db, r.sl_a, r.sl_r, r.sl_a_ref,
                   r.sl_r_ref, r.dist_a, r.dist_r, r.wall_time_s})
    row += "," + num_field(v);
  return row;
}

std::string report_text_header() {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-8s %-6s %6s %9s %9s %7s %7s %7s %7s",
                "method", "data", "snr", "SRE_a", "SRE_r", "SL_a", "SL_r",
                "DIST_a", "DIST_r");
  return buf;
}

std::string report_text_row(const ReportLabels& labels, const EvalReport& r) {
  auto f = [](double v) { return num_field(v, "%.4g"); };
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-8s %-6s %6s %9s %9s %7s %7s %7s %7s",
                labels.method.c_str(), labels.dataset.c_str(),
                f(labels.snr_db).c_str(), f(r.sre_a_db).c_str(),
                f(r.sre_r_db).c_str(), f(r.sl_a).c_str(), f(r.sl_r).c_str(),
                f(r.dist_a).c_str(), f(r.dist_r).c_str());
  return buf;
}

}  // namespace unmix::metrics
