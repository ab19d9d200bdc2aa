// Result emission: metrics as JSONL + CSV (streamed, append-only during a
// run), PCA projection of the learned waveforms, and self-contained SVG plots
// of the BER trajectory, confusion heat maps and the waveform constellation.
#pragma once

#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "e2e.hpp"
#include "nn.hpp"

namespace ganlink::report {

using nn::Matrix;

std::string metrics_json_line(const e2e::MetricsRecord& r);
std::string metrics_csv_header();
std::string metrics_csv_line(const e2e::MetricsRecord& r);

// Opens both files fresh and appends one line per record, flushing each, so
// an interrupted run leaves a parseable prefix.
class MetricsWriter {
 public:
  MetricsWriter(const std::string& jsonl_path, const std::string& csv_path);
  void append(const e2e::MetricsRecord& r);

 private:
  std::ofstream jsonl_, csv_;
};

// Reads up to the first malformed line (crash-truncated files load cleanly).
std::vector<e2e::MetricsRecord> read_metrics_jsonl(const std::string& path);

// Projection onto the top-2 principal axes of the centered block set; axis 1
// carries at least as much variance as axis 2.
Matrix pca_project(const Matrix& blocks);

// Log-scale BER trajectory, one marker per record.
std::string ber_curve_svg(std::span<const e2e::MetricsRecord> history);
// Row-normalized error-probability heat map; cells carry data-row/data-col/
// data-p attributes and only probabilities >= 1% get printed labels.
std::string confusion_svg(const Matrix& confusion);
// PCA scatter of the transmit waveforms, one labeled point per symbol.
std::string constellation_svg(const Matrix& waveforms);

// Writes metrics.jsonl, metrics.csv, ber_vs_iteration.svg, confusion_k0.svg,
// confusion_final.svg and constellation.svg into out_dir.
void render_report(std::span<const e2e::MetricsRecord> history, const Matrix& confusion_k0,
                   const Matrix& confusion_final, const Matrix& waveforms,
                   const std::string& out_dir);

}  // namespace ganlink::report
