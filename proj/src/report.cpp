#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace ganlink::report {

using json = nlohmann::ordered_json;

namespace {

json record_to_json(const e2e::MetricsRecord& r) {
  // Non-finite values (q2_db at BER 0 or >= 0.5, GAN losses at k = 0)
  // serialize as null.
  return json{{"k", r.k},
              {"ser", r.ser},
              {"ber", r.ber},
              {"q2_db", r.q2_db},
              {"gan_d_loss", r.gan_d_loss},
              {"gan_g_loss", r.gan_g_loss},
              {"wallclock_s", r.wallclock_s},
              {"seed", r.seed}};
}

double num_or_nan(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j[key].get<double>();
}

std::string csv_field(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string f2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string sig(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

constexpr const char* kSvgHeader = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";

const char* palette(int i) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  return colors[i % 8];
}

}  // namespace

std::string metrics_json_line(const e2e::MetricsRecord& r) { return record_to_json(r).dump(); }

std::string metrics_csv_header() {
  return "k,ser,ber,q2_db,gan_d_loss,gan_g_loss,wallclock_s,seed";
}

std::string metrics_csv_line(const e2e::MetricsRecord& r) {
  std::ostringstream out;
  out << r.k << ',' << csv_field(r.ser) << ',' << csv_field(r.ber) << ',' << csv_field(r.q2_db)
      << ',' << csv_field(r.gan_d_loss) << ',' << csv_field(r.gan_g_loss) << ','
      << csv_field(r.wallclock_s) << ',' << r.seed;
  return out.str();
}

MetricsWriter::MetricsWriter(const std::string& jsonl_path, const std::string& csv_path)
    : jsonl_(jsonl_path, std::ios::trunc), csv_(csv_path, std::ios::trunc) {
  if (!jsonl_) throw IoError("cannot open '" + jsonl_path + "' for writing");
  if (!csv_) throw IoError("cannot open '" + csv_path + "' for writing");
  csv_ << metrics_csv_header() << '\n';
  csv_.flush();
}

void MetricsWriter::append(const e2e::MetricsRecord& r) {
  jsonl_ << metrics_json_line(r) << '\n';
  jsonl_.flush();
  csv_ << metrics_csv_line(r) << '\n';
  csv_.flush();
  if (!jsonl_ || !csv_) throw IoError("metrics write failed");
}

std::vector<e2e::MetricsRecord> read_metrics_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<e2e::MetricsRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) break;  // keep the parseable prefix
    e2e::MetricsRecord r;
    r.k = j.value("k", 0);
    r.ser = num_or_nan(j, "ser");
    r.ber = num_or_nan(j, "ber");
    r.q2_db = num_or_nan(j, "q2_db");
    r.gan_d_loss = num_or_nan(j, "gan_d_loss");
    r.gan_g_loss = num_or_nan(j, "gan_g_loss");
    r.wallclock_s = num_or_nan(j, "wallclock_s");
    r.seed = j.value("seed", uint64_t{0});
    records.push_back(r);
  }
  return records;
}

Matrix pca_project(const Matrix& blocks) {
  if (blocks.rows() < 3) throw UsageError("pca_project: need at least 3 blocks");
  if (blocks.cols() < 2) throw UsageError("pca_project: blocks must have at least 2 samples");
  const Matrix centered = blocks.rowwise() - blocks.colwise().mean();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(blocks.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("pca_project: eigensolver failed");

  const Eigen::Index n = blocks.cols();
  Matrix axes(n, 2);
  axes.col(0) = solver.eigenvectors().col(n - 1);  // eigenvalues ascend
  axes.col(1) = solver.eigenvectors().col(n - 2);
  for (int a = 0; a < 2; ++a) {  // deterministic sign: largest component positive
    Eigen::Index at;
    axes.col(a).cwiseAbs().maxCoeff(&at);
    if (axes(at, a) < 0.0) axes.col(a) = -axes.col(a);
  }
  return centered * axes;
}

std::string ber_curve_svg(std::span<const e2e::MetricsRecord> history) {
  if (history.empty()) throw UsageError("ber_curve_svg: empty history");
  const double x0 = 70, x1 = 610, y0 = 370, y1 = 40;  // plot box, y grows downward

  double min_pos = std::numeric_limits<double>::infinity();
  double max_ber = 0.0;
  int k_min = history.front().k, k_max = history.front().k;
  for (const auto& r : history) {
    if (r.ber > 0.0 && std::isfinite(r.ber)) min_pos = std::min(min_pos, r.ber);
    if (std::isfinite(r.ber)) max_ber = std::max(max_ber, r.ber);
    k_min = std::min(k_min, r.k);
    k_max = std::max(k_max, r.k);
  }
  if (!std::isfinite(min_pos)) min_pos = 1e-3;  // all-zero BER: nominal decade range
  if (max_ber <= 0.0) max_ber = 1e-1;
  int dec_lo = static_cast<int>(std::floor(std::log10(min_pos)));
  int dec_hi = static_cast<int>(std::ceil(std::log10(max_ber)));
  if (dec_hi <= dec_lo) dec_hi = dec_lo + 1;

  const auto x_of = [&](int k) {
    if (k_max == k_min) return (x0 + x1) / 2.0;
    return x0 + (x1 - x0) * (k - k_min) / static_cast<double>(k_max - k_min);
  };
  const auto y_of = [&](double ber) {
    const double lg = ber > 0.0 ? std::log10(ber) : dec_lo;  // zeros pinned to the floor
    const double clamped = std::clamp(lg, static_cast<double>(dec_lo), static_cast<double>(dec_hi));
    return y0 + (y1 - y0) * (clamped - dec_lo) / (dec_hi - dec_lo);
  };

  std::ostringstream svg;
  svg << kSvgHeader
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"660\" height=\"420\" "
         "viewBox=\"0 0 660 420\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"660\" height=\"420\" fill=\"white\"/>\n"
      << "<text x=\"330\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">bit error rate vs optimization iteration</text>\n";
  for (int d = dec_lo; d <= dec_hi; ++d) {
    const double y = y_of(std::pow(10.0, d));
    svg << "<line x1=\"" << f2(x0) << "\" y1=\"" << f2(y) << "\" x2=\"" << f2(x1) << "\" y2=\""
        << f2(y) << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n"
        << "<text x=\"" << f2(x0 - 8) << "\" y=\"" << f2(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e" << d
        << "</text>\n";
  }
  for (const auto& r : history) {
    const double x = x_of(r.k);
    svg << "<line x1=\"" << f2(x) << "\" y1=\"" << f2(y0) << "\" x2=\"" << f2(x) << "\" y2=\""
        << f2(y0 + 5) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << f2(x) << "\" y=\"" << f2(y0 + 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << r.k
        << "</text>\n";
  }
  svg << "<rect x=\"" << f2(x0) << "\" y=\"" << f2(y1) << "\" width=\"" << f2(x1 - x0)
      << "\" height=\"" << f2(y0 - y1) << "\" fill=\"none\" stroke=\"black\"/>\n";

  svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (const auto& r : history) svg << f2(x_of(r.k)) << ',' << f2(y_of(r.ber)) << ' ';
  svg << "\"/>\n";
  for (const auto& r : history) {
    svg << "<circle cx=\"" << f2(x_of(r.k)) << "\" cy=\"" << f2(y_of(r.ber))
        << "\" r=\"4\" fill=\"#1f77b4\" data-k=\"" << r.k << "\" data-ber=\"" << sig(r.ber)
        << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string confusion_svg(const Matrix& confusion) {
  if (confusion.rows() < 2 || confusion.rows() != confusion.cols())
    throw UsageError("confusion_svg: need a square matrix, at least 2x2");
  const int s = static_cast<int>(confusion.rows());
  const double cell = 48.0, left = 70.0, top = 50.0;
  const double width = left + s * cell + 30, height = top + s * cell + 50;

  std::ostringstream svg;
  svg << kSvgHeader << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f2(width)
      << "\" height=\"" << f2(height) << "\" viewBox=\"0 0 " << f2(width) << ' ' << f2(height)
      << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << f2(width) << "\" height=\"" << f2(height)
      << "\" fill=\"white\"/>\n"
      << "<text x=\"" << f2(left + s * cell / 2) << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">error probabilities (row: sent, column: "
         "decided)</text>\n";

  for (int i = 0; i < s; ++i) {
    const double row_total = confusion.row(i).sum();
    for (int j = 0; j < s; ++j) {
      const double p = row_total > 0.0 ? confusion(i, j) / row_total : 0.0;
      // white at p = 0 to full blue at p = 1
      const int r = static_cast<int>(std::lround(255 - p * (255 - 31)));
      const int g = static_cast<int>(std::lround(255 - p * (255 - 119)));
      const int b = static_cast<int>(std::lround(255 - p * (255 - 180)));
      const double x = left + j * cell, y = top + i * cell;
      svg << "<rect x=\"" << f2(x) << "\" y=\"" << f2(y) << "\" width=\"" << f2(cell)
          << "\" height=\"" << f2(cell) << "\" fill=\"rgb(" << r << ',' << g << ',' << b
          << ")\" stroke=\"#888888\" data-row=\"" << (i + 1) << "\" data-col=\"" << (j + 1)
          << "\" data-p=\"" << sig(p) << "\"/>\n";
      if (p >= 0.01) {  // 1% display threshold
        svg << "<text x=\"" << f2(x + cell / 2) << "\" y=\"" << f2(y + cell / 2 + 4)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
            << (p > 0.5 ? "white" : "black") << "\">" << f2(p * 100) << "%</text>\n";
      }
    }
    svg << "<text x=\"" << f2(left - 10) << "\" y=\"" << f2(top + i * cell + cell / 2 + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << (i + 1)
        << "</text>\n"
        << "<text x=\"" << f2(left + i * cell + cell / 2) << "\" y=\"" << f2(top + s * cell + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << (i + 1)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string constellation_svg(const Matrix& waveforms) {
  const Matrix points = pca_project(waveforms);
  const double size = 480.0, pad = 60.0;
  double extent = 1e-9;
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    extent = std::max({extent, std::abs(points(r, 0)), std::abs(points(r, 1))});
  }
  const auto x_of = [&](double v) { return size / 2 + v / extent * (size / 2 - pad); };
  const auto y_of = [&](double v) { return size / 2 - v / extent * (size / 2 - pad); };

  std::ostringstream svg;
  svg << kSvgHeader << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f2(size)
      << "\" height=\"" << f2(size) << "\" viewBox=\"0 0 " << f2(size) << ' ' << f2(size)
      << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << f2(size) << "\" height=\"" << f2(size)
      << "\" fill=\"white\"/>\n"
      << "<text x=\"" << f2(size / 2) << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">transmit waveforms, top-2 principal "
         "axes</text>\n"
      << "<line x1=\"" << f2(x_of(-1.05 * extent)) << "\" y1=\"" << f2(y_of(0.0)) << "\" x2=\""
      << f2(x_of(1.05 * extent)) << "\" y2=\"" << f2(y_of(0.0))
      << "\" stroke=\"#dddddd\"/>\n"
      << "<line x1=\"" << f2(x_of(0.0)) << "\" y1=\"" << f2(y_of(-1.05 * extent)) << "\" x2=\""
      << f2(x_of(0.0)) << "\" y2=\"" << f2(y_of(1.05 * extent)) << "\" stroke=\"#dddddd\"/>\n";

  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    const double x = x_of(points(r, 0)), y = y_of(points(r, 1));
    svg << "<circle cx=\"" << f2(x) << "\" cy=\"" << f2(y) << "\" r=\"7\" fill=\""
        << palette(static_cast<int>(r)) << "\" data-symbol=\"" << (r + 1) << "\"/>\n"
        << "<text x=\"" << f2(x + 10) << "\" y=\"" << f2(y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << (r + 1) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("short write to '" + path + "'");
}

}  // namespace

void render_report(std::span<const e2e::MetricsRecord> history, const Matrix& confusion_k0,
                   const Matrix& confusion_final, const Matrix& waveforms,
                   const std::string& out_dir) {
  if (history.empty()) throw UsageError("render_report: empty history");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());
  const auto at = [&](const char* name) { return (std::filesystem::path(out_dir) / name).string(); };

  {
    MetricsWriter writer(at("metrics.jsonl"), at("metrics.csv"));
    for (const auto& r : history) writer.append(r);
  }
  write_file(at("ber_vs_iteration.svg"), ber_curve_svg(history));
  write_file(at("confusion_k0.svg"), confusion_svg(confusion_k0));
  write_file(at("confusion_final.svg"), confusion_svg(confusion_final));
  write_file(at("constellation.svg"), constellation_svg(waveforms));
}

}  // namespace ganlink::report
