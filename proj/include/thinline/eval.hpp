#pragma once

// Corpus evaluation and the CSV accuracy report.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "thinline/pipeline.hpp"
#include "thinline/synth.hpp"

namespace thinline {

struct EvalOptions {
  double tolerance_px = 5.0;
  unsigned jobs = 1;
  bool record_timing = false;  // wall-clock times make the report non-reproducible
};

struct EvalRow {
  std::string config;
  std::string corpus;
  std::size_t n = 0;
  std::size_t hits = 0;
  double rate_pct = 0.0;
  std::optional<double> mean_abs_err_px;  // over hits
  std::optional<double> mean_time_s;      // only when timing is recorded

  friend bool operator==(const EvalRow&, const EvalRow&) = default;
};

struct EvalReport {
  std::vector<EvalRow> rows;

  const EvalRow* find(std::string_view config, std::string_view corpus) const {
    for (const auto& r : rows)
      if (r.config == config && r.corpus == corpus) return &r;
    return nullptr;
  }

  /// Stable order: config, then corpus, lexicographic.
  void sort() {
    std::sort(rows.begin(), rows.end(), [](const EvalRow& a, const EvalRow& b) {
      return a.config != b.config ? a.config < b.config : a.corpus < b.corpus;
    });
  }

  void merge(const EvalReport& other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
    sort();
  }
};

struct ImageOutcome {
  bool hit = false;
  double abs_err = 0.0;
  double seconds = 0.0;
};

inline ImageOutcome score_image(const PipelineConfig& cfg, const Sample& sample, double tolerance_px) {
  const DetectionResult r = run_pipeline(cfg, sample.image);
  ImageOutcome o;
  o.seconds = r.total_seconds();
  if (r.reference && sample.truth.present) {
    o.abs_err = std::abs(r.reference->x_bar - sample.truth.wire_x);
    o.hit = o.abs_err <= tolerance_px;
  }
  return o;
}

namespace detail {

// Runs fn(i) for i in [0, n) on `jobs` threads; fn writes only to slot i.
template <typename F>
void parallel_for(std::size_t n, unsigned jobs, F&& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (unsigned j = 0; j < jobs; ++j)
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

/// Scores each config over one corpus. A hit needs a detected line within
/// `tolerance_px` of a present wire; misses include images with no detection.
inline EvalReport evaluate(const std::vector<PipelineConfig>& configs, const std::vector<Sample>& corpus,
                           const std::string& corpus_name, const EvalOptions& opt = {}) {
  if (corpus.empty()) throw std::invalid_argument("evaluate: corpus '" + corpus_name + "' is empty");
  if (!(opt.tolerance_px > 0.0)) throw std::invalid_argument("evaluate: tolerance must be positive");
  EvalReport report;
  for (const auto& cfg : configs) {
    std::vector<ImageOutcome> outcomes(corpus.size());
    detail::parallel_for(corpus.size(), opt.jobs,
                         [&](std::size_t i) { outcomes[i] = score_image(cfg, corpus[i], opt.tolerance_px); });
    EvalRow row;
    row.config = cfg.label();
    row.corpus = corpus_name;
    row.n = corpus.size();
    double err_sum = 0.0;
    double time_sum = 0.0;
    for (const auto& o : outcomes) {
      if (o.hit) {
        ++row.hits;
        err_sum += o.abs_err;
      }
      time_sum += o.seconds;
    }
    row.rate_pct = 100.0 * static_cast<double>(row.hits) / static_cast<double>(row.n);
    if (row.hits > 0) row.mean_abs_err_px = err_sum / static_cast<double>(row.hits);
    if (opt.record_timing) row.mean_time_s = time_sum / static_cast<double>(row.n);
    report.rows.push_back(std::move(row));
  }
  report.sort();
  return report;
}

inline constexpr std::string_view kReportHeader = "config,corpus,n,hits,rate_pct,mean_abs_err_px,mean_time_s";

namespace detail {

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace detail

inline std::string report_to_csv(const EvalReport& report) {
  EvalReport sorted = report;
  sorted.sort();
  std::string out(kReportHeader);
  out += '\n';
  for (const auto& r : sorted.rows) {
    out += r.config + ',' + r.corpus + ',' + std::to_string(r.n) + ',' + std::to_string(r.hits) + ',' +
           detail::format_fixed(r.rate_pct, 2) + ',' +
           (r.mean_abs_err_px ? detail::format_fixed(*r.mean_abs_err_px, 4) : "") + ',' +
           (r.mean_time_s ? detail::format_fixed(*r.mean_time_s, 6) : "") + '\n';
  }
  return out;
}

inline void write_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_report: cannot open " + path.string());
  const std::string csv = report_to_csv(report);
  out.write(csv.data(), static_cast<std::streamsize>(csv.size()));
  if (!out) throw std::runtime_error("write_report: write failed on " + path.string());
}

/// Parses a report CSV; numeric fields come back at their printed precision.
inline EvalReport parse_report(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) throw std::runtime_error("report: missing or unexpected header");
  EvalReport report;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 7) throw std::runtime_error("report: line " + std::to_string(line_no) + " has " +
                                                std::to_string(f.size()) + " fields, expected 7");
    try {
      EvalRow r;
      r.config = f[0];
      r.corpus = f[1];
      r.n = std::stoull(f[2]);
      r.hits = std::stoull(f[3]);
      r.rate_pct = std::stod(f[4]);
      if (!f[5].empty()) r.mean_abs_err_px = std::stod(f[5]);
      if (!f[6].empty()) r.mean_time_s = std::stod(f[6]);
      report.rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw std::runtime_error("report: malformed number on line " + std::to_string(line_no));
    }
  }
  return report;
}

inline EvalReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_report: cannot open " + path.string());
  return parse_report(in);
}

}  // namespace thinline
