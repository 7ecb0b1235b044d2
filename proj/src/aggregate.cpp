#include "qstab/aggregate.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "qstab/errors.hpp"
#include "qstab/rng.hpp"
#include "qstab/runner.hpp"

namespace qstab {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

struct TrialSeries {
  std::vector<long> steps;
  std::vector<double> values;
};

TrialSeries read_trial_metric(const fs::path& file, const std::string& metric) {
  std::ifstream f(file);
  if (!f) throw ConfigError("cannot open " + file.string());
  std::string line;
  if (!std::getline(f, line))
    throw ConfigError("empty trial file " + file.string());
  const std::vector<std::string> header = split_csv_line(line);
  int step_col = -1, metric_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "step") step_col = static_cast<int>(i);
    if (header[i] == metric) metric_col = static_cast<int>(i);
  }
  if (step_col < 0)
    throw ConfigError("no step column in " + file.string());
  if (metric_col < 0)
    throw ConfigError("metric '" + metric + "' not found in " + file.string() +
                      " (available: " + line + ")");
  TrialSeries series;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cols = split_csv_line(line);
    series.steps.push_back(std::stol(cols[step_col]));
    series.values.push_back(std::stod(cols[metric_col]));
  }
  return series;
}

std::string method_label(const fs::path& dir) {
  std::ifstream meta(dir / "run_meta.txt");
  if (meta) {
    std::string line;
    while (std::getline(meta, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(0, eq);
      key.erase(key.find_last_not_of(" \t") + 1);
      if (key == "method") {
        std::string v = line.substr(eq + 1);
        v.erase(0, v.find_first_not_of(" \t"));
        return v;
      }
    }
  }
  return dir.filename().string();
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<fs::path>& run_dirs,
                                    const std::string& metric, int n_bootstrap,
                                    std::uint64_t seed) {
  if (run_dirs.empty()) throw ConfigError("aggregate: no input directories");

  std::vector<AggregateRow> rows;
  std::vector<long> reference_steps;
  bool have_reference = false;

  for (const fs::path& dir : run_dirs) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir))
      throw ConfigError("aggregate: not a directory: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("trial_", 0) == 0 && name.size() >= 13 &&
          name.substr(name.size() - 4) == ".csv" &&
          name.find("_visits") == std::string::npos)
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw ConfigError("aggregate: no trial files in " + dir.string());

    std::vector<TrialSeries> series;
    for (const fs::path& f : files) {
      series.push_back(read_trial_metric(f, metric));
      if (series.back().steps != series.front().steps)
        throw ConfigError("aggregate: window grid of " + f.string() +
                          " differs from " + files.front().string());
    }
    if (!have_reference) {
      reference_steps = series.front().steps;
      have_reference = true;
    } else if (series.front().steps != reference_steps) {
      throw ConfigError("aggregate: window grid of " + dir.string() +
                        " does not align with earlier inputs");
    }

    const std::string label = method_label(dir);
    const int n_trials = static_cast<int>(series.size());
    std::vector<double> window_values(n_trials);
    for (std::size_t w = 0; w < reference_steps.size(); ++w) {
      for (int t = 0; t < n_trials; ++t) window_values[t] = series[t].values[w];
      AggregateRow row;
      row.method = label;
      row.step = reference_steps[w];
      if (n_trials == 1) {
        row.stats.iqm = row.stats.ci_low = row.stats.ci_high = window_values[0];
        row.stats.n_samples = 1;
        row.stats.n_bootstrap = 0;
      } else {
        row.stats = bootstrap_ci(window_values, n_bootstrap,
                                 mix_seed(seed, static_cast<std::uint64_t>(w)));
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_aggregate_csv(const std::vector<AggregateRow>& rows,
                         const fs::path& out_file) {
  std::ofstream f(out_file);
  if (!f) throw ConfigError("cannot write " + out_file.string());
  f << "method,step,iqm,ci_low,ci_high,n_trials\n";
  for (const AggregateRow& r : rows)
    f << r.method << ',' << r.step << ',' << csv_num(r.stats.iqm) << ','
      << csv_num(r.stats.ci_low) << ',' << csv_num(r.stats.ci_high) << ','
      << r.stats.n_samples << '\n';
}

}  // namespace qstab
