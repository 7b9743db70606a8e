#ifndef RSPF_HARNESS_OUTPUT_HPP
#define RSPF_HARNESS_OUTPUT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <rspf/filter.hpp>
#include <rspf/harness/experiment.hpp>
#include <rspf/harness/scenario.hpp>

/**
 * \file
 * \brief CSV and SVG emitters. Floats are written with 17 significant digits, models one-based.
 *
 * Schemas:
 *  - trajectory:      t,model,state,observation        (observation empty at t = 0)
 *  - filter output:   t,x_hat,map_model,ess,p_1,...,p_K
 *  - summary.csv:     method,completed,failures,mse_average,mse_best,mse_worst,
 *                     accuracy_average,accuracy_best,accuracy_worst
 *  - runs.csv:        run,seed,method,status,mse,accuracy
 *  - cumulative_mse.csv: t,<one column per method>
 */

namespace rspf::harness {

inline std::string format_real(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "t,model,state,observation\n";
  for (std::size_t t = 0; t < trajectory.states.size(); ++t) {
    out << t << ',' << trajectory.models[t].one_based() << ',' << format_real(trajectory.states[t]) << ',';
    if (t > 0) {
      out << format_real(trajectory.observations[t - 1]);
    }
    out << '\n';
  }
}

/// Parses the trajectory schema. Missing model/state cells are allowed (observations only).
inline Trajectory read_trajectory_csv(std::istream& in) {
  Trajectory trajectory;
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("t,model,state,observation")) {
    throw ConfigError("trajectory CSV must start with the header t,model,state,observation");
  }
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) {
        break;
      }
      start = comma + 1;
    }
    if (cells.size() != 4) {
      throw ConfigError("trajectory CSV rows need four cells: " + line);
    }
    const auto t = std::stoul(cells[0]);
    if (t != trajectory.states.size()) {
      throw ConfigError("trajectory CSV rows must be ordered t = 0, 1, ...");
    }
    trajectory.models.push_back(cells[1].empty() ? ModelIndex{} : ModelIndex::from_one_based(std::stoul(cells[1])));
    trajectory.states.push_back(cells[2].empty() ? 0.0 : std::stod(cells[2]));
    if (t > 0) {
      if (cells[3].empty()) {
        throw ConfigError("trajectory CSV is missing the observation at t=" + cells[0]);
      }
      trajectory.observations.push_back(std::stod(cells[3]));
    }
  }
  if (trajectory.observations.empty()) {
    throw ConfigError("trajectory CSV has no observations");
  }
  return trajectory;
}

inline void write_filter_csv(std::ostream& out, std::span<const FilterOutput<double>> outputs) {
  const std::size_t model_count = outputs.empty() ? 0 : outputs.front().model_posteriors.size();
  out << "t,x_hat,map_model,ess";
  for (std::size_t k = 1; k <= model_count; ++k) {
    out << ",p_" << k;
  }
  out << '\n';
  for (const auto& output : outputs) {
    out << output.t << ',' << format_real(output.state_estimate) << ',' << output.map_model.one_based() << ','
        << format_real(output.ess);
    for (const double p : output.model_posteriors) {
      out << ',' << format_real(p);
    }
    out << '\n';
  }
}

inline void write_summary_csv(std::ostream& out, std::span<const MethodSummary> summaries) {
  out << "method,completed,failures,mse_average,mse_best,mse_worst,accuracy_average,accuracy_best,accuracy_worst\n";
  for (const auto& s : summaries) {
    out << s.name << ',' << s.completed << ',' << s.failures << ',' << format_real(s.mse.average) << ','
        << format_real(s.mse.best) << ',' << format_real(s.mse.worst) << ',' << format_real(s.accuracy.average) << ','
        << format_real(s.accuracy.best) << ',' << format_real(s.accuracy.worst) << '\n';
  }
}

inline void write_runs_csv(std::ostream& out, const ExperimentConfig& cfg, std::span<const RunRecord> records) {
  out << "run,seed,method,status,mse,accuracy\n";
  for (const auto& record : records) {
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
      const auto& run = record.methods[m];
      out << record.run << ',' << record.seed << ',' << cfg.methods[m].name << ',' << (run.ok ? "ok" : "degenerate")
          << ',';
      if (run.ok) {
        out << format_real(run.mse) << ',' << format_real(run.accuracy);
      } else {
        out << ',';
      }
      out << '\n';
    }
  }
}

inline void write_cumulative_mse_csv(std::ostream& out, std::span<const MethodSummary> summaries, std::size_t horizon) {
  out << 't';
  for (const auto& s : summaries) {
    out << ',' << s.name;
  }
  out << '\n';
  for (std::size_t t = 0; t < horizon; ++t) {
    out << t + 1;
    for (const auto& s : summaries) {
      out << ',' << format_real(s.mean_cumulative_mse[t]);
    }
    out << '\n';
  }
}

/// Line chart of the mean cumulative squared error per method, log-scaled y axis.
inline void write_cumulative_mse_svg(std::ostream& out, std::span<const MethodSummary> summaries, std::size_t horizon,
                                     const std::string& title) {
  constexpr double kWidth = 720.0;
  constexpr double kHeight = 440.0;
  constexpr double kLeft = 70.0;
  constexpr double kRight = 200.0;
  constexpr double kTop = 40.0;
  constexpr double kBottom = 50.0;
  static constexpr const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  double low = 1e300;
  double high = 0.0;
  for (const auto& s : summaries) {
    for (const double v : s.mean_cumulative_mse) {
      if (v > 0.0) {
        low = std::min(low, v);
        high = std::max(high, v);
      }
    }
  }
  if (!(high > 0.0)) {
    low = 1e-3;
    high = 1.0;
  }
  const double log_low = std::floor(std::log10(low));
  const double log_high = std::max(std::ceil(std::log10(high)), log_low + 1.0);
  const double plot_width = kWidth - kLeft - kRight;
  const double plot_height = kHeight - kTop - kBottom;
  auto x_of = [&](std::size_t t) {
    return kLeft + plot_width * (horizon > 1 ? static_cast<double>(t - 1) / static_cast<double>(horizon - 1) : 0.0);
  };
  auto y_of = [&](double v) {
    const double lv = std::log10(std::max(v, std::pow(10.0, log_low)));
    return kTop + plot_height * (1.0 - (lv - log_low) / (log_high - log_low));
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_width << "\" height=\"" << plot_height
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double e = log_low; e <= log_high; e += 1.0) {
    const double y = y_of(std::pow(10.0, e));
    out << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + plot_width << "\" y1=\"" << y << "\" y2=\"" << y
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">1e" << static_cast<int>(e)
        << "</text>\n";
  }
  for (std::size_t t = 1; t <= horizon; t += std::max<std::size_t>(1, horizon / 5)) {
    out << "<text x=\"" << x_of(t) << "\" y=\"" << kTop + plot_height + 18
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << t << "</text>\n";
  }
  out << "<text x=\"" << kLeft + plot_width / 2 << "\" y=\"" << kHeight - 10
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">t</text>\n";
  for (std::size_t m = 0; m < summaries.size(); ++m) {
    const auto* color = kColors[m % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t t = 1; t <= horizon; ++t) {
      out << format_real(x_of(t)) << ',' << format_real(y_of(summaries[m].mean_cumulative_mse[t - 1])) << ' ';
    }
    out << "\"/>\n";
    const double legend_y = kTop + 16.0 * static_cast<double>(m) + 8.0;
    out << "<line x1=\"" << kLeft + plot_width + 12 << "\" x2=\"" << kLeft + plot_width + 32 << "\" y1=\""
        << legend_y << "\" y2=\"" << legend_y << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kLeft + plot_width + 38 << "\" y=\"" << legend_y + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << summaries[m].name << "</text>\n";
  }
  out << "</svg>\n";
}

/// Writes summary.csv, runs.csv, cumulative_mse.csv and cumulative_mse.svg into `directory`.
inline void emit_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                         const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  auto open = [&](const char* name) {
    std::ofstream file{directory / name, std::ios::binary};
    if (!file) {
      throw std::runtime_error("cannot write " + (directory / name).string());
    }
    return file;
  };
  {
    auto file = open("summary.csv");
    write_summary_csv(file, result.summaries);
  }
  {
    auto file = open("runs.csv");
    write_runs_csv(file, cfg, result.records);
  }
  {
    auto file = open("cumulative_mse.csv");
    write_cumulative_mse_csv(file, result.summaries, result.horizon);
  }
  {
    auto file = open("cumulative_mse.svg");
    write_cumulative_mse_svg(file, result.summaries, result.horizon,
                             "Mean cumulative squared error (" + std::string{to_string(cfg.scenario.kind)} + ")");
  }
}

}  // namespace rspf::harness

#endif
