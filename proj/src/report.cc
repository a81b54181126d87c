#include "qpathnet/report.h"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "qpathnet/config.h"
#include "qpathnet/errors.h"
#include "qpathnet/io.h"

namespace qpathnet {

using nlohmann::json;

namespace {

using Row = std::vector<std::string>;

std::string render(const std::string& title, const std::vector<Row>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& r : rows) {
    widths.resize(std::max(widths.size(), r.size()), 0);
    for (std::size_t c = 0; c < r.size(); ++c) widths[c] = std::max(widths[c], r[c].size());
  }
  std::string out = title + "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string line;
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      if (c > 0) line += "  ";
      line += fmt::format("{:<{}}", rows[i][c], widths[c]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w;
      out += std::string(total + 2 * (widths.size() - 1), '-') + "\n";
    }
  }
  return out;
}

std::string num(const json& j) {
  if (j.is_number()) return format_number(j.get<double>());
  return "n/a";
}

const json& field(const json& s, const char* key, std::size_t index) {
  const auto it = s.find(key);
  if (it == s.end()) throw ConfigError(fmt::format("summary {} has no field {}", index + 1, key));
  return *it;
}

std::string unique_name(std::set<std::string>& used, const std::string& stem) {
  std::string name = stem + ".csv";
  for (int k = 2; used.count(name); ++k) name = fmt::format("{}_{}.csv", stem, k);
  used.insert(name);
  return name;
}

}  // namespace

ReportOutput build_report(const std::vector<json>& summaries) {
  if (summaries.empty()) throw ConfigError("no summaries given");
  std::optional<std::size_t> dim;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    if (!summaries[i].is_object()) throw ConfigError(fmt::format("summary {} is not a JSON object", i + 1));
    const auto d = field(summaries[i], "dim", i).get<std::size_t>();
    if (dim && *dim != d) {
      throw ConfigError(fmt::format("mixed system dimensions: {} and {} (summary {})", *dim, d, i + 1));
    }
    dim = d;
  }

  ReportOutput out;
  std::set<std::string> used;
  auto label = [](const json& s) {
    return fmt::format("{} ({})", s.value("name", std::string("?")), s.value("mode", std::string("?")));
  };

  // Exact runs side by side.
  Row head{"quantity"};
  std::vector<Row> exact_rows{{"strong_mean"}, {"weak_value_re"}, {"weak_value_im"}, {"norm"}};
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    if (s.value("mode", "") != "exact") continue;
    head.push_back(label(s));
    exact_rows[0].push_back(num(field(s, "strong_mean", i)));
    exact_rows[1].push_back(num(field(s, "weak_value_re", i)));
    exact_rows[2].push_back(num(field(s, "weak_value_im", i)));
    exact_rows[3].push_back(num(field(s, "norm", i)));
    const auto& meters = field(s, "meters", i);
    for (std::size_t m = 0; m < meters.size(); ++m) {
      const auto p = distribution_from_json(meters[m].at("distribution"));
      std::string csv = "xi,density\n";
      for (std::size_t k = 0; k < p.grid.count; ++k) {
        csv += format_number(p.grid.at(k)) + "," + format_number(p.density[k]) + "\n";
      }
      out.plots.emplace_back(unique_name(used, fmt::format("{}_distribution_{}", s.value("name", "run"), m + 1)), csv);
    }
  }
  if (head.size() > 1) {
    std::vector<Row> rows{head};
    rows.insert(rows.end(), exact_rows.begin(), exact_rows.end());
    out.table += render("exact runs", rows) + "\n";
  }

  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    const std::string mode = s.value("mode", "");
    if (mode == "sweep") {
      std::vector<Row> rows{{"width", "mean", "abs_error"}};
      std::string csv = "width,mean\n";
      for (const auto& r : field(s, "rows", i)) {
        rows.push_back({num(r.at("width")), num(r.at("mean")), num(r.at("abs_error"))});
        csv += num(r.at("width")) + "," + num(r.at("mean")) + "\n";
      }
      rows.push_back({"limit", num(field(s, "weak_value_re", i)), ""});
      out.table += render("sweep: " + label(s), rows) + "\n";
      out.plots.emplace_back(unique_name(used, s.value("name", "run") + "_sweep"), csv);
    } else if (mode == "sample") {
      // Prefer an exact run of the same scenario as the reference.
      const json* exact = nullptr;
      for (const auto& other : summaries) {
        if (other.value("mode", "") == "exact" && other.value("name", "") == s.value("name", "")) exact = &other;
      }
      std::vector<Row> rows{{"meter", "empirical", "std_error", "exact", "z"}};
      const auto& meters = field(s, "meters", i);
      for (std::size_t m = 0; m < meters.size(); ++m) {
        const double emp = meters[m].at("mean").get<double>();
        const double se = meters[m].at("standard_error").get<double>();
        json ref = meters[m].value("exact_mean", json(nullptr));
        if (exact && m < exact->at("meters").size()) ref = exact->at("meters")[m].at("mean_reading");
        std::string z = "n/a";
        if (ref.is_number() && se > 0.0) z = format_number((emp - ref.get<double>()) / se);
        rows.push_back({fmt::format("{}", m + 1), format_number(emp), format_number(se), num(ref), z});
      }
      out.table += render(fmt::format("empirical vs exact: {}, {} of {} trials accepted", label(s),
                                      num(field(s, "accepted", i)), num(field(s, "trials", i))),
                          rows) +
                   "\n";
    } else if (mode == "classical") {
      std::vector<Row> rows{{"quantity", "value"}, {"classical_mean", num(field(s, "classical_mean", i))}};
      if (s.contains("quantum_strong_mean")) rows.push_back({"quantum_strong_mean", num(s["quantum_strong_mean"])});
      rows.push_back({"total_probability", num(field(s, "total_probability", i))});
      out.table += render("classical: " + label(s), rows) + "\n";
    } else if (mode != "exact") {
      throw ConfigError(fmt::format("summary {} has unknown mode '{}'", i + 1, mode));
    }
  }
  return out;
}

int report(const std::vector<std::filesystem::path>& files, const std::filesystem::path& out_dir,
           std::string& table_out, std::string& message) {
  try {
    std::vector<json> summaries;
    for (const auto& f : files) {
      try {
        summaries.push_back(read_json_file(f));
      } catch (const json::exception& e) {
        throw ConfigError(fmt::format("{}: not valid JSON ({})", f.string(), e.what()));
      }
    }
    const auto out = build_report(summaries);
    table_out = out.table;
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      for (const auto& [name, csv] : out.plots) write_text_file(out_dir / name, csv);
      write_text_file(out_dir / "report.txt", out.table);
      message = fmt::format("wrote report.txt and {} plot files to {}", out.plots.size(), out_dir.string());
    }
    return 0;
  } catch (const ConfigError& e) {
    message = fmt::format("report error: {}", e.what());
    return 2;
  } catch (const json::exception& e) {
    message = fmt::format("report error: malformed summary ({})", e.what());
    return 2;
  } catch (const std::exception& e) {
    message = fmt::format("report error: {}", e.what());
    return 3;
  }
}

}  // namespace qpathnet
