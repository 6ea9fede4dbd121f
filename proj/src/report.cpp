#include "mathenc/error.hpp"
#include "mathenc/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace mathenc {
namespace {

std::optional<double> mean_of(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values)
    if (v) {
      sum += *v;
      ++n;
    }
  if (!n) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> max_of(const std::vector<std::optional<double>>& values) {
  std::optional<double> best;
  for (const auto& v : values)
    if (v && (!best || *v > *best)) best = v;
  return best;
}

// Index of the largest present value among `candidates`; ties keep the first.
std::optional<std::size_t> argmax(const std::vector<std::optional<double>>& values,
                                  const std::vector<std::size_t>& candidates) {
  std::optional<std::size_t> best;
  for (std::size_t i : candidates)
    if (values[i] && (!best || *values[i] > *values[*best])) best = i;
  return best;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), 0);
  return out;
}

std::string fixed(double v, int decimals) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", decimals, v);
  return buffer;
}

std::string fixed(const std::optional<double>& v, int decimals) { return v ? fixed(*v, decimals) : ""; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string mark(const std::string& text, bool on, const char* marker) {
  if (!on || text.empty()) return text;
  return marker + text + marker;
}

void write_md_row(std::ostringstream& out, const std::vector<std::string>& fields) {
  out << '|';
  for (const auto& f : fields) out << ' ' << f << " |";
  out << '\n';
}

}  // namespace

EvaluationReport build_report(std::vector<std::string> rows, std::vector<std::string> columns,
                              std::vector<std::vector<std::optional<double>>> cells,
                              const std::vector<double>& runtime_seconds,
                              std::map<std::string, std::string> metadata,
                              std::vector<int> column_groups) {
  if (rows.empty() || columns.empty()) throw Error(ErrorCode::ragged_grid, "report grid is empty");
  if (cells.size() != rows.size()) throw Error(ErrorCode::ragged_grid, "cell rows do not match row names");
  for (const auto& row : cells)
    if (row.size() != columns.size()) throw Error(ErrorCode::ragged_grid, "cell row width differs from columns");
  if (!runtime_seconds.empty() && runtime_seconds.size() != columns.size())
    throw Error(ErrorCode::ragged_grid, "one runtime per column is required");
  if (column_groups.empty()) column_groups.assign(columns.size(), 0);
  if (column_groups.size() != columns.size())
    throw Error(ErrorCode::ragged_grid, "one group per column is required");

  EvaluationReport r;
  r.rows = std::move(rows);
  r.columns = std::move(columns);
  r.column_groups = std::move(column_groups);
  r.cells = std::move(cells);
  r.metadata = std::move(metadata);

  std::vector<std::optional<double>> all;
  for (const auto& row : r.cells) {
    r.row_means.push_back(mean_of(row));
    r.row_maxima.push_back(max_of(row));
    all.insert(all.end(), row.begin(), row.end());
  }
  for (std::size_t c = 0; c < r.columns.size(); ++c) {
    std::vector<std::optional<double>> column;
    for (const auto& row : r.cells) column.push_back(row[c]);
    r.column_means.push_back(mean_of(column));
    r.column_maxima.push_back(max_of(column));
  }
  r.mean_of_means = mean_of(all);
  r.overall_max = max_of(all);

  r.best_row_mean = argmax(r.row_means, all_indices(r.rows.size()));
  r.best_row_max = argmax(r.row_maxima, all_indices(r.rows.size()));
  const int groups = *std::max_element(r.column_groups.begin(), r.column_groups.end()) + 1;
  for (int g = 0; g < groups; ++g) {
    std::vector<std::size_t> members;
    for (std::size_t c = 0; c < r.columns.size(); ++c)
      if (r.column_groups[c] == g) members.push_back(c);
    r.best_column_mean.push_back(argmax(r.column_means, members));
    r.best_column_max.push_back(argmax(r.column_maxima, members));
  }

  r.runtimes_percent = relative_runtimes(runtime_seconds);
  if (!r.runtimes_percent.empty())
    r.fastest_column = static_cast<std::size_t>(
        std::min_element(r.runtimes_percent.begin(), r.runtimes_percent.end()) - r.runtimes_percent.begin());
  return r;
}

std::string report_csv(const EvaluationReport& r) {
  std::ostringstream out;
  out << csv_field(r.corner);
  for (const auto& c : r.columns) out << ',' << csv_field(c);
  out << ",Mean,Max\n";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    out << csv_field(r.rows[i]);
    for (const auto& v : r.cells[i]) out << ',' << fixed(v, 6);
    out << ',' << fixed(r.row_means[i], 6) << ',' << fixed(r.row_maxima[i], 6) << '\n';
  }
  out << "Mean";
  for (const auto& v : r.column_means) out << ',' << fixed(v, 6);
  out << ',' << fixed(r.mean_of_means, 6) << ',' << fixed(max_of(r.column_means), 6) << '\n';
  out << "Max";
  for (const auto& v : r.column_maxima) out << ',' << fixed(v, 6);
  out << ',' << fixed(mean_of(r.column_maxima), 6) << ',' << fixed(r.overall_max, 6) << '\n';
  return out.str();
}

std::string report_markdown(const EvaluationReport& r, const std::string& title) {
  std::ostringstream out;
  if (!title.empty()) out << "## " << title << "\n\n";

  std::vector<std::string> header{r.corner};
  header.insert(header.end(), r.columns.begin(), r.columns.end());
  header.emplace_back("Mean");
  header.emplace_back("Max");
  write_md_row(out, header);
  out << '|';
  for (std::size_t i = 0; i < header.size(); ++i) out << (i == 0 ? " :--- |" : " ---: |");
  out << '\n';

  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    std::vector<std::string> fields{r.rows[i]};
    for (const auto& v : r.cells[i]) fields.push_back(v ? fixed(*v, 1) : "n/a");
    fields.push_back(mark(fixed(r.row_means[i], 1), r.best_row_mean == i, "**"));
    fields.push_back(mark(fixed(r.row_maxima[i], 1), r.best_row_max == i, "*"));
    write_md_row(out, fields);
  }

  auto is_best = [](const std::vector<std::optional<std::size_t>>& best, std::size_t c) {
    return std::find(best.begin(), best.end(), std::optional<std::size_t>(c)) != best.end();
  };
  std::vector<std::string> mean_row{"**Mean**"};
  for (std::size_t c = 0; c < r.columns.size(); ++c)
    mean_row.push_back(mark(fixed(r.column_means[c], 1), is_best(r.best_column_mean, c), "**"));
  mean_row.push_back(fixed(r.mean_of_means, 1));
  mean_row.push_back(fixed(max_of(r.column_means), 1));
  write_md_row(out, mean_row);

  std::vector<std::string> max_row{"**Max**"};
  for (std::size_t c = 0; c < r.columns.size(); ++c)
    max_row.push_back(mark(fixed(r.column_maxima[c], 1), is_best(r.best_column_max, c), "*"));
  max_row.push_back(fixed(mean_of(r.column_maxima), 1));
  max_row.push_back(fixed(r.overall_max, 1));
  write_md_row(out, max_row);

  if (!r.runtimes_percent.empty()) {
    std::vector<std::string> runtime_row{"**Runtime [%]**"};
    for (std::size_t c = 0; c < r.columns.size(); ++c)
      runtime_row.push_back(mark(fixed(r.runtimes_percent[c], 1), r.fastest_column == c, "`"));
    const double mean = std::accumulate(r.runtimes_percent.begin(), r.runtimes_percent.end(), 0.0) /
                        static_cast<double>(r.runtimes_percent.size());
    runtime_row.push_back(fixed(mean, 1));
    runtime_row.push_back(fixed(*std::max_element(r.runtimes_percent.begin(), r.runtimes_percent.end()), 1));
    write_md_row(out, runtime_row);
  }

  out << "\nBold: highest mean. Italic: highest maximum.";
  if (r.column_groups.size() > 1 &&
      std::any_of(r.column_groups.begin(), r.column_groups.end(), [](int g) { return g != 0; }))
    out << " Column highlights are per algorithm group.";
  if (r.fastest_column) out << " Code span: shortest relative runtime.";
  out << '\n';
  if (!r.metadata.empty()) {
    out << '\n';
    for (const auto& [key, value] : r.metadata) out << "- " << key << ": " << value << '\n';
  }
  return out.str();
}

std::string confusion_csv(const ConfusionMatrix& confusion, bool percentages) {
  std::ostringstream out;
  out << "true/predicted";
  for (const auto& l : confusion.label_set) out << ',' << csv_field(l);
  out << '\n';
  const Matrix pct = percentages ? confusion.row_percentages() : Matrix();
  for (std::size_t i = 0; i < confusion.label_set.size(); ++i) {
    out << csv_field(confusion.label_set[i]);
    for (std::size_t j = 0; j < confusion.label_set.size(); ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      out << ',' << (percentages ? fixed(pct(ii, jj), 2) : std::to_string(confusion.counts(ii, jj)));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace mathenc
